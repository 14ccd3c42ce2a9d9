import numpy as np
import pytest

from leodoppler.core.doppler_model import residuals_and_jacobian
from leodoppler.core.exceptions import DimensionError, ScalingError, ValidationError
from leodoppler.core.scaling import ProblemData, apply_scaling
from leodoppler.core.types import ReceiverState
from leodoppler.relaxation.lifting import (
    PRODUCT,
    RANGE,
    LiftedState,
    build_lifted_problem,
    dump_lifted_problem,
    lift_state,
    qcqp_cost,
)


@pytest.fixture
def scaled_instance(small_instance):
    truth, satellites, measurements = small_instance
    data = apply_scaling(ProblemData.from_states(satellites, measurements))
    return truth, satellites, measurements, data


class TestBuildLiftedProblem:
    def test_shapes(self, scaled_instance):
        *_, data = scaled_instance
        problem = build_lifted_problem(data)

        assert problem.n_measurements == 8
        assert problem.dimension == 20
        assert problem.moment_dimension == 21
        assert problem.A.shape == (8, 20)
        assert problem.F.shape == (20, 20)
        assert len(problem.constraints) == 16
        assert [c.kind for c in problem.range_constraints] == [RANGE] * 8
        assert [c.kind for c in problem.product_constraints] == [PRODUCT] * 8

    def test_row_layout(self, scaled_instance):
        *_, data = scaled_instance
        problem = build_lifted_problem(data)
        row = problem.A[2]

        np.testing.assert_array_equal(row[:3], data.velocities[2])
        assert row[3] == 0.0
        assert row[4 + 2] == data.doppler[2]
        assert row[4 + 8 + 2] == -1.0
        assert np.count_nonzero(row) == 5
        assert problem.k[2] == pytest.approx(-data.positions[2] @ data.velocities[2])

    def test_a_has_full_row_rank(self, scaled_instance):
        *_, data = scaled_instance

        assert build_lifted_problem(data).a_rank() == 8

    def test_cost_matrix_symmetric_psd(self, scaled_instance):
        *_, data = scaled_instance
        F = build_lifted_problem(data, np.linspace(0.5, 2.0, 8)).F

        np.testing.assert_array_equal(F, F.T)
        assert np.linalg.eigvalsh(F)[0] > -1e-12 * np.abs(F).max()

    def test_cost_identity_on_random_states(self, scaled_instance, rng):
        *_, data = scaled_instance
        weights = rng.uniform(0.5, 2.0, size=8)
        problem = build_lifted_problem(data, weights)

        for _ in range(20):
            y = rng.normal(size=problem.dimension)
            direct = np.sum((problem.A @ y + problem.k) ** 2 / weights)
            assert qcqp_cost(problem, y) == pytest.approx(direct, rel=1e-10)

    def test_consistent_state_cost_equals_weighted_nwls(self, scaled_instance, rng):
        truth, satellites, measurements, data = scaled_instance
        weights = rng.uniform(0.5, 2.0, size=8)
        problem = build_lifted_problem(data, weights)
        length, rate = data.scaling.length_scale, data.scaling.rate_scale

        for _ in range(20):
            receiver = ReceiverState(
                position=truth.position + rng.normal(0.0, 5e4, size=3),
                clock_drift_term=rng.normal(0.0, 50.0),
            )
            residuals, _ = residuals_and_jacobian(receiver, satellites, measurements)
            ranges = np.array(
                [np.linalg.norm(receiver.position - s.position) for s in satellites]
            )
            expected = np.sum((length * ranges * rate * residuals) ** 2 / weights)

            state = lift_state(receiver, data)
            assert qcqp_cost(problem, state) == pytest.approx(expected, rel=1e-10)

    def test_truth_is_feasible_with_zero_cost(self, scaled_instance):
        truth, _, _, data = scaled_instance
        problem = build_lifted_problem(data)
        state = lift_state(truth, data)

        values = problem.constraint_values(np.outer(state.y, state.y), state.y)
        np.testing.assert_allclose(values, 0.0, atol=1e-12)
        assert qcqp_cost(problem, state) == pytest.approx(0.0, abs=1e-10)

    def test_constraint_jacobian_rows(self, scaled_instance):
        truth, _, _, data = scaled_instance
        problem = build_lifted_problem(data)
        y = lift_state(truth, data).y
        jacobian = problem.constraint_jacobian(y)

        assert jacobian.shape == (16, 20)
        # product constraint i: gradient is rho_i at b, b at rho_i, -1 at z_i
        row = jacobian[8]
        assert row[3] == pytest.approx(y[4])
        assert row[4] == pytest.approx(y[3])
        assert row[12] == -1.0

    def test_diagonal_matrix_weights(self, scaled_instance):
        *_, data = scaled_instance
        weights = np.linspace(1.0, 2.0, 8)
        a = build_lifted_problem(data, weights)
        b = build_lifted_problem(data, np.diag(weights))

        np.testing.assert_array_equal(a.F, b.F)
        np.testing.assert_array_equal(a.weights, weights)

    def test_requires_scaled_data(self, small_instance):
        _, satellites, measurements = small_instance

        with pytest.raises(ScalingError):
            build_lifted_problem(ProblemData.from_states(satellites, measurements))

    def test_rejects_wrong_weight_shape(self, scaled_instance):
        *_, data = scaled_instance

        with pytest.raises(DimensionError):
            build_lifted_problem(data, np.ones(5))

    def test_rejects_non_diagonal_matrix(self, scaled_instance):
        *_, data = scaled_instance

        with pytest.raises(DimensionError):
            build_lifted_problem(data, np.ones((8, 8)))

    def test_rejects_non_positive_weights(self, scaled_instance):
        *_, data = scaled_instance
        weights = np.ones(8)
        weights[0] = -1.0

        with pytest.raises(ValidationError):
            build_lifted_problem(data, weights)

    def test_arrays_are_read_only(self, scaled_instance):
        *_, data = scaled_instance
        problem = build_lifted_problem(data)

        with pytest.raises(ValueError):
            problem.F[0, 0] = 1.0


class TestLiftedState:
    def test_views(self):
        y = np.arange(10.0)
        state = LiftedState(y)

        assert state.n_measurements == 3
        np.testing.assert_array_equal(state.position, [0.0, 1.0, 2.0])
        assert state.clock_drift_term == 3.0
        np.testing.assert_array_equal(state.ranges, [4.0, 5.0, 6.0])
        np.testing.assert_array_equal(state.products, [7.0, 8.0, 9.0])

    @pytest.mark.parametrize("size", [4, 5, 7])
    def test_rejects_bad_size(self, size):
        with pytest.raises(DimensionError):
            LiftedState(np.zeros(size))

    def test_lift_state_products(self, rng, make_instance):
        truth, satellites, measurements = make_instance(rng, 6, clock_term=25.0)
        data = apply_scaling(ProblemData.from_states(satellites, measurements))
        state = lift_state(truth, data)

        assert state.clock_drift_term == pytest.approx(0.025)
        np.testing.assert_allclose(
            state.products, state.clock_drift_term * state.ranges
        )
        assert np.all(state.ranges > 0.0)

    def test_qcqp_cost_dimension_mismatch(self, scaled_instance):
        *_, data = scaled_instance
        problem = build_lifted_problem(data)

        with pytest.raises(DimensionError):
            qcqp_cost(problem, np.zeros(10))


def test_dump_lifted_problem(scaled_instance, tmp_path):
    *_, data = scaled_instance
    problem = build_lifted_problem(data)
    path = dump_lifted_problem(problem, tmp_path / "lifted.txt")
    lines = path.read_text(encoding="utf-8").splitlines()

    assert lines[0] == "# leodoppler lifted problem v1"
    assert lines[1] == "n_measurements 8"
    assert lines[2] == "dimension 20"
    assert sum(line.startswith("constraint range") for line in lines) == 8
    assert sum(line.startswith("constraint product") for line in lines) == 8
    assert lines.count("end") == 16
    assert "G 3 4 0.5" in lines
    f_start = lines.index("F") + 1
    first_row = np.array(lines[f_start].split(), dtype=float)
    np.testing.assert_array_equal(first_row, problem.F[0])

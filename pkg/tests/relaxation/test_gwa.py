import numpy as np
import pytest

from leodoppler.certify.certificate import rank1_moment
from leodoppler.core.exceptions import ConfigurationError, ScalingError, SolverError
from leodoppler.core.scaling import ProblemData, apply_scaling
from leodoppler.interfaces.sdp_solver import SdpSolver
from leodoppler.relaxation.gwa import (
    GwaConfig,
    range_weights,
    run_gwa,
    unit_cost_problem,
)
from leodoppler.relaxation.lifting import LiftedState, lift_state
from leodoppler.sdp.instance import MomentSolution, SolverStatus


class FixedStateSolver(SdpSolver):
    """Returns the rank-1 moment matrix of a fixed lifted state."""

    def __init__(self, y, status=SolverStatus.SOLVED):
        self.y = np.asarray(y, dtype=float)
        self.status = status
        self.calls = 0

    @property
    def name(self):
        return "fixed"

    def solve(self, instance, tolerances=None):
        self.calls += 1
        S = rank1_moment(self.y)
        cost = instance.primal_cost(S)
        return MomentSolution(
            S=S,
            status=self.status,
            primal_cost=cost,
            dual_cost=cost,
            multipliers=None,
            normalization=None,
            iterations=1,
            solve_time=0.0,
            backend=self.name,
        )


@pytest.fixture
def scaled(small_instance):
    truth, satellites, measurements = small_instance
    data = apply_scaling(ProblemData.from_states(satellites, measurements))
    return truth, data


class TestGwaConfig:
    def test_defaults(self):
        config = GwaConfig()

        assert config.threshold == 1e-3
        assert config.max_iterations == 1000
        assert config.range_floor == 1.0

    @pytest.mark.parametrize(
        "kwargs",
        [{"threshold": 0.0}, {"max_iterations": 0}, {"range_floor": -1.0}],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            GwaConfig(**kwargs)


def test_range_weights():
    np.testing.assert_allclose(
        range_weights(np.array([1e6, 2e6]), np.array([1.0, 2.0])), [1e-6, 2e-6]
    )


def test_unit_cost_problem_has_unit_norm(scaled):
    _, data = scaled
    problem = unit_cost_problem(data, np.full(data.size, 3.0))
    half = 0.5 * problem.l0
    norm = np.sqrt(np.sum(problem.F**2) + 2.0 * half @ half + problem.c0**2)

    assert norm == pytest.approx(1.0, rel=1e-9)


class TestRunGwaLoop:
    def test_exact_state_converges_in_two_iterations(self, scaled):
        truth, data = scaled
        state = lift_state(truth, data)
        solver = FixedStateSolver(state.y)
        result = run_gwa(data, solver)

        assert result.converged
        assert result.iterations == 2
        assert solver.calls == 2
        assert result.trace[0].eta is None
        np.testing.assert_array_equal(result.trace[0].weights, np.ones(8))
        assert result.trace[1].eta == pytest.approx(0.0, abs=1e-12)

        ranges_si = state.ranges / data.scaling.length_scale
        expected = (1e-3) ** 2 / ranges_si
        np.testing.assert_allclose(result.weights, expected, rtol=1e-9)
        np.testing.assert_allclose(result.trace[0].ranges, ranges_si, rtol=1e-9)
        np.testing.assert_allclose(result.state.y, state.y, rtol=1e-9)

    def test_iteration_cap(self, scaled):
        truth, data = scaled
        result = run_gwa(
            data,
            FixedStateSolver(lift_state(truth, data).y),
            GwaConfig(max_iterations=1),
        )

        assert not result.converged
        assert result.iterations == 1
        np.testing.assert_array_equal(result.weights, np.ones(8))

    def test_non_positive_ranges_are_clamped(self, scaled):
        truth, data = scaled
        y = np.array(lift_state(truth, data).y)
        y[4] = -0.01
        result = run_gwa(data, FixedStateSolver(y), GwaConfig(max_iterations=1))

        assert result.trace[0].clamped == (0,)
        assert result.trace[0].ranges[0] == pytest.approx(1.0)

    @pytest.mark.parametrize(
        "status", [SolverStatus.INFEASIBLE, SolverStatus.NUMERICAL_FAILURE]
    )
    def test_failed_solve_raises_with_iteration(self, scaled, status):
        truth, data = scaled
        solver = FixedStateSolver(lift_state(truth, data).y, status=status)

        with pytest.raises(SolverError) as info:
            run_gwa(data, solver)
        assert info.value.iteration == 0
        assert info.value.status == status.value

    def test_inaccurate_solve_is_accepted(self, scaled):
        truth, data = scaled
        solver = FixedStateSolver(
            lift_state(truth, data).y, status=SolverStatus.INACCURATE
        )

        assert run_gwa(data, solver).converged

    def test_requires_scaled_data(self, small_instance):
        _, satellites, measurements = small_instance
        data = ProblemData.from_states(satellites, measurements)

        with pytest.raises(ScalingError):
            run_gwa(data, FixedStateSolver(np.zeros(20)))


def test_noiseless_default_scenario(noiseless_relaxation, noiseless_dataset):
    gwa = noiseless_relaxation.gwa
    truth = noiseless_dataset.ground_truth

    assert gwa.converged
    assert gwa.iterations <= 5
    assert isinstance(gwa.state, LiftedState)
    ranges = np.array(
        [
            np.linalg.norm(truth.position - s.position)
            for s in noiseless_dataset.satellites
        ]
    )
    np.testing.assert_allclose(gwa.weights, 1e-6 / ranges, rtol=1e-2)

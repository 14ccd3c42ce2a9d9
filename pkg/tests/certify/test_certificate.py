import numpy as np
import pytest

from leodoppler.certify.certificate import (
    CertificateThresholds,
    Verdict,
    certify,
    eigenvalue_ratio,
    rank1_moment,
    recover_lifted,
    recover_solution,
)
from leodoppler.core.exceptions import ConfigurationError, RecoveryError
from leodoppler.core.scaling import ProblemData, ScalingConfig, apply_scaling
from leodoppler.pipeline.dataset import dataset_from_simulation
from leodoppler.pipeline.methods import run_relaxation
from leodoppler.relaxation.gwa import GwaConfig
from leodoppler.relaxation.lifting import build_lifted_problem, lift_state
from leodoppler.sdp.instance import (
    MomentSolution,
    SolverStatus,
    dual_matrix,
    instance_from_lifted,
)
from leodoppler.simulation.scenario import NoiseConfig, ScenarioConfig
from leodoppler.utils.config_loader import RunConfig


def _solution(S, status=SolverStatus.SOLVED, multipliers=None, normalization=None):
    return MomentSolution(
        S=S,
        status=status,
        primal_cost=0.0,
        dual_cost=0.0,
        multipliers=multipliers,
        normalization=normalization,
        iterations=1,
        solve_time=0.0,
    )


@pytest.fixture
def exact(small_instance):
    """Noiseless lifted problem and its rank-1 optimum with zero multipliers."""
    truth, satellites, measurements = small_instance
    data = apply_scaling(ProblemData.from_states(satellites, measurements))
    problem = build_lifted_problem(data)
    state = lift_state(truth, data)
    S = rank1_moment(state)
    solution = _solution(
        S, multipliers=np.zeros(2 * problem.n_measurements), normalization=0.0
    )
    return truth, problem, state, solution


class TestRecovery:
    def test_rank1_moment_layout(self):
        S = rank1_moment(np.array([1.0, 2.0]))

        np.testing.assert_array_equal(S, [[1, 2, 1], [2, 4, 2], [1, 2, 1]])

    def test_eigenvalue_ratio_of_rank_one(self):
        ratio = eigenvalue_ratio(rank1_moment(np.arange(6.0)))

        assert ratio > 1e12

    def test_eigenvalue_ratio_of_identity(self):
        assert eigenvalue_ratio(np.eye(4)) == pytest.approx(1.0)

    def test_recover_lifted_normalizes_homogeneous_coordinate(self):
        y = np.linspace(-1.0, 1.0, 8)

        np.testing.assert_allclose(recover_lifted(3.0 * rank1_moment(y)).y, y)

    def test_vanishing_homogeneous_coordinate(self):
        S = np.zeros((7, 7))
        S[0, 0] = 1.0

        with pytest.raises(RecoveryError):
            recover_lifted(S)

    def test_recover_solution_returns_si_receiver(self, exact):
        truth, _, state, solution = exact
        lifted, receiver = recover_solution(solution, ScalingConfig())

        np.testing.assert_allclose(lifted.y, state.y, rtol=1e-9)
        np.testing.assert_allclose(receiver.position, truth.position, atol=1e-3)

    @pytest.mark.parametrize(
        "status", [SolverStatus.INFEASIBLE, SolverStatus.NUMERICAL_FAILURE]
    )
    def test_recover_solution_rejects_failed_status(self, exact, status):
        *_, solution = exact
        failed = _solution(solution.S, status=status)

        with pytest.raises(RecoveryError):
            recover_solution(failed, ScalingConfig())


class TestCertify:
    def test_exact_optimum_is_certified(self, exact):
        _, problem, _, solution = exact
        certificate = certify(solution, problem)

        assert certificate.verdict is Verdict.CERTIFIED_OPTIMAL
        assert certificate.certified
        assert certificate.rank_tight
        assert certificate.dual_available
        assert certificate.constraint_residual_max < 1e-10
        assert certificate.duality_gap == pytest.approx(0.0, abs=1e-10)
        assert certificate.dual_psd_margin >= -1e-9

    def test_missing_duals_cap_verdict(self, exact):
        _, problem, _, solution = exact
        certificate = certify(_solution(solution.S), problem)

        assert certificate.verdict is Verdict.NOT_TIGHT
        assert certificate.rank_tight
        assert not certificate.dual_available
        assert certificate.dual_psd_margin is None

    def test_inaccurate_status_is_not_rank_tight(self, exact):
        _, problem, _, solution = exact
        inaccurate = _solution(
            solution.S,
            status=SolverStatus.INACCURATE,
            multipliers=solution.multipliers,
            normalization=0.0,
        )
        certificate = certify(inaccurate, problem)

        assert not certificate.rank_tight
        assert certificate.verdict is Verdict.NOT_TIGHT

    def test_high_rank_moment_is_not_tight(self, exact):
        _, problem, state, solution = exact
        S = solution.S + 1e-3 * np.eye(solution.S.shape[0])
        certificate = certify(
            _solution(S, multipliers=solution.multipliers, normalization=0.0),
            problem,
        )

        assert certificate.eigenvalue_ratio < 1e5
        assert certificate.verdict is Verdict.NOT_TIGHT

    def test_solver_failure(self, exact):
        _, problem, _, solution = exact
        certificate = certify(
            _solution(solution.S, status=SolverStatus.INFEASIBLE), problem
        )

        assert certificate.verdict is Verdict.SOLVER_FAILED
        assert certificate.status is SolverStatus.INFEASIBLE
        assert np.isnan(certificate.duality_gap)

    def test_custom_thresholds(self, exact):
        _, problem, _, solution = exact
        strict = CertificateThresholds(eigenvalue_ratio=1e30)
        certificate = certify(
            solution, problem, instance_from_lifted(problem), strict
        )

        assert certificate.verdict is Verdict.NOT_TIGHT

    def test_as_dict(self, exact):
        _, problem, _, solution = exact
        data = certify(solution, problem).as_dict()

        assert data["verdict"] == "certified-optimal"
        assert data["status"] == "solved"
        assert "eigenvalue_ratio" in data

    @pytest.mark.parametrize(
        "key",
        ["eigenvalue_ratio", "dual_psd", "dual_null", "duality_gap", "constraint"],
    )
    def test_thresholds_positive(self, key):
        with pytest.raises(ConfigurationError):
            CertificateThresholds(**{key: 0.0})


class TestNoiselessDefaultScenario:
    def test_certified_optimal(self, noiseless_relaxation):
        certificate = noiseless_relaxation.certificate

        assert certificate.verdict is Verdict.CERTIFIED_OPTIMAL
        assert certificate.eigenvalue_ratio > 1e5
        assert certificate.duality_gap <= 1e-6 * (1.0 + abs(certificate.primal_cost))

    def test_recovered_position_close_to_truth(
        self, noiseless_relaxation, noiseless_dataset
    ):
        error = np.linalg.norm(
            noiseless_relaxation.estimate.position
            - noiseless_dataset.ground_truth.position
        )

        assert error <= 1.5e3

    def test_verdict_string(self):
        assert str(Verdict.NOT_TIGHT) == "not-tight"


class TestDualCorank:
    def test_noiseless_optimum_has_one_dimensional_null_space(
        self, small_instance, sdp_solver
    ):
        _, satellites, measurements = small_instance
        run = run_relaxation(satellites, measurements, RunConfig(), sdp_solver)
        solution = run.gwa.solution

        assert run.certificate.certified
        H = dual_matrix(run.gwa.instance, solution.multipliers, solution.normalization)
        spectrum = np.linalg.eigvalsh(H)
        assert spectrum[0] == pytest.approx(0.0, abs=1e-6)
        assert spectrum[1] > 1e-6
        assert run.certificate.dual_second_eigenvalue == pytest.approx(spectrum[1])

    def test_default_scenario_null_space(self, noiseless_relaxation):
        certificate = noiseless_relaxation.certificate

        assert abs(certificate.dual_psd_margin) <= 1e-6
        assert certificate.dual_second_eigenvalue > 1e-6


@pytest.mark.slow
def test_satellite_position_noise_breaks_tightness(sdp_solver):
    dataset = dataset_from_simulation(
        ScenarioConfig(), NoiseConfig(sat_position_std=1e5), seed=11
    )
    config = RunConfig(gwa=GwaConfig(max_iterations=5))
    run = run_relaxation(dataset.satellites, dataset.measurements, config, sdp_solver)

    assert run.certificate.verdict is Verdict.NOT_TIGHT
    assert not run.certificate.certified

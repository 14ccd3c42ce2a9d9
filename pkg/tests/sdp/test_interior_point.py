import numpy as np
import pytest

from leodoppler.core.scaling import ProblemData, apply_scaling
from leodoppler.interfaces.sdp_solver import SdpTolerances
from leodoppler.relaxation.gwa import unit_cost_problem
from leodoppler.sdp.instance import (
    SdpInstance,
    SolverStatus,
    dual_matrix,
    instance_from_lifted,
)
from leodoppler.sdp.interior_point import InteriorPointSolver


def _two_by_two():
    C = np.array([[2.0, 1.0], [1.0, 2.0]])
    E11 = np.array([[1.0, 0.0], [0.0, 0.0]])
    E22 = np.array([[0.0, 0.0], [0.0, 1.0]])
    return SdpInstance.from_matrices(C, [E11, E22], [1.0, 1.0])


class TestAnalyticInstances:
    def test_two_by_two_optimum(self, sdp_solver):
        solution = sdp_solver.solve(_two_by_two())

        assert solution.status is SolverStatus.SOLVED
        assert solution.primal_cost == pytest.approx(2.0, abs=1e-7)
        assert solution.dual_cost == pytest.approx(2.0, abs=1e-7)
        np.testing.assert_allclose(
            solution.S, [[1.0, -1.0], [-1.0, 1.0]], atol=1e-3
        )
        assert solution.relative_gap < 1e-7
        assert solution.backend == "interior-point"

    def test_diagonal_cost_is_sum_of_entries(self, sdp_solver):
        C = np.diag([1.0, 2.0, 3.0])
        matrices = [np.diag(np.eye(3)[i]) for i in range(3)]
        solution = sdp_solver.solve(SdpInstance.from_matrices(C, matrices, [1.0] * 3))

        assert solution.status is SolverStatus.SOLVED
        assert solution.primal_cost == pytest.approx(6.0, abs=1e-7)
        np.testing.assert_allclose(np.diag(solution.S), 1.0, atol=1e-7)

    def test_infeasible_instance_is_not_solved(self, sdp_solver):
        E11 = np.array([[1.0, 0.0], [0.0, 0.0]])
        instance = SdpInstance.from_matrices(np.eye(2), [E11], [-1.0])

        assert sdp_solver.solve(instance).status is not SolverStatus.SOLVED

    def test_iteration_limit_reports_status(self):
        solver = InteriorPointSolver(SdpTolerances(max_iterations=1))
        solution = solver.solve(_two_by_two())

        assert solution.status is not SolverStatus.SOLVED
        assert solution.iterations <= 1


class TestLiftedInstances:
    def test_noiseless_instance(self, sdp_solver, small_instance):
        truth, satellites, measurements = small_instance
        data = apply_scaling(ProblemData.from_states(satellites, measurements))
        problem = unit_cost_problem(data, np.ones(8))
        instance = instance_from_lifted(problem)
        solution = sdp_solver.solve(instance)

        assert solution.status in (SolverStatus.SOLVED, SolverStatus.INACCURATE)
        assert solution.primal_cost == pytest.approx(0.0, abs=1e-6)
        assert solution.has_duals
        assert solution.multipliers.shape == (16,)
        assert solution.residuals["primal"] < 1e-5

        H = dual_matrix(instance, solution.multipliers, solution.normalization)
        assert np.linalg.eigvalsh(H)[0] > -1e-5
        assert solution.dual_cost == pytest.approx(solution.normalization)

    def test_moment_matrix_is_symmetric(self, sdp_solver, small_instance):
        _, satellites, measurements = small_instance
        data = apply_scaling(ProblemData.from_states(satellites, measurements))
        solution = sdp_solver.solve(
            instance_from_lifted(unit_cost_problem(data, np.ones(8)))
        )

        np.testing.assert_array_equal(solution.S, solution.S.T)
        assert solution.dimension == 20

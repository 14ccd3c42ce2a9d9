"""SDP backend delegating to cvxpy, used to cross-check the internal engine.

Requires the optional ``crosscheck`` extra.
"""

from __future__ import annotations

import logging
import time
from typing import Optional

import cvxpy as cp
import numpy as np

from leodoppler.interfaces.sdp_solver import SdpSolver, SdpTolerances
from leodoppler.sdp.instance import MomentSolution, SdpInstance, SolverStatus

logger = logging.getLogger(__name__)

_STATUS = {
    cp.OPTIMAL: SolverStatus.SOLVED,
    cp.OPTIMAL_INACCURATE: SolverStatus.INACCURATE,
    cp.INFEASIBLE: SolverStatus.INFEASIBLE,
    cp.INFEASIBLE_INACCURATE: SolverStatus.INFEASIBLE,
    cp.UNBOUNDED: SolverStatus.INFEASIBLE,
    cp.UNBOUNDED_INACCURATE: SolverStatus.INFEASIBLE,
}


class CvxpySolver(SdpSolver):
    """Standard-form SDP through ``cvxpy``, Clarabel unless another solver is named.

    Tolerances are forwarded as solver options for Clarabel and SCS; other
    solvers run with their own defaults.
    """

    def __init__(
        self,
        tolerances: Optional[SdpTolerances] = None,
        solver: str = cp.CLARABEL,
    ):
        self.tolerances = tolerances or SdpTolerances()
        self.solver = solver

    def solver_options(self, tolerances: SdpTolerances) -> dict[str, float]:
        if self.solver == cp.CLARABEL:
            return {
                "tol_gap_abs": tolerances.target,
                "tol_gap_rel": tolerances.target,
                "tol_feas": tolerances.target,
                "max_iter": tolerances.max_iterations,
            }
        if self.solver == cp.SCS:
            # first-order method, iteration cap left at the SCS default
            return {"eps_abs": tolerances.target, "eps_rel": tolerances.target}
        return {}

    @property
    def name(self) -> str:
        return "cvxpy"

    def solve(
        self, instance: SdpInstance, tolerances: Optional[SdpTolerances] = None
    ) -> MomentSolution:
        n = instance.size
        S = cp.Variable((n, n), symmetric=True)
        equalities = [
            cp.sum(cp.multiply(instance.constraint_matrix(i).toarray(), S))
            == instance.b[i]
            for i in range(instance.n_constraints)
        ]
        problem = cp.Problem(
            cp.Minimize(cp.trace(instance.C @ S)), [S >> 0, *equalities]
        )

        options = self.solver_options(tolerances or self.tolerances)
        start = time.perf_counter()
        try:
            problem.solve(solver=self.solver, **options)
        except cp.error.SolverError as exc:
            logger.warning("cvxpy solve failed: %s", exc)
            return self._failed(
                n, SolverStatus.NUMERICAL_FAILURE, time.perf_counter() - start
            )
        elapsed = time.perf_counter() - start

        status = _STATUS.get(problem.status, SolverStatus.NUMERICAL_FAILURE)
        if S.value is None:
            if status is SolverStatus.SOLVED:
                status = SolverStatus.NUMERICAL_FAILURE
            return self._failed(n, status, elapsed)

        # cvxpy duals satisfy C + sum_i nu_i B_i = Z
        nu = np.array([float(np.squeeze(c.dual_value)) for c in equalities])
        S_value = 0.5 * (S.value + S.value.T)
        stats = problem.solver_stats
        logger.info(
            "cvxpy (%s): %s, p*=%.6e", stats.solver_name, problem.status, problem.value
        )
        return MomentSolution(
            S=S_value,
            status=status,
            primal_cost=float(problem.value),
            dual_cost=float(-nu[-1]),
            multipliers=nu[:-1],
            normalization=float(-nu[-1]),
            iterations=int(stats.num_iters or 0),
            solve_time=elapsed,
            backend=self.name,
            residuals={
                "primal": float(
                    np.max(np.abs(instance.constraint_residuals(S_value)))
                )
            },
        )

    def _failed(self, n: int, status: SolverStatus, elapsed: float) -> MomentSolution:
        return MomentSolution(
            S=np.eye(n),
            status=status,
            primal_cost=float("nan"),
            dual_cost=float("nan"),
            multipliers=None,
            normalization=None,
            iterations=0,
            solve_time=elapsed,
            backend=self.name,
        )

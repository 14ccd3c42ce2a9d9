"""Dense primal-dual interior-point method for the standard-form SDP.

Infeasible-start HKM search direction with a Mehrotra predictor-corrector.
Each iteration forms the Schur complement M_ij = tr(B_i X B_j Z^-1) from
the padded entry arrays of the instance, factors it once and reuses the
factor for the predictor and corrector solves. Constraint matrices are
equilibrated to unit Frobenius norm and C to unit norm before the solve;
multipliers and the dual slack are mapped back on exit.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.linalg import (
    LinAlgError,
    cho_factor,
    cho_solve,
    cholesky,
    eigh,
    solve,
    solve_triangular,
)

from leodoppler.interfaces.sdp_solver import SdpSolver, SdpTolerances
from leodoppler.sdp.instance import MomentSolution, SdpInstance, SolverStatus

logger = logging.getLogger(__name__)

_DIVERGENCE = 1e12
_MIN_STEP = 1e-10


@dataclass
class _Iterate:
    X: np.ndarray
    y: np.ndarray
    Z: np.ndarray


@dataclass(frozen=True)
class _Measures:
    pinf: float
    dinf: float
    gap: float
    pobj: float
    dobj: float

    @property
    def worst(self) -> float:
        return max(self.pinf, self.dinf, self.gap)


class _Equilibrated:
    """Instance with unit-norm constraint rows and cost."""

    def __init__(self, instance: SdpInstance):
        norms = np.sqrt(np.sum(instance.values**2, axis=1))
        norms[norms == 0.0] = 1.0
        cost_norm = float(np.linalg.norm(instance.C))
        self.row_scale = norms
        self.cost_scale = cost_norm if cost_norm > 0.0 else 1.0
        self.rows = instance.rows
        self.cols = instance.cols
        self.values = instance.values / norms[:, None]
        self.b = instance.b / norms
        self.C = instance.C / self.cost_scale

    def apply(self, W: np.ndarray) -> np.ndarray:
        return np.sum(self.values * W[self.rows, self.cols], axis=1)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        out = np.zeros_like(self.C)
        np.add.at(out, (self.rows, self.cols), self.values * y[:, None])
        return out

    def schur(self, X: np.ndarray, Z_inv: np.ndarray) -> np.ndarray:
        m, width = self.rows.shape
        M = np.zeros((m, m))
        active = [k for k in range(width) if np.any(self.values[:, k])]
        for k in active:
            v_k, r_k, c_k = self.values[:, k], self.rows[:, k], self.cols[:, k]
            for slot in active:
                v_l, r_l, c_l = (
                    self.values[:, slot],
                    self.rows[:, slot],
                    self.cols[:, slot],
                )
                M += (
                    np.outer(v_k, v_l)
                    * X[np.ix_(c_k, r_l)]
                    * Z_inv[np.ix_(r_k, c_l)]
                )
        return 0.5 * (M + M.T)

    def measures(self, it: _Iterate) -> _Measures:
        pobj = float(np.sum(self.C * it.X))
        dobj = float(self.b @ it.y)
        rp = self.b - self.apply(it.X)
        rd = self.C - self.adjoint(it.y) - it.Z
        return _Measures(
            pinf=float(np.linalg.norm(rp)) / (1.0 + float(np.linalg.norm(self.b))),
            dinf=float(np.linalg.norm(rd)) / (1.0 + float(np.linalg.norm(self.C))),
            gap=float(np.sum(it.X * it.Z)) / (1.0 + abs(pobj) + abs(dobj)),
            pobj=pobj,
            dobj=dobj,
        )


def _sym(W: np.ndarray) -> np.ndarray:
    return 0.5 * (W + W.T)


def _max_step(P: np.ndarray, dP: np.ndarray) -> float:
    """Largest alpha with P + alpha dP >= 0 (inf when dP keeps P definite)."""
    L = cholesky(P, lower=True)
    W = solve_triangular(L, dP, lower=True)
    W = solve_triangular(L, W.T, lower=True)
    smallest = float(eigh(_sym(W), eigvals_only=True, subset_by_index=[0, 0])[0])
    return math.inf if smallest >= 0.0 else -1.0 / smallest


class InteriorPointSolver(SdpSolver):
    """Internal dense SDP engine, registered as ``interior-point``."""

    def __init__(self, tolerances: Optional[SdpTolerances] = None):
        self.tolerances = tolerances or SdpTolerances()

    @property
    def name(self) -> str:
        return "interior-point"

    def solve(
        self, instance: SdpInstance, tolerances: Optional[SdpTolerances] = None
    ) -> MomentSolution:
        tol = tolerances or self.tolerances
        start = time.perf_counter()
        eq = _Equilibrated(instance)
        n = instance.size
        scale = max(10.0, math.sqrt(n))
        it = _Iterate(
            X=scale * np.eye(n), y=np.zeros(instance.n_constraints), Z=scale * np.eye(n)
        )

        status: Optional[SolverStatus] = None
        stalled = False
        completed = 0
        measures = eq.measures(it)
        for iteration in range(1, tol.max_iterations + 1):
            if measures.worst < tol.target:
                status = SolverStatus.SOLVED
                break
            try:
                step = self._step(eq, it, n)
            except (LinAlgError, ValueError) as exc:
                logger.debug("IPM %3d: factorisation failed (%s)", iteration, exc)
                stalled = True
                break
            if not step:
                stalled = True
                break
            completed = iteration
            measures = eq.measures(it)
            logger.debug(
                "IPM %3d: pobj=%.9e dobj=%.9e pinf=%.2e dinf=%.2e gap=%.2e",
                iteration,
                measures.pobj,
                measures.dobj,
                measures.pinf,
                measures.dinf,
                measures.gap,
            )
            if (
                np.linalg.norm(it.X) > _DIVERGENCE
                or np.linalg.norm(it.y) > _DIVERGENCE
            ):
                status = SolverStatus.INFEASIBLE
                break
        else:
            if measures.worst < tol.target:
                status = SolverStatus.SOLVED

        solution = self._finish(instance, eq, it, tol, status, stalled, completed)
        solution = replace(solution, solve_time=time.perf_counter() - start)
        logger.info(
            "SDP n=%d m=%d: %s in %d iterations (%.2f s), p*=%.6e",
            n,
            instance.n_constraints,
            solution.status,
            solution.iterations,
            solution.solve_time,
            solution.primal_cost,
        )
        return solution

    def _step(self, eq: _Equilibrated, it: _Iterate, n: int) -> bool:
        """Advance ``it`` by one predictor-corrector step; False on stall."""
        X, y, Z = it.X, it.y, it.Z
        L_z = cho_factor(Z, lower=True)
        Z_inv = _sym(cho_solve(L_z, np.eye(n)))
        M = eq.schur(X, Z_inv)
        try:
            factor = cho_factor(M, lower=True)

            def solve_schur(rhs: np.ndarray) -> np.ndarray:
                return cho_solve(factor, rhs)

        except LinAlgError:
            logger.warning("Schur complement not positive definite, using LU solve")

            def solve_schur(rhs: np.ndarray) -> np.ndarray:
                return solve(M, rhs, assume_a="sym")

        rp = eq.b - eq.apply(X)
        Rd = _sym(eq.C - eq.adjoint(y) - Z)
        mu = float(np.sum(X * Z)) / n
        X_Rd_Zinv = X @ Rd @ Z_inv

        def direction(
            target: np.ndarray,
        ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
            dy = solve_schur(rp - eq.apply(target - X_Rd_Zinv))
            dZ = _sym(Rd - eq.adjoint(dy))
            dX = _sym(target) - _sym(X @ dZ @ Z_inv)
            return _sym(dX), dy, dZ

        # predictor
        dX_a, dy_a, dZ_a = direction(-X)
        alpha_p = min(1.0, _max_step(X, dX_a))
        alpha_d = min(1.0, _max_step(Z, dZ_a))
        mu_aff = float(np.sum((X + alpha_p * dX_a) * (Z + alpha_d * dZ_a))) / n
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

        # corrector
        target = sigma * mu * Z_inv - X - dX_a @ dZ_a @ Z_inv
        dX, dy, dZ = direction(target)
        gamma = 0.9 + 0.09 * min(alpha_p, alpha_d)
        alpha_p = min(1.0, gamma * _max_step(X, dX))
        alpha_d = min(1.0, gamma * _max_step(Z, dZ))
        if max(alpha_p, alpha_d) < _MIN_STEP:
            return False

        it.X = _sym(X + alpha_p * dX)
        it.y = y + alpha_d * dy
        it.Z = _sym(Z + alpha_d * dZ)
        return True

    def _finish(
        self,
        instance: SdpInstance,
        eq: _Equilibrated,
        it: _Iterate,
        tol: SdpTolerances,
        status: Optional[SolverStatus],
        stalled: bool,
        iterations: int,
    ) -> MomentSolution:
        S = it.X
        y = eq.cost_scale * it.y / eq.row_scale
        primal = instance.primal_cost(S)
        dual = float(instance.b @ y)
        Z = eq.cost_scale * it.Z
        primal_residual = float(np.max(np.abs(instance.constraint_residuals(S))))
        dual_residual = float(np.linalg.norm(instance.C - instance.adjoint(y) - Z))
        gap = abs(primal - dual) / (1.0 + abs(primal))
        finite = bool(np.all(np.isfinite(S)) and np.all(np.isfinite(y)))

        if status is None or status is SolverStatus.SOLVED:
            within = (
                finite
                and primal_residual <= tol.accept
                and gap <= tol.accept
                and eq.measures(it).worst <= tol.accept
            )
            if within:
                status = SolverStatus.SOLVED
            elif not finite or (stalled and status is None):
                status = SolverStatus.NUMERICAL_FAILURE
            else:
                status = SolverStatus.INACCURATE
        multipliers = -y[:-1] if finite else None
        return MomentSolution(
            S=_sym(S),
            status=status,
            primal_cost=primal,
            dual_cost=dual,
            multipliers=multipliers,
            normalization=float(y[-1]) if finite else None,
            iterations=iterations,
            solve_time=0.0,
            backend=self.name,
            residuals={
                "primal": primal_residual,
                "dual": dual_residual,
                "gap": gap,
            },
        )

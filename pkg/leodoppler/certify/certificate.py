"""Rank-1 recovery and a posteriori optimality certificates.

A solved relaxation certifies the global NWLS optimum when the moment matrix
is numerically rank one, the recovered point is feasible for the QCQP, the
dual slack H = C + sum lambda_i B_i - lambda_0 E is PSD and annihilates
[y; 1], and the QCQP cost at the recovered point closes the duality gap.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import asdict, dataclass
from typing import Any, Optional

import numpy as np
from scipy.linalg import eigh

from leodoppler.core.exceptions import ConfigurationError, RecoveryError
from leodoppler.core.scaling import ScalingConfig, unscale_receiver
from leodoppler.core.types import ReceiverState
from leodoppler.relaxation.lifting import LiftedProblem, LiftedState, qcqp_cost
from leodoppler.sdp.instance import (
    MomentSolution,
    SdpInstance,
    SolverStatus,
    dual_matrix,
    instance_from_lifted,
)

logger = logging.getLogger(__name__)

_RATIO_FLOOR = 1e-16
_HOMOGENEOUS_MIN = 1e-6


class Verdict(str, enum.Enum):
    CERTIFIED_OPTIMAL = "certified-optimal"
    NOT_TIGHT = "not-tight"
    SOLVER_FAILED = "solver-failed"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class CertificateThresholds:
    eigenvalue_ratio: float = 1e5
    dual_psd: float = 1e-6
    dual_null: float = 1e-6
    duality_gap: float = 1e-6
    constraint: float = 1e-6

    def __post_init__(self) -> None:
        for key, value in asdict(self).items():
            if not value > 0.0:
                raise ConfigurationError(f"certificate.{key}", "must be positive")


@dataclass(frozen=True)
class Certificate:
    verdict: Verdict
    status: SolverStatus
    eigenvalue_ratio: float
    rank_tight: bool
    constraint_residual_max: float
    dual_available: bool
    dual_psd_margin: Optional[float]
    dual_second_eigenvalue: Optional[float]
    dual_null_residual: Optional[float]
    duality_gap: float
    qcqp_cost: float
    primal_cost: float
    dual_cost: float

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED_OPTIMAL

    def as_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["verdict"] = self.verdict.value
        out["status"] = self.status.value
        return out


def rank1_moment(state: LiftedState | np.ndarray) -> np.ndarray:
    """S = [y; 1][y; 1]^T."""
    y = state.y if isinstance(state, LiftedState) else np.asarray(state, dtype=float)
    v = np.append(y, 1.0)
    return np.outer(v, v)


def eigenvalue_ratio(S: np.ndarray) -> float:
    """lambda_1 / lambda_2 of S with lambda_2 clamped below at 1e-16."""
    eigenvalues = np.linalg.eigvalsh(S)
    return float(eigenvalues[-1] / max(eigenvalues[-2], _RATIO_FLOOR))


def recover_lifted(S: np.ndarray) -> LiftedState:
    """Top eigenvector of S scaled so its homogeneous coordinate is 1."""
    n = S.shape[0]
    _, vectors = eigh(S, subset_by_index=[n - 1, n - 1])
    top = vectors[:, 0]
    if abs(top[-1]) < _HOMOGENEOUS_MIN:
        raise RecoveryError(
            "Top eigenvector has a vanishing homogeneous coordinate",
            details={"homogeneous": float(top[-1])},
        )
    return LiftedState(top[:-1] / top[-1])


def recover_solution(
    solution: MomentSolution, scaling: ScalingConfig
) -> tuple[LiftedState, ReceiverState]:
    """Lifted state (scaled) and SI receiver state from a solved relaxation."""
    if solution.status not in (SolverStatus.SOLVED, SolverStatus.INACCURATE):
        raise RecoveryError(
            f"Cannot recover from a solve with status '{solution.status}'"
        )
    state = recover_lifted(solution.S)
    receiver = unscale_receiver(state.y[:4], scaling)
    return state, receiver


def certify(
    solution: MomentSolution,
    problem: LiftedProblem,
    instance: Optional[SdpInstance] = None,
    thresholds: CertificateThresholds = CertificateThresholds(),
) -> Certificate:
    """Evaluate every optimality condition and return the verdict."""
    ratio = eigenvalue_ratio(solution.S) if np.all(np.isfinite(solution.S)) else 0.0
    usable = solution.status in (SolverStatus.SOLVED, SolverStatus.INACCURATE)
    if not usable:
        logger.info("Certificate: solver status %s", solution.status)
        nan = float("nan")
        return Certificate(
            verdict=Verdict.SOLVER_FAILED,
            status=solution.status,
            eigenvalue_ratio=ratio,
            rank_tight=False,
            constraint_residual_max=nan,
            dual_available=False,
            dual_psd_margin=None,
            dual_second_eigenvalue=None,
            dual_null_residual=None,
            duality_gap=nan,
            qcqp_cost=nan,
            primal_cost=solution.primal_cost,
            dual_cost=solution.dual_cost,
        )

    rank_tight = (
        ratio > thresholds.eigenvalue_ratio and solution.status is SolverStatus.SOLVED
    )
    state = recover_lifted(solution.S)
    y = state.y
    residual = float(np.max(np.abs(problem.constraint_values(np.outer(y, y), y))))
    q_star = qcqp_cost(problem, state)
    gap = q_star - solution.primal_cost

    psd_margin = second = null_residual = None
    if solution.has_duals:
        instance = instance or instance_from_lifted(problem)
        H = dual_matrix(instance, solution.multipliers, solution.normalization)
        spectrum = np.linalg.eigvalsh(H)
        psd_margin, second = float(spectrum[0]), float(spectrum[1])
        null_residual = float(np.linalg.norm(H @ np.append(y, 1.0)))
    else:
        logger.warning("Dual multipliers unavailable; verdict capped at not-tight")

    dual_ok = (
        psd_margin is not None
        and null_residual is not None
        and psd_margin >= -thresholds.dual_psd
        and null_residual <= thresholds.dual_null
    )
    certified = (
        rank_tight
        and dual_ok
        and residual <= thresholds.constraint
        and gap <= thresholds.duality_gap * (1.0 + abs(solution.primal_cost))
    )
    verdict = Verdict.CERTIFIED_OPTIMAL if certified else Verdict.NOT_TIGHT
    logger.info(
        "Certificate: %s (ratio=%.3e, gap=%.3e, dual margin=%s)",
        verdict,
        ratio,
        gap,
        "n/a" if psd_margin is None else f"{psd_margin:.3e}",
    )
    return Certificate(
        verdict=verdict,
        status=solution.status,
        eigenvalue_ratio=ratio,
        rank_tight=rank_tight,
        constraint_residual_max=residual,
        dual_available=solution.has_duals,
        dual_psd_margin=psd_margin,
        dual_second_eigenvalue=second,
        dual_null_residual=null_residual,
        duality_gap=gap,
        qcqp_cost=q_star,
        primal_cost=solution.primal_cost,
        dual_cost=solution.dual_cost,
    )

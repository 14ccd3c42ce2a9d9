"""Graduated weighting approximation around the SDP relaxation.

Multiplying each Doppler residual by its range leaves a weight that depends
on the unknown range. The loop starts from Q = I, solves the relaxation,
reads the ranges off the recovered lifted state and rebuilds
Q = diag(sigma_i^2 / rho_i) (SI units), until the relative trace change
eta = tr(Q_next - Q) / tr(Q) drops below the threshold.

Every solve sees the weights rescaled so the homogenised cost matrix has unit
Frobenius norm; the minimiser is unchanged and certificate thresholds stay
absolute.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from leodoppler.certify.certificate import recover_lifted
from leodoppler.core.constants import Limits
from leodoppler.core.exceptions import ConfigurationError, ScalingError, SolverError
from leodoppler.core.scaling import ProblemData
from leodoppler.interfaces.sdp_solver import SdpSolver
from leodoppler.relaxation.lifting import (
    LiftedProblem,
    LiftedState,
    build_lifted_problem,
)
from leodoppler.sdp.instance import (
    MomentSolution,
    SdpInstance,
    SolverStatus,
    instance_from_lifted,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GwaConfig:
    threshold: float = 1e-3
    max_iterations: int = 1000
    range_floor: float = Limits.RANGE_FLOOR  # m

    def __post_init__(self) -> None:
        if not self.threshold > 0.0:
            raise ConfigurationError("gwa.threshold", "must be positive")
        if self.max_iterations <= 0:
            raise ConfigurationError("gwa.max_iterations", "must be positive")
        if not self.range_floor > 0.0:
            raise ConfigurationError("gwa.range_floor", "must be positive")


@dataclass(frozen=True)
class GwaIteration:
    iteration: int
    weights: np.ndarray  # Q used for this solve (SI, unnormalised)
    ranges: np.ndarray  # recovered ranges, m
    eta: Optional[float]
    status: SolverStatus
    primal_cost: float
    clamped: tuple[int, ...] = ()


@dataclass
class GwaResult:
    weights: np.ndarray
    solution: MomentSolution
    problem: LiftedProblem
    instance: SdpInstance
    state: LiftedState
    converged: bool
    trace: list[GwaIteration] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.trace)


def unit_cost_problem(data: ProblemData, weights: np.ndarray) -> LiftedProblem:
    """Lifted problem with ``weights`` rescaled so ||C||_F = 1."""
    problem = build_lifted_problem(data, weights)
    half = 0.5 * problem.l0
    norm = float(np.sqrt(np.sum(problem.F**2) + 2.0 * half @ half + problem.c0**2))
    if norm == 0.0 or not np.isfinite(norm):
        return problem
    return build_lifted_problem(data, np.asarray(weights) * norm)


def range_weights(ranges: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """diag(sigma_i^2 / rho_i) in SI units."""
    return np.asarray(sigma) ** 2 / np.asarray(ranges)


def run_gwa(
    data: ProblemData,
    solver: SdpSolver,
    config: GwaConfig = GwaConfig(),
) -> GwaResult:
    """Alternate SDP solves and weight updates until the weights settle."""
    if not data.scaled:
        raise ScalingError("GWA runs on scaled problem data")
    length, rate = data.scaling.length_scale, data.scaling.rate_scale
    sigma_si = np.asarray(data.sigma) / rate
    floor = config.range_floor * length

    weights = np.ones(data.size)
    trace: list[GwaIteration] = []
    eta: Optional[float] = None

    for iteration in range(config.max_iterations):
        problem = unit_cost_problem(data, weights)
        instance = instance_from_lifted(problem)
        solution = solver.solve(instance)
        if solution.status not in (SolverStatus.SOLVED, SolverStatus.INACCURATE):
            raise SolverError(
                f"SDP solve failed inside GWA iteration {iteration}",
                status=solution.status.value,
                iteration=iteration,
            )
        if solution.status is SolverStatus.INACCURATE:
            logger.warning("GWA iteration %d: inaccurate SDP solve", iteration)

        state = recover_lifted(solution.S)
        ranges = np.array(state.ranges)
        clamped = tuple(int(i) for i in np.flatnonzero(ranges < floor))
        if clamped:
            logger.warning(
                "GWA iteration %d: clamped %d non-positive ranges",
                iteration,
                len(clamped),
            )
            ranges[list(clamped)] = floor
        ranges_si = ranges / length

        next_weights = range_weights(ranges_si, sigma_si)
        if iteration > 0:
            eta = float(np.sum(next_weights - weights) / np.sum(weights))
        trace.append(
            GwaIteration(
                iteration=iteration,
                weights=weights,
                ranges=ranges_si,
                eta=eta,
                status=solution.status,
                primal_cost=solution.primal_cost,
                clamped=clamped,
            )
        )
        logger.debug(
            "GWA iteration %d: p*=%.6e eta=%s",
            iteration,
            solution.primal_cost,
            "-" if eta is None else f"{eta:.3e}",
        )
        if eta is not None and abs(eta) < config.threshold:
            logger.info("GWA converged after %d iterations", iteration + 1)
            return GwaResult(
                weights=weights,
                solution=solution,
                problem=problem,
                instance=instance,
                state=state,
                converged=True,
                trace=trace,
            )
        weights = next_weights

    logger.warning("GWA stopped at the iteration cap (%d)", config.max_iterations)
    return GwaResult(
        weights=trace[-1].weights,
        solution=solution,
        problem=problem,
        instance=instance,
        state=state,
        converged=False,
        trace=trace,
    )

"""The five positioning pipelines and their Monte-Carlo adapters.

``gn`` and ``dl`` are the local baselines and need an initial point. ``sdp``
runs scaling, the GWA-wrapped relaxation, certification and recovery; it
never reads the initial point. ``sdp-gn`` and ``sdp-dl`` refine the
recovered state with the matching local solver.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from leodoppler.certify.certificate import Certificate, certify, recover_solution
from leodoppler.core.exceptions import LeoDopplerError, ValidationError
from leodoppler.core.geodesy import ecef_to_enu, ecef_to_geodetic, enu_rotation
from leodoppler.core.registry import Registry
from leodoppler.core.scaling import ProblemData, apply_scaling
from leodoppler.core.types import DopplerMeasurement, ReceiverState, SatelliteState
from leodoppler.interfaces.estimator import (
    EstimationContext,
    Estimator,
    EstimatorOutcome,
)
from leodoppler.interfaces.sdp_solver import SdpSolver
from leodoppler.relaxation.gwa import GwaResult, run_gwa
from leodoppler.relaxation.lifting import LiftedState
from leodoppler.sdp.backends import create_backend
from leodoppler.solvers.local import (
    LocalSolution,
    measurement_weights,
    solve_dog_leg,
    solve_gauss_newton,
)
from leodoppler.utils.config_loader import RunConfig

logger = logging.getLogger(__name__)

LOCAL_METHODS = ("gn", "dl")
SDP_METHODS = ("sdp", "sdp-gn", "sdp-dl")


@dataclass(frozen=True)
class RelaxationRun:
    """Output of the convex pipeline on one batch."""

    gwa: GwaResult
    certificate: Certificate
    state: LiftedState
    estimate: ReceiverState


@dataclass(frozen=True)
class MethodOutcome:
    estimate: Optional[ReceiverState]
    converged: bool
    iterations: int = 0
    cost: Optional[float] = None
    failure_reason: Optional[str] = None
    certificate: Optional[Certificate] = None


@dataclass(frozen=True)
class RunEntry:
    """One method on one dataset, with errors against the truth when known."""

    method: str
    estimate: Optional[ReceiverState]
    converged: bool
    failure_reason: Optional[str] = None
    error_3d_km: Optional[float] = None
    horizontal_error_m: Optional[float] = None
    certificate: Optional[Certificate] = None
    iterations: int = 0
    cost: Optional[float] = None
    elapsed: float = 0.0
    initial_distance_km: Optional[float] = None

    @property
    def failed(self) -> bool:
        return self.estimate is None or self.failure_reason is not None


@dataclass(frozen=True)
class _Batch:
    satellites: Sequence[SatelliteState]
    measurements: Sequence[DopplerMeasurement]
    initial: Optional[ReceiverState]
    config: RunConfig
    relaxation: Optional[RelaxationRun]


MethodRunner = Callable[..., MethodOutcome]
METHODS: Registry[MethodOutcome] = Registry("method")


def run_relaxation(
    satellites: Sequence[SatelliteState],
    measurements: Sequence[DopplerMeasurement],
    config: RunConfig,
    solver: Optional[SdpSolver] = None,
) -> RelaxationRun:
    """Scale, run GWA around the SDP, certify and recover the SI receiver.

    Raises:
        SolverError: an SDP solve failed inside the GWA loop
        RecoveryError: the moment matrix has no usable rank-1 direction
    """
    solver = solver or create_backend(config.sdp.backend, config.sdp.tolerances)
    data = apply_scaling(
        ProblemData.from_states(satellites, measurements, config.scaling)
    )
    gwa = run_gwa(data, solver, config.gwa)
    certificate = certify(gwa.solution, gwa.problem, gwa.instance, config.certificate)
    state, estimate = recover_solution(gwa.solution, config.scaling)
    return RelaxationRun(
        gwa=gwa, certificate=certificate, state=state, estimate=estimate
    )


def _local_outcome(solution: LocalSolution) -> MethodOutcome:
    return MethodOutcome(
        estimate=None if solution.failed else solution.estimate,
        converged=solution.converged,
        iterations=solution.iterations,
        cost=solution.cost,
        failure_reason=solution.failure_reason,
    )


def _local_runner(solve: Callable[..., LocalSolution]) -> MethodRunner:
    def run(batch: _Batch) -> MethodOutcome:
        if batch.initial is None:
            raise ValidationError("Local methods require an initial receiver state")
        solution = solve(
            batch.initial,
            batch.satellites,
            batch.measurements,
            measurement_weights(batch.measurements),
            batch.config.local_solver,
        )
        return _local_outcome(solution)

    return run


def _relaxation_of(batch: _Batch) -> RelaxationRun:
    if batch.relaxation is None:
        raise ValidationError("SDP methods need a relaxation run")
    return batch.relaxation


def _run_sdp(batch: _Batch) -> MethodOutcome:
    relaxation = _relaxation_of(batch)
    return MethodOutcome(
        estimate=relaxation.estimate,
        converged=relaxation.gwa.converged,
        iterations=relaxation.gwa.iterations,
        cost=relaxation.gwa.solution.primal_cost,
        certificate=relaxation.certificate,
    )


def _refined_runner(solve: Callable[..., LocalSolution]) -> MethodRunner:
    def run(batch: _Batch) -> MethodOutcome:
        relaxation = _relaxation_of(batch)
        solution = solve(
            relaxation.estimate,
            batch.satellites,
            batch.measurements,
            measurement_weights(batch.measurements),
            batch.config.local_solver,
        )
        outcome = _local_outcome(solution)
        return MethodOutcome(
            estimate=outcome.estimate,
            converged=outcome.converged,
            iterations=outcome.iterations,
            cost=outcome.cost,
            failure_reason=outcome.failure_reason,
            certificate=relaxation.certificate,
        )

    return run


METHODS.register("gn", _local_runner(solve_gauss_newton))
METHODS.register("dl", _local_runner(solve_dog_leg))
METHODS.register("sdp", _run_sdp)
METHODS.register("sdp-gn", _refined_runner(solve_gauss_newton))
METHODS.register("sdp-dl", _refined_runner(solve_dog_leg))


def initial_point_at_distance(
    truth: ReceiverState,
    distance_km: float,
    direction: Optional[np.ndarray] = None,
) -> ReceiverState:
    """Static start point ``distance_km`` from the truth (local east by default).

    The clock term starts at zero.
    """
    if direction is None:
        lat, lon, _ = ecef_to_geodetic(truth.position)
        direction = enu_rotation(lat, lon)[0]
    direction = np.asarray(direction, dtype=np.float64)
    norm = np.linalg.norm(direction)
    if norm == 0.0:
        raise ValidationError("direction must be non-zero")
    position = truth.position + distance_km * 1e3 * direction / norm
    return ReceiverState(position=position, clock_drift_term=0.0)


def position_errors(
    estimate: ReceiverState, truth: ReceiverState
) -> tuple[float, float]:
    """(3D error in km, horizontal ENU error in m) at the truth."""
    error_3d = float(np.linalg.norm(estimate.position - truth.position)) / 1e3
    enu = ecef_to_enu(estimate.position, truth.position)
    return error_3d, float(np.hypot(enu[0], enu[1]))


def run_pipeline(
    satellites: Sequence[SatelliteState],
    measurements: Sequence[DopplerMeasurement],
    method: str,
    initial: Optional[ReceiverState] = None,
    config: Optional[RunConfig] = None,
    truth: Optional[ReceiverState] = None,
    solver: Optional[SdpSolver] = None,
    relaxation: Optional[RelaxationRun] = None,
) -> RunEntry:
    """Run one method; numerical failures are reported, never raised.

    ``relaxation`` lets callers share one convex solve between the
    SDP-prefixed methods of a sweep.
    """
    if method not in METHODS:
        raise ValidationError(f"Unknown method '{method}' (have {METHODS.names()})")
    if method in LOCAL_METHODS and initial is None:
        raise ValidationError(f"Method '{method}' requires an initial point")
    config = config or RunConfig()
    start = time.perf_counter()
    try:
        if method in SDP_METHODS and relaxation is None:
            relaxation = run_relaxation(satellites, measurements, config, solver)
        batch = _Batch(
            satellites,
            measurements,
            initial if method in LOCAL_METHODS else None,
            config,
            relaxation,
        )
        outcome = METHODS.get(method)(batch)
    except (LeoDopplerError, np.linalg.LinAlgError) as exc:
        if isinstance(exc, ValidationError):
            raise
        logger.warning("%s failed: %s", method, exc)
        outcome = MethodOutcome(
            estimate=None, converged=False, failure_reason=str(exc)
        )
    elapsed = time.perf_counter() - start

    error_3d = horizontal = None
    if truth is not None and outcome.estimate is not None:
        error_3d, horizontal = position_errors(outcome.estimate, truth)
    logger.info(
        "%s: %s, 3D error %s km",
        method,
        "converged" if outcome.converged else "not converged",
        "-" if error_3d is None else f"{error_3d:.4f}",
    )
    return RunEntry(
        method=method,
        estimate=outcome.estimate,
        converged=outcome.converged,
        failure_reason=outcome.failure_reason,
        error_3d_km=error_3d,
        horizontal_error_m=horizontal,
        certificate=outcome.certificate,
        iterations=outcome.iterations,
        cost=outcome.cost,
        elapsed=elapsed,
    )


class MethodEstimator(Estimator):
    """Adapter running one pipeline method inside Monte-Carlo trials.

    Local methods start ``initial_distance_km`` east of the truth.
    """

    def __init__(
        self,
        method: str,
        config: Optional[RunConfig] = None,
        initial_distance_km: float = 0.0,
        label: Optional[str] = None,
        solver: Optional[SdpSolver] = None,
    ):
        if method not in METHODS:
            raise ValidationError(f"Unknown method '{method}'")
        self.method = method
        self.config = config or RunConfig()
        self.initial_distance_km = initial_distance_km
        self.solver = solver
        self._label = label or method

    @property
    def name(self) -> str:
        return self._label

    def estimate(self, context: EstimationContext) -> EstimatorOutcome:
        initial = context.initial
        if initial is None and self.method in LOCAL_METHODS:
            if context.truth is None:
                raise ValidationError("Local methods need an initial point or truth")
            initial = initial_point_at_distance(
                context.truth, self.initial_distance_km
            )
        entry = run_pipeline(
            context.satellites,
            context.measurements,
            self.method,
            initial=initial,
            config=self.config,
            solver=self.solver,
        )
        return EstimatorOutcome(
            estimate=entry.estimate,
            converged=entry.converged,
            failure_reason=entry.failure_reason,
            cost=entry.cost,
            extras={"certificate": entry.certificate},
        )

"""Local NWLS estimators: Gauss-Newton and Powell's dog-leg.

Both iterate on the SI state x = [p_r; b] and minimise r^T W r with
r_i = D_i - predicted_i and W = diag(1 / sigma_i^2) unless weights are given.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from leodoppler.core.constants import Limits
from leodoppler.core.doppler_model import check_pairing, residuals_at, stack_geometry
from leodoppler.core.exceptions import ConfigurationError, ValidationError
from leodoppler.core.types import DopplerMeasurement, ReceiverState, SatelliteState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LocalSolverConfig:
    max_iterations: int = 100
    step_tolerance: float = 1e-4  # m
    residual_tolerance: float = 1e-8  # m/s
    trust_radius_initial: float = 1e5  # m
    trust_radius_max: float = 1e7  # m
    gain_low: float = 0.25
    gain_high: float = 0.75

    def __post_init__(self) -> None:
        if self.max_iterations <= 0:
            raise ConfigurationError("local_solver.max_iterations", "must be positive")
        for key in (
            "step_tolerance",
            "residual_tolerance",
            "trust_radius_initial",
            "trust_radius_max",
        ):
            if not getattr(self, key) > 0.0:
                raise ConfigurationError(f"local_solver.{key}", "must be positive")
        if self.trust_radius_initial > self.trust_radius_max:
            raise ConfigurationError(
                "local_solver.trust_radius_initial", "exceeds trust_radius_max"
            )
        if not 0.0 < self.gain_low < self.gain_high < 1.0:
            raise ConfigurationError(
                "local_solver.gain_thresholds", "require 0 < low < high < 1"
            )


@dataclass(frozen=True)
class LocalSolution:
    estimate: ReceiverState
    iterations: int
    converged: bool
    cost: float
    failure_reason: Optional[str] = None
    cost_history: tuple[float, ...] = ()

    @property
    def failed(self) -> bool:
        return self.failure_reason is not None


def measurement_weights(measurements: Sequence[DopplerMeasurement]) -> np.ndarray:
    """Diagonal NWLS weights 1 / sigma_i^2."""
    return np.array([1.0 / m.sigma**2 for m in measurements], dtype=np.float64)


class _Problem:
    """Residual evaluator bound to one batch."""

    def __init__(
        self,
        satellites: Sequence[SatelliteState],
        measurements: Sequence[DopplerMeasurement],
        weights: Optional[np.ndarray],
    ):
        check_pairing(satellites, measurements)
        self.positions, self.velocities = stack_geometry(satellites)
        self.values = np.array([m.value for m in measurements], dtype=np.float64)
        if weights is None:
            weights = measurement_weights(measurements)
        weights = np.asarray(weights, dtype=np.float64)
        if weights.ndim == 2:
            weights = np.diag(weights)
        if weights.shape != self.values.shape or np.any(weights <= 0.0):
            raise ValidationError("weights must be a positive diagonal of size N")
        self.weights = weights

    def evaluate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
        residuals, jacobian = residuals_at(
            x, self.positions, self.velocities, self.values
        )
        return residuals, jacobian, float(self.weights @ residuals**2)


def _outside_sanity(x: np.ndarray) -> Optional[str]:
    if not np.all(np.isfinite(x)):
        return "non-finite iterate"
    if np.linalg.norm(x[:3]) > Limits.SANITY_RADIUS:
        return "iterate left the sanity ball"
    return None


def _start(initial: ReceiverState) -> np.ndarray:
    if not initial.is_static:
        raise ValidationError("Local solvers estimate a static receiver")
    return initial.state_vector.copy()


def _solution(
    x: np.ndarray,
    iterations: int,
    converged: bool,
    cost: float,
    history: list[float],
    reason: Optional[str] = None,
) -> LocalSolution:
    if np.all(np.isfinite(x)):
        estimate = ReceiverState.from_state_vector(x)
    else:
        estimate = ReceiverState.from_state_vector(np.zeros(4))
    return LocalSolution(
        estimate=estimate,
        iterations=iterations,
        converged=converged,
        cost=cost,
        failure_reason=reason,
        cost_history=tuple(history),
    )


def solve_gauss_newton(
    initial: ReceiverState,
    satellites: Sequence[SatelliteState],
    measurements: Sequence[DopplerMeasurement],
    weights: Optional[np.ndarray] = None,
    config: LocalSolverConfig = LocalSolverConfig(),
) -> LocalSolution:
    """Gauss-Newton: x <- x - (J^T W J)^-1 J^T W r."""
    problem = _Problem(satellites, measurements, weights)
    x = _start(initial)
    history: list[float] = []
    cost = math.inf

    for iteration in range(config.max_iterations):
        residuals, jacobian, cost = problem.evaluate(x)
        history.append(cost)
        if np.max(np.abs(residuals)) < config.residual_tolerance:
            return _solution(x, iteration, True, cost, history)

        weighted = jacobian * problem.weights[:, None]
        normal = jacobian.T @ weighted
        try:
            step = cho_solve(cho_factor(normal), weighted.T @ residuals)
        except LinAlgError:
            logger.debug("GN: singular normal matrix at iteration %d", iteration)
            return _solution(
                x, iteration, False, cost, history, "singular normal matrix"
            )

        x = x - step
        reason = _outside_sanity(x)
        if reason is not None:
            logger.debug("GN diverged at iteration %d: %s", iteration, reason)
            return _solution(x, iteration + 1, False, math.nan, history, reason)
        logger.debug(
            "GN iteration %d: cost=%.6e |step|=%.3e",
            iteration,
            cost,
            np.linalg.norm(step),
        )
        if np.linalg.norm(step) < config.step_tolerance:
            _, _, cost = problem.evaluate(x)
            history.append(cost)
            return _solution(x, iteration + 1, True, cost, history)

    return _solution(x, config.max_iterations, False, cost, history)


def _dog_leg_step(
    gradient: np.ndarray,
    gn_step: np.ndarray,
    cauchy_length: float,
    radius: float,
) -> np.ndarray:
    if np.linalg.norm(gn_step) <= radius:
        return gn_step
    gradient_norm = np.linalg.norm(gradient)
    if cauchy_length * gradient_norm >= radius:
        return -(radius / gradient_norm) * gradient
    a = -cauchy_length * gradient
    d = gn_step - a
    # beta >= 0 solving ||a + beta d|| = radius
    aa, ad, dd = a @ a, a @ d, d @ d
    beta = (-ad + math.sqrt(ad * ad + dd * (radius * radius - aa))) / dd
    return a + beta * d


def solve_dog_leg(
    initial: ReceiverState,
    satellites: Sequence[SatelliteState],
    measurements: Sequence[DopplerMeasurement],
    weights: Optional[np.ndarray] = None,
    config: LocalSolverConfig = LocalSolverConfig(),
) -> LocalSolution:
    """Powell dog-leg inside a gain-ratio controlled trust region."""
    problem = _Problem(satellites, measurements, weights)
    x = _start(initial)
    radius = config.trust_radius_initial

    residuals, jacobian, cost = problem.evaluate(x)
    history = [cost]

    for iteration in range(config.max_iterations):
        if np.max(np.abs(residuals)) < config.residual_tolerance:
            return _solution(x, iteration, True, cost, history)

        weighted = jacobian * problem.weights[:, None]
        normal = jacobian.T @ weighted
        gradient = weighted.T @ residuals
        try:
            gn_step = -cho_solve(cho_factor(normal), gradient)
        except LinAlgError:
            return _solution(
                x, iteration, False, cost, history, "singular normal matrix"
            )
        if np.linalg.norm(gn_step) < config.step_tolerance:
            x = x + gn_step
            residuals, jacobian, cost = problem.evaluate(x)
            history.append(cost)
            return _solution(x, iteration + 1, True, cost, history)

        curvature = gradient @ normal @ gradient
        cauchy_length = (gradient @ gradient) / curvature if curvature > 0 else 0.0
        step = _dog_leg_step(gradient, gn_step, cauchy_length, radius)

        # Gain model of the half cost 0.5 r^T W r
        predicted = -(gradient @ step) - 0.5 * step @ normal @ step
        candidate = x + step
        reason = _outside_sanity(candidate)
        if reason is not None:
            return _solution(
                candidate, iteration + 1, False, math.nan, history, reason
            )
        new_residuals, new_jacobian, new_cost = problem.evaluate(candidate)
        gain = 0.5 * (cost - new_cost) / predicted if predicted > 0 else -1.0

        if gain > 0.0:
            x, residuals, jacobian = candidate, new_residuals, new_jacobian
            cost = new_cost
            history.append(cost)
        if gain > config.gain_high:
            radius = min(
                max(radius, 3.0 * np.linalg.norm(step)), config.trust_radius_max
            )
        elif gain < config.gain_low:
            radius *= 0.5
        logger.debug(
            "DL iteration %d: cost=%.6e gain=%.3f radius=%.3e",
            iteration,
            cost,
            gain,
            radius,
        )
        if radius < config.step_tolerance:
            return _solution(x, iteration + 1, True, cost, history)

    return _solution(x, config.max_iterations, False, cost, history)

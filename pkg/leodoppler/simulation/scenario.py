"""Synthetic LEO scenario: grid constellation, receiver, noisy Doppler.

Sub-satellite points are laid out with equal angular spacing over a square
ground extent centred on a configurable point, lifted to a spherical shell at
``R_earth + altitude``. Each satellite moves at the circular-orbit speed
sqrt(mu / r), tangential to the shell (eastward unless headings are
randomised). Multi-epoch batches advance every satellite along its circle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from leodoppler.core.constants import WGS84, Constants, Limits
from leodoppler.core.doppler_model import predict_doppler
from leodoppler.core.exceptions import ConfigurationError
from leodoppler.core.geodesy import geodetic_to_ecef, surface_point_along
from leodoppler.core.types import DopplerMeasurement, ReceiverState, SatelliteState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScenarioConfig:
    grid_count: int = 49
    grid_extent_km: float = 1500.0
    altitude_km: float = 800.0
    carrier_frequency: float = 1.626e9
    receiver_clock_term_truth: float = 0.0
    monte_carlo_trials: int = 40
    rng_seed: int = 0
    center_lat: float = 22.3
    center_lon: float = 114.2
    randomize_heading: bool = False
    grid_shape: Optional[tuple[int, int]] = None
    epochs: int = 1
    epoch_step: float = 1.0

    def __post_init__(self) -> None:
        if self.grid_shape is not None:
            rows, cols = (int(v) for v in self.grid_shape)
            object.__setattr__(self, "grid_shape", (rows, cols))
            if rows <= 0 or cols <= 0 or rows * cols != self.grid_count:
                raise ConfigurationError(
                    "scenario.grid_shape", "rows * cols must equal grid_count"
                )
        else:
            side = math.isqrt(self.grid_count) if self.grid_count > 0 else 0
            if side == 0 or side * side != self.grid_count:
                raise ConfigurationError(
                    "scenario.grid_count",
                    f"{self.grid_count} is not a perfect square",
                )
        if not 200.0 < self.altitude_km < 2000.0:
            raise ConfigurationError("scenario.altitude_km", "must lie in (200, 2000)")
        if self.grid_extent_km <= 0.0:
            raise ConfigurationError("scenario.grid_extent_km", "must be positive")
        if abs(self.center_lat) > 90.0:
            raise ConfigurationError("scenario.center_lat", "must lie in [-90, 90]")
        if self.monte_carlo_trials <= 0:
            raise ConfigurationError("scenario.monte_carlo_trials", "must be positive")
        if self.epochs <= 0 or self.epoch_step <= 0.0:
            raise ConfigurationError(
                "scenario.epochs", "epochs and step must be positive"
            )

    @property
    def shape(self) -> tuple[int, int]:
        if self.grid_shape is not None:
            return self.grid_shape
        side = math.isqrt(self.grid_count)
        return (side, side)


@dataclass(frozen=True)
class NoiseConfig:
    """Zero-mean Gaussian noise STDs, isotropic per axis."""

    sat_position_std: float = 0.0
    sat_velocity_std: float = 0.0
    doppler_std: float = 0.0

    def __post_init__(self) -> None:
        for key in ("sat_position_std", "sat_velocity_std", "doppler_std"):
            value = getattr(self, key)
            if not (np.isfinite(value) and value >= 0.0):
                raise ConfigurationError(f"noise.{key}", "must be finite and >= 0")

    @property
    def is_noiseless(self) -> bool:
        return (
            self.sat_position_std == 0.0
            and self.sat_velocity_std == 0.0
            and self.doppler_std == 0.0
        )


def _local_axes(lat: float, lon: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    centre = geodetic_to_ecef(lat, lon, 0.0)
    up = centre / np.linalg.norm(centre)
    east = np.array([-np.sin(np.radians(lon)), np.cos(np.radians(lon)), 0.0])
    east -= (east @ up) * up
    east /= np.linalg.norm(east)
    north = np.cross(up, east)
    return up, east, north


def _headings(
    directions: np.ndarray, config: ScenarioConfig
) -> np.ndarray:
    k_hat = np.array([0.0, 0.0, 1.0])
    tangents = np.cross(k_hat, directions)
    # directions along the polar axis have no eastward tangent
    polar = np.linalg.norm(tangents, axis=1) < 1e-9
    tangents[polar] = np.cross(np.array([1.0, 0.0, 0.0]), directions[polar])
    tangents /= np.linalg.norm(tangents, axis=1)[:, None]
    if not config.randomize_heading:
        return tangents
    rng = np.random.default_rng(config.rng_seed)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=len(directions))
    binormals = np.cross(directions, tangents)
    return np.cos(angles)[:, None] * tangents + np.sin(angles)[:, None] * binormals


def generate_constellation(
    config: ScenarioConfig, constants: Constants = WGS84
) -> list[SatelliteState]:
    """Grid constellation for every epoch of the scenario, ordered epoch-major."""
    rows, cols = config.shape
    span = config.grid_extent_km * 1e3 / constants.earth_semimajor
    up, east, north = _local_axes(config.center_lat, config.center_lon)

    directions = []
    for beta in np.linspace(-span / 2.0, span / 2.0, rows):
        for alpha in np.linspace(-span / 2.0, span / 2.0, cols):
            along = np.cos(alpha) * up + np.sin(alpha) * east
            directions.append(np.cos(beta) * along + np.sin(beta) * north)
    units = np.array(directions)

    radius = constants.earth_semimajor + config.altitude_km * 1e3
    speed = math.sqrt(constants.mu / radius)
    rate = speed / radius
    headings = _headings(units, config)

    states: list[SatelliteState] = []
    for epoch_index in range(config.epochs):
        epoch = epoch_index * config.epoch_step
        cos_t, sin_t = math.cos(rate * epoch), math.sin(rate * epoch)
        for index, (u, h) in enumerate(zip(units, headings)):
            states.append(
                SatelliteState(
                    sat_id=f"SAT-{index + 1:02d}",
                    epoch=epoch,
                    position=radius * (cos_t * u + sin_t * h),
                    velocity=speed * (-sin_t * u + cos_t * h),
                )
            )
    logger.debug(
        "Generated %d satellite states (%dx%d grid, %d epochs, r=%.0f m)",
        len(states),
        rows,
        cols,
        config.epochs,
        radius,
    )
    return states


def place_receiver(
    config: ScenarioConfig,
    constellation: Sequence[SatelliteState],
    constants: Constants = WGS84,
) -> ReceiverState:
    """Static receiver at the surface projection of the constellation centroid."""
    if not constellation:
        raise ConfigurationError("constellation", "must not be empty")
    centroid = np.mean([s.position for s in constellation], axis=0)
    return ReceiverState(
        position=surface_point_along(centroid, constants),
        clock_drift_term=config.receiver_clock_term_truth,
    )


def synthesize_measurements(
    receiver: ReceiverState,
    constellation: Sequence[SatelliteState],
    noise: NoiseConfig,
    rng: np.random.Generator,
) -> tuple[list[DopplerMeasurement], list[SatelliteState]]:
    """Noisy Doppler from the true geometry plus the perturbed ephemeris.

    Draw order is fixed (Doppler, positions, velocities) so a seeded
    generator reproduces the output bit for bit.
    """
    count = len(constellation)
    doppler_noise = rng.normal(0.0, noise.doppler_std, size=count)
    position_noise = rng.normal(0.0, noise.sat_position_std, size=(count, 3))
    velocity_noise = rng.normal(0.0, noise.sat_velocity_std, size=(count, 3))
    sigma = max(noise.doppler_std, Limits.SIGMA_FLOOR)

    measurements = []
    perturbed = []
    for index, sat in enumerate(constellation):
        truth = predict_doppler(receiver, sat)
        measurements.append(
            DopplerMeasurement(
                sat_id=sat.sat_id,
                epoch=sat.epoch,
                value=truth + doppler_noise[index],
                sigma=sigma,
            )
        )
        perturbed.append(
            SatelliteState(
                sat_id=sat.sat_id,
                epoch=sat.epoch,
                position=sat.position + position_noise[index],
                velocity=sat.velocity + velocity_noise[index],
            )
        )
    return measurements, perturbed

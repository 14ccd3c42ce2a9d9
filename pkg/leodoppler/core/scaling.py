"""Unit scaling for the convex pipeline.

Positions and ranges are multiplied by ``length_scale`` and velocities,
Doppler values, sigmas and the clock term by ``rate_scale``. Problem data
carries a scaled/unscaled tag so scaling is applied exactly once on entry
and inverted exactly once on exit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from leodoppler.core.doppler_model import check_pairing, stack_geometry
from leodoppler.core.exceptions import ConfigurationError, ScalingError
from leodoppler.core.types import DopplerMeasurement, ReceiverState, SatelliteState


@dataclass(frozen=True)
class ScalingConfig:
    length_scale: float = 1e-7
    rate_scale: float = 1e-3

    def __post_init__(self) -> None:
        for key in ("length_scale", "rate_scale"):
            value = getattr(self, key)
            if not (np.isfinite(value) and value > 0.0):
                raise ConfigurationError(key, "scale factors must be positive")


@dataclass(frozen=True, eq=False)
class ProblemData:
    """Array view of paired satellites and measurements, tagged with its units."""

    sat_ids: tuple[str, ...]
    epochs: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    doppler: np.ndarray
    sigma: np.ndarray
    scaling: ScalingConfig = ScalingConfig()
    scaled: bool = False

    def __post_init__(self) -> None:
        for name in ("epochs", "positions", "velocities", "doppler", "sigma"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_states(
        cls,
        satellites: Sequence[SatelliteState],
        measurements: Sequence[DopplerMeasurement],
        scaling: ScalingConfig | None = None,
    ) -> "ProblemData":
        check_pairing(satellites, measurements)
        positions, velocities = stack_geometry(satellites)
        return cls(
            sat_ids=tuple(m.sat_id for m in measurements),
            epochs=np.array([m.epoch for m in measurements]),
            positions=positions,
            velocities=velocities,
            doppler=np.array([m.value for m in measurements]),
            sigma=np.array([m.sigma for m in measurements]),
            scaling=scaling or ScalingConfig(),
        )

    @property
    def size(self) -> int:
        return int(self.doppler.size)

    def to_states(self) -> tuple[list[SatelliteState], list[DopplerMeasurement]]:
        """Rebuild domain objects; only valid on unscaled (SI) data."""
        if self.scaled:
            raise ScalingError("Domain states can only be rebuilt from SI data")
        satellites = [
            SatelliteState(sat_id, epoch, pos, vel)
            for sat_id, epoch, pos, vel in zip(
                self.sat_ids, self.epochs, self.positions, self.velocities
            )
        ]
        measurements = [
            DopplerMeasurement(sat_id, epoch, value, sigma)
            for sat_id, epoch, value, sigma in zip(
                self.sat_ids, self.epochs, self.doppler, self.sigma
            )
        ]
        return satellites, measurements


def apply_scaling(
    data: ProblemData, config: ScalingConfig | None = None
) -> ProblemData:
    """Return a scaled copy of SI problem data."""
    if data.scaled:
        raise ScalingError("Problem data is already scaled")
    config = config or data.scaling
    return replace(
        data,
        positions=data.positions * config.length_scale,
        velocities=data.velocities * config.rate_scale,
        doppler=data.doppler * config.rate_scale,
        sigma=data.sigma * config.rate_scale,
        scaling=config,
        scaled=True,
    )


def invert_scaling(data: ProblemData) -> ProblemData:
    """Return the SI copy of scaled problem data."""
    if not data.scaled:
        raise ScalingError("Problem data is not scaled")
    config = data.scaling
    return replace(
        data,
        positions=data.positions / config.length_scale,
        velocities=data.velocities / config.rate_scale,
        doppler=data.doppler / config.rate_scale,
        sigma=data.sigma / config.rate_scale,
        scaled=False,
    )


def scale_receiver(receiver: ReceiverState, config: ScalingConfig) -> np.ndarray:
    """Scaled solver state [p_r; b] of an SI receiver."""
    return np.concatenate(
        [
            receiver.position * config.length_scale,
            [receiver.clock_drift_term * config.rate_scale],
        ]
    )


def unscale_receiver(x_scaled: np.ndarray, config: ScalingConfig) -> ReceiverState:
    """SI receiver from a scaled solver state [p_r; b]."""
    x = np.asarray(x_scaled, dtype=np.float64)
    return ReceiverState(
        position=x[:3] / config.length_scale,
        clock_drift_term=float(x[3]) / config.rate_scale,
    )

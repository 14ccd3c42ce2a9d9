"""Domain types for static LEO Doppler positioning.

All types are immutable after construction. Vector fields are stored as
read-only float64 numpy arrays so instances can be shared across threads.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from leodoppler.core.constants import Limits
from leodoppler.core.exceptions import ValidationError

logger = logging.getLogger(__name__)


def _frozen_vector(value: Any, name: str, size: int = 3) -> np.ndarray:
    arr = np.array(value, dtype=np.float64).reshape(-1)
    if arr.shape != (size,):
        raise ValidationError(
            f"{name} must have {size} components", details={"shape": arr.shape}
        )
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite", details={name: arr.tolist()})
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SatelliteState:
    """ECEF position (m) and velocity (m/s) of one emitter at one epoch."""

    sat_id: str
    epoch: float
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "sat_id", str(self.sat_id))
        object.__setattr__(self, "epoch", float(self.epoch))
        object.__setattr__(self, "position", _frozen_vector(self.position, "position"))
        object.__setattr__(self, "velocity", _frozen_vector(self.velocity, "velocity"))

        speed = float(np.linalg.norm(self.velocity))
        if speed >= Limits.SATELLITE_SPEED_MAX:
            raise ValidationError(
                f"Satellite {self.sat_id} speed {speed:.1f} m/s is not a LEO speed",
                details={"sat_id": self.sat_id, "speed": speed},
            )
        radius = float(np.linalg.norm(self.position))
        if not Limits.LEO_RADIUS_MIN <= radius <= Limits.LEO_RADIUS_MAX:
            logger.warning(
                "Satellite %s radius %.0f m outside LEO band [%.1e, %.1e]",
                self.sat_id,
                radius,
                Limits.LEO_RADIUS_MIN,
                Limits.LEO_RADIUS_MAX,
            )

    @property
    def key(self) -> tuple[str, float]:
        """Pairing key (sat_id, epoch)."""
        return (self.sat_id, self.epoch)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SatelliteState):
            return NotImplemented
        return (
            self.key == other.key
            and np.array_equal(self.position, other.position)
            and np.array_equal(self.velocity, other.velocity)
        )


@dataclass(frozen=True, eq=False)
class ReceiverState:
    """Static receiver: ECEF position (m), velocity (m/s), clock term b (m/s).

    ``clock_drift_term`` is b = c * clock-shift-rate, carried in m/s.
    """

    position: np.ndarray
    clock_drift_term: float = 0.0
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", _frozen_vector(self.position, "position"))
        object.__setattr__(self, "velocity", _frozen_vector(self.velocity, "velocity"))
        b = float(self.clock_drift_term)
        if not np.isfinite(b):
            raise ValidationError("clock_drift_term must be finite")
        object.__setattr__(self, "clock_drift_term", b)

    @property
    def is_static(self) -> bool:
        return not np.any(self.velocity)

    @property
    def state_vector(self) -> np.ndarray:
        """The solver state [p_r; b]."""
        return np.concatenate([self.position, [self.clock_drift_term]])

    @classmethod
    def from_state_vector(cls, x: np.ndarray) -> "ReceiverState":
        x = np.asarray(x, dtype=np.float64)
        return cls(position=x[:3], clock_drift_term=float(x[3]))

    def with_position(self, position: np.ndarray) -> "ReceiverState":
        return replace(self, position=np.asarray(position, dtype=np.float64))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ReceiverState):
            return NotImplemented
        return (
            np.array_equal(self.position, other.position)
            and np.array_equal(self.velocity, other.velocity)
            and self.clock_drift_term == other.clock_drift_term
        )


@dataclass(frozen=True)
class DopplerMeasurement:
    """One range-rate observation (m/s) with its noise sigma (m/s)."""

    sat_id: str
    epoch: float
    value: float
    sigma: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "sat_id", str(self.sat_id))
        object.__setattr__(self, "epoch", float(self.epoch))
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "sigma", float(self.sigma))
        if not np.isfinite(self.value):
            raise ValidationError(
                f"Doppler value for {self.sat_id} must be finite",
                details={"sat_id": self.sat_id, "epoch": self.epoch},
            )
        if not (np.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValidationError(
                f"Doppler sigma for {self.sat_id} must be positive",
                details={"sat_id": self.sat_id, "sigma": self.sigma},
            )

    @property
    def key(self) -> tuple[str, float]:
        return (self.sat_id, self.epoch)

"""Forward Doppler (range-rate) model, NWLS residuals and Jacobians.

D = (p_r - p^s)^T (v_r - v^s) / rho + b,  rho = ||p_r - p^s||
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from leodoppler.core.constants import Limits
from leodoppler.core.exceptions import (
    GeometryError,
    PairingError,
    UnderdeterminedError,
    ValidationError,
)
from leodoppler.core.types import DopplerMeasurement, ReceiverState, SatelliteState

_COINCIDENT_TOLERANCE = 1e-9  # m


def predict_doppler(receiver: ReceiverState, satellite: SatelliteState) -> float:
    """Noise-free range-rate (m/s) seen by ``receiver`` from ``satellite``."""
    los = receiver.position - satellite.position
    rho = float(np.linalg.norm(los))
    if rho < _COINCIDENT_TOLERANCE:
        raise GeometryError(
            "Receiver and satellite positions coincide", sat_id=satellite.sat_id
        )
    relative_velocity = receiver.velocity - satellite.velocity
    return float(los @ relative_velocity) / rho + receiver.clock_drift_term


def check_pairing(
    satellites: Sequence[SatelliteState],
    measurements: Sequence[DopplerMeasurement],
    minimum: int = Limits.MIN_MEASUREMENTS,
) -> None:
    """Require a one-to-one (sat_id, epoch) alignment and at least ``minimum`` rows."""
    if len(satellites) != len(measurements):
        raise PairingError(
            min(len(satellites), len(measurements)),
            message=(
                f"{len(satellites)} satellite states for "
                f"{len(measurements)} measurements"
            ),
        )
    for index, (sat, meas) in enumerate(zip(satellites, measurements)):
        if sat.key != meas.key:
            raise PairingError(
                index,
                details={"satellite": sat.key, "measurement": meas.key},
            )
    if len(measurements) < minimum:
        raise UnderdeterminedError(len(measurements), required=minimum)


def stack_geometry(
    satellites: Sequence[SatelliteState],
) -> tuple[np.ndarray, np.ndarray]:
    """Return (N x 3 positions, N x 3 velocities)."""
    positions = np.array([s.position for s in satellites], dtype=np.float64)
    velocities = np.array([s.velocity for s in satellites], dtype=np.float64)
    return positions.reshape(-1, 3), velocities.reshape(-1, 3)


def residuals_and_jacobian(
    receiver: ReceiverState,
    satellites: Sequence[SatelliteState],
    measurements: Sequence[DopplerMeasurement],
) -> tuple[np.ndarray, np.ndarray]:
    """Residuals r_i = D_i - predicted (m/s) and the N x 4 Jacobian d r / d[p_r; b].

    The receiver must be static; the Jacobian is analytic and its last column
    is identically -1.
    """
    check_pairing(satellites, measurements)
    if not receiver.is_static:
        raise ValidationError("Static solvers require a zero receiver velocity")

    positions, velocities = stack_geometry(satellites)
    values = np.array([m.value for m in measurements], dtype=np.float64)
    return residuals_at(receiver.state_vector, positions, velocities, values)


def residuals_at(
    x: np.ndarray, positions: np.ndarray, velocities: np.ndarray, values: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Array form of :func:`residuals_and_jacobian` at state x = [p_r; b]."""
    los = x[:3] - positions
    rho = np.linalg.norm(los, axis=1)
    if np.any(rho < _COINCIDENT_TOLERANCE):
        raise GeometryError("Receiver coincides with a satellite position")
    unit = los / rho[:, None]
    radial = np.einsum("ij,ij->i", unit, velocities)

    predicted = -radial + x[3]
    residuals = values - predicted

    jacobian = np.empty((values.size, 4))
    jacobian[:, :3] = (velocities - radial[:, None] * unit) / rho[:, None]
    jacobian[:, 3] = -1.0
    return residuals, jacobian


def nwls_cost(
    receiver: ReceiverState,
    satellites: Sequence[SatelliteState],
    measurements: Sequence[DopplerMeasurement],
    weights: np.ndarray | None = None,
) -> float:
    """Weighted NWLS objective sum_i w_i r_i^2 (weights default to 1/sigma^2)."""
    residuals, _ = residuals_and_jacobian(receiver, satellites, measurements)
    if weights is None:
        weights = np.array([1.0 / m.sigma**2 for m in measurements])
    return float(np.sum(np.asarray(weights) * residuals**2))

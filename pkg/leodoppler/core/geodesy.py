"""WGS-84 geodetic/ECEF conversions and local east-north-up frames."""

from __future__ import annotations

import numpy as np

from leodoppler.core.constants import WGS84, Constants
from leodoppler.core.exceptions import ValidationError

_LATITUDE_TOLERANCE = 1e-14  # rad
_MAX_ITERATIONS = 30


def geodetic_to_ecef(
    lat: float, lon: float, height: float, constants: Constants = WGS84
) -> np.ndarray:
    """Convert geodetic latitude/longitude (degrees) and height (m) to ECEF (m)."""
    if abs(lat) > 90.0:
        raise ValidationError("latitude must lie in [-90, 90]", details={"lat": lat})

    phi = np.radians(lat)
    lam = np.radians(lon)
    a = constants.earth_semimajor
    e2 = constants.eccentricity_sq
    sin_phi = np.sin(phi)
    n = a / np.sqrt(1.0 - e2 * sin_phi * sin_phi)

    return np.array(
        [
            (n + height) * np.cos(phi) * np.cos(lam),
            (n + height) * np.cos(phi) * np.sin(lam),
            (n * (1.0 - e2) + height) * sin_phi,
        ]
    )


def ecef_to_geodetic(
    position: np.ndarray, constants: Constants = WGS84
) -> tuple[float, float, float]:
    """Convert ECEF (m) to geodetic (lat deg, lon deg, height m).

    Latitude is found by fixed-point iteration on the prime-vertical radius;
    height uses the form that stays well-conditioned at the poles.
    """
    x, y, z = (float(v) for v in np.asarray(position, dtype=np.float64))
    a = constants.earth_semimajor
    e2 = constants.eccentricity_sq
    p = np.hypot(x, y)

    if p < 1e-9:
        phi = np.copysign(np.pi / 2.0, z) if z != 0.0 else np.pi / 2.0
    else:
        phi = np.arctan2(z, p * (1.0 - e2))
        for _ in range(_MAX_ITERATIONS):
            sin_phi = np.sin(phi)
            n = a / np.sqrt(1.0 - e2 * sin_phi * sin_phi)
            updated = np.arctan2(z + e2 * n * sin_phi, p)
            if abs(updated - phi) < _LATITUDE_TOLERANCE:
                phi = updated
                break
            phi = updated

    sin_phi = np.sin(phi)
    height = p * np.cos(phi) + z * sin_phi - a * np.sqrt(1.0 - e2 * sin_phi * sin_phi)
    lon = np.degrees(np.arctan2(y, x)) if p >= 1e-9 else 0.0
    return float(np.degrees(phi)), float(lon), float(height)


def enu_rotation(lat: float, lon: float) -> np.ndarray:
    """Rotation matrix taking ECEF difference vectors to local ENU."""
    phi = np.radians(lat)
    lam = np.radians(lon)
    sp, cp = np.sin(phi), np.cos(phi)
    sl, cl = np.sin(lam), np.cos(lam)
    return np.array(
        [
            [-sl, cl, 0.0],
            [-sp * cl, -sp * sl, cp],
            [cp * cl, cp * sl, sp],
        ]
    )


def ecef_to_enu(
    position: np.ndarray, reference: np.ndarray, constants: Constants = WGS84
) -> np.ndarray:
    """Express ``position`` in the ENU frame anchored at ``reference`` (both ECEF)."""
    lat, lon, _ = ecef_to_geodetic(reference, constants)
    delta = np.asarray(position, dtype=np.float64) - np.asarray(reference)
    return enu_rotation(lat, lon) @ delta


def surface_point_along(
    direction: np.ndarray, constants: Constants = WGS84
) -> np.ndarray:
    """Intersect the ray from the geocentre along ``direction`` with the ellipsoid."""
    d = np.asarray(direction, dtype=np.float64)
    norm = np.linalg.norm(d)
    if norm == 0.0:
        raise ValidationError("direction must be non-zero")
    d = d / norm
    a = constants.earth_semimajor
    b = constants.earth_semiminor
    t = 1.0 / np.sqrt((d[0] ** 2 + d[1] ** 2) / a**2 + d[2] ** 2 / b**2)
    return t * d

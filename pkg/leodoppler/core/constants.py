"""Physical constants and numeric floors for the positioning toolkit."""

from __future__ import annotations

from dataclasses import dataclass

from leodoppler.core.exceptions import ValidationError


@dataclass(frozen=True)
class Constants:
    """Physical constants used by the Doppler model and geodesy.

    All values are SI; instances are immutable.
    """

    c: float = 299792458.0
    """Speed of light, m/s."""

    mu: float = 3.986004418e14
    """Earth gravitational parameter, m^3/s^2."""

    earth_semimajor: float = 6378137.0
    """WGS-84 semi-major axis a, m."""

    earth_flattening: float = 1.0 / 298.257223563
    """WGS-84 flattening f."""

    def __post_init__(self) -> None:
        for name in ("c", "mu", "earth_semimajor", "earth_flattening"):
            if not getattr(self, name) > 0.0:
                raise ValidationError(
                    f"Constant '{name}' must be positive",
                    details={name: getattr(self, name)},
                )

    @property
    def earth_semiminor(self) -> float:
        """Polar radius b = a(1 - f), m."""
        return self.earth_semimajor * (1.0 - self.earth_flattening)

    @property
    def eccentricity_sq(self) -> float:
        """First eccentricity squared e^2 = f(2 - f)."""
        f = self.earth_flattening
        return f * (2.0 - f)


WGS84 = Constants()


class Limits:
    """Validation bands and numeric floors shared across modules."""

    LEO_RADIUS_MIN = 6.4e6
    """Lower bound of the LEO radius band, m (warning outside)."""

    LEO_RADIUS_MAX = 8.5e6
    """Upper bound of the LEO radius band, m (warning outside)."""

    SATELLITE_SPEED_MAX = 1.2e4
    """Satellite speeds at or above this are rejected, m/s."""

    MIN_MEASUREMENTS = 4
    """Unknowns of the static problem: three position axes and the clock term."""

    SIGMA_FLOOR = 1e-3
    """Smallest measurement sigma emitted by the simulator, m/s."""

    RANGE_FLOOR = 1.0
    """Clamp for non-positive ranges extracted during reweighting, m."""

    SANITY_RADIUS = 5e7
    """Local-solver iterates beyond this radius are declared diverged, m."""

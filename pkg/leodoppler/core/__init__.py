"""Core model: domain types, geodesy, the Doppler model and scaling."""

from leodoppler.core.constants import WGS84, Constants, Limits
from leodoppler.core.doppler_model import (
    check_pairing,
    nwls_cost,
    predict_doppler,
    residuals_and_jacobian,
)
from leodoppler.core.scaling import (
    ProblemData,
    ScalingConfig,
    apply_scaling,
    invert_scaling,
)
from leodoppler.core.types import DopplerMeasurement, ReceiverState, SatelliteState

__all__ = [
    "Constants",
    "DopplerMeasurement",
    "Limits",
    "ProblemData",
    "ReceiverState",
    "SatelliteState",
    "ScalingConfig",
    "WGS84",
    "apply_scaling",
    "check_pairing",
    "invert_scaling",
    "nwls_cost",
    "predict_doppler",
    "residuals_and_jacobian",
]

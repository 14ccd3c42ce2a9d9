"""Behavioural contracts for estimators and SDP backends."""

from leodoppler.interfaces.estimator import (
    EstimationContext,
    Estimator,
    EstimatorOutcome,
)
from leodoppler.interfaces.sdp_solver import SdpSolver, SdpTolerances

__all__ = [
    "EstimationContext",
    "Estimator",
    "EstimatorOutcome",
    "SdpSolver",
    "SdpTolerances",
]

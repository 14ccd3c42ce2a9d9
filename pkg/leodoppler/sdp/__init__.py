"""Standard-form SDP instances and solver backends."""

from leodoppler.sdp.backends import SDP_BACKENDS, create_backend, solve_sdp
from leodoppler.sdp.instance import (
    MomentSolution,
    SdpInstance,
    SolverStatus,
    dual_matrix,
    export_sdpa,
    instance_from_lifted,
)
from leodoppler.sdp.interior_point import InteriorPointSolver

__all__ = [
    "InteriorPointSolver",
    "MomentSolution",
    "SDP_BACKENDS",
    "SdpInstance",
    "SolverStatus",
    "create_backend",
    "dual_matrix",
    "export_sdpa",
    "instance_from_lifted",
    "solve_sdp",
]

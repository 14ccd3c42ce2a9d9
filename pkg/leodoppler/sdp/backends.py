"""SDP backend registry."""

from __future__ import annotations

from typing import Any, Optional

from leodoppler.core.exceptions import ConfigurationError
from leodoppler.core.registry import Registry
from leodoppler.interfaces.sdp_solver import SdpSolver, SdpTolerances
from leodoppler.sdp.instance import MomentSolution, SdpInstance
from leodoppler.sdp.interior_point import InteriorPointSolver

SDP_BACKENDS: Registry[SdpSolver] = Registry("SDP backend")


def _cvxpy_factory(**kwargs: Any) -> SdpSolver:
    try:
        from leodoppler.sdp.cvxpy_backend import CvxpySolver
    except ImportError as exc:
        raise ConfigurationError(
            "sdp.backend", "the cvxpy backend needs the 'crosscheck' extra"
        ) from exc
    return CvxpySolver(**kwargs)


SDP_BACKENDS.register("interior-point", InteriorPointSolver)
SDP_BACKENDS.register("cvxpy", _cvxpy_factory)


def create_backend(
    name: str = "interior-point", tolerances: Optional[SdpTolerances] = None
) -> SdpSolver:
    """Instantiate a registered backend, mapping unknown names to config errors."""
    if name not in SDP_BACKENDS:
        raise ConfigurationError(
            "sdp.backend", f"unknown backend '{name}' (have {SDP_BACKENDS.names()})"
        )
    return SDP_BACKENDS.create(name, tolerances=tolerances)


def solve_sdp(
    instance: SdpInstance,
    tolerances: Optional[SdpTolerances] = None,
    backend: str = "interior-point",
) -> MomentSolution:
    """One-shot solve; failures come back as a status, never as an exception."""
    return create_backend(backend, tolerances).solve(instance, tolerances)

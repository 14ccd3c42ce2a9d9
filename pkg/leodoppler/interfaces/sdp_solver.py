"""SDP solver interface.

A backend solves the homogenised standard-form SDP
``min C.S  s.t.  B_i.S = b_i,  S >= 0`` and reports primal, dual and status.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING

from leodoppler.core.exceptions import ConfigurationError

if TYPE_CHECKING:
    from leodoppler.sdp.instance import MomentSolution, SdpInstance


@dataclass(frozen=True)
class SdpTolerances:
    """Stopping rules shared by all SDP backends."""

    target: float = 1e-8
    accept: float = 1e-7
    max_iterations: int = 100

    def __post_init__(self) -> None:
        if not 0.0 < self.target <= self.accept:
            raise ConfigurationError("sdp", "require 0 < target <= accept")
        if self.max_iterations <= 0:
            raise ConfigurationError("sdp.max_iterations", "must be positive")


class SdpSolver(ABC):
    """Backend contract used by the GWA loop and the CLI."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Registry key of the backend."""
        ...

    @abstractmethod
    def solve(
        self, instance: "SdpInstance", tolerances: SdpTolerances | None = None
    ) -> "MomentSolution":
        """Solve one instance; never raises for infeasible/failed solves.

        Failures are reported through ``MomentSolution.status``.
        """
        ...

    def __call__(self, instance: "SdpInstance") -> "MomentSolution":
        return self.solve(instance)

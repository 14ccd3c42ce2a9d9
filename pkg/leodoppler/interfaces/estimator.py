"""Estimator interface - behavioural contract for positioning methods.

Monte-Carlo campaigns and sweeps drive every method (local solvers, the
convex pipeline and its refinements) through this interface.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from leodoppler.core.types import DopplerMeasurement, ReceiverState, SatelliteState


@dataclass(frozen=True)
class EstimationContext:
    """Inputs handed to an estimator for one solve."""

    satellites: Sequence[SatelliteState]
    measurements: Sequence[DopplerMeasurement]
    truth: Optional[ReceiverState] = None
    initial: Optional[ReceiverState] = None


@dataclass(frozen=True)
class EstimatorOutcome:
    """Result of one estimator run.

    ``estimate`` is None when the method produced no usable state.
    """

    estimate: Optional[ReceiverState]
    converged: bool
    failure_reason: Optional[str] = None
    cost: Optional[float] = None
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def succeeded(self) -> bool:
        return self.converged and self.estimate is not None


class Estimator(ABC):
    """Base class for positioning methods."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Short method key (e.g. 'gn', 'sdp-gn')."""
        ...

    @abstractmethod
    def estimate(self, context: EstimationContext) -> EstimatorOutcome:
        """Estimate the static receiver state from one batch of measurements."""
        ...

    def __call__(self, context: EstimationContext) -> EstimatorOutcome:
        return self.estimate(context)

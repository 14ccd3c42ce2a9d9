"""Monte-Carlo campaigns over the synthetic scenario.

Every trial owns an RNG stream spawned from ``(rng_seed, trial index)``; all
estimators in a trial see the same noisy inputs, so estimator order never
changes what any one of them receives.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from leodoppler.core.exceptions import ValidationError
from leodoppler.interfaces.estimator import EstimationContext, Estimator
from leodoppler.simulation.scenario import (
    NoiseConfig,
    ScenarioConfig,
    generate_constellation,
    place_receiver,
    synthesize_measurements,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    estimator: str
    succeeded: bool
    error_3d: Optional[float] = None  # m
    failure_reason: Optional[str] = None
    elapsed: float = 0.0  # s


@dataclass
class CampaignResult:
    """All trial records of a campaign plus per-estimator aggregates."""

    scenario: ScenarioConfig
    noise: NoiseConfig
    records: list[TrialRecord] = field(default_factory=list)

    def records_for(self, estimator: str) -> list[TrialRecord]:
        return [r for r in self.records if r.estimator == estimator]

    def estimator_names(self) -> list[str]:
        names: list[str] = []
        for record in self.records:
            if record.estimator not in names:
                names.append(record.estimator)
        return names

    def mean_error(self, estimator: str) -> Optional[float]:
        """Mean 3D error (m) over successful trials, None if all failed."""
        errors = [
            r.error_3d
            for r in self.records_for(estimator)
            if r.succeeded and r.error_3d is not None
        ]
        return float(np.mean(errors)) if errors else None

    def failure_count(self, estimator: str) -> int:
        return sum(1 for r in self.records_for(estimator) if not r.succeeded)

    def summary(self) -> dict[str, dict[str, object]]:
        return {
            name: {
                "trials": len(self.records_for(name)),
                "failures": self.failure_count(name),
                "mean_error_3d_m": self.mean_error(name),
            }
            for name in self.estimator_names()
        }


def _run_estimator(
    trial: int, estimator: Estimator, context: EstimationContext
) -> TrialRecord:
    start = time.perf_counter()
    try:
        outcome = estimator.estimate(context)
    except Exception as exc:
        logger.debug("Trial %d: %s raised %r", trial, estimator.name, exc)
        return TrialRecord(
            trial=trial,
            estimator=estimator.name,
            succeeded=False,
            failure_reason=f"{type(exc).__name__}: {exc}",
            elapsed=time.perf_counter() - start,
        )
    elapsed = time.perf_counter() - start

    if outcome.estimate is None or context.truth is None:
        return TrialRecord(
            trial=trial,
            estimator=estimator.name,
            succeeded=False,
            failure_reason=outcome.failure_reason or "no estimate",
            elapsed=elapsed,
        )
    error = float(np.linalg.norm(outcome.estimate.position - context.truth.position))
    return TrialRecord(
        trial=trial,
        estimator=estimator.name,
        succeeded=outcome.succeeded,
        error_3d=error,
        failure_reason=outcome.failure_reason,
        elapsed=elapsed,
    )


def run_trial(
    trial: int,
    scenario: ScenarioConfig,
    noise: NoiseConfig,
    estimators: Sequence[Estimator],
    seed: np.random.SeedSequence,
) -> list[TrialRecord]:
    """One trial: fresh noise draw, then every estimator on the same inputs."""
    rng = np.random.default_rng(seed)
    constellation = generate_constellation(scenario)
    truth = place_receiver(scenario, constellation)
    measurements, perturbed = synthesize_measurements(
        truth, constellation, noise, rng
    )
    context = EstimationContext(
        satellites=perturbed, measurements=measurements, truth=truth
    )
    return [_run_estimator(trial, est, context) for est in estimators]


def run_monte_carlo(
    scenario: ScenarioConfig,
    noise: NoiseConfig,
    estimators: Sequence[Estimator],
    workers: int = 1,
) -> CampaignResult:
    """Run ``scenario.monte_carlo_trials`` trials of every estimator.

    Estimator failures and exceptions become failed records; the campaign
    never aborts on them.
    """
    if not estimators:
        raise ValidationError("run_monte_carlo needs at least one estimator")
    trials = scenario.monte_carlo_trials
    seeds = np.random.SeedSequence(scenario.rng_seed).spawn(trials)
    logger.info(
        "Monte-Carlo campaign: %d trials x %d estimators (%s)",
        trials,
        len(estimators),
        ", ".join(e.name for e in estimators),
    )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(
                pool.map(
                    lambda t: run_trial(t, scenario, noise, estimators, seeds[t]),
                    range(trials),
                )
            )
    else:
        batches = [
            run_trial(t, scenario, noise, estimators, seeds[t]) for t in range(trials)
        ]

    result = CampaignResult(scenario=scenario, noise=noise)
    for batch in batches:
        result.records.extend(batch)
    for name, stats in result.summary().items():
        mean = stats["mean_error_3d_m"]
        logger.info(
            "%s: mean 3D error %s m, %d/%d failed",
            name,
            "-" if mean is None else f"{mean:.3f}",
            stats["failures"],
            stats["trials"],
        )
    return result

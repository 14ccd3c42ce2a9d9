"""Synthetic scenarios and Monte-Carlo campaigns."""

from leodoppler.simulation.monte_carlo import (
    CampaignResult,
    TrialRecord,
    run_monte_carlo,
    run_trial,
)
from leodoppler.simulation.scenario import (
    NoiseConfig,
    ScenarioConfig,
    generate_constellation,
    place_receiver,
    synthesize_measurements,
)

__all__ = [
    "CampaignResult",
    "NoiseConfig",
    "ScenarioConfig",
    "TrialRecord",
    "generate_constellation",
    "place_receiver",
    "run_monte_carlo",
    "run_trial",
    "synthesize_measurements",
]

"""Certifiably optimal static positioning from LEO Doppler measurements.

The convex pipeline lifts the weighted least-squares problem to a QCQP,
relaxes it to an SDP, reweights it until the weights settle and certifies
the result a posteriori. Gauss-Newton and Dog-Leg are the local baselines.

Getting started:
    from leodoppler import dataset_from_simulation, run_pipeline
    from leodoppler.simulation import NoiseConfig, ScenarioConfig

    data = dataset_from_simulation(ScenarioConfig(), NoiseConfig())
    entry = run_pipeline(
        data.satellites, data.measurements, "sdp-gn", truth=data.ground_truth
    )
    print(entry.error_3d_km, entry.certificate.verdict)
"""

from leodoppler.certify.certificate import Certificate, Verdict, certify
from leodoppler.core.exceptions import LeoDopplerError
from leodoppler.core.types import DopplerMeasurement, ReceiverState, SatelliteState
from leodoppler.pipeline import (
    RunReport,
    dataset_from_simulation,
    initial_distance_sweep,
    load_dataset,
    run_pipeline,
)
from leodoppler.utils.config_loader import RunConfig, get_config, load_config

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "DopplerMeasurement",
    "LeoDopplerError",
    "ReceiverState",
    "RunConfig",
    "RunReport",
    "SatelliteState",
    "Verdict",
    "certify",
    "dataset_from_simulation",
    "get_config",
    "initial_distance_sweep",
    "load_dataset",
    "run_pipeline",
    "__version__",
]

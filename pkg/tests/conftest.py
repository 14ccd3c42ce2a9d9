"""
Pytest configuration and shared fixtures for the leodoppler test suite.
"""

import math
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

# Ensure project root is on PYTHONPATH so 'leodoppler' can be imported
PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from leodoppler.core.constants import WGS84  # noqa: E402
from leodoppler.core.doppler_model import predict_doppler  # noqa: E402
from leodoppler.core.geodesy import geodetic_to_ecef  # noqa: E402
from leodoppler.core.types import (  # noqa: E402
    DopplerMeasurement,
    ReceiverState,
    SatelliteState,
)
from leodoppler.interfaces.sdp_solver import SdpSolver  # noqa: E402
from leodoppler.sdp.instance import MomentSolution, SolverStatus  # noqa: E402
from leodoppler.sdp.interior_point import InteriorPointSolver  # noqa: E402
from leodoppler.simulation.scenario import NoiseConfig, ScenarioConfig  # noqa: E402

LEO_RADIUS = WGS84.earth_semimajor + 800e3
LEO_SPEED = math.sqrt(WGS84.mu / LEO_RADIUS)


@pytest.fixture
def temp_yaml_file():
    """
    Fixture that provides a temporary YAML file.

    Yields:
        Path: Path to the temporary YAML file
    """
    with tempfile.NamedTemporaryFile(
        mode="w",
        suffix=".yaml",
        delete=False,
    ) as f:
        temp_path = Path(f.name)

    yield temp_path

    # Cleanup
    if temp_path.exists():
        temp_path.unlink()


def random_instance(rng, n, doppler_std=0.0, clock_term=0.0):
    """Receiver on the ellipsoid and ``n`` LEO satellites above its horizon.

    Returns (truth, satellites, measurements); measurements are noiseless
    unless ``doppler_std`` is set.
    """
    lat = rng.uniform(-60.0, 60.0)
    lon = rng.uniform(-180.0, 180.0)
    receiver = ReceiverState(
        position=geodetic_to_ecef(lat, lon, 0.0), clock_drift_term=clock_term
    )
    up = receiver.position / np.linalg.norm(receiver.position)

    satellites = []
    for index in range(n):
        offset = rng.normal(size=3)
        offset -= (offset @ up) * up
        offset *= rng.uniform(0.05, 0.25) / np.linalg.norm(offset)
        direction = up + offset
        direction /= np.linalg.norm(direction)
        heading = np.cross(direction, rng.normal(size=3))
        heading /= np.linalg.norm(heading)
        satellites.append(
            SatelliteState(
                sat_id=f"SAT-{index + 1:02d}",
                epoch=0.0,
                position=LEO_RADIUS * direction,
                velocity=LEO_SPEED * heading,
            )
        )
    sigma = max(doppler_std, 1e-3)
    measurements = [
        DopplerMeasurement(
            sat.sat_id,
            sat.epoch,
            predict_doppler(receiver, sat) + rng.normal(0.0, doppler_std),
            sigma,
        )
        for sat in satellites
    ]
    return receiver, satellites, measurements


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_instance(rng):
    """Noiseless 8-satellite instance."""
    return random_instance(rng, 8)


@pytest.fixture
def default_scenario():
    return ScenarioConfig()


@pytest.fixture
def small_scenario():
    """3x3 grid over a smaller extent; quick enough for per-test SDP solves."""
    return ScenarioConfig(grid_count=9, grid_extent_km=1200.0, monte_carlo_trials=3)


@pytest.fixture
def noiseless():
    return NoiseConfig()


class FailingSolver(SdpSolver):
    """Backend that reports a numerical failure for every instance."""

    @property
    def name(self):
        return "failing"

    def solve(self, instance, tolerances=None):
        return MomentSolution(
            S=np.zeros((instance.size, instance.size)),
            status=SolverStatus.NUMERICAL_FAILURE,
            primal_cost=float("nan"),
            dual_cost=float("nan"),
            multipliers=None,
            normalization=None,
            iterations=0,
            solve_time=0.0,
            backend=self.name,
        )


@pytest.fixture
def failing_solver():
    return FailingSolver()


@pytest.fixture(scope="session")
def sdp_solver():
    return InteriorPointSolver()


@pytest.fixture(scope="session")
def noiseless_dataset():
    """Default 49-satellite scenario without noise, truth attached."""
    from leodoppler.pipeline.dataset import dataset_from_simulation

    return dataset_from_simulation(ScenarioConfig(), NoiseConfig())


@pytest.fixture(scope="session")
def noiseless_relaxation(noiseless_dataset):
    """Convex pipeline on the default noiseless scenario, shared across tests."""
    from leodoppler.pipeline.methods import run_relaxation
    from leodoppler.utils.config_loader import RunConfig

    return run_relaxation(
        noiseless_dataset.satellites, noiseless_dataset.measurements, RunConfig()
    )


def pytest_configure(config):
    """
    Hook for initial pytest configuration.

    Used to add custom markers and configuration.
    """
    config.addinivalue_line(
        "markers",
        "slow: marks tests as slow (deselect with '-m \"not slow\"')",
    )
    config.addinivalue_line(
        "markers",
        "integration: marks tests as integration tests",
    )
    config.addinivalue_line("markers", "unit: marks tests as unit tests")


@pytest.fixture
def make_instance():
    """Factory fixture exposing :func:`random_instance`."""
    return random_instance

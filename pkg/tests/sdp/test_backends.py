import numpy as np
import pytest

from leodoppler.core.exceptions import ConfigurationError
from leodoppler.interfaces.sdp_solver import SdpTolerances
from leodoppler.sdp.backends import SDP_BACKENDS, create_backend, solve_sdp
from leodoppler.sdp.instance import SdpInstance, SolverStatus
from leodoppler.sdp.interior_point import InteriorPointSolver


def test_default_backend():
    backend = create_backend()

    assert isinstance(backend, InteriorPointSolver)
    assert backend.name == "interior-point"
    assert backend.tolerances == SdpTolerances()


def test_tolerances_forwarded():
    tolerances = SdpTolerances(target=1e-9, accept=1e-8, max_iterations=50)

    assert create_backend("interior-point", tolerances).tolerances is tolerances


def test_unknown_backend():
    with pytest.raises(ConfigurationError, match="mosek"):
        create_backend("mosek")


def test_registered_names():
    assert "interior-point" in SDP_BACKENDS
    assert "cvxpy" in SDP_BACKENDS


@pytest.mark.parametrize(
    "kwargs",
    [{"target": 0.0}, {"target": 1e-6, "accept": 1e-7}, {"max_iterations": 0}],
)
def test_tolerances_validated(kwargs):
    with pytest.raises(ConfigurationError):
        SdpTolerances(**kwargs)


def test_solve_sdp_min_trace_with_unit_diagonal():
    C = np.diag([1.0, 4.0])
    matrices = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    solution = solve_sdp(SdpInstance.from_matrices(C, matrices, [1.0, 1.0]))

    assert solution.status is SolverStatus.SOLVED
    assert solution.primal_cost == pytest.approx(5.0, abs=1e-7)
    np.testing.assert_allclose(solution.S, np.eye(2), atol=1e-5)


def test_solve_sdp_unknown_backend():
    with pytest.raises(ConfigurationError):
        solve_sdp(SdpInstance.from_matrices(np.eye(2), [np.eye(2)], [1.0]), backend="x")

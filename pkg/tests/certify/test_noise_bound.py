import csv

import numpy as np
import pytest

from leodoppler.certify.noise_bound import (
    GRID_COLUMNS,
    NoiseBoundCell,
    NoiseBoundGrid,
    check_noise_bound,
    noise_bound_grid,
    write_grid_csv,
)
from leodoppler.core.exceptions import DimensionError
from leodoppler.core.scaling import ProblemData, apply_scaling
from leodoppler.relaxation.lifting import build_lifted_problem, lift_state
from leodoppler.simulation.scenario import (
    NoiseConfig,
    ScenarioConfig,
    generate_constellation,
    place_receiver,
    synthesize_measurements,
)


def _perturbed_problem(baseline, velocity_std, seed=0):
    scenario = ScenarioConfig()
    constellation = generate_constellation(scenario)
    truth = place_receiver(scenario, constellation)
    measurements, satellites = synthesize_measurements(
        truth,
        constellation,
        NoiseConfig(sat_velocity_std=velocity_std),
        np.random.default_rng(seed),
    )
    data = apply_scaling(ProblemData.from_states(satellites, measurements))
    return build_lifted_problem(data, baseline.problem.weights)


class TestCheckNoiseBound:
    def test_unperturbed_exact_optimum_satisfies_bound(self, small_instance):
        truth, satellites, measurements = small_instance
        data = apply_scaling(ProblemData.from_states(satellites, measurements))
        problem = build_lifted_problem(data)
        report = check_noise_bound(problem, problem, lift_state(truth, data))

        assert report.satisfied
        assert report.f_perturbation == 0.0
        assert report.sigma_n > 0.0
        assert report.eig_threshold > 0.0
        assert report.eig_index == problem.dimension - problem.n_measurements
        assert report.lhs < report.eig_threshold

    def test_accepts_plain_vector(self, small_instance):
        truth, satellites, measurements = small_instance
        data = apply_scaling(ProblemData.from_states(satellites, measurements))
        problem = build_lifted_problem(data)
        state = lift_state(truth, data)

        assert check_noise_bound(problem, problem, state.y) == check_noise_bound(
            problem, problem, state
        )

    def test_dimension_mismatch(self, small_instance, make_instance, rng):
        truth, satellites, measurements = small_instance
        data = apply_scaling(ProblemData.from_states(satellites, measurements))
        problem = build_lifted_problem(data)
        _, other_sats, other_meas = make_instance(rng, 6)
        other = build_lifted_problem(
            apply_scaling(ProblemData.from_states(other_sats, other_meas))
        )

        with pytest.raises(DimensionError):
            check_noise_bound(problem, other, lift_state(truth, data))

    def test_bound_grows_with_velocity_noise(self, noiseless_relaxation):
        baseline = noiseless_relaxation.gwa
        small = check_noise_bound(
            baseline.problem, _perturbed_problem(baseline, 0.01), baseline.state
        )
        large = check_noise_bound(
            baseline.problem, _perturbed_problem(baseline, 1.0), baseline.state
        )

        assert large.f_perturbation > small.f_perturbation
        assert large.lhs > small.lhs
        assert not large.satisfied


class TestGridTypes:
    def test_cell_properties(self):
        cell = NoiseBoundCell(
            velocity_noise=0.01,
            doppler_noise=0.0,
            trials=4,
            predicted_count=4,
            tight_count=3,
            violations=1,
        )

        assert cell.predicted_satisfied
        assert cell.tight_fraction == 0.75

    def test_lookup_and_violations(self, noiseless_relaxation):
        cells = [
            NoiseBoundCell(0.0, 0.0, 2, 2, 2, 0),
            NoiseBoundCell(0.1, 0.0, 2, 1, 0, 1),
        ]
        grid = NoiseBoundGrid(baseline=noiseless_relaxation.gwa, cells=cells)

        assert grid.cell(0.1, 0.0) is cells[1]
        assert grid.nesting_violations == 1
        with pytest.raises(KeyError):
            grid.cell(0.5, 0.5)

    def test_write_grid_csv(self, noiseless_relaxation, tmp_path):
        grid = NoiseBoundGrid(
            baseline=noiseless_relaxation.gwa,
            cells=[NoiseBoundCell(0.025, 0.055, 5, 5, 4, 1)],
        )
        path = write_grid_csv(grid, tmp_path / "grid.csv")

        with path.open(newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
        assert tuple(rows[0]) == GRID_COLUMNS
        assert rows[1] == ["0.025", "0.055", "1", "0.8", "5"]


def test_grid_requires_trials(sdp_solver):
    with pytest.raises(ValueError):
        noise_bound_grid(ScenarioConfig(), [0.0], [0.0], 0, sdp_solver)


@pytest.mark.slow
def test_noiseless_cell_predicted_and_tight(sdp_solver):
    grid = noise_bound_grid(ScenarioConfig(), [0.0], [0.0, 0.01], 1, sdp_solver)

    noiseless = grid.cell(0.0, 0.0)
    assert noiseless.predicted_satisfied
    assert noiseless.tight_fraction == 1.0
    assert len(grid.cells) == 2
    assert grid.nesting_violations == 0


def _frontier(grid, levels, along_velocity):
    """Largest noise level on one axis whose cell is predicted satisfied."""
    satisfied = [
        level
        for level in levels
        if (
            grid.cell(level, 0.0) if along_velocity else grid.cell(0.0, level)
        ).predicted_satisfied
    ]
    return max(satisfied)


@pytest.mark.slow
def test_eight_by_eight_grid(sdp_solver):
    levels = np.linspace(0.0, 0.1, 8)
    grid = noise_bound_grid(ScenarioConfig(), levels, levels, 1, sdp_solver, workers=4)

    assert len(grid.cells) == 64
    assert grid.nesting_violations == 0
    baseline = grid.cell(0.0, 0.0)
    assert baseline.predicted_satisfied
    assert baseline.tight_fraction == 1.0
    # satisfied region reaches the order of 2.5e-2 m/s velocity, 5.5e-2 m/s Doppler
    assert 2.5e-3 <= _frontier(grid, levels, along_velocity=True) <= 2.5e-1
    assert 5.5e-3 <= _frontier(grid, levels, along_velocity=False) <= 5.5e-1


@pytest.mark.slow
def test_metre_per_second_velocity_noise_is_outside_bound(sdp_solver):
    grid = noise_bound_grid(ScenarioConfig(), [1.0], [0.0], 1, sdp_solver)

    assert not grid.cell(1.0, 0.0).predicted_satisfied
    assert grid.nesting_violations == 0

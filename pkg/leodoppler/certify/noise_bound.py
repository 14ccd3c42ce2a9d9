"""A priori noise bound for rank tightness, and its empirical check on grids.

For a noiseless optimum y_bar of the unperturbed problem (cost matrix F) and
a perturbed problem (F_t, l0_t), tightness is guaranteed when

    ||Gs|| ||grad f_t(y_bar)|| / sigma_N + ||F - F_t|| < nu(F_t)

with grad f_t(y) = 2 F_t y + l0_t, Gs the sum of the range-constraint
matrices, sigma_N the N-th largest singular value of the constraint
Jacobian at y_bar, and nu the smallest eigenvalue of F_t past its numerical
null space. All norms are spectral.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from leodoppler.certify.certificate import certify
from leodoppler.core.exceptions import (
    CertificationError,
    DimensionError,
    LeoDopplerError,
)
from leodoppler.core.scaling import ProblemData, ScalingConfig, apply_scaling
from leodoppler.core.types import DopplerMeasurement, SatelliteState
from leodoppler.interfaces.sdp_solver import SdpSolver
from leodoppler.relaxation.gwa import GwaConfig, GwaResult, run_gwa
from leodoppler.relaxation.lifting import (
    LiftedProblem,
    LiftedState,
    build_lifted_problem,
)
from leodoppler.simulation.scenario import (
    NoiseConfig,
    ScenarioConfig,
    generate_constellation,
    place_receiver,
    synthesize_measurements,
)

logger = logging.getLogger(__name__)

NULL_SPACE_TOLERANCE = 1e-9

GRID_COLUMNS = (
    "velocity_noise",
    "doppler_noise",
    "predicted_satisfied",
    "tight_fraction",
    "trials",
)


@dataclass(frozen=True)
class NoiseBoundReport:
    sigma_n: float
    g_norm: float
    grad_f_norm: float
    f_perturbation: float
    eig_threshold: float
    eig_index: int  # 0-based index into the ascending spectrum of F_t
    lhs: float
    satisfied: bool


def check_noise_bound(
    problem_truth: LiftedProblem,
    problem_perturbed: LiftedProblem,
    y_bar: Union[LiftedState, np.ndarray],
) -> NoiseBoundReport:
    """Evaluate the sufficient tightness condition at y_bar."""
    y = y_bar.y if isinstance(y_bar, LiftedState) else np.asarray(y_bar, dtype=float)
    n = problem_truth.n_measurements
    d = problem_truth.dimension
    if problem_perturbed.dimension != d or y.shape != (d,):
        raise DimensionError("Problems and y_bar must share the lifted dimension")

    jacobian = problem_truth.constraint_jacobian(y)
    singular = np.linalg.svd(jacobian, compute_uv=False)
    sigma_n = float(singular[n - 1])

    g_sum = np.zeros((d, d))
    for con in problem_truth.range_constraints:
        g_sum += con.G.toarray()
    g_norm = float(np.linalg.norm(g_sum, 2))

    grad = 2.0 * problem_perturbed.F @ y + problem_perturbed.l0
    grad_norm = float(np.linalg.norm(grad))
    f_perturbation = float(np.linalg.norm(problem_truth.F - problem_perturbed.F, 2))

    spectrum = np.linalg.eigvalsh(problem_perturbed.F)
    null_count = int(np.sum(spectrum <= NULL_SPACE_TOLERANCE * spectrum[-1]))
    if null_count >= d:
        raise DimensionError("F has no eigenvalue past its null space")
    threshold = float(spectrum[null_count])

    lhs = (
        g_norm * grad_norm / sigma_n + f_perturbation if sigma_n > 0.0 else np.inf
    )
    return NoiseBoundReport(
        sigma_n=sigma_n,
        g_norm=g_norm,
        grad_f_norm=grad_norm,
        f_perturbation=f_perturbation,
        eig_threshold=threshold,
        eig_index=null_count,
        lhs=float(lhs),
        satisfied=bool(lhs < threshold),
    )


@dataclass(frozen=True)
class NoiseBoundCell:
    velocity_noise: float
    doppler_noise: float
    trials: int
    predicted_count: int
    tight_count: int
    violations: int  # trials predicted tight that were not

    @property
    def predicted_satisfied(self) -> bool:
        return self.predicted_count == self.trials

    @property
    def tight_fraction(self) -> float:
        return self.tight_count / self.trials


@dataclass
class NoiseBoundGrid:
    baseline: GwaResult
    cells: list[NoiseBoundCell] = field(default_factory=list)

    @property
    def nesting_violations(self) -> int:
        return sum(cell.violations for cell in self.cells)

    def cell(self, velocity_noise: float, doppler_noise: float) -> NoiseBoundCell:
        for candidate in self.cells:
            if (
                candidate.velocity_noise == velocity_noise
                and candidate.doppler_noise == doppler_noise
            ):
                return candidate
        raise KeyError((velocity_noise, doppler_noise))


@dataclass(frozen=True)
class _GridContext:
    scenario: ScenarioConfig
    scaling: ScalingConfig
    solver: SdpSolver
    gwa: GwaConfig
    baseline: GwaResult


def _scaled(
    satellites: Sequence[SatelliteState],
    measurements: Sequence[DopplerMeasurement],
    scaling: ScalingConfig,
) -> ProblemData:
    return apply_scaling(ProblemData.from_states(satellites, measurements, scaling))


def _run_cell(
    ctx: _GridContext,
    velocity_noise: float,
    doppler_noise: float,
    seeds: Sequence[np.random.SeedSequence],
) -> NoiseBoundCell:
    noise = NoiseConfig(sat_velocity_std=velocity_noise, doppler_std=doppler_noise)
    constellation = generate_constellation(ctx.scenario)
    truth = place_receiver(ctx.scenario, constellation)
    y_bar = ctx.baseline.state
    weights = ctx.baseline.problem.weights

    predicted = tight = violations = 0
    for seed in seeds:
        measurements, perturbed = synthesize_measurements(
            truth, constellation, noise, np.random.default_rng(seed)
        )
        data = _scaled(perturbed, measurements, ctx.scaling)
        report = check_noise_bound(
            ctx.baseline.problem, build_lifted_problem(data, weights), y_bar
        )
        try:
            result = run_gwa(data, ctx.solver, ctx.gwa)
            certificate = certify(result.solution, result.problem, result.instance)
            is_tight = certificate.rank_tight
        except LeoDopplerError as exc:
            logger.debug("Grid trial failed: %s", exc)
            is_tight = False
        predicted += report.satisfied
        tight += is_tight
        violations += report.satisfied and not is_tight
    logger.debug(
        "Cell (v=%g, D=%g): predicted %d/%d, tight %d/%d",
        velocity_noise,
        doppler_noise,
        predicted,
        len(seeds),
        tight,
        len(seeds),
    )
    return NoiseBoundCell(
        velocity_noise=velocity_noise,
        doppler_noise=doppler_noise,
        trials=len(seeds),
        predicted_count=predicted,
        tight_count=tight,
        violations=violations,
    )


def noise_bound_grid(
    scenario: ScenarioConfig,
    velocity_noise_levels: Sequence[float],
    doppler_noise_levels: Sequence[float],
    trials: int,
    solver: SdpSolver,
    scaling: Optional[ScalingConfig] = None,
    gwa: GwaConfig = GwaConfig(),
    workers: int = 1,
) -> NoiseBoundGrid:
    """Predicted versus empirical tightness over a (velocity, Doppler) noise grid.

    The noiseless baseline must certify; its optimum is y_bar and its final
    weights are shared by every perturbed problem.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    scaling = scaling or ScalingConfig()
    constellation = generate_constellation(scenario)
    truth = place_receiver(scenario, constellation)
    measurements, satellites = synthesize_measurements(
        truth, constellation, NoiseConfig(), np.random.default_rng(scenario.rng_seed)
    )
    baseline = run_gwa(_scaled(satellites, measurements, scaling), solver, gwa)
    certificate = certify(baseline.solution, baseline.problem, baseline.instance)
    if not certificate.certified:
        raise CertificationError(
            "Noiseless baseline is not certified; the grid has no reference optimum",
            details=certificate.as_dict(),
        )

    ctx = _GridContext(scenario, scaling, solver, gwa, baseline)
    cells = [(v, dn) for v in velocity_noise_levels for dn in doppler_noise_levels]
    streams = np.random.SeedSequence(scenario.rng_seed).spawn(len(cells))
    seeds = [stream.spawn(trials) for stream in streams]
    logger.info("Noise-bound grid: %d cells x %d trials", len(cells), trials)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(
                    lambda job: _run_cell(ctx, job[0][0], job[0][1], job[1]),
                    zip(cells, seeds),
                )
            )
    else:
        results = [_run_cell(ctx, v, dn, s) for (v, dn), s in zip(cells, seeds)]

    grid = NoiseBoundGrid(baseline=baseline, cells=results)
    logger.info(
        "Noise-bound grid done: %d predicted cells, %d nesting violations",
        sum(cell.predicted_satisfied for cell in grid.cells),
        grid.nesting_violations,
    )
    return grid


def write_grid_csv(grid: NoiseBoundGrid, path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(GRID_COLUMNS)
        for cell in grid.cells:
            writer.writerow(
                [
                    f"{cell.velocity_noise:.6g}",
                    f"{cell.doppler_noise:.6g}",
                    int(cell.predicted_satisfied),
                    f"{cell.tight_fraction:.6g}",
                    cell.trials,
                ]
            )
    return path

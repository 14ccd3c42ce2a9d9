"""Initial-distance sweeps in the shape of the distance/method error tables."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from leodoppler.core.exceptions import LeoDopplerError, ValidationError
from leodoppler.interfaces.sdp_solver import SdpSolver
from leodoppler.pipeline.dataset import Dataset
from leodoppler.pipeline.methods import (
    SDP_METHODS,
    RelaxationRun,
    RunEntry,
    initial_point_at_distance,
    run_pipeline,
    run_relaxation,
)
from leodoppler.pipeline.report import RunReport
from leodoppler.utils.config_loader import RunConfig

logger = logging.getLogger(__name__)

__all__ = ["initial_distance_sweep", "initial_point_at_distance", "sweep_directions"]


def sweep_directions(count: int, seed: int = 0) -> list[Optional[np.ndarray]]:
    """Start directions: local east (None) when count is 0, else random units."""
    if count <= 0:
        return [None]
    rng = np.random.default_rng(seed)
    vectors = rng.normal(size=(count, 3))
    return list(vectors / np.linalg.norm(vectors, axis=1)[:, None])


def initial_distance_sweep(
    dataset: Dataset,
    distances_km: Sequence[float],
    methods: Sequence[str],
    config: Optional[RunConfig] = None,
    solver: Optional[SdpSolver] = None,
    random_directions: int = 0,
    seed: int = 0,
    workers: int = 1,
) -> RunReport:
    """Run every method from initial points at each distance from the truth.

    The convex pipeline does not depend on the start point, so it runs once
    and is shared by every SDP-prefixed cell.
    """
    truth = dataset.ground_truth
    if truth is None:
        raise ValidationError("An initial-distance sweep needs a ground truth")
    config = config or RunConfig()

    relaxation: Optional[RelaxationRun] = None
    relaxation_error: Optional[str] = None
    if any(m in SDP_METHODS for m in methods):
        try:
            relaxation = run_relaxation(
                dataset.satellites, dataset.measurements, config, solver
            )
        except LeoDopplerError as exc:
            logger.warning("Convex pipeline failed: %s", exc)
            relaxation_error = str(exc)

    directions = sweep_directions(random_directions, seed)
    jobs = [
        (float(distance), method, direction)
        for distance in distances_km
        for method in methods
        for direction in directions
    ]

    def run_job(job: tuple[float, str, Optional[np.ndarray]]) -> RunEntry:
        distance, method, direction = job
        if method in SDP_METHODS and relaxation is None:
            entry = RunEntry(
                method=method,
                estimate=None,
                converged=False,
                failure_reason=relaxation_error,
            )
        else:
            entry = run_pipeline(
                dataset.satellites,
                dataset.measurements,
                method,
                initial=initial_point_at_distance(truth, distance, direction),
                config=config,
                truth=truth,
                solver=solver,
                relaxation=relaxation,
            )
        return replace(entry, initial_distance_km=distance)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(run_job, jobs))
    else:
        entries = [run_job(job) for job in jobs]

    report = RunReport(
        entries=entries,
        dataset=dataset.counts(),
        title=f"Initial-distance sweep ({dataset.metadata.constellation})",
    )
    logger.info("Sweep table (3D error, km):\n%s", report.format_table())
    return report

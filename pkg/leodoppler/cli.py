"""Command-line entry point: ``leodoppler <subcommand>``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import yaml  # type: ignore[import-untyped]

from leodoppler.certify.certificate import Certificate
from leodoppler.certify.noise_bound import noise_bound_grid, write_grid_csv
from leodoppler.core.exceptions import (
    CertificationError,
    LeoDopplerError,
    RecoveryError,
    SolverError,
)
from leodoppler.core.types import ReceiverState
from leodoppler.pipeline.dataset import (
    Dataset,
    dataset_from_simulation,
    load_dataset,
    write_dataset,
)
from leodoppler.pipeline.methods import (
    LOCAL_METHODS,
    METHODS,
    MethodEstimator,
    initial_point_at_distance,
    run_pipeline,
    run_relaxation,
)
from leodoppler.pipeline.report import RunReport, write_report_csv, write_summary
from leodoppler.pipeline.sweep import initial_distance_sweep
from leodoppler.relaxation.lifting import dump_lifted_problem
from leodoppler.sdp.backends import create_backend
from leodoppler.sdp.instance import export_sdpa
from leodoppler.simulation.monte_carlo import run_monte_carlo
from leodoppler.utils.config_loader import RunConfig, load_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_NOT_TIGHT = 4

_SOLVER_ERRORS = (SolverError, RecoveryError, CertificationError)


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _load_run_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, scenario=replace(config.scenario, rng_seed=args.seed))
    return config


def _load_input(args: argparse.Namespace, config: RunConfig) -> Dataset:
    """Dataset from CSV files, or a fresh simulation when none are given."""
    if args.ephemeris is None and args.doppler is None:
        return dataset_from_simulation(config.scenario, config.noise)
    if args.ephemeris is None or args.doppler is None:
        raise LeoDopplerError("--ephemeris and --doppler must be given together")
    return load_dataset(args.ephemeris, args.doppler, args.meta)


def _out_dir(args: argparse.Namespace) -> Optional[Path]:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit_report(report: RunReport, args: argparse.Namespace, stem: str) -> None:
    print(report.format_table())
    out = _out_dir(args)
    if out is not None:
        write_report_csv(report, out / f"{stem}.csv")
        write_summary(report, out / f"{stem}_summary.yaml")


def _initial_point(
    args: argparse.Namespace, dataset: Dataset
) -> Optional[ReceiverState]:
    if args.init_ecef is not None:
        return ReceiverState(position=np.array(args.init_ecef), clock_drift_term=0.0)
    if args.method not in LOCAL_METHODS:
        return None
    if dataset.ground_truth is None:
        raise LeoDopplerError(
            f"Method '{args.method}' needs --init-ecef when the dataset has no truth"
        )
    return initial_point_at_distance(dataset.ground_truth, args.init_distance_km)


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    dataset = dataset_from_simulation(config.scenario, config.noise)
    out = Path(args.out or ".")
    paths = write_dataset(dataset, out, args.stem)
    for path in paths:
        print(path)
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    dataset = _load_input(args, config)
    entry = run_pipeline(
        dataset.satellites,
        dataset.measurements,
        args.method,
        initial=_initial_point(args, dataset),
        config=config,
        truth=dataset.ground_truth,
    )
    if args.init_ecef is None and args.method in LOCAL_METHODS:
        entry = replace(entry, initial_distance_km=args.init_distance_km)
    report = RunReport(entries=[entry], dataset=dataset.counts(), title="solve")
    _emit_report(report, args, f"solve_{args.method}")
    if entry.estimate is not None:
        print("ecef_m: " + " ".join(f"{v:.3f}" for v in entry.estimate.position))
    return EXIT_SOLVER if entry.failed else EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    dataset = _load_input(args, config)
    report = initial_distance_sweep(
        dataset,
        args.distances or config.sweep.distances_km,
        args.methods or config.sweep.methods,
        config=config,
        random_directions=config.sweep.random_directions,
        seed=config.scenario.rng_seed,
        workers=args.workers,
    )
    _emit_report(report, args, "sweep")
    return EXIT_OK


def _print_certificate(certificate: Certificate) -> None:
    print(yaml.safe_dump(certificate.as_dict(), sort_keys=False), end="")


def cmd_certify(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    dataset = _load_input(args, config)
    relaxation = run_relaxation(dataset.satellites, dataset.measurements, config)
    _print_certificate(relaxation.certificate)
    out = _out_dir(args)
    if out is not None:
        export_sdpa(relaxation.gwa.instance, out / "relaxation.dat-s")
        dump_lifted_problem(relaxation.gwa.problem, out / "lifted.txt")
    if args.strict and not relaxation.certificate.certified:
        logger.warning("Certificate verdict: %s", relaxation.certificate.verdict)
        return EXIT_NOT_TIGHT
    return EXIT_OK


def cmd_bound(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    grid = noise_bound_grid(
        config.scenario,
        config.bound.velocity_levels,
        config.bound.doppler_levels,
        config.bound.trials,
        create_backend(config.sdp.backend, config.sdp.tolerances),
        scaling=config.scaling,
        gwa=config.gwa,
        workers=args.workers,
    )
    for cell in grid.cells:
        print(
            f"v={cell.velocity_noise:<8.4g} d={cell.doppler_noise:<8.4g} "
            f"predicted={int(cell.predicted_satisfied)} "
            f"tight={cell.tight_fraction:.2f}"
        )
    print(f"nesting violations: {grid.nesting_violations}")
    out = _out_dir(args)
    if out is not None:
        write_grid_csv(grid, out / "noise_bound.csv")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    estimators = [
        MethodEstimator(m, config, initial_distance_km=args.init_distance_km)
        for m in (args.methods or ("sdp", "sdp-gn"))
    ]
    estimators.append(MethodEstimator("gn", config, label="gn-truth"))
    campaign = run_monte_carlo(
        config.scenario, config.noise, estimators, workers=args.workers
    )
    summary = campaign.summary()
    print(yaml.safe_dump(summary, sort_keys=False), end="")
    out = _out_dir(args)
    if out is not None:
        with (out / "bench_summary.yaml").open("w", encoding="utf-8") as fh:
            yaml.safe_dump(summary, fh, sort_keys=False)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="Run configuration YAML")
    parser.add_argument("--seed", type=int, default=None, help="Override rng_seed")
    parser.add_argument("--out", default=None, help="Output directory")
    parser.add_argument("--workers", type=int, default=1, help="Worker threads")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("-q", "--quiet", action="store_true")


def _add_dataset(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ephemeris", default=None, help="Ephemeris CSV")
    parser.add_argument("--doppler", default=None, help="Doppler CSV")
    parser.add_argument("--meta", default=None, help="Dataset side-file YAML")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leodoppler",
        description="Certifiably optimal LEO Doppler positioning",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands: dict[str, tuple[Callable[[argparse.Namespace], int], str]] = {
        "simulate": (cmd_simulate, "Write a synthetic dataset"),
        "solve": (cmd_solve, "Run one method on one dataset"),
        "sweep": (cmd_sweep, "Initial-distance error table"),
        "certify": (cmd_certify, "Certificate of the convex pipeline"),
        "bound": (cmd_bound, "A priori noise-bound grid"),
        "bench": (cmd_bench, "Monte-Carlo campaign"),
    }
    for name, (handler, help_text) in commands.items():
        command = sub.add_parser(name, help=help_text)
        command.set_defaults(handler=handler)
        _add_common(command)
        if name in ("solve", "sweep", "certify"):
            _add_dataset(command)

    solve = sub.choices["solve"]
    solve.add_argument("--method", default="sdp", choices=METHODS.names())
    solve.add_argument("--init-ecef", type=float, nargs=3, default=None)
    sub.choices["simulate"].add_argument("--stem", default="dataset")
    sub.choices["certify"].add_argument(
        "--strict", action="store_true", help="Exit 4 unless certified optimal"
    )
    for name in ("sweep", "bench"):
        sub.choices[name].add_argument(
            "--methods", nargs="+", default=None, choices=METHODS.names()
        )
    sub.choices["sweep"].add_argument(
        "--distances", type=float, nargs="+", default=None, help="km"
    )
    for name in ("solve", "bench"):
        sub.choices[name].add_argument("--init-distance-km", type=float, default=0.0)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    _configure_logging(args.verbose, args.quiet)
    try:
        return int(args.handler(args))
    except _SOLVER_ERRORS as exc:
        logger.error("%s", exc)
        return EXIT_SOLVER
    except (LeoDopplerError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Run reports: per-method rows, the distance table, CSV and YAML summaries."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import yaml  # type: ignore[import-untyped]

from leodoppler.pipeline.methods import RunEntry

logger = logging.getLogger(__name__)

FAILURE_MARKER = "-"

REPORT_COLUMNS = (
    "initial_distance_km",
    "method",
    "converged",
    "error_3d_km",
    "horizontal_error_m",
    "verdict",
    "eigenvalue_ratio",
    "iterations",
    "elapsed_s",
    "failure_reason",
)


def _fmt(value: Optional[float], spec: str = ".6g") -> str:
    return FAILURE_MARKER if value is None else format(value, spec)


@dataclass
class RunReport:
    entries: list[RunEntry] = field(default_factory=list)
    dataset: dict[str, Any] = field(default_factory=dict)
    title: str = ""

    def methods(self) -> list[str]:
        seen: list[str] = []
        for entry in self.entries:
            if entry.method not in seen:
                seen.append(entry.method)
        return seen

    def distances(self) -> list[Optional[float]]:
        seen: list[Optional[float]] = []
        for entry in self.entries:
            if entry.initial_distance_km not in seen:
                seen.append(entry.initial_distance_km)
        return seen

    def cell(self, distance: Optional[float], method: str) -> Optional[float]:
        """Mean 3D error (km) of successful runs, None when all failed."""
        errors = [
            e.error_3d_km
            for e in self.entries
            if e.initial_distance_km == distance
            and e.method == method
            and not e.failed
            and e.error_3d_km is not None
        ]
        return float(np.mean(errors)) if errors else None

    def table(self) -> dict[Optional[float], dict[str, Optional[float]]]:
        return {
            distance: {method: self.cell(distance, method) for method in self.methods()}
            for distance in self.distances()
        }

    def format_table(self) -> str:
        """Text table of 3D errors (km): one row per initial distance."""
        methods = self.methods()
        header = ["distance_km"] + [m.upper() for m in methods]
        lines = ["  ".join(f"{h:>11}" for h in header)]
        for distance, row in self.table().items():
            cells = [_fmt(distance, ".0f")] + [_fmt(row[m], ".2f") for m in methods]
            lines.append("  ".join(f"{c:>11}" for c in cells))
        return "\n".join(lines)


def _row(entry: RunEntry) -> list[str]:
    certificate = entry.certificate
    return [
        _fmt(entry.initial_distance_km, "g"),
        entry.method,
        str(entry.converged).lower(),
        FAILURE_MARKER if entry.failed else _fmt(entry.error_3d_km, ".6f"),
        FAILURE_MARKER if entry.failed else _fmt(entry.horizontal_error_m, ".3f"),
        FAILURE_MARKER if certificate is None else certificate.verdict.value,
        (
            FAILURE_MARKER
            if certificate is None
            else f"{certificate.eigenvalue_ratio:.6g}"
        ),
        str(entry.iterations),
        f"{entry.elapsed:.3f}",
        entry.failure_reason or "",
    ]


def write_report_csv(report: RunReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(REPORT_COLUMNS)
        for entry in report.entries:
            writer.writerow(_row(entry))
    logger.info("Report written to %s", path)
    return path


def summary_dict(report: RunReport) -> dict[str, Any]:
    methods: dict[str, Any] = {}
    for method in report.methods():
        runs = [e for e in report.entries if e.method == method]
        errors = [
            e.error_3d_km for e in runs if not e.failed and e.error_3d_km is not None
        ]
        methods[method] = {
            "runs": len(runs),
            "failures": sum(1 for e in runs if e.failed),
            "mean_error_3d_km": float(np.mean(errors)) if errors else None,
        }
    certificate = next(
        (e.certificate for e in report.entries if e.certificate is not None), None
    )
    return {
        "title": report.title,
        "dataset": report.dataset,
        "methods": methods,
        "table_km": {
            FAILURE_MARKER if d is None else float(d): row
            for d, row in report.table().items()
        },
        "certificate": None if certificate is None else certificate.as_dict(),
    }


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {_plain(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def write_summary(
    report: RunReport,
    path: Union[str, Path],
    extra: Optional[dict[str, Any]] = None,
) -> Path:
    """Machine-readable YAML summary next to the CSV report."""
    path = Path(path)
    payload = summary_dict(report)
    if extra:
        payload.update(extra)
    with path.open("w", encoding="utf-8") as handle:
        yaml.safe_dump(_plain(payload), handle, sort_keys=False)
    return path

"""Dataset ingestion: ephemeris CSV, Doppler CSV and a YAML side-file.

Ephemeris CSV header:  epoch,sat_id,x_m,y_m,z_m,vx_mps,vy_mps,vz_mps
Doppler CSV header:    epoch,sat_id,doppler_mps,sigma_mps

The side-file carries ``metadata``, an optional ``ground_truth`` (``ecef``
list or ``geodetic`` mapping in degrees and metres) and an optional
``columns`` adapter that renames columns and rescales units for third-party
layouts. All epochs are pooled into one static batch.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
import yaml  # type: ignore[import-untyped]

from leodoppler.core.constants import Limits
from leodoppler.core.doppler_model import check_pairing
from leodoppler.core.exceptions import DatasetError, LeoDopplerError
from leodoppler.core.geodesy import ecef_to_geodetic, geodetic_to_ecef
from leodoppler.core.types import DopplerMeasurement, ReceiverState, SatelliteState
from leodoppler.simulation.scenario import (
    NoiseConfig,
    ScenarioConfig,
    generate_constellation,
    place_receiver,
    synthesize_measurements,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

EPHEMERIS_FIELDS = ("epoch", "sat_id", "x", "y", "z", "vx", "vy", "vz")
DOPPLER_FIELDS = ("epoch", "sat_id", "doppler", "sigma")

_DEFAULT_EPHEMERIS = {
    "epoch": "epoch",
    "sat_id": "sat_id",
    "x": "x_m",
    "y": "y_m",
    "z": "z_m",
    "vx": "vx_mps",
    "vy": "vy_mps",
    "vz": "vz_mps",
}
_DEFAULT_DOPPLER = {
    "epoch": "epoch",
    "sat_id": "sat_id",
    "doppler": "doppler_mps",
    "sigma": "sigma_mps",
}
_MIN_POSITION_NORM = 1e6  # m; smaller magnitudes indicate km input


@dataclass(frozen=True)
class ColumnMapping:
    """Column names and unit factors of an input layout.

    Factors multiply the raw values into m, m/s and m/s; a negative
    ``doppler_factor`` converts sign conventions (e.g. -wavelength for Hz).
    """

    ephemeris: dict[str, str] = field(default_factory=lambda: dict(_DEFAULT_EPHEMERIS))
    doppler: dict[str, str] = field(default_factory=lambda: dict(_DEFAULT_DOPPLER))
    position_factor: float = 1.0
    velocity_factor: float = 1.0
    doppler_factor: float = 1.0
    sigma_factor: float = 1.0
    default_sigma: Optional[float] = None

    @classmethod
    def from_dict(
        cls, raw: dict[str, Any], path: Optional[Path] = None
    ) -> "ColumnMapping":
        raw = dict(raw)
        ephemeris = dict(_DEFAULT_EPHEMERIS)
        ephemeris.update(raw.pop("ephemeris", None) or {})
        doppler = dict(_DEFAULT_DOPPLER)
        doppler.update(raw.pop("doppler", None) or {})
        for name, fields in (("ephemeris", ephemeris), ("doppler", doppler)):
            allowed = EPHEMERIS_FIELDS if name == "ephemeris" else DOPPLER_FIELDS
            unknown = set(fields) - set(allowed)
            if unknown:
                raise DatasetError(
                    f"Unknown {name} column keys: {sorted(unknown)}", path=path
                )
        try:
            return cls(
                ephemeris=ephemeris,
                doppler=doppler,
                **{k: float(v) for k, v in raw.items()},
            )
        except (TypeError, ValueError) as exc:
            raise DatasetError(f"Invalid column adapter: {exc}", path=path) from exc


@dataclass(frozen=True)
class DatasetMetadata:
    constellation: str = "unknown"
    carrier_frequency: Optional[float] = None  # Hz
    duration: Optional[float] = None  # s
    source: str = ""


@dataclass
class Dataset:
    satellites: list[SatelliteState]
    measurements: list[DopplerMeasurement]
    ground_truth: Optional[ReceiverState] = None
    metadata: DatasetMetadata = field(default_factory=DatasetMetadata)

    @property
    def n_measurements(self) -> int:
        return len(self.measurements)

    @property
    def n_satellites(self) -> int:
        return len({m.sat_id for m in self.measurements})

    @property
    def duration(self) -> float:
        epochs = [m.epoch for m in self.measurements]
        return float(max(epochs) - min(epochs)) if epochs else 0.0

    def counts(self) -> dict[str, Any]:
        return {
            "measurements": self.n_measurements,
            "satellites": self.n_satellites,
            "duration_s": self.duration,
        }


def _read_rows(path: Path, required: Sequence[str]) -> list[tuple[int, dict[str, str]]]:
    try:
        handle = path.open("r", newline="", encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"Cannot open file: {exc}", path=path) from exc
    with handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [name for name in required if name not in header]
        if missing:
            raise DatasetError(f"Missing columns {missing}", path=path, line=1)
        rows = []
        for row in reader:
            if None in row or any(row.get(name) is None for name in required):
                raise DatasetError(
                    "Wrong number of fields", path=path, line=reader.line_num
                )
            rows.append((reader.line_num, row))
    return rows


def _number(row: dict[str, str], column: str, path: Path, line: int) -> float:
    text = row[column].strip()
    try:
        value = float(text)
    except ValueError as exc:
        raise DatasetError(
            f"Column '{column}': '{text}' is not a number", path=path, line=line
        ) from exc
    if not np.isfinite(value):
        raise DatasetError(f"Column '{column}' is not finite", path=path, line=line)
    return value


def _load_ephemeris(
    path: Path, mapping: ColumnMapping
) -> dict[tuple[str, float], SatelliteState]:
    cols = mapping.ephemeris
    table: dict[tuple[str, float], SatelliteState] = {}
    for line, row in _read_rows(path, [cols[k] for k in EPHEMERIS_FIELDS]):
        epoch = _number(row, cols["epoch"], path, line)
        sat_id = row[cols["sat_id"]].strip()
        position = mapping.position_factor * np.array(
            [_number(row, cols[k], path, line) for k in ("x", "y", "z")]
        )
        velocity = mapping.velocity_factor * np.array(
            [_number(row, cols[k], path, line) for k in ("vx", "vy", "vz")]
        )
        if np.linalg.norm(position) < _MIN_POSITION_NORM:
            raise DatasetError(
                "Satellite position magnitude suggests non-metre units",
                path=path,
                line=line,
            )
        try:
            state = SatelliteState(sat_id, epoch, position, velocity)
        except LeoDopplerError as exc:
            raise DatasetError(str(exc), path=path, line=line) from exc
        if state.key in table:
            raise DatasetError(
                f"Duplicate ephemeris record for {state.key}", path=path, line=line
            )
        table[state.key] = state
    return table


def _load_doppler(
    path: Path, mapping: ColumnMapping
) -> list[tuple[int, DopplerMeasurement]]:
    cols = mapping.doppler
    required = [cols[k] for k in DOPPLER_FIELDS]
    if mapping.default_sigma is not None:
        required.remove(cols["sigma"])
    records = []
    for line, row in _read_rows(path, required):
        epoch = _number(row, cols["epoch"], path, line)
        sat_id = row[cols["sat_id"]].strip()
        value = mapping.doppler_factor * _number(row, cols["doppler"], path, line)
        if cols["sigma"] in row and row[cols["sigma"]] not in (None, ""):
            sigma = mapping.sigma_factor * _number(row, cols["sigma"], path, line)
        else:
            sigma = float(mapping.default_sigma or 0.0)
        if sigma <= 0.0:
            raise DatasetError("Sigma must be positive", path=path, line=line)
        records.append((line, DopplerMeasurement(sat_id, epoch, value, sigma)))
    return records


def _parse_ground_truth(raw: Any, path: Path) -> Optional[ReceiverState]:
    if raw is None:
        return None
    try:
        clock = float(raw.get("clock_drift_term", 0.0))
        if "ecef" in raw:
            position = np.array([float(v) for v in raw["ecef"]])
        elif "geodetic" in raw:
            geo = raw["geodetic"]
            position = geodetic_to_ecef(
                float(geo["lat"]), float(geo["lon"]), float(geo.get("height", 0.0))
            )
        else:
            raise DatasetError("ground_truth needs 'ecef' or 'geodetic'", path=path)
        return ReceiverState(position=position, clock_drift_term=clock)
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"Invalid ground_truth: {exc}", path=path) from exc


def _load_side_file(
    path: Optional[Path],
) -> tuple[DatasetMetadata, Optional[ReceiverState], ColumnMapping]:
    if path is None:
        return DatasetMetadata(), None, ColumnMapping()
    try:
        with path.open("r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise DatasetError(f"Failed to parse dataset config: {exc}", path=path) from exc
    if not isinstance(raw, dict):
        raise DatasetError("Dataset config root must be a mapping", path=path)

    meta_raw = raw.get("metadata") or {}
    try:
        metadata = DatasetMetadata(
            constellation=str(meta_raw.get("constellation", "unknown")),
            carrier_frequency=_optional_float(meta_raw.get("carrier_frequency")),
            duration=_optional_float(meta_raw.get("duration")),
            source=str(meta_raw.get("source", "")),
        )
    except (TypeError, ValueError) as exc:
        raise DatasetError(f"Invalid metadata: {exc}", path=path) from exc
    truth = _parse_ground_truth(raw.get("ground_truth"), path)
    mapping = ColumnMapping.from_dict(raw.get("columns") or {}, path)
    return metadata, truth, mapping


def _optional_float(value: Any) -> Optional[float]:
    return None if value is None else float(value)


def load_dataset(
    ephemeris_path: PathLike,
    doppler_path: PathLike,
    config_path: Optional[PathLike] = None,
) -> Dataset:
    """Parse, join on (sat_id, epoch) and validate one static batch.

    Raises:
        DatasetError: malformed rows, unit violations or join failures,
            with the offending file and line number
        UnderdeterminedError: fewer than four measurements
    """
    eph_path, dop_path = Path(ephemeris_path), Path(doppler_path)
    metadata, truth, mapping = _load_side_file(
        Path(config_path) if config_path is not None else None
    )
    ephemeris = _load_ephemeris(eph_path, mapping)
    records = _load_doppler(dop_path, mapping)

    satellites: list[SatelliteState] = []
    measurements: list[DopplerMeasurement] = []
    seen: set[tuple[str, float]] = set()
    for line, meas in records:
        if meas.key in seen:
            raise DatasetError(
                f"Duplicate Doppler record for {meas.key}", path=dop_path, line=line
            )
        seen.add(meas.key)
        state = ephemeris.get(meas.key)
        if state is None:
            raise DatasetError(
                f"No ephemeris record for {meas.key}", path=dop_path, line=line
            )
        satellites.append(state)
        measurements.append(meas)

    check_pairing(satellites, measurements)
    dataset = Dataset(satellites, measurements, truth, metadata)
    logger.info(
        "Loaded %d measurements from %d satellites over %.1f s",
        dataset.n_measurements,
        dataset.n_satellites,
        dataset.duration,
    )
    return dataset


def write_dataset(
    dataset: Dataset, directory: PathLike, stem: str = "dataset"
) -> tuple[Path, Path, Path]:
    """Write ``<stem>_ephemeris.csv``, ``<stem>_doppler.csv`` and ``<stem>.yaml``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    eph_path = directory / f"{stem}_ephemeris.csv"
    dop_path = directory / f"{stem}_doppler.csv"
    yaml_path = directory / f"{stem}.yaml"

    written: set[tuple[str, float]] = set()
    with eph_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([_DEFAULT_EPHEMERIS[k] for k in EPHEMERIS_FIELDS])
        for sat in dataset.satellites:
            if sat.key in written:
                continue
            written.add(sat.key)
            writer.writerow(
                [repr(sat.epoch), sat.sat_id]
                + [repr(float(v)) for v in (*sat.position, *sat.velocity)]
            )
    with dop_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([_DEFAULT_DOPPLER[k] for k in DOPPLER_FIELDS])
        for meas in dataset.measurements:
            writer.writerow(
                [repr(meas.epoch), meas.sat_id, repr(meas.value), repr(meas.sigma)]
            )

    side: dict[str, Any] = {
        "metadata": {
            "constellation": dataset.metadata.constellation,
            "carrier_frequency": dataset.metadata.carrier_frequency,
            "duration": dataset.metadata.duration,
            "source": dataset.metadata.source,
        }
    }
    if dataset.ground_truth is not None:
        truth = dataset.ground_truth
        side["ground_truth"] = {
            "ecef": [float(v) for v in truth.position],
            "clock_drift_term": float(truth.clock_drift_term),
        }
    with yaml_path.open("w", encoding="utf-8") as fh:
        yaml.safe_dump(side, fh, sort_keys=False)
    logger.info("Dataset written to %s", directory)
    return eph_path, dop_path, yaml_path


def dataset_from_simulation(
    scenario: ScenarioConfig, noise: NoiseConfig, seed: Optional[int] = None
) -> Dataset:
    """Synthetic dataset of one noise draw, with the true receiver attached."""
    constellation = generate_constellation(scenario)
    truth = place_receiver(scenario, constellation)
    rng = np.random.default_rng(scenario.rng_seed if seed is None else seed)
    measurements, perturbed = synthesize_measurements(truth, constellation, noise, rng)
    lat, lon, _ = ecef_to_geodetic(truth.position)
    return Dataset(
        satellites=perturbed,
        measurements=measurements,
        ground_truth=truth,
        metadata=DatasetMetadata(
            constellation=f"simulated {scenario.grid_count}-satellite grid",
            carrier_frequency=scenario.carrier_frequency,
            duration=(scenario.epochs - 1) * scenario.epoch_step,
            source=f"simulation lat={lat:.4f} lon={lon:.4f}",
        ),
    )

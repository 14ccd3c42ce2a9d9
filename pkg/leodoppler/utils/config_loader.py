"""Helpers for loading and validating run configuration."""

import dataclasses
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, TypeVar, Union

import yaml  # type: ignore[import-untyped]

from leodoppler.certify.certificate import CertificateThresholds
from leodoppler.core.exceptions import ConfigurationError
from leodoppler.core.scaling import ScalingConfig
from leodoppler.interfaces.sdp_solver import SdpTolerances
from leodoppler.relaxation.gwa import GwaConfig
from leodoppler.simulation.scenario import NoiseConfig, ScenarioConfig
from leodoppler.solvers.local import LocalSolverConfig

T = TypeVar("T")

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent / "config" / "default.yaml"


@dataclass(frozen=True)
class SdpSettings:
    backend: str = "interior-point"
    tolerances: SdpTolerances = SdpTolerances()


@dataclass(frozen=True)
class SweepConfig:
    distances_km: tuple[float, ...] = (1.0, 10.0, 100.0, 580.0, 1000.0)
    methods: tuple[str, ...] = ("gn", "dl", "sdp", "sdp-gn", "sdp-dl")
    random_directions: int = 0

    def __post_init__(self) -> None:
        distances = tuple(float(d) for d in self.distances_km)
        object.__setattr__(self, "distances_km", distances)
        object.__setattr__(self, "methods", tuple(str(m) for m in self.methods))
        if any(d < 0.0 for d in self.distances_km):
            raise ConfigurationError("sweep.distances_km", "distances must be >= 0")
        if self.random_directions < 0:
            raise ConfigurationError("sweep.random_directions", "must be >= 0")


@dataclass(frozen=True)
class BoundConfig:
    velocity_levels: tuple[float, ...] = (0.0, 0.01, 0.025, 0.05, 0.1)
    doppler_levels: tuple[float, ...] = (0.0, 0.01, 0.025, 0.055, 0.1)
    trials: int = 5

    def __post_init__(self) -> None:
        for key in ("velocity_levels", "doppler_levels"):
            levels = tuple(float(v) for v in getattr(self, key))
            if not levels or any(v < 0.0 for v in levels):
                raise ConfigurationError(f"bound.{key}", "need non-negative levels")
            object.__setattr__(self, key, levels)
        if self.trials <= 0:
            raise ConfigurationError("bound.trials", "must be positive")


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    scaling: ScalingConfig = field(default_factory=ScalingConfig)
    local_solver: LocalSolverConfig = field(default_factory=LocalSolverConfig)
    gwa: GwaConfig = field(default_factory=GwaConfig)
    sdp: SdpSettings = field(default_factory=SdpSettings)
    certificate: CertificateThresholds = field(default_factory=CertificateThresholds)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    bound: BoundConfig = field(default_factory=BoundConfig)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


# Configuration cache with thread safety
_LOADER_CACHE: dict[str, RunConfig] = {}
_CACHE_LOCK = threading.RLock()


def _load_yaml_file(path: Path) -> dict[str, Any]:
    try:
        with path.open("r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"Failed to parse config: {exc}") from exc

    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigurationError("Config root must be a mapping")
    return raw


_SCALARS = {"float": float, "int": int, "bool": bool}


def _coerce(value: Any, annotation: Any, key: str) -> Any:
    """Convert YAML scalars to the annotated scalar type."""
    if isinstance(annotation, str):
        name = annotation
    else:
        name = getattr(annotation, "__name__", "")
    target = _SCALARS.get(name)
    if target is None or isinstance(value, target):
        return value
    if target is bool or isinstance(value, bool):
        raise ConfigurationError(key, f"expected {name}, got {value!r}")
    if target is int and isinstance(value, float) and not value.is_integer():
        raise ConfigurationError(key, f"expected {name}, got {value!r}")
    try:
        return target(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(key, f"expected {name}, got {value!r}") from exc


def _build_section(cls: type[T], raw: Any, section: str) -> T:
    """Instantiate dataclass ``cls`` from a mapping, rejecting unknown keys."""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigurationError(section, "section must be a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}  # type: ignore[arg-type]
    values = {}
    for key, value in raw.items():
        if key not in fields:
            raise ConfigurationError(f"{section}.{key}", "unknown configuration key")
        values[key] = _coerce(value, fields[key].type, f"{section}.{key}")
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigurationError(section, f"Invalid config schema: {exc}") from exc


def _build_sdp_settings(raw: Any) -> SdpSettings:
    sdp_raw = dict(raw or {})
    tolerances = _build_section(
        SdpTolerances, sdp_raw.pop("tolerances", None), "sdp.tolerances"
    )
    backend = str(sdp_raw.pop("backend", "interior-point"))
    for key in sdp_raw:
        raise ConfigurationError(f"sdp.{key}", "unknown configuration key")
    return SdpSettings(backend=backend, tolerances=tolerances)


def _parse_run_cfg_from_dict(raw: dict[str, Any]) -> RunConfig:
    sections = {f.name for f in dataclasses.fields(RunConfig)}
    for key in raw:
        if key not in sections:
            raise ConfigurationError(key, "unknown configuration section")

    scenario_raw = dict(raw.get("scenario") or {})
    if scenario_raw.get("grid_shape") is not None:
        scenario_raw["grid_shape"] = tuple(scenario_raw["grid_shape"])

    return RunConfig(
        scenario=_build_section(ScenarioConfig, scenario_raw, "scenario"),
        noise=_build_section(NoiseConfig, raw.get("noise"), "noise"),
        scaling=_build_section(ScalingConfig, raw.get("scaling"), "scaling"),
        local_solver=_build_section(
            LocalSolverConfig, raw.get("local_solver"), "local_solver"
        ),
        gwa=_build_section(GwaConfig, raw.get("gwa"), "gwa"),
        sdp=_build_sdp_settings(raw.get("sdp")),
        certificate=_build_section(
            CertificateThresholds, raw.get("certificate"), "certificate"
        ),
        sweep=_build_section(SweepConfig, raw.get("sweep"), "sweep"),
        bound=_build_section(BoundConfig, raw.get("bound"), "bound"),
    )


def load_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """Load and validate configuration from a YAML file.

    Args:
        path: Optional path to a YAML config. If None, load the bundled
            leodoppler/config/default.yaml. Missing sections and keys fall
            back to the dataclass defaults.

    Returns:
        RunConfig instance

    Raises:
        ConfigurationError: on parse or validation errors
    """
    p = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    raw = _load_yaml_file(p)
    return _parse_run_cfg_from_dict(raw=raw)


def get_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """Return the loaded config for ``path``, loading and caching if necessary.

    THREAD SAFETY: This function is thread-safe. Multiple threads can
    safely call this concurrently.
    """
    key = str(Path(path).resolve()) if path is not None else "<default>"
    with _CACHE_LOCK:
        if key not in _LOADER_CACHE:
            _LOADER_CACHE[key] = load_config(path)
        return _LOADER_CACHE[key]


def clear_config_cache() -> None:
    """Clear all cached configurations.

    All subsequent calls to get_config() will reload from disk.
    """
    with _CACHE_LOCK:
        _LOADER_CACHE.clear()

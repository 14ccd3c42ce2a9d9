"""Dataset ingestion, the positioning methods, sweeps and reports."""

from leodoppler.pipeline.dataset import (
    ColumnMapping,
    Dataset,
    DatasetMetadata,
    dataset_from_simulation,
    load_dataset,
    write_dataset,
)
from leodoppler.pipeline.methods import (
    METHODS,
    MethodEstimator,
    RunEntry,
    initial_point_at_distance,
    position_errors,
    run_pipeline,
    run_relaxation,
)
from leodoppler.pipeline.report import RunReport, write_report_csv, write_summary
from leodoppler.pipeline.sweep import initial_distance_sweep

__all__ = [
    "ColumnMapping",
    "Dataset",
    "DatasetMetadata",
    "METHODS",
    "MethodEstimator",
    "RunEntry",
    "RunReport",
    "dataset_from_simulation",
    "initial_distance_sweep",
    "initial_point_at_distance",
    "load_dataset",
    "position_errors",
    "run_pipeline",
    "run_relaxation",
    "write_dataset",
    "write_report_csv",
    "write_summary",
]

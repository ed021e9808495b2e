"""Reproduce the reference tables and figure datasets and compare them with
published values."""

from .artifacts import (
    FIGURE_IDS,
    TABLE_IDS,
    Cell,
    ReportArtifact,
    cell_tolerance,
    load_golden,
    run_figure,
    run_table,
)
from .cli import ConfigError, RunSummary, main, parse_config, run_all

__all__ = [
    "FIGURE_IDS", "TABLE_IDS", "Cell", "ConfigError", "ReportArtifact", "RunSummary",
    "cell_tolerance", "load_golden", "main", "parse_config", "run_all", "run_figure", "run_table",
]

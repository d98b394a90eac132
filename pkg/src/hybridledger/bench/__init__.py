"""Benchmark harness: configuration, execution, reports."""

from hybridledger.bench.config import BenchConfig, bundled_config, load_config, parse_config
from hybridledger.bench.report import (
    COLUMNS,
    ComparisonRow,
    ReportFormat,
    compare_runs,
    emit_report,
    format_comparison,
    load_report,
    render_report,
)
from hybridledger.bench.runner import BenchReport, run_benchmark, run_interleaved, workload

__all__ = [
    "COLUMNS",
    "BenchConfig",
    "BenchReport",
    "ComparisonRow",
    "ReportFormat",
    "bundled_config",
    "compare_runs",
    "emit_report",
    "format_comparison",
    "load_config",
    "load_report",
    "parse_config",
    "render_report",
    "run_benchmark",
    "run_interleaved",
    "workload",
]

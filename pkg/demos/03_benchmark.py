"""Desk-scale benchmark of the seven runnable schemes, blocks committed round-robin.

Prints per-scheme medians and the difference from the classical baseline.
Pass --synthetic-costs to busy-wait per post-quantum operation.

Run: python demos/03_benchmark.py [--synthetic-costs]
"""

from __future__ import annotations

import sys
from dataclasses import replace

from hybridledger.bench import bundled_config, compare_runs, format_comparison, run_interleaved
from hybridledger.crypto import RUNNABLE_PQ


def main(argv: list[str]) -> None:
    desk = replace(bundled_config("desk"), synthetic_costs="--synthetic-costs" in argv)
    reports = run_interleaved([desk.with_scheme(s) for s in (None, *RUNNABLE_PQ)])
    print(format_comparison(compare_runs(reports)))
    for report in reports:
        print(f"{report.scheme:<14} {report.throughput:>8.0f} tx/s  stddev {report.stddev_ms:.2f} ms")


if __name__ == "__main__":
    main(sys.argv[1:])

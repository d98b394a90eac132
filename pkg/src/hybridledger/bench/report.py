"""Report emission (CSV, JSON lines), loading, and cross-run comparison."""

from __future__ import annotations

import csv
import enum
import io
import json
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from hybridledger.bench.runner import BenchReport
from hybridledger.errors import IoFailure, MalformedEncoding, ShapeMismatch
from hybridledger.ledger import BlockTiming

COLUMNS = ("block", "wall_ms", "sign_ms", "verify_ms", "hash_ms", "other_ms")
BUCKETS = ("wall_ms", "sign_ms", "verify_ms", "hash_ms", "other_ms")


class ReportFormat(enum.Enum):
    CSV = "csv"
    JSONL = "jsonl"

    @classmethod
    def for_path(cls, path: str | Path) -> ReportFormat:
        return cls.JSONL if str(path).endswith((".jsonl", ".json")) else cls.CSV


def _ms(value: float) -> str:
    return f"{value:.6f}"


def render_report(report: BenchReport, fmt: ReportFormat = ReportFormat.CSV) -> str:
    if fmt is ReportFormat.CSV:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(COLUMNS)
        for b in report.blocks:
            writer.writerow([b.block, *(_ms(getattr(b, c)) for c in BUCKETS)])
        return out.getvalue()
    lines = []
    for b in report.blocks:
        record = {"block": b.block, **{c: round(getattr(b, c), 6) for c in BUCKETS}}
        record.update(scheme=report.scheme, bytes=b.block_bytes, txs=b.txs)
        lines.append(json.dumps(record) + "\n")
    return "".join(lines)


def emit_report(report: BenchReport, path: str | Path, fmt: ReportFormat | None = None) -> Path:
    path = Path(path)
    fmt = fmt or ReportFormat.for_path(path)
    try:
        path.write_text(render_report(report, fmt))
    except OSError as exc:
        raise IoFailure(str(exc)) from None
    return path


def load_report(path: str | Path) -> BenchReport:
    """Read an emitted report back; CSV files carry no scheme, so the file stem names it."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoFailure(str(exc)) from None
    blocks = []
    scheme = path.stem
    try:
        if ReportFormat.for_path(path) is ReportFormat.JSONL:
            for line in text.splitlines():
                if line.strip():
                    record = json.loads(line)
                    scheme = record["scheme"]
                    blocks.append(BlockTiming(
                        int(record["block"]), *(float(record[c]) for c in BUCKETS),
                        int(record.get("bytes", 0)), int(record.get("txs", 0)),
                    ))
        else:
            rows = list(csv.reader(io.StringIO(text)))
            if not rows or tuple(rows[0]) != COLUMNS:
                raise MalformedEncoding(f"{path}: unexpected CSV header")
            for row in rows[1:]:
                blocks.append(BlockTiming(int(row[0]), *(float(v) for v in row[1:6])))
    except (KeyError, ValueError, IndexError) as exc:
        raise MalformedEncoding(f"{path}: {exc}") from None
    return BenchReport(scheme, tuple(blocks))


@dataclass(frozen=True)
class ComparisonRow:
    scheme: str
    median_ms: float
    median_bytes: float
    medians: dict[str, float]  # per bucket
    deltas: dict[str, float]  # per bucket, versus the baseline row


def _same_shape(a: BenchReport, b: BenchReport) -> bool:
    # CSV reports do not record transactions per block; compare those only when both have them
    if len(a.blocks) != len(b.blocks):
        return False
    if all(x.txs for x in a.blocks) and all(y.txs for y in b.blocks):
        return [x.txs for x in a.blocks] == [y.txs for y in b.blocks]
    return True


def compare_runs(reports: Sequence[BenchReport]) -> list[ComparisonRow]:
    """Median of each bucket per run, and its difference from the first run."""
    if len(reports) < 2:
        raise ShapeMismatch("comparison needs at least two reports")
    baseline = reports[0]
    for report in reports[1:]:
        if not _same_shape(report, baseline):
            raise ShapeMismatch(f"{report.scheme}: workload shape differs from {baseline.scheme}")
    base = {c: baseline.median(c) for c in BUCKETS}
    rows = []
    for report in reports:
        medians = {c: report.median(c) for c in BUCKETS}
        rows.append(ComparisonRow(
            report.scheme, medians["wall_ms"], report.median_block_bytes, medians,
            {c: medians[c] - base[c] for c in BUCKETS},
        ))
    return rows


def format_comparison(rows: Sequence[ComparisonRow]) -> str:
    header = f"{'scheme':<30} {'bytes':>10} " + " ".join(f"{c:>10}" for c in BUCKETS)
    header += " " + " ".join(f"{'d_' + c:>12}" for c in BUCKETS)
    lines = [header]
    for row in rows:
        line = f"{row.scheme:<30} {row.median_bytes:>10.0f} "
        line += " ".join(f"{row.medians[c]:>10.3f}" for c in BUCKETS)
        line += " " + " ".join(f"{row.deltas[c]:>+12.3f}" for c in BUCKETS)
        lines.append(line)
    return "\n".join(lines) + "\n"

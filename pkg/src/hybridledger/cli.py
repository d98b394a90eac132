"""``hybridledger`` command line.

Every failure exits nonzero and prints ``error: <ErrorClass>: <detail>``.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

from hybridledger.bench import (
    ReportFormat,
    bundled_config,
    compare_runs,
    emit_report,
    format_comparison,
    load_config,
    load_report,
    run_benchmark,
)
from hybridledger.crypto import CLASSICAL_DEFAULT, default_registry
from hybridledger.errors import HybridLedgerError, IoFailure, VerificationFailed
from hybridledger.identity import AltVerdict, dearmor, issue_certificate, verify_certificate
from hybridledger.ledger import make_authority, seed_for, verify_chain
from hybridledger.migration import load_scenario, replay


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(str(exc)) from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IoFailure(str(exc)) from None


def _config(value: str):
    # bundled names are accepted in place of a path
    if value in ("desk", "full") and not Path(value).exists():
        return bundled_config(value)
    return load_config(value)


def cmd_bench_run(args) -> int:
    config = _config(args.config)
    if args.scheme is not None:
        config = config.with_scheme(args.scheme)
    if args.synthetic_costs:
        config = replace(config, synthetic_costs=True)
    report = run_benchmark(config, args.ledger)
    fmt = ReportFormat(args.format) if args.format else None
    emit_report(report, args.out, fmt)
    print(
        f"{report.scheme}: committed {report.committed}/{config.total_txs}, "
        f"median {report.median_ms:.3f} ms, mean {report.mean_ms:.3f} ms, "
        f"stddev {report.stddev_ms:.3f} ms, {report.throughput:.0f} tx/s, "
        f"pq bytes {report.pq_component_bytes} -> {args.out}"
    )
    return 0


def cmd_bench_compare(args) -> int:
    rows = compare_runs([load_report(path) for path in args.files])
    sys.stdout.write(format_comparison(rows))
    return 0


def cmd_issue(args) -> int:
    registry = default_registry()
    ca = make_authority(args.ca_name, args.ca_pq_scheme, registry)
    classical = registry.keygen(CLASSICAL_DEFAULT, seed_for(args.subject, "classical"))
    pq = None
    if args.pq_scheme:
        pq = registry.keygen(args.pq_scheme, seed_for(args.subject, "pq:" + args.pq_scheme))
    cert = issue_certificate(
        ca, args.subject, classical.public, pq.public if pq else None, registry=registry
    )
    _write(args.out, cert.armor())
    if args.ca_out:
        _write(args.ca_out, ca.certificate.armor())
    print(f"{cert.kind.value} certificate for {args.subject}: {len(cert.armor())} bytes -> {args.out}")
    return 0


def cmd_inspect(args) -> int:
    data = _read(args.cert)
    cert = dearmor(data)
    body = cert.body
    pq = cert.pq_public_key
    print(f"subject:   {body.subject}")
    print(f"issuer:    {body.issuer}")
    print(f"serial:    {body.serial}")
    print(f"kind:      {cert.kind.value}")
    print(f"classical: {body.classical_pk.scheme} ({len(body.classical_pk.key)}-byte key)")
    print(f"pq:        {f'{pq.scheme} ({len(pq.key)}-byte key)' if pq else '-'}")
    for ext in body.extensions:
        flag = " critical" if ext.critical else ""
        print(f"extension: {ext.ext_id.name} {len(ext.value)} bytes{flag}")
    print(f"size:      {len(cert.encode())} raw, {len(data)} armored")
    return 0


def cmd_verify(args) -> int:
    cert = dearmor(_read(args.cert))
    ca_cert = dearmor(_read(args.ca))
    verdict = verify_certificate(cert, ca_cert, verify_alt=not args.no_alt)
    print(f"classical: {'ok' if verdict.classical_ok else 'FAIL'}")
    print(f"alt:       {verdict.alt_ok.value}")
    if not verdict.classical_ok or verdict.alt_ok is AltVerdict.REJECT:
        raise VerificationFailed(f"{cert.body.subject} is not validly issued by {ca_cert.body.subject}")
    return 0


def cmd_migrate(args) -> int:
    results = replay(load_scenario(args.scenario))
    bad = 0
    for result in results:
        step = result.step
        what = step.action + (f" {step.node_id}" if step.node_id else "")
        if result.liveness is not None:
            detail = f"committed {result.liveness.committed}, failed {result.liveness.failed}"
        else:
            detail = result.error or "ok"
        bad += not result.ok
        print(f"line {step.line:>3}: {what:<22} [{result.stages}] {detail}")
    if bad:
        raise VerificationFailed(f"{bad} scenario step(s) refused or failed")
    return 0


def cmd_verify_chain(args) -> int:
    path = Path(args.ledger)
    if not path.is_file():
        raise IoFailure(f"no such ledger file: {path}")
    if not verify_chain(path):
        raise VerificationFailed(f"{path}: chain verification failed")
    print(f"{path}: ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridledger", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run or compare benchmarks")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)
    run = bench_sub.add_parser("run", help="run one benchmark and write a per-block report")
    run.add_argument("--config", required=True, help="key = value file, or 'desk' / 'full'")
    run.add_argument("--scheme", help="post-quantum scheme, or 'none' for the classical baseline")
    run.add_argument("--out", required=True)
    run.add_argument("--format", choices=[f.value for f in ReportFormat])
    run.add_argument("--ledger", help="also persist the committed ledger here")
    run.add_argument("--synthetic-costs", action="store_true", help="busy-wait per PQ operation")
    run.set_defaults(func=cmd_bench_run)
    compare = bench_sub.add_parser("compare", help="compare reports against the first one")
    compare.add_argument("files", nargs="+")
    compare.set_defaults(func=cmd_bench_compare)

    issue = sub.add_parser("issue", help="issue a certificate from a deterministic authority")
    issue.add_argument("--subject", required=True)
    issue.add_argument("--pq-scheme", help="subject post-quantum scheme (omit for classical-only)")
    issue.add_argument("--ca-name", default="ca")
    issue.add_argument("--ca-pq-scheme", help="authority post-quantum scheme (omit for a classical CA)")
    issue.add_argument("--out", required=True)
    issue.add_argument("--ca-out", help="also write the authority certificate")
    issue.set_defaults(func=cmd_issue)

    inspect = sub.add_parser("inspect", help="show an armored certificate")
    inspect.add_argument("cert")
    inspect.set_defaults(func=cmd_inspect)

    verify = sub.add_parser("verify", help="check a certificate against its authority")
    verify.add_argument("cert")
    verify.add_argument("--ca", required=True)
    verify.add_argument("--no-alt", action="store_true", help="skip the alternative signature")
    verify.set_defaults(func=cmd_verify)

    migrate = sub.add_parser("migrate", help="replay a migration scenario")
    migrate.add_argument("--scenario", required=True)
    migrate.set_defaults(func=cmd_migrate)

    chain = sub.add_parser("verify-chain", help="verify a persisted ledger file")
    chain.add_argument("ledger")
    chain.set_defaults(func=cmd_verify_chain)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HybridLedgerError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

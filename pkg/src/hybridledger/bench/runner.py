"""Benchmark execution.

Client threads build endorsed transactions concurrently; the main thread
then orders and commits block by block, so every block's wall time is
measured by a single committer.
"""

from __future__ import annotations

import random
import statistics
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from hybridledger.bench.config import BenchConfig
from hybridledger.crypto import default_registry, synthetic_cost_registry
from hybridledger.errors import ShapeMismatch
from hybridledger.ledger import BlockTiming, PipelineConfig, Transaction, build_network


def workload(config: BenchConfig) -> list[tuple[int, int, int]]:
    """Transfers over pairwise-disjoint accounts, fixed by ``config.seed``."""
    rng = random.Random(config.seed)
    accounts = rng.sample(range(config.accounts), 2 * config.total_txs)
    return [
        (accounts[2 * i], accounts[2 * i + 1], rng.randint(1, 100)) for i in range(config.total_txs)
    ]


@dataclass(frozen=True)
class BenchReport:
    scheme: str
    blocks: tuple[BlockTiming, ...]  # measured blocks only, trimmed ends removed
    config: BenchConfig | None = None
    committed: int = 0
    failed: int = 0
    total_block_bytes: int = 0
    pq_component_bytes: int = 0
    hybrid_signatures: int = 0
    classical_signatures: int = 0

    def _series(self, attr: str) -> list[float]:
        return [getattr(b, attr) for b in self.blocks]

    def median(self, attr: str = "wall_ms") -> float:
        return statistics.median(self._series(attr)) if self.blocks else 0.0

    @property
    def median_ms(self) -> float:
        return self.median("wall_ms")

    @property
    def mean_ms(self) -> float:
        return statistics.fmean(self._series("wall_ms")) if self.blocks else 0.0

    @property
    def stddev_ms(self) -> float:
        return statistics.stdev(self._series("wall_ms")) if len(self.blocks) > 1 else 0.0

    @property
    def median_block_bytes(self) -> float:
        return self.median("block_bytes")

    @property
    def throughput(self) -> float:
        """Committed transactions per second of measured wall time."""
        wall_s = sum(self._series("wall_ms")) / 1000
        return sum(self._series("txs")) / wall_s if wall_s else 0.0

    def bucket_totals(self) -> dict[str, float]:
        return {
            name: sum(self._series(name + "_ms")) for name in ("wall", "sign", "verify", "hash", "other")
        }


class _Run:
    """One configured network with its pre-built transactions, committed block by block."""

    def __init__(self, config: BenchConfig, ledger_path: str | Path | None = None):
        config.validate()
        self.config = config
        registry = synthetic_cost_registry() if config.synthetic_costs else default_registry()
        pipeline = PipelineConfig(
            endorsement_threshold=config.endorsement_threshold,
            block_size=config.block_size,
            payload_cap=config.payload_cap,
        )
        self.network = build_network(
            config.scheme,
            clients=config.client_threads,
            peers=config.endorsement_threshold,
            accounts=config.accounts,
            balance=1000,
            hybrid_clients=config.hybrid_clients,
            config=pipeline,
            registry=registry,
            store_path=ledger_path,
        )
        self.txs = self._build_transactions()
        self.timings: list[BlockTiming] = []
        self.committed = self.failed = self.total_bytes = 0
        self.pq_bytes = self.hybrid = self.classical = 0

    def _build_transactions(self) -> list[Transaction]:
        transfers = workload(self.config)
        threads = self.config.client_threads
        network = self.network

        def client_work(index: int) -> list[tuple[int, Transaction]]:
            client = network.clients[index]
            return [
                (i, network.endorsed_transaction(client, *transfers[i], tx_id=f"tx-{i:08d}"))
                for i in range(index, len(transfers), threads)
            ]

        with ThreadPoolExecutor(max_workers=threads) as pool:
            built = [item for chunk in pool.map(client_work, range(threads)) for item in chunk]
        built.sort(key=lambda item: item[0])
        return [tx for _, tx in built]

    def commit_block(self, index: int) -> None:
        size = self.config.block_size
        block = self.network.orderer.order(self.txs[index * size : (index + 1) * size])
        raw = block.encode()
        for peer in self.network.peers:
            report = peer.validate_and_commit(raw)
        self.committed += report.applied
        self.failed += len(report.rejected)
        self.timings.append(report.timing)
        self.total_bytes += len(raw)
        rejected = set(report.rejected_tx_ids)
        for tx in block.transactions:
            if tx.tx_id in rejected:
                continue
            for signature in tx.signatures():
                if signature.pq is None:
                    self.classical += 1
                else:
                    self.hybrid += 1
                    self.pq_bytes += len(signature.pq.signature)

    def report(self) -> BenchReport:
        trim = self.config.trim_blocks
        measured = tuple(self.timings[trim : len(self.timings) - trim])
        return BenchReport(
            self.config.label, measured, self.config, self.committed, self.failed,
            self.total_bytes, self.pq_bytes, self.hybrid, self.classical,
        )


def run_benchmark(config: BenchConfig, ledger_path: str | Path | None = None) -> BenchReport:
    """Run the whole pipeline; pipeline errors (e.g. PayloadTooLarge) propagate."""
    run = _Run(config, ledger_path)
    for index in range(config.blocks):
        run.commit_block(index)
    return run.report()


def run_interleaved(configs: Sequence[BenchConfig]) -> list[BenchReport]:
    """Benchmark several configurations, committing their blocks round-robin.

    Machine speed drifts over seconds; interleaving block commits exposes
    every configuration to the same drift, which keeps cross-scheme
    comparisons meaningful. All configurations need the same block count.
    """
    if len({c.blocks for c in configs}) > 1:
        raise ShapeMismatch("interleaved runs need equal block counts")
    runs = [_Run(config) for config in configs]
    for index in range(configs[0].blocks if configs else 0):
        for run in runs:
            run.commit_block(index)
    return [run.report() for run in runs]

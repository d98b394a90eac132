"""Wiring of clients, peers and one orderer into a runnable network."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

from hybridledger.crypto import Registry, default_registry
from hybridledger.errors import HybridLedgerError
from hybridledger.identity import HybridCertificate
from hybridledger.ledger.model import Block, PipelineConfig, Transaction, WorldState
from hybridledger.ledger.nodes import Node, Role, make_authority, make_node
from hybridledger.ledger.pipeline import CommitReport, Orderer, Peer, propose, submit


@dataclass
class TxOutcome:
    tx_id: str
    committed: bool
    reason: str = ""


@dataclass
class Network:
    ca_cert: HybridCertificate
    clients: list[Node]
    peers: list[Peer]
    orderer: Orderer
    config: PipelineConfig = PipelineConfig()
    outcomes: list[TxOutcome] = field(default_factory=list)

    @classmethod
    def from_nodes(
        cls,
        ca_cert: HybridCertificate,
        clients: Sequence[Node],
        peers: Sequence[Node],
        orderer: Node,
        state: WorldState,
        config: PipelineConfig = PipelineConfig(),
        store_path: str | Path | None = None,
    ) -> Network:
        """Each peer receives its own copy of ``state``; only the first peer persists blocks."""
        peer_objs = [
            Peer(node, ca_cert, WorldState(dict(state.balances)), config,
                 Path(store_path) if (store_path and i == 0) else None)
            for i, node in enumerate(peers)
        ]
        net = cls(ca_cert, list(clients), peer_objs, Orderer(orderer, ca_cert, config), config)
        net.commit(net.orderer.genesis())
        return net

    def commit(self, block: Block) -> list[CommitReport]:
        """Deliver ``block`` to every peer; each receives the encoded bytes."""
        raw = block.encode()
        return [peer.validate_and_commit(raw) for peer in self.peers]

    def endorsed_transaction(
        self, client: Node, from_account: int, to_account: int, amount: int, tx_id: str | None = None
    ) -> Transaction:
        proposal = propose(client, from_account, to_account, amount, tx_id=tx_id, config=self.config)
        endorsers = self.peers[: max(1, self.config.endorsement_threshold)]
        endorsements = [peer.endorse(proposal) for peer in endorsers]
        return submit(client, proposal, endorsements, self.config)

    def run(self, transfers: Sequence[tuple[int, int, int]], tx_prefix: str = "tx") -> list[TxOutcome]:
        """Push ``transfers`` through the whole pipeline, collecting per-transaction outcomes.

        Failures are recorded, never raised: a transfer that cannot be endorsed
        or ordered, or that a peer refuses, counts as not committed.
        """
        outcomes: dict[str, TxOutcome] = {}
        pending: list[Transaction] = []
        for i, (src, dst, amount) in enumerate(transfers):
            client = self.clients[i % len(self.clients)]
            tx_id = f"{tx_prefix}-{len(self.outcomes) + i}"
            try:
                pending.append(self.endorsed_transaction(client, src, dst, amount, tx_id))
                outcomes[tx_id] = TxOutcome(tx_id, False, "not committed")
            except HybridLedgerError as exc:
                outcomes[tx_id] = TxOutcome(tx_id, False, f"{type(exc).__name__}: {exc}")
        for start in range(0, len(pending), self.config.block_size):
            batch = pending[start : start + self.config.block_size]
            try:
                block = self.orderer.order(batch)
            except HybridLedgerError as exc:
                for tx in batch:
                    outcomes[tx.tx_id].reason = f"{type(exc).__name__}: {exc}"
                continue
            committed_everywhere = {tx.tx_id for tx in batch}
            for peer in self.peers:
                try:
                    report = peer.validate_and_commit(block.encode())
                except HybridLedgerError as exc:
                    for tx in batch:
                        outcomes[tx.tx_id].reason = f"{peer.node.name}: {type(exc).__name__}: {exc}"
                    committed_everywhere.clear()
                    continue
                for tx_id, reason in report.rejected:
                    outcomes[tx_id].reason = f"{peer.node.name}: {reason}"
                    committed_everywhere.discard(tx_id)
            for tx_id in committed_everywhere:
                outcomes[tx_id] = TxOutcome(tx_id, True)
        result = list(outcomes.values())
        self.outcomes.extend(result)
        return result


def build_network(
    pq_scheme: str | None = None,
    *,
    clients: int = 1,
    peers: int = 1,
    accounts: int = 200,
    balance: int = 1000,
    hybrid_clients: bool = True,
    verify_alt: bool = True,
    config: PipelineConfig = PipelineConfig(),
    registry: Registry | None = None,
    store_path: str | Path | None = None,
) -> Network:
    """A fully migrated network: every core node (and optionally every client) signs hybrid.

    ``pq_scheme=None`` yields a purely classical network.
    """
    registry = registry or default_registry()
    ca = make_authority("ca", pq_scheme, registry)
    client_scheme = pq_scheme if hybrid_clients else None
    client_nodes = [
        make_node(f"client{i}", Role.CLIENT, ca, client_scheme, registry, verify_alt=verify_alt)
        for i in range(clients)
    ]
    peer_nodes = [
        make_node(f"peer{i}", Role.PEER, ca, pq_scheme, registry, verify_alt=verify_alt)
        for i in range(peers)
    ]
    orderer = make_node("orderer0", Role.ORDERER, ca, pq_scheme, registry, verify_alt=verify_alt)
    return Network.from_nodes(
        ca.certificate, client_nodes, peer_nodes, orderer,
        WorldState.uniform(accounts, balance), config, store_path,
    )

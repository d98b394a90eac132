"""Execute-order-validate pipeline.

Clients propose and sign, endorsing peers verify and simulate against their
world state, a single FIFO orderer verifies and signs blocks, and committing
peers validate each transaction and apply the ones that pass.
"""

from __future__ import annotations

import logging
import secrets
import time
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from hybridledger.crypto import BucketTimer, hash_bytes, recording
from hybridledger.errors import (
    BadClientSignature,
    BadEndorsement,
    BadOrdererSignature,
    ChainBreak,
    EmptyBatch,
    InsufficientFunds,
    PayloadTooLarge,
)
from hybridledger.identity import HybridCertificate
from hybridledger.ledger.model import (
    Block,
    Endorsement,
    PipelineConfig,
    Transaction,
    TransactionProposal,
    Transfer,
    WorldState,
    encode_config,
    encode_data,
    encode_header,
    result_digest,
)
from hybridledger.ledger.nodes import Msp, Node

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlockTiming:
    block: int
    wall_ms: float
    sign_ms: float
    verify_ms: float
    hash_ms: float
    other_ms: float
    block_bytes: int = 0
    txs: int = 0


@dataclass(frozen=True)
class CommitReport:
    block: int
    applied: int
    rejected: tuple[tuple[str, str], ...]  # (tx_id, reason)
    timing: BlockTiming

    @property
    def rejected_tx_ids(self) -> list[str]:
        return [tx_id for tx_id, _ in self.rejected]


def propose(
    client: Node,
    from_account: int,
    to_account: int,
    amount: int,
    *,
    tx_id: str | None = None,
    config: PipelineConfig = PipelineConfig(),
) -> TransactionProposal:
    transfer = Transfer(from_account, to_account, amount)
    tx_id = tx_id or f"{client.name}:{secrets.token_hex(8)}"
    message = TransactionProposal.message(tx_id, client.armored_cert, transfer)
    signature = client.sign(message, config.sig_hash)
    return TransactionProposal(tx_id, client.armored_cert, transfer, signature)


def submit(
    client: Node,
    proposal: TransactionProposal,
    endorsements: Sequence[Endorsement],
    config: PipelineConfig = PipelineConfig(),
) -> Transaction:
    """Assemble the proposal and its endorsements and sign everything."""
    endorsements = tuple(endorsements)
    signature = client.sign(Transaction.signed_message(proposal, endorsements), config.sig_hash)
    return Transaction(proposal, endorsements, signature)


class Orderer:
    """Single FIFO ordering service; it tracks the chain tip it has produced."""

    def __init__(self, node: Node, ca_cert: HybridCertificate, config: PipelineConfig = PipelineConfig()):
        self.node = node
        self.config = config
        self.msp = Msp.for_node(node, ca_cert, config.sig_hash)
        self.ca_cert = ca_cert
        self.next_number = 0
        self.prev_hash = bytes(config.block_hash.digest_size)

    def _seal(self, transactions: tuple[Transaction, ...], config_blob: bytes = b"") -> Block:
        data_hash = hash_bytes(self.config.block_hash, encode_data(config_blob, transactions))
        header = encode_header(self.next_number, self.prev_hash, data_hash)
        signature = self.node.sign(header, self.config.sig_hash)
        block = Block(
            self.next_number, self.prev_hash, data_hash, transactions,
            self.node.armored_cert, signature, config_blob,
        )
        self.prev_hash = block.block_hash(self.config.block_hash)
        self.next_number += 1
        return block

    def genesis(self) -> Block:
        if self.next_number != 0:
            raise ChainBreak("genesis block already produced")
        return self._seal((), encode_config([self.ca_cert.armor().encode("ascii")]))

    def order(self, transactions: Iterable[Transaction]) -> Block:
        transactions = tuple(transactions)
        if not transactions:
            raise EmptyBatch("cannot order an empty batch")
        if len(transactions) > self.config.block_size:
            raise ValueError(f"batch of {len(transactions)} exceeds block_size {self.config.block_size}")
        for tx in transactions:
            proposal_hash = hash_bytes(self.config.sig_hash, tx.proposal.encode())
            for endorsement in tx.endorsements:
                message = Endorsement.signed_message(proposal_hash, endorsement.result_digest)
                if not self.msp.verify(endorsement.endorser_cert, message, endorsement.signature):
                    raise BadEndorsement(f"{tx.tx_id}: invalid endorsement signature")
            message = Transaction.signed_message(tx.proposal, tx.endorsements)
            if not self.msp.verify(tx.proposal.creator_cert, message, tx.submitter_signature):
                raise BadEndorsement(f"{tx.tx_id}: invalid submitter signature")
        return self._seal(transactions)


def order(orderer: Orderer, transactions: Iterable[Transaction]) -> Block:
    return orderer.order(transactions)


@dataclass
class Peer:
    """An endorsing and committing peer with its own copy of the ledger."""

    node: Node
    ca_cert: HybridCertificate
    state: WorldState
    config: PipelineConfig = PipelineConfig()
    store_path: Path | None = None
    blocks: list[Block] = field(default_factory=list)
    committed_tx_ids: set[str] = field(default_factory=set)

    def __post_init__(self):
        self.msp = Msp.for_node(self.node, self.ca_cert, self.config.sig_hash)
        if self.store_path is not None:
            Path(self.store_path).write_bytes(b"")

    @property
    def height(self) -> int:
        return len(self.blocks)

    # endorsement

    def endorse(self, proposal: TransactionProposal) -> Endorsement:
        size = len(proposal.encode())
        if size > self.config.payload_cap:
            raise PayloadTooLarge(f"proposal of {size} bytes exceeds cap {self.config.payload_cap}")
        if not self.msp.verify(proposal.creator_cert, proposal.signed_bytes, proposal.client_signature):
            raise BadClientSignature(proposal.tx_id)
        transfer = proposal.transfer
        read_set = self.state.read(transfer.from_account, transfer.to_account)
        if read_set[0] < transfer.amount:
            raise InsufficientFunds(f"{proposal.tx_id}: balance {read_set[0]} < {transfer.amount}")
        digest = result_digest(transfer, read_set, self.config.sig_hash)
        proposal_hash = hash_bytes(self.config.sig_hash, proposal.encode())
        signature = self.node.sign(Endorsement.signed_message(proposal_hash, digest), self.config.sig_hash)
        return Endorsement(self.node.armored_cert, read_set, digest, signature)

    # validation and commit

    def _check_header(self, block: Block) -> None:
        if block.number != self.height:
            raise ChainBreak(f"expected block {self.height}, got {block.number}")
        expected = (
            self.blocks[-1].block_hash(self.config.block_hash)
            if self.blocks
            else bytes(self.config.block_hash.digest_size)
        )
        if block.prev_hash != expected:
            raise ChainBreak(f"block {block.number}: prev_hash does not match the chain tip")
        if hash_bytes(self.config.block_hash, block.data_bytes) != block.data_hash:
            raise ChainBreak(f"block {block.number}: data_hash does not match contents")
        if not self.msp.verify(block.orderer_cert, block.header_bytes, block.orderer_signature):
            raise BadOrdererSignature(f"block {block.number}")

    def _validate_tx(self, tx: Transaction) -> str | None:
        """Reason the transaction must be rejected, or None if it may be applied."""
        if tx.tx_id in self.committed_tx_ids:
            return "duplicate tx_id"
        proposal = tx.proposal
        message = Transaction.signed_message(proposal, tx.endorsements)
        if not self.msp.verify(proposal.creator_cert, message, tx.submitter_signature):
            return "bad submitter signature"
        proposal_hash = hash_bytes(self.config.sig_hash, proposal.encode())
        endorsers: set[bytes] = set()
        read_set = None
        for endorsement in tx.endorsements:
            if endorsement.result_digest != result_digest(
                proposal.transfer, endorsement.read_set, self.config.sig_hash
            ):
                return "endorsement result digest mismatch"
            signed = Endorsement.signed_message(proposal_hash, endorsement.result_digest)
            if not self.msp.verify(endorsement.endorser_cert, signed, endorsement.signature):
                return "bad endorsement signature"
            if read_set is not None and endorsement.read_set != read_set:
                return "endorsements disagree"
            read_set = endorsement.read_set
            endorsers.add(endorsement.endorser_cert)
        if len(endorsers) < self.config.endorsement_threshold:
            return "endorsement policy not satisfied"
        transfer = proposal.transfer
        current = self.state.read(transfer.from_account, transfer.to_account)
        if read_set is not None and current != read_set:
            return "stale read set"
        if current[0] < transfer.amount:
            return "insufficient funds"
        return None

    def validate_and_commit(self, block: Block | bytes) -> CommitReport:
        timer = BucketTimer()
        start = time.perf_counter_ns()
        with recording(timer):
            if isinstance(block, bytes):
                raw, block = block, Block.decode(block)
            else:
                raw = block.encode()
            self._check_header(block)
            applied = 0
            rejected: list[tuple[str, str]] = []
            for tx in block.transactions:
                reason = self._validate_tx(tx)
                if reason is None:
                    self.state.apply(tx.proposal.transfer)
                    self.committed_tx_ids.add(tx.tx_id)
                    applied += 1
                else:
                    rejected.append((tx.tx_id, reason))
            self.blocks.append(block)
            if self.store_path is not None:
                with open(self.store_path, "ab") as fh:
                    fh.write(raw)
        wall_ns = time.perf_counter_ns() - start
        timing = BlockTiming(
            block.number,
            wall_ns / 1e6,
            timer.sign_ns / 1e6,
            timer.verify_ns / 1e6,
            timer.hash_ns / 1e6,
            max(0, wall_ns - timer.total_ns) / 1e6,
            len(raw),
            len(block.transactions),
        )
        if rejected:
            log.debug("block %d rejected %d transactions", block.number, len(rejected))
        return CommitReport(block.number, applied, tuple(rejected), timing)


def endorse(peer: Peer, proposal: TransactionProposal) -> Endorsement:
    return peer.endorse(proposal)


def validate_and_commit(peer: Peer, block: Block | bytes) -> CommitReport:
    return peer.validate_and_commit(block)

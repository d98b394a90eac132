"""Execute-order-validate ledger simulator over a balance-transfer world state."""

from hybridledger.ledger.model import (
    Block,
    Endorsement,
    PipelineConfig,
    Transaction,
    TransactionProposal,
    Transfer,
    WorldState,
)
from hybridledger.ledger.network import Network, build_network
from hybridledger.ledger.nodes import Msp, Node, Role, make_authority, make_node, seed_for
from hybridledger.ledger.pipeline import (
    BlockTiming,
    CommitReport,
    Orderer,
    Peer,
    endorse,
    order,
    propose,
    submit,
    validate_and_commit,
)
from hybridledger.ledger.store import decode_ledger, encode_ledger, read_ledger, verify_chain, write_ledger

__all__ = [
    "Block",
    "BlockTiming",
    "CommitReport",
    "Endorsement",
    "Msp",
    "Network",
    "Node",
    "Orderer",
    "Peer",
    "PipelineConfig",
    "Role",
    "Transaction",
    "TransactionProposal",
    "Transfer",
    "WorldState",
    "build_network",
    "decode_ledger",
    "encode_ledger",
    "endorse",
    "make_authority",
    "make_node",
    "order",
    "propose",
    "read_ledger",
    "seed_for",
    "submit",
    "validate_and_commit",
    "verify_chain",
    "write_ledger",
]

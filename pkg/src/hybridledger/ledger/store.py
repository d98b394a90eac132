"""Append-only ledger files and whole-chain verification.

A ledger file is the concatenation of TLV-encoded blocks, genesis first.
The genesis block's config carries the authority certificate, which is what
lets :func:`verify_chain` check orderer identities without outside input.
"""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

from hybridledger import tlv
from hybridledger.crypto import BLOCK_HASH, SIGNATURE_HASH, HashSpec, Registry, default_registry, hash_bytes
from hybridledger.errors import IoFailure, MalformedEncoding
from hybridledger.identity import dearmor
from hybridledger.ledger.model import TAG_BLOCK, Block, decode_config
from hybridledger.ledger.nodes import Msp


def decode_ledger(data: bytes) -> list[Block]:
    reader = tlv.Reader(data)
    blocks = []
    while not reader.at_end():
        blocks.append(Block.decode_value(*reader.read(TAG_BLOCK)))
    return blocks


def encode_ledger(blocks: Sequence[Block]) -> bytes:
    return b"".join(block.encode() for block in blocks)


def read_ledger(path: str | Path) -> list[Block]:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(str(exc)) from None
    return decode_ledger(data)


def write_ledger(path: str | Path, blocks: Sequence[Block]) -> None:
    try:
        Path(path).write_bytes(encode_ledger(blocks))
    except OSError as exc:
        raise IoFailure(str(exc)) from None


def verify_chain(
    ledger: Sequence[Block] | bytes | str | Path,
    block_hash: HashSpec = BLOCK_HASH,
    sig_hash: HashSpec = SIGNATURE_HASH,
    registry: Registry | None = None,
) -> bool:
    """Recompute every link, data hash and orderer signature; True iff all hold."""
    registry = registry or default_registry()
    try:
        if isinstance(ledger, (str, Path)):
            blocks = read_ledger(ledger)
        elif isinstance(ledger, (bytes, bytearray)):
            blocks = decode_ledger(bytes(ledger))
        else:
            blocks = list(ledger)
        if not blocks:
            return False
        certs = decode_config(blocks[0].config)
        if not certs:
            return False
        ca_cert = dearmor(certs[0])
    except (MalformedEncoding, IoFailure):
        return False
    msp = Msp(ca_cert, registry, hybrid_aware=True, verify_alt=True, sig_hash=sig_hash)
    prev = bytes(block_hash.digest_size)
    for number, block in enumerate(blocks):
        if block.number != number or block.prev_hash != prev:
            return False
        if number > 0 and block.config:
            return False
        if hash_bytes(block_hash, block.data_bytes) != block.data_hash:
            return False
        if not msp.verify(block.orderer_cert, block.header_bytes, block.orderer_signature):
            return False
        prev = block.block_hash(block_hash)
    return True

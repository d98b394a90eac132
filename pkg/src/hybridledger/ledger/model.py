"""Ledger data types and their TLV encodings.

Certificates travel inside transactions in armored form, the way Fabric
embeds PEM certificates in serialized identities; the payload cap and block
hashing costs therefore see the full armored size.

Tag map::

    0x60 block        0x61 number  0x62 prev_hash  0x63 data_hash
                      0x64 config  0x65 transactions  0x66 orderer cert
                      0x67 orderer signature  0x68 authority cert (in config)
    0x70 transaction  0x71 proposal  0x72 tx_id  0x73 creator cert
                      0x74 transfer (from, to, amount as u64)
                      0x75 client signature  0x76 endorsements
                      0x7C submitter signature
    0x77 endorsement  0x78 endorser cert  0x79 read set (2 x u64)
                      0x7A result digest  0x7B endorsement signature
                      0x7D proposal hash (inside signed endorsement payload)
"""

from __future__ import annotations

import functools
import struct
import threading
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from hybridledger import tlv
from hybridledger.crypto import BLOCK_HASH, SIGNATURE_HASH, HashSpec, hash_bytes
from hybridledger.errors import InvalidTransfer, MalformedEncoding
from hybridledger.hybrid import HybridSignature

TAG_BLOCK = 0x60
TAG_NUMBER = 0x61
TAG_PREV_HASH = 0x62
TAG_DATA_HASH = 0x63
TAG_CONFIG = 0x64
TAG_TRANSACTIONS = 0x65
TAG_ORDERER_CERT = 0x66
TAG_ORDERER_SIG = 0x67
TAG_CONFIG_CERT = 0x68
TAG_TRANSACTION = 0x70
TAG_PROPOSAL = 0x71
TAG_TX_ID = 0x72
TAG_CREATOR_CERT = 0x73
TAG_TRANSFER = 0x74
TAG_CLIENT_SIG = 0x75
TAG_ENDORSEMENTS = 0x76
TAG_ENDORSEMENT = 0x77
TAG_ENDORSER_CERT = 0x78
TAG_READ_SET = 0x79
TAG_RESULT_DIGEST = 0x7A
TAG_ENDORSEMENT_SIG = 0x7B
TAG_SUBMITTER_SIG = 0x7C
TAG_PROPOSAL_HASH = 0x7D

_U64X2 = struct.Struct(">QQ")
_U64X3 = struct.Struct(">QQQ")


@dataclass(frozen=True)
class PipelineConfig:
    endorsement_threshold: int = 1
    block_size: int = 100
    payload_cap: int = 32768
    block_hash: HashSpec = BLOCK_HASH
    sig_hash: HashSpec = SIGNATURE_HASH

    def __post_init__(self):
        if self.block_size < 1 or self.payload_cap < 1:
            raise ValueError("block_size and payload_cap must be >= 1")
        if self.endorsement_threshold < 0:
            raise ValueError("endorsement_threshold must be >= 0")


@dataclass(frozen=True)
class Transfer:
    from_account: int
    to_account: int
    amount: int

    def __post_init__(self):
        if self.from_account == self.to_account:
            raise InvalidTransfer("source and destination accounts must differ")
        if self.amount <= 0:
            raise InvalidTransfer("amount must be positive")
        if min(self.from_account, self.to_account) < 0:
            raise InvalidTransfer("account ids are non-negative")

    def encode(self) -> bytes:
        return tlv.encode(TAG_TRANSFER, _U64X3.pack(self.from_account, self.to_account, self.amount))

    @classmethod
    def decode_value(cls, value: bytes, at: int) -> Transfer:
        if len(value) != _U64X3.size:
            raise MalformedEncoding("transfer must be 24 bytes", at)
        try:
            return cls(*_U64X3.unpack(value))
        except InvalidTransfer as exc:
            raise MalformedEncoding(str(exc), at) from None


def result_digest(transfer: Transfer, read_set: tuple[int, int], spec: HashSpec = SIGNATURE_HASH) -> bytes:
    """Digest of the simulated execution: the transfer plus the balances it read."""
    return hash_bytes(spec, transfer.encode() + tlv.encode(TAG_READ_SET, _U64X2.pack(*read_set)))


@dataclass(frozen=True)
class TransactionProposal:
    tx_id: str
    creator_cert: bytes  # armored
    transfer: Transfer
    client_signature: HybridSignature

    @staticmethod
    def message(tx_id: str, creator_cert: bytes, transfer: Transfer) -> bytes:
        """The bytes covered by the client signature."""
        return (
            tlv.encode(TAG_TX_ID, tx_id.encode("utf-8"))
            + tlv.encode(TAG_CREATOR_CERT, creator_cert)
            + transfer.encode()
        )

    @functools.cached_property
    def signed_bytes(self) -> bytes:
        return self.message(self.tx_id, self.creator_cert, self.transfer)

    @functools.cached_property
    def encoded(self) -> bytes:
        return tlv.encode(
            TAG_PROPOSAL,
            self.signed_bytes + tlv.encode(TAG_CLIENT_SIG, self.client_signature.encode()),
        )

    def encode(self) -> bytes:
        return self.encoded

    @classmethod
    def decode_value(cls, value: bytes, at: int) -> TransactionProposal:
        r = tlv.Reader(value, at)
        tx_id_raw, tx_at = r.read(TAG_TX_ID)
        try:
            tx_id = tx_id_raw.decode("utf-8")
        except UnicodeDecodeError:
            raise MalformedEncoding("tx_id is not utf-8", tx_at) from None
        creator, _ = r.read(TAG_CREATOR_CERT)
        transfer = Transfer.decode_value(*r.read(TAG_TRANSFER))
        signature = HybridSignature.decode(*r.read(TAG_CLIENT_SIG))
        r.finish()
        return cls(tx_id, creator, transfer, signature)


@dataclass(frozen=True)
class Endorsement:
    endorser_cert: bytes  # armored
    read_set: tuple[int, int]  # balances of (from, to) seen during simulation
    result_digest: bytes
    signature: HybridSignature

    @staticmethod
    def signed_message(proposal_hash: bytes, digest: bytes) -> bytes:
        return tlv.encode(TAG_PROPOSAL_HASH, proposal_hash) + tlv.encode(TAG_RESULT_DIGEST, digest)

    @functools.cached_property
    def encoded(self) -> bytes:
        return tlv.encode(
            TAG_ENDORSEMENT,
            tlv.encode(TAG_ENDORSER_CERT, self.endorser_cert)
            + tlv.encode(TAG_READ_SET, _U64X2.pack(*self.read_set))
            + tlv.encode(TAG_RESULT_DIGEST, self.result_digest)
            + tlv.encode(TAG_ENDORSEMENT_SIG, self.signature.encode()),
        )

    def encode(self) -> bytes:
        return self.encoded

    @classmethod
    def decode_value(cls, value: bytes, at: int) -> Endorsement:
        r = tlv.Reader(value, at)
        cert, _ = r.read(TAG_ENDORSER_CERT)
        read_set = _U64X2.unpack(r.read_fixed(TAG_READ_SET, _U64X2.size))
        digest, _ = r.read(TAG_RESULT_DIGEST)
        signature = HybridSignature.decode(*r.read(TAG_ENDORSEMENT_SIG))
        r.finish()
        return cls(cert, tuple(read_set), digest, signature)


def _encode_endorsements(endorsements: Iterable[Endorsement]) -> bytes:
    return tlv.encode(TAG_ENDORSEMENTS, b"".join(e.encode() for e in endorsements))


@dataclass(frozen=True)
class Transaction:
    proposal: TransactionProposal
    endorsements: tuple[Endorsement, ...]
    submitter_signature: HybridSignature

    @property
    def tx_id(self) -> str:
        return self.proposal.tx_id

    @staticmethod
    def signed_message(proposal: TransactionProposal, endorsements: Iterable[Endorsement]) -> bytes:
        return proposal.encode() + _encode_endorsements(endorsements)

    @functools.cached_property
    def encoded(self) -> bytes:
        return tlv.encode(
            TAG_TRANSACTION,
            self.signed_message(self.proposal, self.endorsements)
            + tlv.encode(TAG_SUBMITTER_SIG, self.submitter_signature.encode()),
        )

    def encode(self) -> bytes:
        return self.encoded

    @classmethod
    def decode_value(cls, value: bytes, at: int) -> Transaction:
        r = tlv.Reader(value, at)
        proposal = TransactionProposal.decode_value(*r.read(TAG_PROPOSAL))
        group = tlv.Reader(*r.read(TAG_ENDORSEMENTS))
        endorsements = []
        while not group.at_end():
            endorsements.append(Endorsement.decode_value(*group.read(TAG_ENDORSEMENT)))
        signature = HybridSignature.decode(*r.read(TAG_SUBMITTER_SIG))
        r.finish()
        return cls(proposal, tuple(endorsements), signature)

    def signatures(self) -> list[HybridSignature]:
        return [
            self.proposal.client_signature,
            *(e.signature for e in self.endorsements),
            self.submitter_signature,
        ]


def encode_data(config: bytes, transactions: Iterable[Transaction]) -> bytes:
    return tlv.encode(TAG_CONFIG, config) + tlv.encode(
        TAG_TRANSACTIONS, b"".join(tx.encode() for tx in transactions)
    )


def encode_header(number: int, prev_hash: bytes, data_hash: bytes) -> bytes:
    return (
        tlv.encode_u64(TAG_NUMBER, number)
        + tlv.encode(TAG_PREV_HASH, prev_hash)
        + tlv.encode(TAG_DATA_HASH, data_hash)
    )


@dataclass(frozen=True)
class Block:
    number: int
    prev_hash: bytes
    data_hash: bytes
    transactions: tuple[Transaction, ...]
    orderer_cert: bytes  # armored
    orderer_signature: HybridSignature
    config: bytes = b""  # genesis only: concatenated armored authority certificates

    @functools.cached_property
    def header_bytes(self) -> bytes:
        return encode_header(self.number, self.prev_hash, self.data_hash)

    @functools.cached_property
    def data_bytes(self) -> bytes:
        return encode_data(self.config, self.transactions)

    def block_hash(self, spec: HashSpec = BLOCK_HASH) -> bytes:
        return hash_bytes(spec, self.header_bytes)

    @functools.cached_property
    def encoded(self) -> bytes:
        return tlv.encode(
            TAG_BLOCK,
            self.header_bytes
            + self.data_bytes
            + tlv.encode(TAG_ORDERER_CERT, self.orderer_cert)
            + tlv.encode(TAG_ORDERER_SIG, self.orderer_signature.encode()),
        )

    def encode(self) -> bytes:
        return self.encoded

    @classmethod
    def decode(cls, data: bytes, base: int = 0) -> Block:
        outer = tlv.Reader(data, base)
        block = cls.decode_value(*outer.read(TAG_BLOCK))
        outer.finish()
        return block

    @classmethod
    def decode_value(cls, value: bytes, at: int) -> Block:
        r = tlv.Reader(value, at)
        number = r.read_u64(TAG_NUMBER)
        prev_hash, _ = r.read(TAG_PREV_HASH)
        data_hash, _ = r.read(TAG_DATA_HASH)
        config, _ = r.read(TAG_CONFIG)
        group = tlv.Reader(*r.read(TAG_TRANSACTIONS))
        transactions = []
        while not group.at_end():
            transactions.append(Transaction.decode_value(*group.read(TAG_TRANSACTION)))
        orderer_cert, _ = r.read(TAG_ORDERER_CERT)
        signature = HybridSignature.decode(*r.read(TAG_ORDERER_SIG))
        r.finish()
        return cls(number, prev_hash, data_hash, tuple(transactions), orderer_cert, signature, config)

    def signatures(self) -> list[HybridSignature]:
        return [sig for tx in self.transactions for sig in tx.signatures()] + [self.orderer_signature]


def encode_config(ca_certs: Iterable[bytes]) -> bytes:
    return b"".join(tlv.encode(TAG_CONFIG_CERT, cert) for cert in ca_certs)


def decode_config(config: bytes) -> list[bytes]:
    """Armored authority certificates carried by a genesis block."""
    reader = tlv.Reader(config)
    certs = []
    while not reader.at_end():
        certs.append(reader.read(TAG_CONFIG_CERT)[0])
    return certs


@dataclass
class WorldState:
    """Account balances. Only the committing peer mutates it."""

    balances: dict[int, int] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @classmethod
    def uniform(cls, accounts: int, balance: int) -> WorldState:
        return cls({i: balance for i in range(accounts)})

    def read(self, *accounts: int) -> tuple[int, ...]:
        with self._lock:
            return tuple(self.balances.get(a, 0) for a in accounts)

    def apply(self, transfer: Transfer) -> None:
        with self._lock:
            if self.balances.get(transfer.from_account, 0) < transfer.amount:
                raise ValueError("negative balance")
            self.balances[transfer.from_account] -= transfer.amount
            self.balances[transfer.to_account] = self.balances.get(transfer.to_account, 0) + transfer.amount

    def total(self) -> int:
        with self._lock:
            return sum(self.balances.values())

    def snapshot(self) -> Mapping[int, int]:
        with self._lock:
            return dict(self.balances)

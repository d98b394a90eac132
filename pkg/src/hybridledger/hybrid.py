"""Hybrid signature combiners.

Two constructions are provided:

* concatenation, used for transaction and block signatures: the post-quantum
  and classical keys each sign the same digest independently;
* nested dual-message, used for certificate material: the post-quantum key
  signs ``m1`` and the classical key signs ``(m1, sigma1, m2)``, so the
  classical signature cannot be detached from the post-quantum layer.

Wire format of a concatenated signature (all TLV, see :mod:`hybridledger.tlv`)::

    [0x01 | len | name_len name pq_sig]          optional, always first
    [0x02 | len | name_len name classical_sig]

Whether a signature *must* be hybrid is never read from the signature itself;
callers pass ``expect_hybrid`` derived from the signer's certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from hybridledger import tlv
from hybridledger.crypto import SIGNATURE_HASH, KeyPair, PublicKey, Registry, default_registry, hash_bytes
from hybridledger.errors import HybridLedgerError, MalformedEncoding

TAG_PQ = 0x01
TAG_CLASSICAL = 0x02
TAG_ABSENT = 0x03
TAG_NESTED_M1 = 0x10
TAG_NESTED_SIGMA1 = 0x11
TAG_NESTED_M2 = 0x12

# "no post-quantum key" is itself a signed statement, never the empty string
ABSENCE_MARKER = tlv.encode(TAG_ABSENT, b"\x00")


class Component(NamedTuple):
    scheme: str
    signature: bytes

    def encode_value(self) -> bytes:
        return tlv.encode_named(self.scheme, self.signature)

    @classmethod
    def decode_value(cls, value: bytes, base: int = 0) -> Component:
        name, signature = tlv.decode_named(value, base)
        if not signature:
            raise MalformedEncoding("empty signature component", base)
        return cls(name, signature)


@dataclass(frozen=True)
class HybridSignature:
    classical: Component
    pq: Component | None = None

    @property
    def is_hybrid(self) -> bool:
        return self.pq is not None

    def encode(self) -> bytes:
        out = b""
        if self.pq is not None:
            out += tlv.encode(TAG_PQ, self.pq.encode_value())
        return out + tlv.encode(TAG_CLASSICAL, self.classical.encode_value())

    @classmethod
    def decode(cls, data: bytes, base: int = 0) -> HybridSignature:
        reader = tlv.Reader(data, base)
        pq = None
        if reader.peek_tag() == TAG_PQ:
            pq = Component.decode_value(*reader.read(TAG_PQ))
        classical = Component.decode_value(*reader.read(TAG_CLASSICAL))
        reader.finish()
        return cls(classical, pq)


def encode_hybrid(signature: HybridSignature) -> bytes:
    return signature.encode()


def decode_hybrid(data: bytes) -> HybridSignature:
    return HybridSignature.decode(data)


def sign_concat(
    classical_key: KeyPair,
    pq_key: KeyPair | None,
    digest: bytes,
    registry: Registry | None = None,
) -> HybridSignature:
    registry = registry or default_registry()
    pq = None
    if pq_key is not None:
        pq = Component(pq_key.scheme.name, registry.sign(pq_key, digest))
    classical = Component(classical_key.scheme.name, registry.sign(classical_key, digest))
    return HybridSignature(classical, pq)


def _component_ok(registry: Registry, public: PublicKey, digest: bytes, comp: Component) -> bool:
    if comp.scheme != public.scheme:
        return False
    try:
        return registry.verify(public, digest, comp.signature)
    except HybridLedgerError:
        return False


def verify_concat(
    expect_hybrid: bool,
    classical_pk: PublicKey,
    pq_pk: PublicKey | None,
    digest: bytes,
    signature: HybridSignature | bytes,
    registry: Registry | None = None,
) -> bool:
    registry = registry or default_registry()
    if not isinstance(signature, HybridSignature):
        try:
            signature = HybridSignature.decode(signature)
        except MalformedEncoding:
            return False
    if expect_hybrid:
        if signature.pq is None or pq_pk is None:
            return False
        # evaluate both so timing does not reveal which half failed
        pq_ok = _component_ok(registry, pq_pk, digest, signature.pq)
        classical_ok = _component_ok(registry, classical_pk, digest, signature.classical)
        return pq_ok and classical_ok
    if signature.pq is not None:
        return False
    return _component_ok(registry, classical_pk, digest, signature.classical)


# nested dual-message combiner


@dataclass(frozen=True)
class DualMessage:
    m1: bytes
    m2: bytes

    def __post_init__(self):
        if not self.m1:
            raise ValueError("m1 must be key material or ABSENCE_MARKER, never empty")


@dataclass(frozen=True)
class NestedSignature:
    sigma1: Component
    sigma2: Component


class NestedVerdict(NamedTuple):
    sigma1_ok: bool | None  # None when no post-quantum issuer key was supplied
    sigma2_ok: bool


def nested_payload(m1: bytes, sigma1: Component, m2: bytes) -> bytes:
    """Byte string covered by the outer classical signature."""
    return (
        tlv.encode(TAG_NESTED_M1, m1)
        + tlv.encode(TAG_NESTED_SIGMA1, sigma1.encode_value())
        + tlv.encode(TAG_NESTED_M2, m2)
    )


def sign_nested(
    pq_issuer_key: KeyPair,
    classical_issuer_key: KeyPair,
    dual: DualMessage,
    registry: Registry | None = None,
) -> NestedSignature:
    registry = registry or default_registry()
    h1 = hash_bytes(SIGNATURE_HASH, dual.m1)
    sigma1 = Component(pq_issuer_key.scheme.name, registry.sign(pq_issuer_key, h1))
    h2 = hash_bytes(SIGNATURE_HASH, nested_payload(dual.m1, sigma1, dual.m2))
    sigma2 = Component(classical_issuer_key.scheme.name, registry.sign(classical_issuer_key, h2))
    return NestedSignature(sigma1, sigma2)


def verify_nested(
    pq_issuer_pk: PublicKey | None,
    classical_issuer_pk: PublicKey,
    dual: DualMessage,
    nsig: NestedSignature,
    registry: Registry | None = None,
) -> NestedVerdict:
    registry = registry or default_registry()
    sigma1_ok = None
    if pq_issuer_pk is not None:
        sigma1_ok = _component_ok(
            registry, pq_issuer_pk, hash_bytes(SIGNATURE_HASH, dual.m1), nsig.sigma1
        )
    h2 = hash_bytes(SIGNATURE_HASH, nested_payload(dual.m1, nsig.sigma1, dual.m2))
    return NestedVerdict(sigma1_ok, _component_ok(registry, classical_issuer_pk, h2, nsig.sigma2))

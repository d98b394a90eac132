"""Network participants and the per-node membership service (MSP).

A :class:`Node` owns keys and a certificate and decides, from its own
certificate, whether to sign hybrid. An :class:`Msp` is the verifying half:
it validates identities against the authority certificate and checks
signatures the way the node's software version would.
"""

from __future__ import annotations

import enum
import functools
import hashlib
import threading
from dataclasses import dataclass, field

from hybridledger.crypto import (
    CLASSICAL_DEFAULT,
    SIGNATURE_HASH,
    HashSpec,
    KeyPair,
    Registry,
    default_registry,
    hash_bytes,
)
from hybridledger.errors import MalformedEncoding
from hybridledger.hybrid import HybridSignature, sign_concat, verify_concat
from hybridledger.identity import (
    AltVerdict,
    CertAuthority,
    CertKind,
    HybridCertificate,
    VerificationContext,
    create_authority,
    dearmor,
    extract_verification_context,
    issue_certificate,
    verify_certificate,
)


class Role(enum.Enum):
    CLIENT = "client"
    PEER = "peer"
    ORDERER = "orderer"
    CA = "ca"

    @property
    def is_core(self) -> bool:
        return self in (Role.PEER, Role.ORDERER)


def seed_for(label: str, purpose: str) -> bytes:
    """Deterministic 32-byte key seed so whole networks are reproducible."""
    return hashlib.sha256(f"{label}/{purpose}".encode()).digest()


@dataclass(frozen=True)
class Node:
    name: str
    role: Role
    classical_keys: KeyPair
    certificate: HybridCertificate
    pq_keys: KeyPair | None = None
    hybrid_aware: bool = True  # software can unpack and check hybrid signatures
    verify_alt: bool = False  # checks AltSignatureValue on received certificates
    registry: Registry = field(default_factory=default_registry, repr=False, compare=False)

    @functools.cached_property
    def armored_cert(self) -> bytes:
        return self.certificate.armor().encode("ascii")

    @property
    def signs_hybrid(self) -> bool:
        # the key is only used when the node's own certificate advertises it
        return (
            self.pq_keys is not None
            and self.certificate.kind is CertKind.HYBRID
            and self.certificate.pq_public_key == self.pq_keys.public
        )

    def sign(self, message: bytes, spec: HashSpec = SIGNATURE_HASH) -> HybridSignature:
        digest = hash_bytes(spec, message)
        pq = self.pq_keys if self.signs_hybrid else None
        return sign_concat(self.classical_keys, pq, digest, self.registry)


def make_authority(
    name: str = "ca",
    pq_scheme: str | None = None,
    registry: Registry | None = None,
    classical_scheme: str = CLASSICAL_DEFAULT,
) -> CertAuthority:
    registry = registry or default_registry()
    classical = registry.keygen(classical_scheme, seed_for(name, "classical"))
    pq = registry.keygen(pq_scheme, seed_for(name, "pq:" + pq_scheme)) if pq_scheme else None
    return create_authority(name, classical, pq, registry)


def make_node(
    name: str,
    role: Role,
    ca: CertAuthority,
    pq_scheme: str | None = None,
    registry: Registry | None = None,
    classical_scheme: str = CLASSICAL_DEFAULT,
    **flags,
) -> Node:
    """Generate keys for ``name`` and have ``ca`` certify them."""
    registry = registry or default_registry()
    classical = registry.keygen(classical_scheme, seed_for(name, "classical"))
    pq = registry.keygen(pq_scheme, seed_for(name, "pq:" + pq_scheme)) if pq_scheme else None
    cert = issue_certificate(
        ca, name, classical.public, pq.public if pq else None, registry=registry
    )
    return Node(name, role, classical, cert, pq, registry=registry, **flags)


class Msp:
    """Identity validation and signature checking on behalf of one node."""

    def __init__(
        self,
        ca_cert: HybridCertificate,
        registry: Registry | None = None,
        hybrid_aware: bool = True,
        verify_alt: bool = False,
        sig_hash: HashSpec = SIGNATURE_HASH,
    ):
        self.ca_cert = ca_cert
        self.registry = registry or default_registry()
        self.hybrid_aware = hybrid_aware
        self.verify_alt = verify_alt
        self.sig_hash = sig_hash
        self._cache: dict[bytes, VerificationContext | None] = {}
        self._lock = threading.Lock()

    @classmethod
    def for_node(cls, node: Node, ca_cert: HybridCertificate, sig_hash: HashSpec = SIGNATURE_HASH) -> Msp:
        return cls(ca_cert, node.registry, node.hybrid_aware, node.verify_alt, sig_hash)

    def identity(self, armored: bytes) -> VerificationContext | None:
        """Verification context for a serialized identity, or None if it is not trusted."""
        with self._lock:
            if armored in self._cache:
                return self._cache[armored]
        context = self._validate(armored)
        with self._lock:
            self._cache[armored] = context
        return context

    def _validate(self, armored: bytes) -> VerificationContext | None:
        try:
            cert = dearmor(armored)
        except MalformedEncoding:
            return None
        verdict = verify_certificate(cert, self.ca_cert, self.verify_alt, self.registry)
        if not verdict.classical_ok or verdict.alt_ok is AltVerdict.REJECT:
            return None
        return extract_verification_context(cert, pq_aware=self.hybrid_aware)

    def verify(self, armored: bytes, message: bytes, signature: HybridSignature | bytes) -> bool:
        context = self.identity(armored)
        if context is None:
            return False
        digest = hash_bytes(self.sig_hash, message)
        return verify_concat(
            context.expect_hybrid, context.classical_pk, context.pq_pk, digest, signature, self.registry
        )

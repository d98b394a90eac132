"""Hybrid certificates, the issuing authority, and MSP-style verification helpers.

A certificate is a TLV structure::

    0x20 certificate
      0x21 body
        0x22 serial (u64)        0x23 subject (utf-8)     0x24 issuer (utf-8)
        0x25 validity (2 x u64)  0x26 classical public key (named)
        0x27 extensions, sorted by extension id, each
             [ext_id | len | critical_byte payload]
      0x28 outer classical signature (named), over SHA-384(body TLV)

Extension ids: 0x51 SubjectAltPublicKeyInfo (named PQ public key),
0x52 AltSignatureValue (raw PQ signature), 0x53 AltSignatureAlgorithm (scheme
name), 0x5F Padding (zero bytes).

The alternative signature is the inner half of the nested combiner: the
issuer's PQ key signs ``m1`` (subject classical key + subject PQ key or the
absence marker) and the outer classical signature covers the whole body,
which embeds ``m1``'s keys and ``sigma1``. Stripping any extension therefore
breaks the classical signature.
"""

from __future__ import annotations

import base64
import enum
import functools
import hashlib
import math
from dataclasses import dataclass
from typing import NamedTuple

from hybridledger import tlv
from hybridledger.crypto import (
    SIGNATURE_HASH,
    KeyPair,
    PublicKey,
    Registry,
    SchemeKind,
    default_registry,
    hash_bytes,
)
from hybridledger.errors import HybridLedgerError, MalformedEncoding, SchemeMismatch
from hybridledger.hybrid import ABSENCE_MARKER, Component

TAG_CLASSICAL_KEY = 0x04
TAG_PQ_KEY = 0x05
TAG_CERT = 0x20
TAG_BODY = 0x21
TAG_SERIAL = 0x22
TAG_SUBJECT = 0x23
TAG_ISSUER = 0x24
TAG_VALIDITY = 0x25
TAG_SUBJECT_KEY = 0x26
TAG_EXTENSIONS = 0x27
TAG_OUTER_SIG = 0x28

ARMOR_HEADER = "-----BEGIN HYBRID CERT-----"
ARMOR_FOOTER = "-----END HYBRID CERT-----"
ARMOR_LINE = 64

# Raw size every certificate's classical part is padded to. 564 raw bytes
# armor to exactly 818 bytes, the size of a classical ECDSA certificate.
CLASSICAL_RAW_SIZE = 564

DEFAULT_VALIDITY = (1609459200, 1924992000)  # 2021-01-01 .. 2031-01-01 UTC


class ExtensionId(enum.IntEnum):
    SUBJECT_ALT_PUBLIC_KEY_INFO = 0x51
    ALT_SIGNATURE_VALUE = 0x52
    ALT_SIGNATURE_ALGORITHM = 0x53
    PADDING = 0x5F


ALT_EXTENSIONS = frozenset(
    {
        ExtensionId.SUBJECT_ALT_PUBLIC_KEY_INFO,
        ExtensionId.ALT_SIGNATURE_VALUE,
        ExtensionId.ALT_SIGNATURE_ALGORITHM,
    }
)


class CertKind(enum.Enum):
    CLASSICAL_ONLY = "classical-only"
    LEGACY = "legacy"
    HYBRID = "hybrid"


class AltVerdict(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class Extension:
    ext_id: ExtensionId
    value: bytes
    critical: bool = False

    def encode(self) -> bytes:
        return tlv.encode(int(self.ext_id), bytes([int(self.critical)]) + self.value)


def encode_public_key(tag: int, key: PublicKey) -> bytes:
    return tlv.encode(tag, tlv.encode_named(key.scheme, key.key))


def key_material(classical_pk: PublicKey, pq_pk: PublicKey | None) -> bytes:
    """The ``m1`` message signed by the issuer's post-quantum key."""
    pq_part = ABSENCE_MARKER if pq_pk is None else encode_public_key(TAG_PQ_KEY, pq_pk)
    return encode_public_key(TAG_CLASSICAL_KEY, classical_pk) + pq_part


@dataclass(frozen=True)
class CertificateBody:
    serial: int
    subject: str
    issuer: str
    validity: tuple[int, int]
    classical_pk: PublicKey
    extensions: tuple[Extension, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.extensions, key=lambda e: e.ext_id))
        object.__setattr__(self, "extensions", ordered)
        ids = [e.ext_id for e in ordered]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate certificate extension")
        if any(e.critical for e in ordered if e.ext_id in ALT_EXTENSIONS):
            raise ValueError("alternative extensions must be non-critical")
        present = set(ids)
        if (ExtensionId.ALT_SIGNATURE_VALUE in present) != (
            ExtensionId.ALT_SIGNATURE_ALGORITHM in present
        ):
            raise ValueError("AltSignatureValue and AltSignatureAlgorithm come together")

    def extension(self, ext_id: ExtensionId) -> Extension | None:
        for ext in self.extensions:
            if ext.ext_id == ext_id:
                return ext
        return None

    def encode(self) -> bytes:
        inner = (
            tlv.encode_u64(TAG_SERIAL, self.serial)
            + tlv.encode(TAG_SUBJECT, self.subject.encode("utf-8"))
            + tlv.encode(TAG_ISSUER, self.issuer.encode("utf-8"))
            + tlv.encode(
                TAG_VALIDITY,
                self.validity[0].to_bytes(8, "big") + self.validity[1].to_bytes(8, "big"),
            )
            + tlv.encode(TAG_SUBJECT_KEY, tlv.encode_named(*self.classical_pk))
            + tlv.encode(TAG_EXTENSIONS, b"".join(e.encode() for e in self.extensions))
        )
        return tlv.encode(TAG_BODY, inner)


def _decode_text(value: bytes, at: int) -> str:
    try:
        return value.decode("utf-8")
    except UnicodeDecodeError:
        raise MalformedEncoding("invalid utf-8", at) from None


def _decode_extensions(value: bytes, base: int) -> tuple[Extension, ...]:
    reader = tlv.Reader(value, base)
    out: list[Extension] = []
    last = -1
    while not reader.at_end():
        start = reader.offset
        tag = reader.peek_tag()
        if tag not in ExtensionId._value2member_map_ or tag <= last:
            raise MalformedEncoding("unknown, duplicate or unsorted extension", start)
        payload, at = reader.read(tag)
        if not payload or payload[0] > 1:
            raise MalformedEncoding("bad extension criticality byte", at)
        ext_id = ExtensionId(tag)
        if payload[0] and ext_id in ALT_EXTENSIONS:
            raise MalformedEncoding("alternative extension marked critical", at)
        out.append(Extension(ext_id, payload[1:], bool(payload[0])))
        last = tag
    return tuple(out)


def _decode_body(value: bytes, base: int) -> CertificateBody:
    r = tlv.Reader(value, base)
    serial = r.read_u64(TAG_SERIAL)
    subject = _decode_text(*r.read(TAG_SUBJECT))
    issuer = _decode_text(*r.read(TAG_ISSUER))
    validity_raw = r.read_fixed(TAG_VALIDITY, 16)
    key_value, key_at = r.read(TAG_SUBJECT_KEY)
    classical_pk = PublicKey(*tlv.decode_named(key_value, key_at))
    extensions = _decode_extensions(*r.read(TAG_EXTENSIONS))
    r.finish()
    try:
        return CertificateBody(
            serial,
            subject,
            issuer,
            (int.from_bytes(validity_raw[:8], "big"), int.from_bytes(validity_raw[8:], "big")),
            classical_pk,
            extensions,
        )
    except ValueError as exc:
        raise MalformedEncoding(str(exc), base) from None


@dataclass(frozen=True)
class HybridCertificate:
    body: CertificateBody
    outer_signature: Component

    @functools.cached_property
    def body_bytes(self) -> bytes:
        return self.body.encode()

    def encode(self) -> bytes:
        return tlv.encode(
            TAG_CERT,
            self.body_bytes + tlv.encode(TAG_OUTER_SIG, self.outer_signature.encode_value()),
        )

    @classmethod
    def decode(cls, data: bytes) -> HybridCertificate:
        outer = tlv.Reader(data)
        value, at = outer.read(TAG_CERT)
        outer.finish()
        r = tlv.Reader(value, at)
        body = _decode_body(*r.read(TAG_BODY))
        signature = Component.decode_value(*r.read(TAG_OUTER_SIG))
        r.finish()
        return cls(body, signature)

    @property
    def subject(self) -> str:
        return self.body.subject

    @property
    def pq_public_key(self) -> PublicKey | None:
        ext = self.body.extension(ExtensionId.SUBJECT_ALT_PUBLIC_KEY_INFO)
        if ext is None:
            return None
        try:
            return PublicKey(*tlv.decode_named(ext.value))
        except MalformedEncoding:
            return None

    @property
    def alt_extensions(self) -> tuple[Extension, ...]:
        return tuple(e for e in self.body.extensions if e.ext_id in ALT_EXTENSIONS)

    @property
    def kind(self) -> CertKind:
        if self.pq_public_key is not None:
            return CertKind.HYBRID
        if self.body.extension(ExtensionId.ALT_SIGNATURE_VALUE) is not None:
            return CertKind.LEGACY
        return CertKind.CLASSICAL_ONLY

    def armor(self) -> str:
        return armor(self)


def armor(cert: HybridCertificate) -> str:
    text = base64.b64encode(cert.encode()).decode("ascii")
    lines = [text[i : i + ARMOR_LINE] for i in range(0, len(text), ARMOR_LINE)]
    return "\n".join([ARMOR_HEADER, *lines, ARMOR_FOOTER]) + "\n"


def armored_size(raw_size: int) -> int:
    chars = 4 * math.ceil(raw_size / 3)
    return len(ARMOR_HEADER) + len(ARMOR_FOOTER) + 2 + chars + math.ceil(chars / ARMOR_LINE)


def dearmor(text: str | bytes) -> HybridCertificate:
    if isinstance(text, bytes):
        try:
            text = text.decode("ascii")
        except UnicodeDecodeError:
            raise MalformedEncoding("armored certificate is not ASCII", 0) from None
    lines = text.replace("\r\n", "\n").rstrip("\n").split("\n")
    if len(lines) < 3 or lines[0] != ARMOR_HEADER or lines[-1] != ARMOR_FOOTER:
        raise MalformedEncoding("missing armor header or footer", 0)
    try:
        raw = base64.b64decode("".join(lines[1:-1]), validate=True)
    except ValueError:
        raise MalformedEncoding("invalid base64 body", len(ARMOR_HEADER) + 1) from None
    cert = HybridCertificate.decode(raw)
    if armor(cert) != "\n".join(lines) + "\n":
        raise MalformedEncoding("non-canonical armor layout", 0)
    return cert


@dataclass(frozen=True)
class CertAuthority:
    name: str
    classical_keys: KeyPair
    pq_keys: KeyPair | None
    certificate: HybridCertificate

    @property
    def is_hybrid(self) -> bool:
        return self.pq_keys is not None


def default_serial(subject: str, classical_pk: PublicKey) -> int:
    seed = subject.encode("utf-8") + classical_pk.key
    return int.from_bytes(hashlib.sha256(seed).digest()[:8], "big") >> 1


def _check_key(registry: Registry, key: PublicKey, kind: SchemeKind) -> None:
    try:
        profile = registry.get(key.scheme)
    except HybridLedgerError:
        raise SchemeMismatch(f"scheme {key.scheme!r} is not registered") from None
    if profile.kind is not kind:
        raise SchemeMismatch(f"{key.scheme} is not a {kind.value} scheme")
    if len(key.key) != profile.pk_size:
        raise SchemeMismatch(f"{key.scheme} public key must be {profile.pk_size} bytes")


def _padding_for(body: CertificateBody, outer_sig_len: int, target: int) -> int:
    """Zero bytes needed so the classical part of the certificate is ``target`` raw bytes."""
    classical = [e for e in body.extensions if e.ext_id not in ALT_EXTENSIONS]
    probe = CertificateBody(
        body.serial, body.subject, body.issuer, body.validity, body.classical_pk,
        (*classical, Extension(ExtensionId.PADDING, b"")),
    )
    size = len(probe.encode()) + 2 * tlv.HEADER_SIZE + outer_sig_len
    return max(0, target - size)


def _issue(
    issuer: str,
    issuer_classical: KeyPair,
    issuer_pq: KeyPair | None,
    subject: str,
    subject_classical_pk: PublicKey,
    subject_pq_pk: PublicKey | None,
    serial: int | None,
    validity: tuple[int, int],
    registry: Registry,
    pad_to: int,
) -> HybridCertificate:
    _check_key(registry, subject_classical_pk, SchemeKind.CLASSICAL)
    extensions: list[Extension] = []
    if issuer_pq is not None:
        if subject_pq_pk is not None:
            _check_key(registry, subject_pq_pk, SchemeKind.POST_QUANTUM)
            extensions.append(
                Extension(
                    ExtensionId.SUBJECT_ALT_PUBLIC_KEY_INFO,
                    tlv.encode_named(subject_pq_pk.scheme, subject_pq_pk.key),
                )
            )
        m1 = key_material(subject_classical_pk, subject_pq_pk)
        sigma1 = registry.sign(issuer_pq, hash_bytes(SIGNATURE_HASH, m1))
        extensions.append(Extension(ExtensionId.ALT_SIGNATURE_VALUE, sigma1))
        extensions.append(
            Extension(ExtensionId.ALT_SIGNATURE_ALGORITHM, issuer_pq.scheme.name.encode("ascii"))
        )
    if serial is None:
        serial = default_serial(subject, subject_classical_pk)
    body = CertificateBody(serial, subject, issuer, validity, subject_classical_pk, tuple(extensions))
    outer_scheme = issuer_classical.scheme.name
    outer_len = len(Component(outer_scheme, bytes(registry.get(outer_scheme).sig_size)).encode_value())
    padding = Extension(ExtensionId.PADDING, bytes(_padding_for(body, outer_len, pad_to)))
    body = CertificateBody(
        serial, subject, issuer, validity, subject_classical_pk, (*extensions, padding)
    )
    digest = hash_bytes(SIGNATURE_HASH, body.encode())
    outer = Component(issuer_classical.scheme.name, registry.sign(issuer_classical, digest))
    return HybridCertificate(body, outer)


def create_authority(
    name: str,
    classical_keys: KeyPair,
    pq_keys: KeyPair | None = None,
    registry: Registry | None = None,
    validity: tuple[int, int] = DEFAULT_VALIDITY,
) -> CertAuthority:
    """Self-signed authority; a PQ key makes its own certificate hybrid."""
    registry = registry or default_registry()
    cert = _issue(
        name, classical_keys, pq_keys, name, classical_keys.public,
        pq_keys.public if pq_keys else None, None, validity, registry, CLASSICAL_RAW_SIZE,
    )
    return CertAuthority(name, classical_keys, pq_keys, cert)


def issue_certificate(
    ca: CertAuthority,
    subject: str,
    subject_classical_pk: PublicKey,
    subject_pq_pk: PublicKey | None = None,
    *,
    serial: int | None = None,
    validity: tuple[int, int] = DEFAULT_VALIDITY,
    registry: Registry | None = None,
    pad_to: int = CLASSICAL_RAW_SIZE,
) -> HybridCertificate:
    """Issue a certificate; a classical-only authority never adds alt extensions."""
    registry = registry or default_registry()
    return _issue(
        ca.name, ca.classical_keys, ca.pq_keys, subject, subject_classical_pk,
        subject_pq_pk, serial, validity, registry, pad_to,
    )


class CertVerdict(NamedTuple):
    classical_ok: bool
    alt_ok: AltVerdict
    kind: CertKind


def verify_certificate(
    cert: HybridCertificate,
    ca_cert: HybridCertificate,
    verify_alt: bool,
    registry: Registry | None = None,
) -> CertVerdict:
    registry = registry or default_registry()
    issuer_key = ca_cert.body.classical_pk
    classical_ok = (
        cert.body.issuer == ca_cert.body.subject
        and cert.outer_signature.scheme == issuer_key.scheme
        and _safe_verify(registry, issuer_key, hash_bytes(SIGNATURE_HASH, cert.body_bytes),
                         cert.outer_signature.signature)
    )
    alt_ok = AltVerdict.SKIPPED
    issuer_pq = ca_cert.pq_public_key
    if verify_alt and cert.alt_extensions and issuer_pq is not None:
        alt_ok = AltVerdict.ACCEPT if _alt_signature_ok(cert, issuer_pq, registry) else AltVerdict.REJECT
    return CertVerdict(classical_ok, alt_ok, cert.kind)


def _safe_verify(registry: Registry, key: PublicKey, digest: bytes, signature: bytes) -> bool:
    try:
        return registry.verify(key, digest, signature)
    except HybridLedgerError:
        return False


def _alt_signature_ok(cert: HybridCertificate, issuer_pq: PublicKey, registry: Registry) -> bool:
    value = cert.body.extension(ExtensionId.ALT_SIGNATURE_VALUE)
    algorithm = cert.body.extension(ExtensionId.ALT_SIGNATURE_ALGORITHM)
    if value is None or algorithm is None:
        return False
    if algorithm.value != issuer_pq.scheme.encode("ascii"):
        return False
    if cert.body.extension(ExtensionId.SUBJECT_ALT_PUBLIC_KEY_INFO) and cert.pq_public_key is None:
        return False
    m1 = key_material(cert.body.classical_pk, cert.pq_public_key)
    return _safe_verify(registry, issuer_pq, hash_bytes(SIGNATURE_HASH, m1), value.value)


class VerificationContext(NamedTuple):
    expect_hybrid: bool
    classical_pk: PublicKey
    pq_pk: PublicKey | None


def extract_verification_context(
    cert: HybridCertificate, pq_aware: bool = True
) -> VerificationContext:
    """How signatures by ``cert``'s subject must be checked.

    ``pq_aware=False`` models software that ignores the non-critical
    extensions and therefore only knows the classical key.
    """
    if pq_aware and cert.kind is CertKind.HYBRID:
        return VerificationContext(True, cert.body.classical_pk, cert.pq_public_key)
    return VerificationContext(False, cert.body.classical_pk, None)

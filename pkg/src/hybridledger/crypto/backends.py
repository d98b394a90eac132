"""Signature backends: the size-faithful mock and real ECDSA P-256.

A backend turns ``(profile, seed)`` into key material and implements raw
sign/verify. Instrumentation, synthetic cost and size checks live one level up
in :mod:`hybridledger.crypto.schemes`, so a backend only does the math.

Third-party post-quantum implementations plug in through
:func:`register_backend`; profiles select one with their ``backend`` field.
"""

from __future__ import annotations

import hashlib
import hmac
from typing import TYPE_CHECKING, Protocol

from hybridledger.errors import KeyMismatch, UnknownScheme

if TYPE_CHECKING:
    from hybridledger.crypto.schemes import SchemeProfile

SEED_SIZE = 32


class Backend(Protocol):
    def keygen(self, profile: SchemeProfile, seed: bytes) -> tuple[bytes, bytes]:
        """Return ``(public_key, secret_key)``."""

    def sign(self, profile: SchemeProfile, secret_key: bytes, digest: bytes) -> bytes: ...

    def verify(
        self, profile: SchemeProfile, public_key: bytes, digest: bytes, signature: bytes
    ) -> bool: ...


class MockBackend:
    """Deterministic XOF construction with the byte sizes of a real scheme.

    secret key = seed; public key = SHAKE256(seed || "pk"); signature =
    SHAKE256(public key || SHA-384(digest)). Anyone holding the public key can
    produce a signature, so this offers no security at all. It exists to carry
    the structure and the sizes of the schemes it stands in for.
    """

    def _public(self, profile: SchemeProfile, seed: bytes) -> bytes:
        return hashlib.shake_256(seed + b"pk").digest(profile.pk_size)

    def keygen(self, profile, seed):
        return self._public(profile, seed), bytes(seed)

    def _expand(self, profile, public_key: bytes, digest: bytes) -> bytes:
        # the inner re-hash mirrors PQ schemes hashing the message they are given
        inner = hashlib.sha384(digest).digest()
        return hashlib.shake_256(public_key + inner).digest(profile.sig_size)

    def sign(self, profile, secret_key, digest):
        if len(secret_key) != SEED_SIZE:
            raise KeyMismatch(f"{profile.name}: secret key must be {SEED_SIZE} bytes")
        return self._expand(profile, self._public(profile, secret_key), digest)

    def verify(self, profile, public_key, digest, signature):
        if len(public_key) != profile.pk_size or len(signature) != profile.sig_size:
            return False
        return hmac.compare_digest(self._expand(profile, public_key, digest), signature)


class EcdsaP256Backend:
    """ECDSA over P-256 with 32-byte x-only public keys and 64-byte r||s signatures.

    Key generation negates the scalar when needed so the public point has an
    even y coordinate; the x coordinate then identifies the key on its own.
    Signing is deterministic (RFC 6979) and hashes its input with SHA-384.
    """

    def __init__(self):
        from cryptography.hazmat.primitives import hashes
        from cryptography.hazmat.primitives.asymmetric import ec, utils

        self._ec = ec
        self._utils = utils
        self._curve = ec.SECP256R1()
        self._algorithm = ec.ECDSA(hashes.SHA384(), deterministic_signing=True)
        self._order = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551

    def keygen(self, profile, seed):
        scalar = int.from_bytes(seed, "big") % (self._order - 1) + 1
        numbers = self._ec.derive_private_key(scalar, self._curve).public_key().public_numbers()
        if numbers.y & 1:
            scalar = self._order - scalar
        return numbers.x.to_bytes(32, "big"), scalar.to_bytes(32, "big")

    def sign(self, profile, secret_key, digest):
        if len(secret_key) != 32:
            raise KeyMismatch(f"{profile.name}: secret key must be 32 bytes")
        scalar = int.from_bytes(secret_key, "big")
        if not 0 < scalar < self._order:
            raise KeyMismatch(f"{profile.name}: secret scalar out of range")
        der = self._ec.derive_private_key(scalar, self._curve).sign(digest, self._algorithm)
        r, s = self._utils.decode_dss_signature(der)
        return r.to_bytes(32, "big") + s.to_bytes(32, "big")

    def verify(self, profile, public_key, digest, signature):
        from cryptography.exceptions import InvalidSignature

        if len(public_key) != 32 or len(signature) != 64:
            return False
        try:
            key = self._ec.EllipticCurvePublicKey.from_encoded_point(
                self._curve, b"\x02" + public_key
            )
        except ValueError:
            return False
        r = int.from_bytes(signature[:32], "big")
        s = int.from_bytes(signature[32:], "big")
        if not (0 < r < self._order and 0 < s < self._order):
            return False
        try:
            key.verify(self._utils.encode_dss_signature(r, s), digest, self._algorithm)
        except InvalidSignature:
            return False
        return True


_BACKENDS: dict[str, Backend] = {"mock": MockBackend()}

try:
    _BACKENDS["ecdsa-p256"] = EcdsaP256Backend()
except ImportError:  # pragma: no cover - cryptography is a declared dependency
    _BACKENDS["ecdsa-p256"] = _BACKENDS["mock"]


def register_backend(name: str, backend: Backend) -> None:
    """Make ``backend`` selectable by profiles whose ``backend`` field is ``name``."""
    _BACKENDS[name] = backend


def get_backend(name: str) -> Backend:
    try:
        return _BACKENDS[name]
    except KeyError:
        raise UnknownScheme(f"no signature backend named {name!r}") from None

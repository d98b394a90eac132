"""Signature scheme registry, key handling and hashing services."""

from hybridledger.crypto.backends import SEED_SIZE, Backend, register_backend
from hybridledger.crypto.hashing import (
    BLOCK_HASH,
    SHA256,
    SHA384,
    SIGNATURE_HASH,
    HashAlgorithm,
    HashSpec,
    hash_bytes,
)
from hybridledger.crypto.schemes import (
    CLASSICAL_DEFAULT,
    OVERSIZED_PQ,
    RUNNABLE_PQ,
    KeyPair,
    PublicKey,
    Registry,
    SchemeId,
    SchemeKind,
    SchemeProfile,
    default_registry,
    keygen,
    load_profiles,
    parse_costs,
    parse_profiles,
    register_profile,
    sign,
    synthetic_cost_registry,
    verify,
)
from hybridledger.crypto.timing import BucketTimer, recording

__all__ = [
    "BLOCK_HASH",
    "CLASSICAL_DEFAULT",
    "OVERSIZED_PQ",
    "RUNNABLE_PQ",
    "SEED_SIZE",
    "SHA256",
    "SHA384",
    "SIGNATURE_HASH",
    "Backend",
    "BucketTimer",
    "HashAlgorithm",
    "HashSpec",
    "KeyPair",
    "PublicKey",
    "Registry",
    "SchemeId",
    "SchemeKind",
    "SchemeProfile",
    "default_registry",
    "hash_bytes",
    "keygen",
    "load_profiles",
    "parse_costs",
    "parse_profiles",
    "recording",
    "register_backend",
    "register_profile",
    "sign",
    "synthetic_cost_registry",
    "verify",
]

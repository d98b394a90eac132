from __future__ import annotations

import enum
import hashlib
import time
from dataclasses import dataclass

from hybridledger.crypto.timing import active_timer


class HashAlgorithm(enum.Enum):
    SHA256 = "sha256"
    SHA384 = "sha384"


_BITS = {HashAlgorithm.SHA256: 256, HashAlgorithm.SHA384: 384}


@dataclass(frozen=True)
class HashSpec:
    algorithm: HashAlgorithm

    @property
    def output_bits(self) -> int:
        return _BITS[self.algorithm]

    @property
    def digest_size(self) -> int:
        return self.output_bits // 8


SHA256 = HashSpec(HashAlgorithm.SHA256)
SHA384 = HashSpec(HashAlgorithm.SHA384)

# Signatures are computed over SHA-384 digests; ledger linkage keeps SHA-256.
SIGNATURE_HASH = SHA384
BLOCK_HASH = SHA256


def hash_bytes(spec: HashSpec, message: bytes) -> bytes:
    """Digest ``message``; time is charged to the ``hash`` bucket when recording."""
    timer = active_timer()
    if timer is None:
        return hashlib.new(spec.algorithm.value, message).digest()
    start = time.perf_counter_ns()
    digest = hashlib.new(spec.algorithm.value, message).digest()
    timer.add("hash", time.perf_counter_ns() - start)
    return digest

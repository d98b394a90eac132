"""Per-thread timing buckets for the instrumented sign/verify/hash call sites.

A committer thread activates a :class:`BucketTimer` with :func:`recording`;
crypto calls made on *other* threads (concurrent endorsers) are not counted.
"""

from __future__ import annotations

import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass

BUCKETS = ("sign", "verify", "hash")

_local = threading.local()


@dataclass
class BucketTimer:
    sign_ns: int = 0
    verify_ns: int = 0
    hash_ns: int = 0

    def add(self, bucket: str, elapsed_ns: int) -> None:
        attr = bucket + "_ns"
        setattr(self, attr, getattr(self, attr) + elapsed_ns)

    @property
    def total_ns(self) -> int:
        return self.sign_ns + self.verify_ns + self.hash_ns


def active_timer() -> BucketTimer | None:
    return getattr(_local, "timer", None)


@contextmanager
def recording(timer: BucketTimer):
    previous = active_timer()
    _local.timer = timer
    try:
        yield timer
    finally:
        _local.timer = previous


def busy_wait_us(microseconds: float) -> None:
    if microseconds <= 0:
        return
    deadline = time.perf_counter_ns() + int(microseconds * 1000)
    while time.perf_counter_ns() < deadline:
        pass

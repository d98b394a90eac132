"""Scheme profiles, the immutable registry, and the keygen/sign/verify entry points."""

from __future__ import annotations

import dataclasses
import enum
import functools
import sys
import time
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import NamedTuple

from hybridledger.crypto.backends import SEED_SIZE, get_backend
from hybridledger.crypto.timing import active_timer, busy_wait_us
from hybridledger.errors import ConfigInvalid, DuplicateScheme, KeyMismatch, UnknownScheme

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class SchemeKind(enum.Enum):
    CLASSICAL = "classical"
    POST_QUANTUM = "post-quantum"


@dataclass(frozen=True)
class SchemeId:
    name: str
    kind: SchemeKind


@dataclass(frozen=True)
class SchemeProfile:
    id: SchemeId
    pk_size: int
    sig_size: int
    sign_cost_us: float = 0.0
    verify_cost_us: float = 0.0
    backend: str = "mock"

    def __post_init__(self):
        if self.pk_size < 1 or self.sig_size < 1:
            raise ValueError(f"{self.id.name}: key and signature sizes must be >= 1")

    @property
    def name(self) -> str:
        return self.id.name

    @property
    def kind(self) -> SchemeKind:
        return self.id.kind


class PublicKey(NamedTuple):
    scheme: str
    key: bytes


@dataclass(frozen=True)
class KeyPair:
    scheme: SchemeId
    public_key: bytes
    secret_key: bytes = field(repr=False)

    @property
    def public(self) -> PublicKey:
        return PublicKey(self.scheme.name, self.public_key)


def keygen(profile: SchemeProfile, seed: bytes) -> KeyPair:
    if len(seed) != SEED_SIZE:
        raise KeyMismatch(f"seed must be {SEED_SIZE} bytes, got {len(seed)}")
    public, secret = get_backend(profile.backend).keygen(profile, seed)
    return KeyPair(profile.id, public, secret)


def sign(profile: SchemeProfile, secret_key: bytes, digest: bytes) -> bytes:
    if not digest:
        raise ValueError("cannot sign an empty digest")
    timer = active_timer()
    start = time.perf_counter_ns()
    signature = get_backend(profile.backend).sign(profile, secret_key, digest)
    busy_wait_us(profile.sign_cost_us)
    if timer is not None:
        timer.add("sign", time.perf_counter_ns() - start)
    if len(signature) != profile.sig_size:
        raise KeyMismatch(f"{profile.name}: backend produced {len(signature)}-byte signature")
    return signature


def verify(profile: SchemeProfile, public_key: bytes, digest: bytes, signature: bytes) -> bool:
    """Never raises on malformed input; anything that does not check out is False."""
    timer = active_timer()
    start = time.perf_counter_ns()
    try:
        ok = get_backend(profile.backend).verify(profile, bytes(public_key), digest, bytes(signature))
    except (ValueError, TypeError):
        ok = False
    busy_wait_us(profile.verify_cost_us)
    if timer is not None:
        timer.add("verify", time.perf_counter_ns() - start)
    return ok


class Registry:
    """Immutable name -> profile mapping. Adding a profile returns a new registry."""

    def __init__(self, profiles: Iterable[SchemeProfile] = ()):
        table: dict[str, SchemeProfile] = {}
        for profile in profiles:
            if profile.name in table:
                raise DuplicateScheme(profile.name)
            table[profile.name] = profile
        self._profiles: Mapping[str, SchemeProfile] = MappingProxyType(table)

    def __contains__(self, name: object) -> bool:
        return name in self._profiles

    def __iter__(self):
        return iter(self._profiles.values())

    def __len__(self) -> int:
        return len(self._profiles)

    def names(self) -> list[str]:
        return list(self._profiles)

    def get(self, name: str) -> SchemeProfile:
        try:
            return self._profiles[name]
        except KeyError:
            raise UnknownScheme(name) from None

    def with_profile(self, profile: SchemeProfile) -> Registry:
        return Registry([*self._profiles.values(), profile])

    def with_costs(self, costs: Mapping[str, tuple[float, float]]) -> Registry:
        """Copy with ``{name: (sign_us, verify_us)}`` synthetic costs applied."""
        for name in costs:
            self.get(name)
        return Registry(
            dataclasses.replace(p, sign_cost_us=costs[p.name][0], verify_cost_us=costs[p.name][1])
            if p.name in costs
            else p
            for p in self._profiles.values()
        )

    # name-based conveniences used by the higher layers

    def keygen(self, name: str, seed: bytes) -> KeyPair:
        return keygen(self.get(name), seed)

    def sign(self, keys: KeyPair, digest: bytes) -> bytes:
        profile = self.get(keys.scheme.name)
        return sign(profile, keys.secret_key, digest)

    def verify(self, public: PublicKey, digest: bytes, signature: bytes) -> bool:
        return verify(self.get(public.scheme), public.key, digest, signature)


def register_profile(registry: Registry, profile: SchemeProfile) -> Registry:
    return registry.with_profile(profile)


_PROFILE_KEYS = {"name", "kind", "pk_size", "sig_size", "sign_us", "verify_us", "backend"}


def _profile_from_table(entry: Mapping) -> SchemeProfile:
    unknown = set(entry) - _PROFILE_KEYS
    if unknown:
        raise ConfigInvalid(f"unknown scheme keys {sorted(unknown)}")
    try:
        kind = SchemeKind(entry["kind"])
        return SchemeProfile(
            SchemeId(str(entry["name"]), kind),
            pk_size=int(entry["pk_size"]),
            sig_size=int(entry["sig_size"]),
            sign_cost_us=float(entry.get("sign_us", 0)),
            verify_cost_us=float(entry.get("verify_us", 0)),
            backend=str(entry.get("backend", "mock")),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigInvalid(f"bad scheme entry {dict(entry)!r}: {exc}") from None


def parse_profiles(text: str) -> Registry:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid(str(exc)) from None
    return Registry(_profile_from_table(entry) for entry in data.get("scheme", []))


def load_profiles(path: str | Path) -> Registry:
    return parse_profiles(Path(path).read_text())


def parse_costs(text: str) -> dict[str, tuple[float, float]]:
    """Read ``[costs."<scheme>"]`` tables with ``sign_us`` / ``verify_us`` keys."""
    data = tomllib.loads(text)
    return {
        name: (float(entry.get("sign_us", 0)), float(entry.get("verify_us", 0)))
        for name, entry in data.get("costs", {}).items()
    }


def _bundled(filename: str) -> str:
    return resources.files("hybridledger.crypto").joinpath("data", filename).read_text()


@functools.cache
def default_registry() -> Registry:
    return parse_profiles(_bundled("profiles.toml"))


def synthetic_cost_registry(base: Registry | None = None) -> Registry:
    """Bundled profiles with the per-operation costs from ``synthetic_costs.toml``."""
    return (base or default_registry()).with_costs(parse_costs(_bundled("synthetic_costs.toml")))


CLASSICAL_DEFAULT = "ecdsa-p256"
RUNNABLE_PQ = (
    "falcon-512",
    "falcon-1024",
    "dilithium-2",
    "dilithium-3",
    "dilithium-4",
    "qtesla-p-I",
)
OVERSIZED_PQ = ("picnic-L1-FS", "rainbow-Ia-cyclic-compressed", "rainbow-Ia-classic")

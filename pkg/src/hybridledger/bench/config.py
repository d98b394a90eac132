"""Benchmark configuration: flat ``key = value`` files."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path

from hybridledger.crypto import default_registry
from hybridledger.errors import ConfigInvalid, IoFailure, UnknownScheme

_SECTION = "bench"
_NO_SCHEME = ("", "none", "classical")


@dataclass(frozen=True)
class BenchConfig:
    accounts: int = 20000
    total_txs: int = 10000
    block_size: int = 100
    client_threads: int = 10
    scheme: str | None = None  # post-quantum component; None is the classical baseline
    trim_blocks: int = 5
    seed: int = 0
    hybrid_clients: bool = True
    synthetic_costs: bool = False
    payload_cap: int = 32768
    endorsement_threshold: int = 1

    @property
    def blocks(self) -> int:
        return self.total_txs // self.block_size

    @property
    def label(self) -> str:
        return self.scheme or "ecdsa-p256"

    def validate(self) -> BenchConfig:
        for name in ("accounts", "total_txs", "block_size", "client_threads", "payload_cap"):
            if getattr(self, name) < 1:
                raise ConfigInvalid(f"{name} must be positive")
        if self.trim_blocks < 0 or self.endorsement_threshold < 1:
            raise ConfigInvalid("trim_blocks must be >= 0 and endorsement_threshold >= 1")
        if self.total_txs % self.block_size:
            raise ConfigInvalid(f"total_txs {self.total_txs} not divisible by block_size {self.block_size}")
        if self.blocks <= 2 * self.trim_blocks:
            raise ConfigInvalid(f"{self.blocks} blocks leave nothing after trimming {self.trim_blocks} per side")
        if self.accounts < 2 * self.total_txs:
            raise ConfigInvalid(
                f"{self.accounts} accounts cannot give {self.total_txs} transfers disjoint account pairs"
            )
        if self.scheme is not None:
            try:
                default_registry().get(self.scheme)
            except UnknownScheme as exc:
                raise ConfigInvalid(str(exc)) from None
        return self

    def with_scheme(self, scheme: str | None) -> BenchConfig:
        return replace(self, scheme=_scheme_value(scheme or ""))


def _scheme_value(text: str) -> str | None:
    return None if text.strip().lower() in _NO_SCHEME else text.strip()


def parse_config(text: str) -> BenchConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(f"[{_SECTION}]\n{text}")
    except configparser.Error as exc:
        raise ConfigInvalid(str(exc).replace("\n", " ")) from None
    section = parser[_SECTION]
    known = {f.name: f for f in fields(BenchConfig)}
    values: dict = {}
    for key in section:
        if key not in known:
            raise ConfigInvalid(f"unknown key {key!r}")
        try:
            if key == "scheme":
                values[key] = _scheme_value(section[key])
            elif known[key].type == "bool":
                values[key] = section.getboolean(key)
            else:
                values[key] = section.getint(key)
        except ValueError as exc:
            raise ConfigInvalid(f"{key}: {exc}") from None
    return BenchConfig(**values).validate()


def load_config(path: str | Path) -> BenchConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoFailure(str(exc)) from None
    return parse_config(text)


def bundled_config(name: str) -> BenchConfig:
    """``full`` (full-size workload) or ``desk`` (small enough for CI)."""
    try:
        text = resources.files("hybridledger.bench").joinpath("data", f"{name}.cfg").read_text()
    except FileNotFoundError:
        raise ConfigInvalid(f"no bundled config {name!r}") from None
    return parse_config(text)

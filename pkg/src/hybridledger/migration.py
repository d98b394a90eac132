"""Live migration from classical to hybrid signatures, one node at a time.

Every node walks the stages below, one step per restart. The authority
only has the first three stages: installing the new software, then rolling
over to a post-quantum key. :func:`advance` and :func:`rollback` enforce the
ordering constraints between nodes, and :func:`check_liveness` pushes real
transactions through whatever mixed network results.
"""

from __future__ import annotations

import enum
import random
from collections import deque
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

from hybridledger.crypto import CLASSICAL_DEFAULT, Registry, default_registry
from hybridledger.errors import (
    ConfigInvalid,
    HybridLedgerError,
    IoFailure,
    PreconditionViolated,
    RollbackForbidden,
)
from hybridledger.identity import CertAuthority, CertKind, HybridCertificate, issue_certificate
from hybridledger.ledger import Msp, Network, Node, PipelineConfig, Role, WorldState, make_authority, seed_for
from hybridledger.ledger.network import TxOutcome


class Stage(enum.IntEnum):
    S0_VANILLA = 0
    S1_PQ_SOFTWARE = 1
    S2_CA_HYBRID_CERT = 2
    S3_VERIFY_ALT = 3
    S4_HYBRID_SIGN = 4
    S5_CLIENT_HYBRID = 5

    @property
    def short(self) -> str:
        return f"S{int(self)}"


CA_FINAL_STAGE = Stage.S2_CA_HYBRID_CERT
CA_ID = "ca"


def _hybrid_from(role: Role) -> Stage:
    # clients take their post-quantum key one stage after the core nodes
    return Stage.S5_CLIENT_HYBRID if role is Role.CLIENT else Stage.S4_HYBRID_SIGN


@dataclass(frozen=True)
class NodeState:
    """One node's stage plus the identity it runs with at that stage.

    ``node`` is None for the authority, whose keys live in :class:`NetworkConfig`.
    """

    node_id: str
    role: Role
    stage: Stage
    node: Node | None = field(default=None, compare=False, repr=False)

    @property
    def hybrid_aware(self) -> bool:
        return self.stage >= Stage.S1_PQ_SOFTWARE

    @property
    def verify_alt(self) -> bool:
        return self.stage >= Stage.S3_VERIFY_ALT

    @property
    def signs_hybrid(self) -> bool:
        return self.role is not Role.CA and self.stage >= _hybrid_from(self.role)


@dataclass(frozen=True)
class NetworkConfig:
    """An immutable snapshot of every node's stage; transitions return new snapshots."""

    nodes: tuple[NodeState, ...]
    ca: NodeState
    pq_scheme: str = "falcon-512"
    registry: Registry = field(default_factory=default_registry, repr=False, compare=False)

    @property
    def authority(self) -> CertAuthority:
        return _authority(self.ca.stage >= CA_FINAL_STAGE, self.pq_scheme, self.registry)

    @property
    def ca_cert(self) -> HybridCertificate:
        return self.authority.certificate

    def state(self, node_id: str) -> NodeState:
        if node_id == CA_ID:
            return self.ca
        for state in self.nodes:
            if state.node_id == node_id:
                return state
        raise KeyError(node_id)

    def core(self) -> tuple[NodeState, ...]:
        return tuple(s for s in self.nodes if s.role.is_core)

    def with_roles(self, role: Role) -> list[Node]:
        return [s.node for s in self.nodes if s.role is role]

    def stage_vector(self) -> tuple[Stage, ...]:
        """Stages in declaration order, authority last."""
        return tuple(s.stage for s in self.nodes) + (self.ca.stage,)

    def describe(self) -> str:
        return " ".join(f"{s.node_id}={s.stage.short}" for s in (*self.nodes, self.ca))

    def _with_state(self, new: NodeState) -> NetworkConfig:
        if new.role is Role.CA:
            return replace(self, ca=new)
        return replace(self, nodes=tuple(new if s.node_id == new.node_id else s for s in self.nodes))


_AUTHORITIES: dict[tuple, CertAuthority] = {}


def _authority(hybrid: bool, pq_scheme: str, registry: Registry) -> CertAuthority:
    # the classical key survives rollover, so old certificates keep verifying
    key = (hybrid, pq_scheme, registry)
    if key not in _AUTHORITIES:
        _AUTHORITIES[key] = make_authority(CA_ID, pq_scheme if hybrid else None, registry)
    return _AUTHORITIES[key]


def _build_node(state: NodeState, config: NetworkConfig) -> Node:
    """The identity a node runs with at its stage, derived from deterministic seeds."""
    registry = config.registry
    classical = registry.keygen(CLASSICAL_DEFAULT, seed_for(state.node_id, "classical"))
    pq = None
    if state.signs_hybrid:
        pq = registry.keygen(config.pq_scheme, seed_for(state.node_id, "pq:" + config.pq_scheme))
    # before S2 the node still holds the certificate from the classical authority
    issuer = config.authority if state.stage >= Stage.S2_CA_HYBRID_CERT else _authority(
        False, config.pq_scheme, registry
    )
    cert = issue_certificate(
        issuer, state.node_id, classical.public, pq.public if pq else None, registry=registry
    )
    return Node(
        state.node_id, state.role, classical, cert, pq,
        hybrid_aware=state.hybrid_aware, verify_alt=state.verify_alt, registry=registry,
    )


def new_network(
    nodes: Iterable[tuple[str, Role]],
    pq_scheme: str = "falcon-512",
    registry: Registry | None = None,
) -> NetworkConfig:
    """All nodes and the authority at S0."""
    registry = registry or default_registry()
    registry.get(pq_scheme)
    states = []
    for node_id, role in nodes:
        if role is Role.CA or node_id == CA_ID:
            raise ConfigInvalid(f"{node_id!r}: the authority is implicit and always named {CA_ID!r}")
        if any(s.node_id == node_id for s in states):
            raise ConfigInvalid(f"duplicate node {node_id!r}")
        states.append(NodeState(node_id, role, Stage.S0_VANILLA))
    config = NetworkConfig((), NodeState(CA_ID, Role.CA, Stage.S0_VANILLA), pq_scheme, registry)
    config = replace(config, nodes=tuple(replace(s, node=_build_node(s, config)) for s in states))
    return config


def _refresh(config: NetworkConfig) -> NetworkConfig:
    return replace(config, nodes=tuple(replace(s, node=_build_node(s, config)) for s in config.nodes))


def advance(config: NetworkConfig, node_id: str) -> NetworkConfig:
    """Move ``node_id`` one stage forward, or raise PreconditionViolated."""
    current = config.state(node_id)
    if current.role is Role.CA:
        if current.stage >= CA_FINAL_STAGE:
            raise PreconditionViolated("the authority has no stage beyond its key rollover")
        if current.stage + 1 == CA_FINAL_STAGE:
            lagging = [s.node_id for s in config.core() if s.stage < Stage.S1_PQ_SOFTWARE]
            if lagging:
                raise PreconditionViolated(
                    f"key rollover needs the new software on every core node first; still vanilla: {lagging}"
                )
        return _refresh(config._with_state(replace(current, stage=Stage(current.stage + 1))))

    if current.stage >= Stage.S5_CLIENT_HYBRID:
        raise PreconditionViolated(f"{node_id} is already at the final stage")
    target = Stage(current.stage + 1)
    if target is Stage.S2_CA_HYBRID_CERT and config.ca.stage < CA_FINAL_STAGE:
        raise PreconditionViolated(f"{node_id}: the authority has not rolled over to a post-quantum key")
    if target is Stage.S4_HYBRID_SIGN:
        lagging = [s.node_id for s in config.core() if s.stage < Stage.S1_PQ_SOFTWARE]
        if lagging:
            raise PreconditionViolated(
                f"{node_id}: every core node must verify hybrid signatures before anyone signs them;"
                f" still vanilla: {lagging}"
            )
    if target is Stage.S5_CLIENT_HYBRID:
        lagging = [s.node_id for s in config.core() if s.stage < Stage.S4_HYBRID_SIGN]
        if lagging:
            raise PreconditionViolated(f"{node_id}: core nodes not yet signing hybrid: {lagging}")
    new = replace(current, stage=target)
    return config._with_state(replace(new, node=_build_node(new, config)))


def rollback(config: NetworkConfig, node_id: str) -> NetworkConfig:
    """Move ``node_id`` one stage back, or raise RollbackForbidden."""
    current = config.state(node_id)
    if current.stage == Stage.S0_VANILLA:
        raise RollbackForbidden(f"{node_id} is already at S0")
    if current.role is Role.CA:
        if current.stage == CA_FINAL_STAGE:
            holders = [s.node_id for s in config.nodes if s.stage >= Stage.S2_CA_HYBRID_CERT]
            if holders:
                raise RollbackForbidden(f"certificates from the rolled-over authority still in use: {holders}")
        return _refresh(config._with_state(replace(current, stage=Stage(current.stage - 1))))
    if current.stage >= Stage.S4_HYBRID_SIGN:
        raise RollbackForbidden(f"{node_id}: hybrid signing cannot be rolled back")
    if current.stage == Stage.S1_PQ_SOFTWARE:
        signers = [s.node_id for s in config.nodes if s.signs_hybrid]
        if signers:
            raise RollbackForbidden(f"{node_id}: vanilla software could not verify hybrid signers {signers}")
    new = replace(current, stage=Stage(current.stage - 1))
    return config._with_state(replace(new, node=_build_node(new, config)))


def legal_moves(config: NetworkConfig) -> list[tuple[str, str, NetworkConfig]]:
    """Every (action, node_id, result) that the transition rules allow."""
    moves = []
    for state in (*config.nodes, config.ca):
        for action, step in (("advance", advance), ("rollback", rollback)):
            try:
                moves.append((action, state.node_id, step(config, state.node_id)))
            except (PreconditionViolated, RollbackForbidden):
                pass
    return moves


def reachable_configs(start: NetworkConfig) -> dict[tuple[Stage, ...], NetworkConfig]:
    """Breadth-first closure of ``start`` under legal advances and rollbacks."""
    seen = {start.stage_vector(): start}
    queue = deque([start])
    while queue:
        config = queue.popleft()
        for _, _, nxt in legal_moves(config):
            key = nxt.stage_vector()
            if key not in seen:
                seen[key] = nxt
                queue.append(nxt)
    return seen


# liveness


@dataclass(frozen=True)
class LivenessReport:
    committed: int
    failed: int
    outcomes: tuple[TxOutcome, ...] = ()

    @property
    def ok(self) -> bool:
        return self.failed == 0


def check_liveness(config: NetworkConfig, tx_count: int, *, block_size: int = 10) -> LivenessReport:
    """Run ``tx_count`` disjoint transfers through a fresh ledger built from ``config``."""
    clients, peers, orderers = (config.with_roles(r) for r in (Role.CLIENT, Role.PEER, Role.ORDERER))
    if not (clients and peers and orderers):
        raise ConfigInvalid("a network needs at least one client, peer and orderer")
    try:
        network = Network.from_nodes(
            config.ca_cert, clients, peers, orderers[0],
            WorldState.uniform(2 * tx_count, 100), PipelineConfig(block_size=block_size),
        )
    except HybridLedgerError as exc:
        failure = TxOutcome("genesis", False, f"{type(exc).__name__}: {exc}")
        return LivenessReport(0, tx_count, (failure,))
    outcomes = network.run([(2 * i, 2 * i + 1, 1) for i in range(tx_count)])
    committed = sum(o.committed for o in outcomes)
    return LivenessReport(committed, len(outcomes) - committed, tuple(outcomes))


@dataclass(frozen=True)
class ModelCheckResult:
    states: int
    failures: tuple[tuple[str, LivenessReport], ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def model_check(
    start: NetworkConfig,
    tx_count: int = 20,
    progress: Callable[[NetworkConfig, LivenessReport], None] | None = None,
) -> ModelCheckResult:
    """Check liveness in every reachable configuration."""
    failures = []
    configs = reachable_configs(start)
    for config in configs.values():
        report = check_liveness(config, tx_count)
        if progress:
            progress(config, report)
        if not report.ok:
            failures.append((config.describe(), report))
    return ModelCheckResult(len(configs), tuple(failures))


def random_walk(config: NetworkConfig, rng: random.Random) -> list[NetworkConfig]:
    """Advance nodes in a random legal order until everything is at its final stage."""
    path = [config]
    while True:
        options = [
            nxt for action, _, nxt in legal_moves(config) if action == "advance"
        ]
        if not options:
            return path
        config = rng.choice(options)
        path.append(config)


# signature formats


FORMATS = ("classical-only cert", "legacy cert", "hybrid cert")


def accepted_formats(state: NodeState, config: NetworkConfig) -> frozenset[str]:
    """Honestly produced signature formats that ``state``'s node accepts.

    Each format is a probe signer holding that kind of certificate and
    signing the way its certificate says; the probe is really verified.
    """
    registry = config.registry
    hybrid_ca = _authority(True, config.pq_scheme, registry)
    classical_ca = _authority(False, config.pq_scheme, registry)
    msp = Msp(hybrid_ca.certificate, registry, state.hybrid_aware, state.verify_alt)
    accepted = set()
    for name, ca, with_pq in (
        (FORMATS[0], classical_ca, False),
        (FORMATS[1], hybrid_ca, False),
        (FORMATS[2], hybrid_ca, True),
    ):
        probe = _probe_signer(name, ca, with_pq, config.pq_scheme, registry)
        message = b"probe message"
        if msp.verify(probe.armored_cert, message, probe.sign(message)):
            accepted.add(name)
    return frozenset(accepted)


def _probe_signer(label: str, ca: CertAuthority, with_pq: bool, pq_scheme: str, registry: Registry) -> Node:
    classical = registry.keygen(CLASSICAL_DEFAULT, seed_for(label, "classical"))
    pq = registry.keygen(pq_scheme, seed_for(label, "pq:" + pq_scheme)) if with_pq else None
    cert = issue_certificate(ca, label, classical.public, pq.public if pq else None, registry=registry)
    return Node(label, Role.CLIENT, classical, cert, pq, registry=registry)


def certificate_kind(config: NetworkConfig, node_id: str) -> CertKind:
    return config.state(node_id).node.certificate.kind


# scenario files


@dataclass(frozen=True)
class ScenarioStep:
    line: int
    action: str
    node_id: str = ""


@dataclass(frozen=True)
class Scenario:
    nodes: tuple[tuple[str, Role], ...]
    steps: tuple[ScenarioStep, ...]
    pq_scheme: str = "falcon-512"
    tx_count: int = 20


@dataclass(frozen=True)
class StepResult:
    step: ScenarioStep
    stages: str
    error: str = ""
    liveness: LivenessReport | None = None

    @property
    def ok(self) -> bool:
        return not self.error and (self.liveness is None or self.liveness.ok)


def parse_scenario(text: str) -> Scenario:
    """Parse the line-oriented scenario format.

    ``node <id> <client|peer|orderer>``, ``scheme <name>``, ``txs <n>`` declare
    the network; ``advance <id>``, ``rollback <id>`` and ``check`` are replayed
    in order. ``#`` starts a comment.
    """
    nodes: list[tuple[str, Role]] = []
    steps: list[ScenarioStep] = []
    scheme, txs = "falcon-512", 20
    for number, raw in enumerate(text.splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        keyword, args = words[0], words[1:]
        expected = {"node": 2, "scheme": 1, "txs": 1, "advance": 1, "rollback": 1, "check": 0}
        if keyword not in expected:
            raise ConfigInvalid(f"line {number}: unknown directive {keyword!r}")
        if len(args) != expected[keyword]:
            raise ConfigInvalid(f"line {number}: {keyword} takes {expected[keyword]} argument(s)")
        if keyword == "node":
            try:
                role = Role(args[1])
            except ValueError:
                raise ConfigInvalid(f"line {number}: unknown role {args[1]!r}") from None
            nodes.append((args[0], role))
        elif keyword == "scheme":
            scheme = args[0]
        elif keyword == "txs":
            if not args[0].isdigit() or int(args[0]) < 1:
                raise ConfigInvalid(f"line {number}: txs must be a positive integer")
            txs = int(args[0])
        else:
            steps.append(ScenarioStep(number, keyword, args[0] if args else ""))
    if not nodes:
        raise ConfigInvalid("scenario declares no nodes")
    return Scenario(tuple(nodes), tuple(steps), scheme, txs)


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoFailure(str(exc)) from None
    return parse_scenario(text)


def replay(scenario: Scenario, registry: Registry | None = None) -> list[StepResult]:
    """Apply each step in order; refused transitions are recorded and skipped."""
    config = new_network(scenario.nodes, scenario.pq_scheme, registry)
    results = []
    for step in scenario.steps:
        if step.action == "check":
            report = check_liveness(config, scenario.tx_count)
            results.append(StepResult(step, config.describe(), liveness=report))
            continue
        move = advance if step.action == "advance" else rollback
        try:
            config = move(config, step.node_id)
            results.append(StepResult(step, config.describe()))
        except (PreconditionViolated, RollbackForbidden, KeyError) as exc:
            name = "UnknownNode" if isinstance(exc, KeyError) else type(exc).__name__
            results.append(StepResult(step, config.describe(), error=f"{name}: {exc}"))
    return results


def default_nodes(roles: Sequence[Role] = (Role.CLIENT, Role.PEER, Role.ORDERER)) -> list[tuple[str, Role]]:
    seen: dict[Role, int] = {}
    nodes = []
    for role in roles:
        nodes.append((f"{role.value}{seen.get(role, 0)}", role))
        seen[role] = seen.get(role, 0) + 1
    return nodes

from __future__ import annotations

import random
from dataclasses import replace

import pytest

from hybridledger.errors import ConfigInvalid, IoFailure, PreconditionViolated, RollbackForbidden
from hybridledger.identity import CertKind, ExtensionId
from hybridledger.ledger import Msp, Role
from hybridledger.migration import (
    CA_ID,
    FORMATS,
    NodeState,
    Stage,
    _build_node,
    accepted_formats,
    advance,
    certificate_kind,
    check_liveness,
    default_nodes,
    legal_moves,
    load_scenario,
    new_network,
    parse_scenario,
    random_walk,
    reachable_configs,
    replay,
    rollback,
)

THREE = default_nodes()  # client0, peer0, orderer0
FOUR = default_nodes((Role.CLIENT, Role.PEER, Role.PEER, Role.ORDERER))


def walk(config, *moves):
    for move in moves:
        action, node_id = move.split()
        config = (advance if action == "advance" else rollback)(config, node_id)
    return config


def core_to(config, stage: int):
    """Advance every core node (and the authority when needed) until core nodes reach ``stage``."""
    for target in range(1, stage + 1):
        if target == 2:
            config = walk(config, "advance ca", "advance ca")
        for s in config.core():
            config = advance(config, s.node_id)
    return config


@pytest.fixture(scope="module")
def start():
    return new_network(THREE)


# advance


def test_authority_rollover_gives_legacy_certificates(start):
    config = walk(start, "advance client0", "advance peer0", "advance orderer0", "advance ca", "advance ca")
    config = advance(config, "peer0")
    cert = config.state("peer0").node.certificate
    assert cert.kind is CertKind.LEGACY
    assert cert.body.extension(ExtensionId.ALT_SIGNATURE_VALUE) is not None
    assert cert.body.extension(ExtensionId.SUBJECT_ALT_PUBLIC_KEY_INFO) is None
    # not yet reissued
    assert certificate_kind(config, "orderer0") is CertKind.CLASSICAL_ONLY


def test_hybrid_signing_needs_every_core_node_upgraded():
    config = core_to(new_network(FOUR), 1)
    config = walk(config, "advance ca", "advance ca", "advance peer0", "advance peer0")
    # peer1 was never moved beyond S1; send it back to vanilla
    config = rollback(config, "peer1")
    assert config.state("peer0").stage is Stage.S3_VERIFY_ALT
    with pytest.raises(PreconditionViolated, match="peer1"):
        advance(config, "peer0")


def test_pq_software_update_is_a_signing_no_op(start):
    message = b"identical input"
    before = start.state("peer0").node
    after = advance(start, "peer0").state("peer0").node
    assert before.sign(message).encode() == after.sign(message).encode()
    assert before.armored_cert == after.armored_cert


def test_pq_software_update_keeps_verdicts(start):
    s0 = start.state("peer0")
    s1 = advance(start, "peer0").state("peer0")
    msps = [Msp(start.ca_cert, start.registry, s.hybrid_aware, s.verify_alt) for s in (s0, s1)]
    for node in (s.node for s in start.nodes):
        sig = node.sign(b"a")
        assert {msp.verify(node.armored_cert, b"a", sig) for msp in msps} == {True}
        assert {msp.verify(node.armored_cert, b"b", sig) for msp in msps} == {False}


def test_pq_keys_arrive_at_s4_for_core_nodes():
    config = core_to(new_network(THREE), 4)
    for s in config.core():
        assert s.node.signs_hybrid and s.node.certificate.kind is CertKind.HYBRID
    client = config.state("client0")
    assert client.stage is Stage.S0_VANILLA and not client.node.signs_hybrid


def test_client_s5_after_core_s4():
    config = core_to(new_network(THREE), 4)
    config = walk(config, *["advance client0"] * 4)
    assert config.state("client0").node.certificate.kind is CertKind.LEGACY
    config = advance(config, "client0")
    assert config.state("client0").node.signs_hybrid


def test_client_s5_blocked_until_core_signs_hybrid():
    config = core_to(new_network(THREE), 3)
    config = walk(config, *["advance client0"] * 4)
    with pytest.raises(PreconditionViolated):
        advance(config, "client0")


def test_node_s2_needs_authority_rollover(start):
    config = walk(start, "advance peer0")
    with pytest.raises(PreconditionViolated, match="authority"):
        advance(config, "peer0")


def test_authority_rollover_needs_core_software(start):
    config = walk(start, "advance ca", "advance peer0")
    with pytest.raises(PreconditionViolated, match="orderer0"):
        advance(config, CA_ID)


def test_no_advance_past_final_stage():
    config = core_to(new_network(THREE), 5)
    with pytest.raises(PreconditionViolated):
        advance(config, "peer0")
    with pytest.raises(PreconditionViolated):
        advance(config, CA_ID)


def test_unknown_node(start):
    with pytest.raises(KeyError):
        advance(start, "nobody")


def test_network_declaration_errors():
    with pytest.raises(ConfigInvalid):
        new_network([("a", Role.PEER), ("a", Role.PEER)])
    with pytest.raises(ConfigInvalid):
        new_network([("ca", Role.PEER)])


# rollback


def test_s3_rollback_disables_alt_verification():
    config = core_to(new_network(THREE), 3)
    config = rollback(config, "peer0")
    peer = config.state("peer0")
    assert peer.stage is Stage.S2_CA_HYBRID_CERT and not peer.node.verify_alt
    assert check_liveness(config, 10).ok


def test_s4_rollback_forbidden():
    config = core_to(new_network(THREE), 4)
    with pytest.raises(RollbackForbidden):
        rollback(config, "peer0")


def test_vanilla_rollback_forbidden_while_a_peer_signs_hybrid():
    config = core_to(new_network(THREE), 3)
    config = walk(config, "advance peer0", "advance client0")
    assert config.state("client0").stage is Stage.S1_PQ_SOFTWARE
    with pytest.raises(RollbackForbidden):
        rollback(config, "client0")


def test_forbidden_vanilla_rollback_would_break_verification():
    # oracle: force the refused configuration and watch the orderer refuse the hybrid peer
    config = core_to(new_network(THREE), 3)
    config = walk(config, "advance peer0", "advance orderer0")
    with pytest.raises(RollbackForbidden):
        rollback(config, "orderer0")
    orderer = config.state("orderer0")
    forced = replace(orderer, stage=Stage.S0_VANILLA)
    forced = replace(forced, node=_build_node(forced, config))
    report = check_liveness(config._with_state(forced), 10)
    assert report.committed == 0
    assert all("BadEndorsement" in o.reason for o in report.outcomes)


def test_authority_rollback_forbidden_while_certificates_in_use():
    config = core_to(new_network(THREE), 2)
    with pytest.raises(RollbackForbidden):
        rollback(config, CA_ID)


def test_rollback_at_s0(start):
    with pytest.raises(RollbackForbidden):
        rollback(start, "peer0")


# table-driven legality


def expected_legal(config, node_id: str, action: str) -> bool:
    """The rollout rules restated over bare stage numbers."""
    stages = {s.node_id: (s.role, int(s.stage)) for s in config.nodes}
    ca = int(config.ca.stage)
    core = [st for role, st in stages.values() if role in (Role.PEER, Role.ORDERER)]
    signing = [
        nid for nid, (role, st) in stages.items() if st >= (5 if role is Role.CLIENT else 4)
    ]
    if node_id == CA_ID:
        if action == "advance":
            return ca < 2 and (ca != 1 or min(core) >= 1)
        return ca > 0 and (ca != 2 or all(st < 2 for _, st in stages.values()))
    _, st = stages[node_id]
    if action == "advance":
        target = st + 1
        return (
            target <= 5
            and (target != 2 or ca == 2)
            and (target != 4 or min(core) >= 1)
            and (target != 5 or min(core) >= 4)
        )
    return 0 < st < 4 and (st != 1 or not signing)


@pytest.fixture(scope="module")
def reachable(start):
    return reachable_configs(start)


def test_reachable_state_count(reachable):
    assert len(reachable) == 150
    assert all(len(v) == 4 for v in reachable)


def test_transition_relation_matches_rules(reachable):
    for config in reachable.values():
        allowed = {(a, n) for a, n, _ in legal_moves(config)}
        for node_id in [s.node_id for s in config.nodes] + [CA_ID]:
            for action in ("advance", "rollback"):
                assert ((action, node_id) in allowed) == expected_legal(config, node_id, action), (
                    config.describe(), action, node_id,
                )


def test_every_move_changes_one_stage_by_one(reachable):
    for config in reachable.values():
        before = config.stage_vector()
        for _, _, nxt in legal_moves(config):
            diffs = [b - a for a, b in zip(before, nxt.stage_vector()) if a != b]
            assert diffs in ([1], [-1])


TABLE = [
    # (setup moves, move, legal)
    ([], "advance peer0", True),
    ([], "advance ca", True),
    (["advance ca"], "advance ca", False),
    (["advance client0", "advance peer0", "advance orderer0", "advance ca"], "advance ca", True),
    (["advance peer0", "advance orderer0", "advance ca"], "advance ca", True),
    (["advance peer0"], "advance peer0", False),
    ([], "rollback peer0", False),
    (["advance peer0"], "rollback peer0", True),
    (["advance ca"], "rollback ca", True),
    (["advance peer0", "advance orderer0", "advance ca", "advance ca", "advance peer0"], "rollback ca", False),
    (["advance peer0", "advance orderer0", "advance ca", "advance ca"], "rollback ca", True),
    (["advance peer0", "advance orderer0", "advance ca", "advance ca", "advance peer0"], "rollback peer0", True),
]


@pytest.mark.parametrize("setup, move, legal", TABLE)
def test_transition_table(start, setup, move, legal):
    config = walk(start, *setup)
    if legal:
        walk(config, move)
    else:
        with pytest.raises((PreconditionViolated, RollbackForbidden)):
            walk(config, move)


# liveness


def test_all_vanilla_commits(start):
    report = check_liveness(start, 20)
    assert (report.committed, report.failed) == (20, 0)


def test_hybrid_core_with_classical_client_commits():
    config = core_to(new_network(THREE), 4)
    config = advance(config, "client0")
    assert config.state("client0").stage is Stage.S1_PQ_SOFTWARE
    report = check_liveness(config, 20)
    assert report.ok and report.committed == 20


def test_random_walk_of_four_nodes_stays_live():
    rng = random.Random(2024)
    path = random_walk(new_network(FOUR), rng)
    assert path[-1].stage_vector() == (Stage.S5_CLIENT_HYBRID,) * 4 + (Stage.S2_CA_HYBRID_CERT,)
    assert len(path) == 4 * 5 + 2 + 1
    for config in path:
        report = check_liveness(config, 50)
        assert report.committed == 50, (config.describe(), report.outcomes)


def test_liveness_needs_every_role():
    with pytest.raises(ConfigInvalid):
        check_liveness(new_network([("peer0", Role.PEER), ("orderer0", Role.ORDERER)]), 5)


# accepted formats


def test_accepted_formats_by_stage():
    vanilla = NodeState("x", Role.PEER, Stage.S0_VANILLA)
    config = new_network(THREE)
    assert accepted_formats(vanilla, config) == {FORMATS[0], FORMATS[1]}
    upgraded = NodeState("x", Role.PEER, Stage.S1_PQ_SOFTWARE)
    assert accepted_formats(upgraded, config) == set(FORMATS)


@pytest.mark.parametrize("role", [Role.CLIENT, Role.PEER, Role.ORDERER])
def test_accepted_formats_never_shrink(role):
    config = new_network(THREE)
    previous = frozenset()
    for stage in Stage:
        formats = accepted_formats(NodeState("x", role, stage), config)
        assert previous <= formats
        previous = formats


# scenarios


SCENARIO = """\
# three nodes, small checks
node client0 client
node peer0 peer
node orderer0 orderer
scheme falcon-512
txs 5

advance peer0
advance orderer0
advance ca     # needs every core node at S1
advance ca
check
advance client0
advance client0   # reissued under the rolled-over authority
rollback ca       # refused: certificates still in use
advance ghost
check
"""


def test_parse_scenario():
    scenario = parse_scenario(SCENARIO)
    assert scenario.nodes == (("client0", Role.CLIENT), ("peer0", Role.PEER), ("orderer0", Role.ORDERER))
    assert scenario.pq_scheme == "falcon-512" and scenario.tx_count == 5
    assert [s.action for s in scenario.steps][:5] == ["advance"] * 4 + ["check"]
    assert scenario.steps[2].line == 10 and scenario.steps[2].node_id == "ca"


@pytest.mark.parametrize(
    "text",
    [
        "",
        "advance peer0\n",
        "node a peer\nhop a\n",
        "node a\n",
        "node a wizard\n",
        "node a peer\ntxs 0\n",
        "node a peer\ntxs many\n",
        "node a peer\ncheck now\n",
    ],
)
def test_parse_scenario_errors(text):
    with pytest.raises(ConfigInvalid):
        parse_scenario(text)


def test_replay_records_refusals():
    results = replay(parse_scenario(SCENARIO))
    errors = [r.error.split(":")[0] for r in results if r.error]
    assert errors == ["RollbackForbidden", "UnknownNode"]
    checks = [r for r in results if r.liveness is not None]
    assert [c.liveness.committed for c in checks] == [5, 5]
    assert results[-1].stages == "client0=S2 peer0=S1 orderer0=S1 ca=S2"


def test_load_scenario(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(SCENARIO)
    assert load_scenario(path) == parse_scenario(SCENARIO)
    with pytest.raises(IoFailure):
        load_scenario(tmp_path / "missing.txt")

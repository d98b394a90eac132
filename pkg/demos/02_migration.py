"""Walk a small network from classical to hybrid signatures without downtime.

Each step changes one node's stage and then pushes transactions through the
resulting mixed network. Refused steps show the ordering rules at work.

Run: python demos/02_migration.py
"""

from __future__ import annotations

from hybridledger.errors import PreconditionViolated, RollbackForbidden
from hybridledger.migration import advance, check_liveness, default_nodes, new_network, rollback

PLAN = [
    ("advance", "peer0"),
    ("advance", "ca"),
    ("advance", "ca"),          # refused: orderer0 still runs vanilla software
    ("advance", "orderer0"),
    ("advance", "ca"),          # authority rolls over to a post-quantum key
    ("advance", "peer0"),       # reissued legacy certificate
    ("advance", "orderer0"),
    ("advance", "peer0"),       # verifies alternative signatures
    ("advance", "orderer0"),
    ("advance", "peer0"),       # first hybrid signer
    ("rollback", "peer0"),      # refused: hybrid signing cannot be undone
    ("advance", "orderer0"),
    ("advance", "client0"),
    ("advance", "client0"),
    ("advance", "client0"),
    ("advance", "client0"),
    ("advance", "client0"),     # the client signs hybrid last
]


def main() -> None:
    config = new_network(default_nodes(), "falcon-512")
    print(f"{'start':<20} {config.describe():<40} committed {check_liveness(config, 10).committed}/10")
    for action, node_id in PLAN:
        step = f"{action} {node_id}"
        try:
            config = (advance if action == "advance" else rollback)(config, node_id)
        except (PreconditionViolated, RollbackForbidden) as exc:
            print(f"{step:<20} refused: {type(exc).__name__}: {exc}")
            continue
        report = check_liveness(config, 10)
        print(f"{step:<20} {config.describe():<40} committed {report.committed}/10")


if __name__ == "__main__":
    main()

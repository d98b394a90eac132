"""Hybrid certificates: what they carry, how big they get, and what stripping does.

Run: python demos/01_certificates.py
"""

from __future__ import annotations

import dataclasses

from hybridledger.crypto import OVERSIZED_PQ, RUNNABLE_PQ
from hybridledger.identity import CertKind, ExtensionId, HybridCertificate, verify_certificate
from hybridledger.ledger import Role, make_authority, make_node


def main() -> None:
    # A classical authority issues plain certificates; this is the calibration point.
    classical_ca = make_authority("ca")
    plain = make_node("peer0", Role.PEER, classical_ca).certificate
    print(f"classical-only certificate: {len(plain.armor())} bytes armored\n")

    # With a post-quantum authority key, every certificate gains alternative extensions.
    print(f"{'scheme':<30} {'kind':<15} {'armored':>9}  fits 32 KiB cap")
    for scheme in (*RUNNABLE_PQ, *OVERSIZED_PQ):
        ca = make_authority("ca", scheme)
        cert = make_node("peer0", Role.PEER, ca, scheme).certificate
        size = len(cert.armor())
        print(f"{scheme:<30} {cert.kind.value:<15} {size:>9}  {'yes' if size <= 32768 else 'no'}")

    # A node without its own PQ key still gets an alternative signature: it certifies absence.
    ca = make_authority("ca", "falcon-512")
    legacy = make_node("client0", Role.CLIENT, ca).certificate
    assert legacy.kind is CertKind.LEGACY
    print(f"\nlegacy certificate extensions: {[e.ext_id.name for e in legacy.body.extensions]}")

    # Stripping the alternative extensions changes the body the classical signature covers.
    hybrid = make_node("peer0", Role.PEER, ca, "falcon-512").certificate
    kept = tuple(e for e in hybrid.body.extensions if e.ext_id is ExtensionId.PADDING)
    stripped = HybridCertificate(dataclasses.replace(hybrid.body, extensions=kept), hybrid.outer_signature)
    print(f"honest certificate:   {verify_certificate(hybrid, ca.certificate, verify_alt=True)}")
    print(f"stripped certificate: {verify_certificate(stripped, ca.certificate, verify_alt=True)}")


if __name__ == "__main__":
    main()

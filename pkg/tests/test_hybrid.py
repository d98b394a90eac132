from __future__ import annotations

import random

import pytest

from hybridledger import tlv
from hybridledger.crypto import RUNNABLE_PQ, SIGNATURE_HASH, default_registry, hash_bytes
from hybridledger.errors import MalformedEncoding
from hybridledger.hybrid import (
    ABSENCE_MARKER,
    Component,
    DualMessage,
    HybridSignature,
    decode_hybrid,
    encode_hybrid,
    nested_payload,
    sign_concat,
    sign_nested,
    verify_concat,
    verify_nested,
)

REG = default_registry()
DIGEST = hash_bytes(SIGNATURE_HASH, b"transfer 1 -> 2: 10")


def keys(name: str, label: str = "signer"):
    return REG.keygen(name, hash_bytes(SIGNATURE_HASH, label.encode())[:32])


def flip_bit(data: bytes, bit: int) -> bytes:
    out = bytearray(data)
    out[bit // 8] ^= 1 << (bit % 8)
    return bytes(out)


@pytest.fixture(scope="module")
def pair():
    return keys("ecdsa-p256"), keys("falcon-512")


# concatenation combiner


def test_both_keys_give_two_verifying_components(pair):
    classical, pq = pair
    sig = sign_concat(classical, pq, DIGEST)
    assert sig.is_hybrid
    assert REG.verify(pq.public, DIGEST, sig.pq.signature)
    assert REG.verify(classical.public, DIGEST, sig.classical.signature)


def test_classical_only_encoding_is_bare_classical_component(pair):
    classical, _ = pair
    sig = sign_concat(classical, None, DIGEST)
    assert sig.pq is None
    assert encode_hybrid(sig) == tlv.encode(0x02, tlv.encode_named("ecdsa-p256", sig.classical.signature))


def test_falcon_payload_size(pair):
    classical, pq = pair
    encoded = encode_hybrid(sign_concat(classical, pq, DIGEST))
    # two TLV headers plus two length-prefixed scheme names
    overhead = 2 * tlv.HEADER_SIZE + (1 + len("falcon-512")) + (1 + len("ecdsa-p256"))
    assert len(encoded) == 666 + 64 + overhead


def test_pq_component_precedes_classical(pair):
    classical, pq = pair
    encoded = encode_hybrid(sign_concat(classical, pq, DIGEST))
    assert encoded[0] == 0x01
    assert encoded[tlv.HEADER_SIZE + int.from_bytes(encoded[1:5], "big")] == 0x02


def test_verify_hybrid_accepts_valid(pair):
    classical, pq = pair
    sig = sign_concat(classical, pq, DIGEST)
    assert verify_concat(True, classical.public, pq.public, DIGEST, sig)
    assert verify_concat(True, classical.public, pq.public, DIGEST, encode_hybrid(sig))


def test_downgrade_rejected(pair):
    classical, pq = pair
    stripped = HybridSignature(sign_concat(classical, pq, DIGEST).classical)
    assert not verify_concat(True, classical.public, pq.public, DIGEST, stripped)


def test_legacy_classical_only_accepted(pair):
    classical, _ = pair
    sig = sign_concat(classical, None, DIGEST)
    assert verify_concat(False, classical.public, None, DIGEST, sig)


def test_unexpected_pq_component_rejected(pair):
    classical, pq = pair
    sig = sign_concat(classical, pq, DIGEST)
    assert not verify_concat(False, classical.public, None, DIGEST, sig)


def test_either_bad_component_rejects(pair):
    classical, pq = pair
    sig = sign_concat(classical, pq, DIGEST)
    bad_pq = HybridSignature(sig.classical, Component(sig.pq.scheme, flip_bit(sig.pq.signature, 3)))
    bad_classical = HybridSignature(Component("ecdsa-p256", flip_bit(sig.classical.signature, 3)), sig.pq)
    assert not verify_concat(True, classical.public, pq.public, DIGEST, bad_pq)
    assert not verify_concat(True, classical.public, pq.public, DIGEST, bad_classical)


def test_component_scheme_must_match_key(pair):
    classical, pq = pair
    sig = sign_concat(classical, pq, DIGEST)
    relabelled = HybridSignature(sig.classical, Component("falcon-1024", sig.pq.signature))
    assert not verify_concat(True, classical.public, pq.public, DIGEST, relabelled)


def test_hybrid_expectation_without_pq_key_rejects(pair):
    classical, pq = pair
    sig = sign_concat(classical, pq, DIGEST)
    assert not verify_concat(True, classical.public, None, DIGEST, sig)


def test_malformed_bytes_rejected_not_raised(pair):
    classical, pq = pair
    assert not verify_concat(True, classical.public, pq.public, DIGEST, b"\x01\x00")


@pytest.mark.parametrize("name", RUNNABLE_PQ)
def test_hybrid_round_trips(name):
    rng = random.Random(name)
    for _ in range(1000):
        classical = REG.keygen("ecdsa-p256", rng.randbytes(32))
        pq = REG.keygen(name, rng.randbytes(32))
        digest = hash_bytes(SIGNATURE_HASH, rng.randbytes(24))
        encoded = encode_hybrid(sign_concat(classical, pq, digest))
        assert verify_concat(True, classical.public, pq.public, digest, encoded)


def downgrade_mutations(encoded: bytes, sig: HybridSignature, rng: random.Random, count: int):
    pq_end = tlv.HEADER_SIZE + int.from_bytes(encoded[1:5], "big")
    yield encoded[pq_end:]  # PQ component deleted
    yield encoded[:pq_end]  # classical component deleted
    yield HybridSignature(sig.classical).encode()
    yield b""
    while count > 4:
        kind = rng.randrange(3)
        if kind == 0:  # truncation
            yield encoded[: rng.randrange(len(encoded))]
        elif kind == 1:  # remove a substring
            start = rng.randrange(len(encoded))
            yield encoded[:start] + encoded[start + rng.randint(1, len(encoded) - start) :]
        else:  # remove a substring inside a component value
            start = rng.randrange(tlv.HEADER_SIZE, len(encoded))
            length = rng.randint(1, 32)
            yield encoded[:start] + encoded[start + length :]
        count -= 1


def test_downgrade_fuzz_never_accepted(pair):
    classical, pq = pair
    sig = sign_concat(classical, pq, DIGEST)
    encoded = encode_hybrid(sig)
    mutations = list(downgrade_mutations(encoded, sig, random.Random(7), 1000))
    assert len(mutations) == 1000
    for mutated in mutations:
        assert mutated != encoded
        assert not verify_concat(True, classical.public, pq.public, DIGEST, mutated)


# encoding


def test_encoding_round_trip(pair):
    classical, pq = pair
    for sig in (sign_concat(classical, pq, DIGEST), sign_concat(classical, None, DIGEST)):
        encoded = encode_hybrid(sig)
        assert decode_hybrid(encoded) == sig
        assert encode_hybrid(decode_hybrid(encoded)) == encoded


def test_decode_truncated_reports_offset(pair):
    classical, pq = pair
    encoded = encode_hybrid(sign_concat(classical, pq, DIGEST))
    for cut in (0, 3, 10, len(encoded) - 1):
        with pytest.raises(MalformedEncoding):
            decode_hybrid(encoded[:cut])


def test_decode_rejects_trailing_bytes_and_wrong_order(pair):
    classical, pq = pair
    sig = sign_concat(classical, pq, DIGEST)
    encoded = encode_hybrid(sig)
    with pytest.raises(MalformedEncoding):
        decode_hybrid(encoded + b"\x00")
    swapped = tlv.encode(0x02, sig.classical.encode_value()) + tlv.encode(0x01, sig.pq.encode_value())
    with pytest.raises(MalformedEncoding) as info:
        decode_hybrid(swapped)
    assert info.value.offset > 0


def test_classical_only_has_no_pq_bytes(pair):
    classical, _ = pair
    encoded = encode_hybrid(sign_concat(classical, None, DIGEST))
    assert len(encoded) == tlv.HEADER_SIZE + 1 + len("ecdsa-p256") + 64
    assert encoded[0] == 0x02


# nested dual-message combiner


@pytest.fixture(scope="module")
def nested():
    pq_issuer, classical_issuer = keys("falcon-512", "ca"), keys("ecdsa-p256", "ca")
    dual = DualMessage(keys("falcon-512", "subject").public_key, b"subject=peer0;issuer=ca")
    return pq_issuer, classical_issuer, dual, sign_nested(pq_issuer, classical_issuer, dual)


def test_nested_round_trip(nested):
    pq_issuer, classical_issuer, dual, nsig = nested
    assert verify_nested(pq_issuer.public, classical_issuer.public, dual, nsig) == (True, True)


def test_nested_without_pq_issuer_key_skips_sigma1(nested):
    _, classical_issuer, dual, nsig = nested
    verdict = verify_nested(None, classical_issuer.public, dual, nsig)
    assert verdict.sigma1_ok is None and verdict.sigma2_ok


def test_nested_m1_never_empty():
    with pytest.raises(ValueError):
        DualMessage(b"", b"m2")
    assert ABSENCE_MARKER == bytes([0x03, 0, 0, 0, 1, 0])


def test_nested_absence_marker_signed():
    pq_issuer, classical_issuer = keys("falcon-512", "ca"), keys("ecdsa-p256", "ca")
    dual = DualMessage(ABSENCE_MARKER, b"m2")
    nsig = sign_nested(pq_issuer, classical_issuer, dual)
    assert verify_nested(pq_issuer.public, classical_issuer.public, dual, nsig) == (True, True)
    claimed = DualMessage(keys("falcon-512", "x").public_key, b"m2")
    assert verify_nested(pq_issuer.public, classical_issuer.public, claimed, nsig) == (False, False)


def test_mutating_m2_only_breaks_sigma2(nested):
    pq_issuer, classical_issuer, dual, nsig = nested
    for bit in range(len(dual.m2) * 8):
        mutated = DualMessage(dual.m1, flip_bit(dual.m2, bit))
        assert verify_nested(pq_issuer.public, classical_issuer.public, mutated, nsig) == (True, False)


def test_sigma2_sensitive_to_every_byte_of_m1(nested):
    pq_issuer, classical_issuer, dual, nsig = nested
    for i in range(len(dual.m1)):
        mutated = DualMessage(flip_bit(dual.m1, i * 8 + i % 8), dual.m2)
        verdict = verify_nested(pq_issuer.public, classical_issuer.public, mutated, nsig)
        assert verdict == (False, False)


def test_sigma2_sensitive_to_every_byte_of_sigma1(nested):
    pq_issuer, classical_issuer, dual, nsig = nested
    sigma1 = nsig.sigma1.signature
    for i in range(len(sigma1)):
        tampered = type(nsig)(Component(nsig.sigma1.scheme, flip_bit(sigma1, i * 8 + i % 8)), nsig.sigma2)
        verdict = verify_nested(pq_issuer.public, classical_issuer.public, dual, tampered)
        assert not verdict.sigma2_ok and not verdict.sigma1_ok


def test_swapped_sigma1_breaks_sigma2(nested):
    pq_issuer, classical_issuer, dual, nsig = nested
    other = sign_nested(pq_issuer, classical_issuer, DualMessage(keys("falcon-512", "other").public_key, dual.m2))
    swapped = type(nsig)(other.sigma1, nsig.sigma2)
    assert not verify_nested(pq_issuer.public, classical_issuer.public, dual, swapped).sigma2_ok
    # oracle: the payload sigma2 covers differs once sigma1 differs
    assert nested_payload(dual.m1, other.sigma1, dual.m2) != nested_payload(dual.m1, nsig.sigma1, dual.m2)

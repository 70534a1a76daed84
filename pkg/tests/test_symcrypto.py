import random

import pytest

from urbanseal import symcrypto
from urbanseal.symcrypto import IntegrityError


def test_aead_round_trip_and_tamper():
    rng = random.Random(1)
    key = symcrypto.random_key(rng)
    blob = symcrypto.aead_seal(key, b"payload", b"aad", rng)
    assert symcrypto.aead_open(key, blob, b"aad") == b"payload"
    with pytest.raises(IntegrityError):
        symcrypto.aead_open(key, blob, b"other-aad")
    bad = blob[:-1] + bytes([blob[-1] ^ 1])
    with pytest.raises(IntegrityError):
        symcrypto.aead_open(key, bad, b"aad")


def test_chain_is_deterministic_and_progressive():
    dek0 = b"\x01" * 32
    assert symcrypto.chain_at(dek0, 0) == dek0
    assert symcrypto.chain_at(dek0, 3) == symcrypto.chain_next(
        symcrypto.chain_next(symcrypto.chain_next(dek0)))
    assert symcrypto.chain_next(dek0) != dek0


def test_kdf_separation():
    material = b"\x02" * 64
    assert symcrypto.derive_dek(material) != symcrypto.chain_next(material)


def test_signature_round_trip():
    rng = random.Random(2)
    signer = symcrypto.Signer(rng)
    sig = signer.sign(b"msg")
    symcrypto.verify_signature(signer.public_bytes(), b"msg", sig)
    with pytest.raises(IntegrityError):
        symcrypto.verify_signature(signer.public_bytes(), b"other", sig)
    other = symcrypto.Signer(random.Random(3))
    with pytest.raises(IntegrityError):
        symcrypto.verify_signature(other.public_bytes(), b"msg", sig)


def test_sealed_box():
    rng = random.Random(4)
    box = symcrypto.SealedBox(rng)
    blob = symcrypto.seal_to(box.public_bytes(), b"secret", rng)
    assert box.open(blob) == b"secret"
    stranger = symcrypto.SealedBox(random.Random(5))
    with pytest.raises(IntegrityError):
        stranger.open(blob)

"""Symmetric and conventional public-key helpers for the protocol layer.

Everything here is generic plumbing around the `cryptography` package:
AES-GCM for authenticated encryption, SHA-256 for the per-item key chain
and the GT-to-symmetric-key derivation, Ed25519 for authority signatures,
and an X25519 sealed box for confidential key delivery. All randomness is
drawn from a caller-supplied rng so runs are reproducible under a seed.
"""

import hashlib

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey, Ed25519PublicKey)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey, X25519PublicKey)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

KEY_BYTES = 32
_NONCE_BYTES = 12

_CHAIN_TAG = b"urbanseal.dek.chain.v1"
_KDF_TAG = b"urbanseal.ask.kdf.v1"
_BOX_TAG = b"urbanseal.box.kdf.v1"


class IntegrityError(Exception):
    """Authenticated decryption or signature verification failed."""


def random_key(rng):
    return rng.randbytes(KEY_BYTES)


def aead_seal(key, plaintext, aad, rng):
    nonce = rng.randbytes(_NONCE_BYTES)
    return nonce + AESGCM(key).encrypt(nonce, plaintext, aad)


def aead_open(key, blob, aad):
    try:
        return AESGCM(key).decrypt(blob[:_NONCE_BYTES], blob[_NONCE_BYTES:], aad)
    except InvalidTag:
        raise IntegrityError("authenticated decryption failed")


def chain_next(dek):
    """One-way step of the per-item data encryption key chain."""
    return hashlib.sha256(_CHAIN_TAG + dek).digest()


def chain_at(dek0, count):
    dek = dek0
    for _ in range(count):
        dek = chain_next(dek)
    return dek


def derive_dek(gt_bytes):
    """Symmetric key from the GT payload carried by an ABE-sealed key."""
    return hashlib.sha256(_KDF_TAG + gt_bytes).digest()


class Signer:
    """Ed25519 signing identity (deterministic given the rng)."""

    def __init__(self, rng):
        self._key = Ed25519PrivateKey.from_private_bytes(rng.randbytes(32))

    def sign(self, message):
        return self._key.sign(message)

    def public_bytes(self):
        return self._key.public_key().public_bytes_raw()


def verify_signature(public_bytes, message, signature):
    try:
        Ed25519PublicKey.from_public_bytes(public_bytes).verify(signature, message)
    except InvalidSignature:
        raise IntegrityError("signature verification failed")


class SealedBox:
    """Receiver side of ephemeral-static X25519 + AES-GCM encryption."""

    def __init__(self, rng):
        self._key = X25519PrivateKey.from_private_bytes(rng.randbytes(32))

    def public_bytes(self):
        return self._key.public_key().public_bytes_raw()

    def open(self, blob):
        eph = X25519PublicKey.from_public_bytes(blob[:32])
        shared = self._key.exchange(eph)
        key = hashlib.sha256(_BOX_TAG + shared + blob[:32]).digest()
        return aead_open(key, blob[32:], b"")


def seal_to(public_bytes, plaintext, rng):
    """Sender side of SealedBox."""
    eph = X25519PrivateKey.from_private_bytes(rng.randbytes(32))
    eph_pub = eph.public_key().public_bytes_raw()
    shared = eph.exchange(X25519PublicKey.from_public_bytes(public_bytes))
    key = hashlib.sha256(_BOX_TAG + shared + eph_pub).digest()
    return eph_pub + aead_seal(key, plaintext, b"", rng)

import random

import pytest

from conftest import make_universe
from urbanseal import kpabe, pre
from urbanseal.kpabe import AND, Attr, VersionMismatchError


@pytest.fixture
def fresh_setup():
    rng = random.Random(12)
    uni = make_universe(road=("A", "B", "C"), time=("X",))
    mk, params = kpabe.setup(uni, 32, rng)
    return mk, params, rng


def test_update_rejects_time_attribute(fresh_setup):
    mk, params, rng = fresh_setup
    with pytest.raises(ValueError):
        pre.update_attribute("X", mk, params, rng)


def test_update_bumps_versions(fresh_setup):
    mk, params, rng = fresh_setup
    rk = pre.update_attribute("A", mk, params, rng)
    assert (rk.from_version, rk.to_version) == (0, 1)
    assert mk.t["A"].version == 1
    assert params.T["A"].version == 1
    # public T stays consistent with the secret t
    g = params.group
    assert params.T["A"].value == g.g1_mul(g.g, mk.t["A"].value)


def test_history_append_only_and_contiguous(fresh_setup):
    mk, params, rng = fresh_setup
    rkh = pre.ReencryptionKeyHistory("A")
    rkh.append(pre.update_attribute("A", mk, params, rng))
    rkh.append(pre.update_attribute("A", mk, params, rng))
    assert rkh.current_version == 2
    with pytest.raises(ValueError):
        rkh.append(pre.ReencryptionKey("B", 2, 1))
    with pytest.raises(ValueError):
        rkh.append(pre.ReencryptionKey("A", 5, 1))


def test_roundtrip_after_update(fresh_setup):
    """Fresh encryption under rotated params decrypts with a fresh key."""
    mk, params, rng = fresh_setup
    pre.update_attribute("A", mk, params, rng)
    payload = params.group.random_gt(rng)
    ct = kpabe.encrypt(payload, {"A", "X"}, params, rng)
    dk = kpabe.keygen(mk, AND(Attr("A"), Attr("X")), params, rng)
    assert kpabe.decrypt(ct, dk, params) == payload


def test_lazy_update_of_ciphertext_and_key(fresh_setup):
    mk, params, rng = fresh_setup
    group = params.group
    payload = group.random_gt(rng)
    old_ct = kpabe.encrypt(payload, {"A", "X"}, params, rng)
    old_dk = kpabe.keygen(mk, AND(Attr("A"), Attr("X")), params, rng)

    rkh = pre.ReencryptionKeyHistory("A")
    for _ in range(3):
        rkh.append(pre.update_attribute("A", mk, params, rng))

    # stale pair still agrees on versions, so it decrypts as-is
    assert kpabe.decrypt(old_ct, old_dk, params) == payload

    # a three-version fold on both sides decrypts too
    old_ct.e["A"] = pre.update_ciphertext_component("A", old_ct.e["A"],
                                                    rkh, group)
    assert old_ct.e["A"].version == 3
    with pytest.raises(VersionMismatchError):
        kpabe.decrypt(old_ct, old_dk, params)
    old_dk.dk["A"] = pre.update_key_component("A", old_dk.dk["A"], rkh, group)
    assert kpabe.decrypt(old_ct, old_dk, params) == payload

    # updated ciphertext equals what fresh params would have produced only
    # up to randomness, but a fresh key must also open it
    new_dk = kpabe.keygen(mk, AND(Attr("A"), Attr("X")), params, rng)
    assert kpabe.decrypt(old_ct, new_dk, params) == payload


def test_current_component_is_untouched(fresh_setup):
    mk, params, rng = fresh_setup
    group = params.group
    rkh = pre.ReencryptionKeyHistory("A")
    rkh.append(pre.update_attribute("A", mk, params, rng))
    comp = kpabe.Component(group.g1_mul(group.g, 5), 1)
    assert pre.update_ciphertext_component("A", comp, rkh, group) == comp
    assert pre.update_key_component("A", comp, rkh, group) == comp


def test_history_gap_detected(fresh_setup):
    mk, params, rng = fresh_setup
    group = params.group
    rkh = pre.ReencryptionKeyHistory("A")
    comp = kpabe.Component(group.g, 2)
    with pytest.raises(pre.HistoryGapError):
        pre.update_ciphertext_component("A", comp, rkh, group)
    with pytest.raises(ValueError):
        pre.update_ciphertext_component("B", comp, rkh, group)


def test_revoked_key_locked_out(fresh_setup):
    """Without the key-side refresh, updated ciphertexts are unreadable."""
    mk, params, rng = fresh_setup
    group = params.group
    payload = group.random_gt(rng)
    ct = kpabe.encrypt(payload, {"A", "X"}, params, rng)
    revoked = kpabe.keygen(mk, AND(Attr("A"), Attr("X")), params, rng)
    rkh = pre.ReencryptionKeyHistory("A")
    rkh.append(pre.update_attribute("A", mk, params, rng))
    ct.e["A"] = pre.update_ciphertext_component("A", ct.e["A"], rkh, group)
    with pytest.raises(VersionMismatchError):
        kpabe.decrypt(ct, revoked, params)
    fresh_ct = kpabe.encrypt(payload, {"A", "X"}, params, rng)
    with pytest.raises(VersionMismatchError):
        kpabe.decrypt(fresh_ct, revoked, params)

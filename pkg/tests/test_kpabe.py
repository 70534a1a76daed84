import itertools
import random

import pytest

from conftest import make_universe, random_policy
from urbanseal import kpabe, serde
from urbanseal.kpabe import (AND, OR, Attr, Universe, VersionMismatchError,
                             eval_policy, policy_leaves)


def _payload(params, seed):
    return params.group.random_gt(random.Random(seed))


def test_universe_partition_disjoint():
    with pytest.raises(ValueError):
        Universe(frozenset(["A"]), frozenset(["A"]))


def test_setup_structure(toy_setup):
    mk, params = toy_setup
    assert set(mk.t) == set(mk.universe.all)
    assert set(params.T) == set(mk.universe.all)
    assert all(c.version == 0 for c in mk.t.values())


def test_setup_rejects_empty_universe():
    with pytest.raises(ValueError):
        kpabe.setup(Universe(frozenset(), frozenset()), 32, random.Random(0))


def test_independent_setups_differ():
    uni = make_universe()
    _, p1 = kpabe.setup(uni, 32, random.Random(1))
    _, p2 = kpabe.setup(uni, 32, random.Random(2))
    assert p1.Y != p2.Y


def test_encrypt_structure(toy_setup):
    _, params = toy_setup
    ct = kpabe.encrypt(_payload(params, 0), {"A", "C", "E"}, params,
                       random.Random(3))
    assert set(ct.e) == {"A", "C", "E"}
    with pytest.raises(ValueError):
        kpabe.encrypt(_payload(params, 0), set(), params, random.Random(3))
    with pytest.raises(ValueError):
        kpabe.encrypt(_payload(params, 0), {"A", "Q"}, params, random.Random(3))


def test_example_policy_decryption(toy_setup):
    mk, params = toy_setup
    policy = AND(Attr("A"), OR(Attr("B"), Attr("C"), Attr("D")))
    dk = kpabe.keygen(mk, policy, params, random.Random(4))
    assert dk.lam == frozenset("ABCD")
    assert len(dk.dk) == 4
    payload = _payload(params, 1)
    ct = kpabe.encrypt(payload, {"A", "C", "E"}, params, random.Random(5))
    assert kpabe.decrypt(ct, dk, params) == payload
    ct2 = kpabe.encrypt(payload, {"B", "C"}, params, random.Random(6))
    assert kpabe.decrypt(ct2, dk, params) is None


def test_single_leaf_policy(toy_setup):
    mk, params = toy_setup
    dk = kpabe.keygen(mk, Attr("E"), params, random.Random(7))
    assert len(dk.dk) == 1
    payload = _payload(params, 2)
    ct = kpabe.encrypt(payload, {"E"}, params, random.Random(8))
    assert kpabe.decrypt(ct, dk, params) == payload


def test_full_and_policy(toy_setup):
    mk, params = toy_setup
    attrs = sorted(mk.universe.road)
    dk = kpabe.keygen(mk, AND(*[Attr(a) for a in attrs]), params,
                      random.Random(9))
    payload = _payload(params, 3)
    ct = kpabe.encrypt(payload, attrs, params, random.Random(10))
    assert kpabe.decrypt(ct, dk, params) == payload


def test_keygen_rejects_bad_policies(toy_setup):
    mk, params = toy_setup
    with pytest.raises(ValueError):
        kpabe.keygen(mk, Attr("Q"), params, random.Random(0))
    with pytest.raises(ValueError):
        kpabe.keygen(mk, OR(Attr("A"), Attr("A")), params, random.Random(0))


def test_keys_from_same_policy_differ(toy_setup):
    mk, params = toy_setup
    policy = AND(Attr("A"), Attr("B"))
    d1 = kpabe.keygen(mk, policy, params, random.Random(1))
    d2 = kpabe.keygen(mk, policy, params, random.Random(2))
    assert d1.dk["A"].value != d2.dk["A"].value


def test_version_mismatch_is_loud(toy_setup):
    mk, params = toy_setup
    dk = kpabe.keygen(mk, Attr("A"), params, random.Random(1))
    ct = kpabe.encrypt(_payload(params, 4), {"A"}, params, random.Random(2))
    ct.e["A"] = kpabe.Component(ct.e["A"].value, 1)
    with pytest.raises(VersionMismatchError):
        kpabe.decrypt(ct, dk, params)


def test_deterministic_under_seed():
    uni = make_universe()
    runs = []
    for _ in range(2):
        rng = random.Random(42)
        mk, params = kpabe.setup(uni, 32, rng)
        dk = kpabe.keygen(mk, AND(Attr("A"), Attr("B")), params, rng)
        ct = kpabe.encrypt(params.group.random_gt(rng), {"A", "B"}, params, rng)
        runs.append((serde.dump_master_key(mk, params.group),
                     serde.dump_decryption_key(dk, params.group),
                     serde.dump_ciphertext(ct, params.group)))
    assert runs[0] == runs[1]


def test_random_policies_match_boolean_oracle(toy_setup):
    mk, params = toy_setup
    rng = random.Random(2024)
    attrs = sorted(mk.universe.all)
    payload = _payload(params, 5)
    for trial in range(25):
        lam = rng.sample(attrs, rng.randint(1, 5))
        policy = random_policy(rng, lam)
        dk = kpabe.keygen(mk, policy, params, rng)
        for k in range(len(lam) + 1):
            for gamma in itertools.combinations(lam, k):
                if not gamma:
                    assert not eval_policy(policy, frozenset())
                    continue
                ct = kpabe.encrypt(payload, gamma, params, rng)
                got = kpabe.decrypt(ct, dk, params)
                if eval_policy(policy, frozenset(gamma)):
                    assert got == payload
                else:
                    assert got is None


def test_component_splice_does_not_decrypt(toy_setup):
    """Components of two keys cannot be combined into a working key."""
    mk, params = toy_setup
    rng = random.Random(77)
    payload = _payload(params, 6)
    policy = AND(Attr("A"), Attr("B"), Attr("C"))
    k1 = kpabe.keygen(mk, policy, params, rng)
    k2 = kpabe.keygen(mk, policy, params, rng)
    ct = kpabe.encrypt(payload, {"A", "B", "C"}, params, rng)
    lam = sorted(k1.lam)
    for picks in itertools.product([0, 1], repeat=len(lam)):
        if len(set(picks)) == 1:
            continue       # a pure key is not a splice
        spliced = kpabe.DecryptionKey(policy, k1.lam, {
            a: (k1 if w == 0 else k2).dk[a] for a, w in zip(lam, picks)})
        assert kpabe.decrypt(ct, spliced, params) != payload

import pytest

from urbanseal import attrspace
from urbanseal.attrspace import (PolicySpec, Representation, TimeConfig,
                                 build_universe, label_for_device,
                                 policy_for_user, release_policy,
                                 revocation_attribute_set, road_leaf_set)
from urbanseal.city import CityModel, Street
from urbanseal.kpabe import eval_policy, policy_leaves


def one_street_city(rho=7):
    city = CityModel("t")
    city.add_street(Street("10", rho, [(0.0, 0.0), (float(rho * 10), 0.0)]))
    return city


def test_representation_validation():
    with pytest.raises(ValueError):
        Representation("weird")
    with pytest.raises(ValueError):
        Representation("basic", 2)
    with pytest.raises(ValueError):
        Representation("attribute_pool", 0)
    with pytest.raises(ValueError):
        TimeConfig(0)


def test_universe_sizes_by_representation():
    city = one_street_city(7)
    time = TimeConfig(7)
    basic = build_universe(city, Representation("basic"), time)
    segt = build_universe(city, Representation("segment_tree"), time)
    pool = build_universe(city, Representation("attribute_pool", 5), time)
    assert len(basic.universe.road) == 7
    assert len(segt.universe.road) == 13
    assert len(pool.universe.road) == 65
    # the time encoding is representation-independent
    assert basic.universe.time == segt.universe.time == pool.universe.time
    assert len(segt.universe.time) == 13


def test_label_sizes():
    city = one_street_city(7)
    time = TimeConfig(7)
    for rep, expect in ((Representation("basic"), 1),
                        (Representation("segment_tree"), 4),
                        (Representation("attribute_pool", 3), 12)):
        layout = build_universe(city, rep, time)
        label = label_for_device(layout, "10", 5, 3)
        assert len(label.gamma_r) == expect
        assert label.gamma_r <= layout.universe.road
        assert label.gamma_x <= layout.universe.time
        assert label.gamma == label.gamma_r | label.gamma_x
        assert len(label.gamma) == len(label.gamma_r) + len(label.gamma_x)


def test_label_range_checks():
    layout = build_universe(one_street_city(7), Representation("basic"),
                            TimeConfig(7))
    with pytest.raises(ValueError):
        label_for_device(layout, "10", 8, 1)
    with pytest.raises(ValueError):
        label_for_device(layout, "10", 1, 8)


def test_policy_shapes():
    city = one_street_city(7)
    layout = build_universe(city, Representation("segment_tree"), TimeConfig(7))
    # full street range collapses to the root node attribute
    pol = policy_for_user(layout, PolicySpec((("10", 1, 7),), 1, 7))
    road_attrs = road_leaf_set(layout, pol)
    assert road_attrs == frozenset(["s10_n1_7"])
    # interval [3,7] gives the two canonical cover nodes
    pol2 = policy_for_user(layout, PolicySpec((("10", 3, 7),), 1, 7))
    assert road_leaf_set(layout, pol2) == frozenset(["s10_n3_4", "s10_n5_7"])
    assert revocation_attribute_set(layout, pol2) == \
        frozenset(["s10_n3_4", "s10_n5_7"])


def test_policy_spec_validation():
    layout = build_universe(one_street_city(7), Representation("basic"),
                            TimeConfig(7))
    with pytest.raises(ValueError):
        policy_for_user(layout, PolicySpec((), 1, 7))
    with pytest.raises(ValueError):
        policy_for_user(layout, PolicySpec((("10", 1, 2),), 5, 3))
    with pytest.raises(ValueError):
        policy_for_user(layout, PolicySpec((("10", 1, 9),), 1, 7))
    with pytest.raises(ValueError):
        policy_for_user(layout, PolicySpec((("10", 1, 2),), 1, 9))


def test_satisfaction_matches_plain_semantics():
    """Exhaustive cross-check: the built policy accepts a device label iff
    the segment is authorized and the date is in the validity period."""
    city = one_street_city(6)
    spec = PolicySpec((("10", 2, 3), ("10", 5, 5)), 2, 4)
    for rep in (Representation("basic"), Representation("segment_tree"),
                Representation("attribute_pool", 2)):
        layout = build_universe(city, rep, TimeConfig(6))
        pol = policy_for_user(layout, spec)
        for seg in range(1, 7):
            for day in range(1, 7):
                label = label_for_device(layout, "10", seg, day)
                want = seg in (2, 3, 5) and 2 <= day <= 4
                assert eval_policy(pol, label.gamma) == want, (rep, seg, day)


def test_adjacent_intervals_merge():
    city = one_street_city(7)
    layout = build_universe(city, Representation("segment_tree"), TimeConfig(7))
    joined = policy_for_user(layout, PolicySpec((("10", 1, 3), ("10", 4, 7)),
                                                1, 7))
    whole = frozenset(["s10_n1_7"])
    assert road_leaf_set(layout, joined) == whole


def test_pool_balance_and_release():
    city = one_street_city(4)
    layout = build_universe(city, Representation("attribute_pool", 2),
                            TimeConfig(4))
    spec = PolicySpec((("10", 1, 4),), 1, 4)
    policies = [policy_for_user(layout, spec) for _ in range(4)]
    counters = layout.pool.counters
    base_root = "s10_%s" % layout.street_trees["10"].root
    for base, reps in layout.pool.replicas.items():
        used = [counters[r] for r in reps]
        assert max(used) - min(used) <= 1
    # each replica of the root used exactly twice (4 keys over 2 replicas)
    assert [counters[r] for r in layout.pool.replicas[base_root]] == [2, 2]
    # releasing a policy gives its replicas back
    release_policy(layout, policies[0])
    assert sum(counters[r] for r in layout.pool.replicas[base_root]) == 3
    with pytest.raises(ValueError):
        layout.pool.release("s10_l1@9")


def test_pool_disjoint_replicas_mean_no_shared_attrs():
    city = one_street_city(4)
    layout = build_universe(city, Representation("attribute_pool", 2),
                            TimeConfig(4))
    spec = PolicySpec((("10", 1, 4),), 1, 4)
    p1 = policy_for_user(layout, spec)
    p2 = policy_for_user(layout, spec)
    assert not road_leaf_set(layout, p1) & road_leaf_set(layout, p2)


def test_key_size_dominance():
    city = one_street_city(7)
    time = TimeConfig(7)
    spec = PolicySpec((("10", 2, 6),), 1, 7)
    sizes = {}
    for kind, eps in (("basic", 1), ("segment_tree", 1),
                      ("attribute_pool", 3)):
        layout = build_universe(city, Representation(kind, eps), time)
        pol = policy_for_user(layout, spec)
        sizes[kind] = len(road_leaf_set(layout, pol))
    assert sizes["segment_tree"] <= sizes["basic"]
    assert sizes["attribute_pool"] == sizes["segment_tree"]


def test_revocation_set_is_road_only():
    layout = build_universe(one_street_city(7), Representation("basic"),
                            TimeConfig(7))
    pol = policy_for_user(layout, PolicySpec((("10", 1, 3),), 1, 7))
    mu = revocation_attribute_set(layout, pol)
    assert len(mu) == 3
    assert not mu & layout.universe.time


def test_affected_users_examples():
    city = CityModel("t2")
    city.add_street(Street("a", 4, [(0.0, 0.0), (40.0, 0.0)]))
    city.add_street(Street("b", 4, [(0.0, 10.0), (40.0, 10.0)]))
    layout = build_universe(city, Representation("basic"), TimeConfig(4))
    pols = {"u0": policy_for_user(layout, PolicySpec((("a", 1, 4),), 1, 4)),
            "u1": policy_for_user(layout, PolicySpec((("b", 1, 4),), 1, 4)),
            "u2": policy_for_user(layout, PolicySpec((("a", 1, 2),), 1, 4))}
    assert attrspace.affected_users(layout, "u1", pols) == set()
    assert attrspace.affected_users(layout, "u0", pols) == {"u2"}

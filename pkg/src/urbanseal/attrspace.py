"""Mapping between city/time semantics and ABE attributes and policies.

Three road-segment representations are supported:

* basic           -- one attribute per road segment
* segment_tree    -- one attribute per segment-tree node per street
* attribute_pool  -- epsilon interchangeable replicas per segment-tree node

Time is always encoded with a single segment tree over the system lifetime
in days. Attribute names are part of the persisted format:
"s{street}_{node}" for road attributes ("@{replica}" suffix under the
pool representation) and "x_{node}" for time attributes.
"""

from dataclasses import dataclass, field

from .kpabe import AND, OR, Attr, DecryptionKey, Universe, policy_leaves
from .segtree import SegmentTree

REPRESENTATION_KINDS = ("basic", "segment_tree", "attribute_pool")


@dataclass(frozen=True)
class Representation:
    kind: str
    epsilon: int = 1

    def __post_init__(self):
        if self.kind not in REPRESENTATION_KINDS:
            raise ValueError("unknown representation %r" % self.kind)
        if self.epsilon < 1:
            raise ValueError("epsilon must be >= 1")
        if self.kind != "attribute_pool" and self.epsilon != 1:
            raise ValueError("epsilon is only meaningful for attribute_pool")


@dataclass(frozen=True)
class TimeConfig:
    max_lifetime_days: int

    def __post_init__(self):
        if self.max_lifetime_days < 1:
            raise ValueError("lifetime must be at least one day")


@dataclass
class AttributePool:
    """Replica bookkeeping: counters track non-revoked keys per replica."""

    replicas: dict = field(default_factory=dict)  # base attr -> [replica names]
    counters: dict = field(default_factory=dict)  # replica name -> int

    def acquire(self, base):
        """Pick the least-used replica (lowest index wins ties) and count it."""
        chosen = min(self.replicas[base], key=lambda rep: (self.counters[rep], rep))
        self.counters[chosen] += 1
        return chosen

    def release(self, replica):
        if self.counters.get(replica, 0) < 1:
            raise ValueError("release of unused replica %r" % replica)
        self.counters[replica] -= 1


@dataclass(frozen=True)
class EncryptionLabel:
    gamma_r: frozenset
    gamma_x: frozenset

    @property
    def gamma(self):
        return self.gamma_r | self.gamma_x


@dataclass(frozen=True)
class PolicySpec:
    """What a user is authorized to read: road intervals plus a day range."""

    intervals: tuple       # of (street_id, lo, hi)
    valid_from: int
    valid_to: int


def _road_attr(street_id, node_id, replica=None):
    name = "s%s_%s" % (street_id, node_id)
    if replica is not None:
        name += "@%d" % replica
    return name


def _time_attr(node_id):
    return "x_%s" % node_id


@dataclass
class UniverseLayout:
    """The built universe plus the trees and pool that produced it."""

    universe: Universe
    rep: Representation
    time: TimeConfig
    street_trees: dict      # street id -> SegmentTree
    time_tree: SegmentTree
    pool: object            # AttributePool or None


def build_universe(city, rep, time):
    """Derive the attribute universe for a city under one representation."""
    if not city.streets:
        raise ValueError("city has no streets")
    street_trees = {}
    road = set()
    pool = AttributePool() if rep.kind == "attribute_pool" else None
    for sid in sorted(city.streets):
        rho = city.streets[sid].rho
        tree = SegmentTree(rho)
        street_trees[sid] = tree
        if rep.kind == "basic":
            for point in range(1, rho + 1):
                road.add(_road_attr(sid, tree.leaf_of[point]))
        else:
            for nid in tree.nodes:
                if rep.kind == "segment_tree":
                    road.add(_road_attr(sid, nid))
                else:
                    base = _road_attr(sid, nid)
                    names = [_road_attr(sid, nid, w) for w in range(1, rep.epsilon + 1)]
                    pool.replicas[base] = names
                    for name in names:
                        pool.counters[name] = 0
                        road.add(name)
    time_tree = SegmentTree(time.max_lifetime_days)
    time_attrs = frozenset(_time_attr(nid) for nid in time_tree.nodes)
    universe = Universe(frozenset(road), time_attrs)
    return UniverseLayout(universe, rep, time, street_trees, time_tree, pool)


def label_for_device(layout, street_id, segment, date):
    """Encryption attributes for data produced at (street, segment) on a day."""
    tree = layout.street_trees[street_id]
    if not 1 <= segment <= tree.range_max:
        raise ValueError("segment %d outside street %r" % (segment, street_id))
    if not 1 <= date <= layout.time.max_lifetime_days:
        raise ValueError("date %d outside system lifetime" % date)
    rep = layout.rep
    if rep.kind == "basic":
        gamma_r = {_road_attr(street_id, tree.leaf_of[segment])}
    else:
        nodes = tree.point_rep(segment)
        if rep.kind == "segment_tree":
            gamma_r = {_road_attr(street_id, nid) for nid in nodes}
        else:
            gamma_r = {_road_attr(street_id, nid, w)
                       for nid in nodes for w in range(1, rep.epsilon + 1)}
    gamma_x = {_time_attr(nid) for nid in layout.time_tree.point_rep(date)}
    return EncryptionLabel(frozenset(gamma_r), frozenset(gamma_x))


def _merge_intervals(intervals):
    """Per-street union of closed intervals as disjoint maximal runs."""
    by_street = {}
    for sid, lo, hi in intervals:
        if lo > hi:
            raise ValueError("empty interval [%d, %d]" % (lo, hi))
        by_street.setdefault(sid, []).append((lo, hi))
    merged = {}
    for sid, runs in by_street.items():
        runs.sort()
        out = [list(runs[0])]
        for lo, hi in runs[1:]:
            if lo <= out[-1][1] + 1:
                out[-1][1] = max(out[-1][1], hi)
            else:
                out.append([lo, hi])
        merged[sid] = [tuple(run) for run in out]
    return merged


def _or_collapse(children):
    return children[0] if len(children) == 1 else OR(*children)


def policy_for_user(layout, spec):
    """Build the AND(road, time) access tree for a user's authorization.

    Under the attribute_pool representation this acquires pool replicas and
    must be paired with release_policy on revocation.
    """
    if not spec.intervals:
        raise ValueError("empty authorization")
    if spec.valid_to < spec.valid_from:
        raise ValueError("validity period ends before it starts")
    if not (1 <= spec.valid_from and
            spec.valid_to <= layout.time.max_lifetime_days):
        raise ValueError("validity period outside system lifetime")
    rep = layout.rep
    road_terms = []
    for sid in sorted(_merge_intervals(spec.intervals)):
        tree = layout.street_trees[sid]
        for lo, hi in _merge_intervals(spec.intervals)[sid]:
            if not (1 <= lo and hi <= tree.range_max):
                raise ValueError("interval [%d, %d] outside street %r"
                                 % (lo, hi, sid))
            if rep.kind == "basic":
                leaves = [Attr(_road_attr(sid, tree.leaf_of[pt]))
                          for pt in range(lo, hi + 1)]
            else:
                nodes = sorted(tree.interval_rep(lo, hi))
                if rep.kind == "segment_tree":
                    leaves = [Attr(_road_attr(sid, nid)) for nid in nodes]
                else:
                    leaves = [Attr(layout.pool.acquire(_road_attr(sid, nid)))
                              for nid in nodes]
            road_terms.append(_or_collapse(leaves))
    t_road = _or_collapse(road_terms)
    time_nodes = sorted(layout.time_tree.interval_rep(spec.valid_from, spec.valid_to))
    t_time = _or_collapse([Attr(_time_attr(nid)) for nid in time_nodes])
    return AND(t_road, t_time)


def release_policy(layout, policy):
    """Give back the pool replicas held by a revoked key's policy."""
    if layout.pool is None:
        return
    for attr in policy_leaves(policy):
        if attr in layout.universe.road:
            layout.pool.release(attr)


def revocation_attribute_set(layout, key_or_policy):
    """The attributes to version-bump when revoking this key."""
    if isinstance(key_or_policy, DecryptionKey):
        lam = key_or_policy.lam
    else:
        lam = frozenset(policy_leaves(key_or_policy))
    mu = lam & layout.universe.road
    if not mu:
        raise ValueError("key has no revocable attributes")
    return mu


def road_leaf_set(layout, policy):
    return frozenset(policy_leaves(policy)) & layout.universe.road


def affected_users(layout, revoked_user, policies_by_user):
    """Non-revoked users sharing at least one road attribute with the revoked key."""
    revoked_road = road_leaf_set(layout, policies_by_user[revoked_user])
    return {uid for uid, pol in policies_by_user.items()
            if uid != revoked_user and road_leaf_set(layout, pol) & revoked_road}

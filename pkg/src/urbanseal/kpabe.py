"""Key-policy ABE with AND/OR access trees over a symmetric pairing.

The construction follows the classic small-universe key-policy scheme:
setup draws a secret exponent per attribute, keygen secret-shares the
master secret y down the access tree (AND = n-of-n threshold, OR = 1-of-n),
and decryption recombines pairings of ciphertext and key components with
Lagrange coefficients. Every per-attribute quantity carries a version
stamp so the re-encryption layer can rotate attributes.
"""

from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpz

from .pairing import BilinearGroup, params_for_security


class VersionMismatchError(Exception):
    """A ciphertext and key component pair disagree on attribute version."""


@dataclass(frozen=True)
class Universe:
    """Attribute names split into road (revocable) and time (fixed) parts."""

    road: frozenset
    time: frozenset

    def __post_init__(self):
        if self.road & self.time:
            raise ValueError("road/time attribute sets must be disjoint")

    @property
    def all(self):
        return self.road | self.time

    def __contains__(self, attr):
        return attr in self.road or attr in self.time


@dataclass(frozen=True)
class Component:
    """A versioned per-attribute quantity (exponent, point, ...)."""

    value: object
    version: int = 0


# -- access policies ----------------------------------------------------

class PolicyNode:
    pass


@dataclass(frozen=True)
class Attr(PolicyNode):
    name: str


@dataclass(frozen=True)
class Gate(PolicyNode):
    op: str                 # "and" | "or"
    children: tuple

    def __post_init__(self):
        if self.op not in ("and", "or"):
            raise ValueError("gate op must be 'and' or 'or'")
        if len(self.children) < 1:
            raise ValueError("gate needs at least one child")


def AND(*children):
    return Gate("and", tuple(children))


def OR(*children):
    return Gate("or", tuple(children))


def policy_leaves(node):
    if isinstance(node, Attr):
        return [node.name]
    out = []
    for child in node.children:
        out.extend(policy_leaves(child))
    return out


def eval_policy(node, gamma):
    """Plain monotone Boolean evaluation; the oracle decrypt is checked against."""
    if isinstance(node, Attr):
        return node.name in gamma
    if node.op == "and":
        return all(eval_policy(c, gamma) for c in node.children)
    return any(eval_policy(c, gamma) for c in node.children)


# -- key material -------------------------------------------------------

@dataclass
class MasterKey:
    y: object
    t: dict                 # attr -> Component(exponent)
    universe: Universe


@dataclass
class PublicParams:
    Y: object               # GT element e(g, g)^y
    T: dict                 # attr -> Component(G1 point)
    universe: Universe
    group: BilinearGroup


@dataclass
class Ciphertext:
    gamma: frozenset
    e_tilde: object         # GT element, blinded payload
    e: dict                 # attr -> Component(G1 point)


@dataclass
class DecryptionKey:
    policy: PolicyNode
    lam: frozenset          # leaf attribute set
    dk: dict                # attr -> Component(G1 point)


# -- primitives ---------------------------------------------------------

def setup(universe, security_level, rng):
    """Generate a master key and public parameters for the universe."""
    if not universe.all:
        raise ValueError("empty attribute universe")
    group = BilinearGroup(params_for_security(security_level))
    y = group.random_scalar(rng)
    t = {}
    T = {}
    for attr in sorted(universe.all):
        ti = group.random_scalar(rng)
        t[attr] = Component(ti, 0)
        T[attr] = Component(group.g1_mul(group.g, ti), 0)
    Y = group.gt_exp(group.gt_generator(), y)
    return MasterKey(y, t, universe), PublicParams(Y, T, universe, group)


def encrypt(payload, gamma, params, rng):
    """Seal a GT payload under the attribute set gamma."""
    gamma = frozenset(gamma)
    if not gamma:
        raise ValueError("encryption attribute set must be non-empty")
    unknown = gamma - params.universe.all
    if unknown:
        raise ValueError("unknown encryption attributes: %s" % sorted(unknown))
    group = params.group
    s = group.random_scalar(rng)
    e_tilde = group.gt_mul(payload, group.gt_exp(params.Y, s))
    e = {}
    for attr in sorted(gamma):
        Ti = params.T[attr]
        e[attr] = Component(group.g1_mul(Ti.value, s), Ti.version)
    return Ciphertext(gamma, e_tilde, e)


def _share_secret(group, node, secret, shares, rng):
    if isinstance(node, Attr):
        if node.name in shares:
            raise ValueError("duplicate leaf attribute %r in policy" % node.name)
        shares[node.name] = secret
        return
    n = len(node.children)
    if node.op == "or" or n == 1:
        for child in node.children:
            _share_secret(group, child, secret, shares, rng)
        return
    # AND: polynomial of degree n-1 with q(0) = secret, child k gets q(k)
    coeffs = [secret] + [group.random_scalar(rng) for _ in range(n - 1)]
    r = group.r
    for k, child in enumerate(node.children, start=1):
        acc = mpz(0)
        for c in reversed(coeffs):
            acc = (acc * k + c) % r
        _share_secret(group, child, acc, shares, rng)


def keygen(mk, policy, params, rng):
    """Issue a decryption key embedding the AND/OR access tree."""
    group = params.group
    leaves = policy_leaves(policy)
    unknown = set(leaves) - mk.universe.all
    if unknown:
        raise ValueError("unknown policy attributes: %s" % sorted(unknown))
    shares = {}
    _share_secret(group, policy, mk.y, shares, rng)
    dk = {}
    for attr, share in shares.items():
        ti = mk.t[attr]
        exponent = share * gmpy2.invert(ti.value, group.r) % group.r
        dk[attr] = Component(group.g1_mul(group.g, exponent), ti.version)
    return DecryptionKey(policy, frozenset(leaves), dk)


def _prune(node, gamma, r):
    """Cheapest satisfying leaf set as (attr, lagrange coefficient) pairs.

    Returns None when the subtree is unsatisfied.
    """
    if isinstance(node, Attr):
        return [(node.name, mpz(1))] if node.name in gamma else None
    if node.op == "or" or len(node.children) == 1:
        best = None
        for child in node.children:
            got = _prune(child, gamma, r)
            if got is not None and (best is None or len(got) < len(best)):
                best = got
        return best
    # AND: all children required; child k carries Lagrange coefficient
    # prod_{j != k} (0 - j) / (k - j) over the full index set.
    parts = []
    n = len(node.children)
    for k, child in enumerate(node.children, start=1):
        got = _prune(child, gamma, r)
        if got is None:
            return None
        num = mpz(1)
        den = mpz(1)
        for j in range(1, n + 1):
            if j == k:
                continue
            num = num * (-j) % r
            den = den * (k - j) % r
        coeff = num * gmpy2.invert(den, r) % r
        parts.extend((attr, c * coeff % r) for attr, c in got)
    return parts


def decrypt(ct, dk, params):
    """Recover the GT payload, or None when the policy is unsatisfied.

    Raises VersionMismatchError when a component pair that would be used
    disagrees on version; stale components must be refreshed first.
    """
    group = params.group
    plan = _prune(dk.policy, ct.gamma, group.r)
    if plan is None:
        return None
    blind_pairs = []
    for attr, coeff in plan:
        ei = ct.e[attr]
        di = dk.dk[attr]
        if ei.version != di.version:
            raise VersionMismatchError(
                "attribute %r: ciphertext v%d vs key v%d"
                % (attr, ei.version, di.version))
        blind_pairs.append((ei.value, group.g1_mul(di.value, coeff)))
    blind = group.pair_product(blind_pairs)
    return group.gt_mul(ct.e_tilde, group.gt_inv(blind))

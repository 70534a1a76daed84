"""Proxy re-encryption layer: attribute version rotation and lazy updates.

Revoking a key bumps the version of every road attribute it uses. The
bump produces a re-encryption key (the exponent ratio between the new and
old attribute secret) which the storage service applies lazily: ciphertext
components are raised to the factor, key components to its inverse. Each
attribute accumulates its factors in an append-only history so components
lagging several versions can be brought forward one step at a time.
"""

from dataclasses import dataclass, field

import gmpy2

from .kpabe import Component


class HistoryGapError(Exception):
    """A component's version predates the available history."""


@dataclass(frozen=True)
class ReencryptionKey:
    attr: str
    from_version: int
    factor: object          # exponent ratio t' / t mod r

    @property
    def to_version(self):
        return self.from_version + 1


@dataclass
class ReencryptionKeyHistory:
    """Append-only chain of re-encryption keys for one attribute."""

    attr: str
    keys: list = field(default_factory=list)

    @property
    def current_version(self):
        return len(self.keys)

    def append(self, rk):
        if rk.attr != self.attr:
            raise ValueError("re-encryption key for wrong attribute")
        if rk.from_version != self.current_version:
            raise ValueError(
                "non-contiguous history append: have v%d, got bridge v%d->v%d"
                % (self.current_version, rk.from_version, rk.to_version))
        self.keys.append(rk)


@dataclass
class AttributeVersionTable:
    versions: dict = field(default_factory=dict)

    def current(self, attr):
        return self.versions.get(attr, 0)

    def bump(self, attr):
        self.versions[attr] = self.current(attr) + 1


def update_attribute(attr, mk, params, rng):
    """Rotate a road attribute to the next version (TTP side).

    Mutates the master key and public parameters in place and returns the
    re-encryption key bridging the old version to the new one.
    """
    if attr not in mk.universe.road:
        raise ValueError("attribute %r is not revocable (time attributes "
                         "are never updated)" % attr)
    group = params.group
    old = mk.t[attr]
    new_t = group.random_scalar(rng)
    factor = new_t * gmpy2.invert(old.value, group.r) % group.r
    mk.t[attr] = Component(new_t, old.version + 1)
    params.T[attr] = Component(group.g1_mul(group.g, new_t), old.version + 1)
    return ReencryptionKey(attr, old.version, factor)


def _fold(component, rkh, group, invert):
    if component.version > rkh.current_version:
        raise HistoryGapError(
            "component at v%d beyond history v%d for %r"
            % (component.version, rkh.current_version, rkh.attr))
    value, version = component.value, component.version
    for rk in rkh.keys[version:]:
        exp = group.scalar_inv(rk.factor) if invert else rk.factor
        value = group.g1_mul(value, exp)
        version += 1
    return Component(value, version)


def update_ciphertext_component(attr, component, rkh, group):
    """Bring a ciphertext component e_i to the current version (CSS side)."""
    if attr != rkh.attr:
        raise ValueError("history is for %r, component for %r" % (rkh.attr, attr))
    return _fold(component, rkh, group, invert=False)


def update_key_component(attr, component, rkh, group):
    """Bring a decryption key component dk_i to the current version (CSS side)."""
    if attr != rkh.attr:
        raise ValueError("history is for %r, component for %r" % (rkh.attr, attr))
    return _fold(component, rkh, group, invert=True)

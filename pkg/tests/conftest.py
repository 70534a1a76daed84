import random

import pytest

from urbanseal import kpabe
from urbanseal.kpabe import AND, OR, Attr, Universe


def make_universe(road=("A", "B", "C", "D", "E"), time=()):
    return Universe(frozenset(road), frozenset(time))


@pytest.fixture(scope="session")
def toy_setup():
    """A small master key / public params pair at toy parameters."""
    rng = random.Random(1)
    universe = make_universe(road=("A", "B", "C", "D", "E"), time=("X", "Z"))
    mk, params = kpabe.setup(universe, 32, rng)
    return mk, params


def random_policy(rng, attrs):
    """Random monotone AND/OR tree with the given (distinct) leaf attributes."""
    attrs = list(attrs)
    if len(attrs) == 1:
        return Attr(attrs[0])
    k = rng.randint(2, min(3, len(attrs)))
    rng.shuffle(attrs)
    bounds = sorted(rng.sample(range(1, len(attrs)), k - 1))
    groups = []
    prev = 0
    for b in bounds + [len(attrs)]:
        groups.append(attrs[prev:b])
        prev = b
    children = tuple(random_policy(rng, g) for g in groups)
    return AND(*children) if rng.random() < 0.5 else OR(*children)

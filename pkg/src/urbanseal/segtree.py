"""Discrete segment trees over an integer range [1, range_max].

Point representation: the root-to-leaf path of a point.
Interval representation: the canonical minimal node cover of an interval.
The two sets intersect iff the point lies in the interval, which is what
lets a point-labelled ciphertext meet an interval-shaped access policy.
"""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Node:
    lo: int
    hi: int
    parent: object        # node id or None for the root
    children: tuple       # node ids, () for leaves

    @property
    def is_leaf(self):
        return self.lo == self.hi


def _node_id(lo, hi):
    return "l%d" % lo if lo == hi else "n%d_%d" % (lo, hi)


@dataclass
class SegmentTree:
    """Binary tree whose shape is a pure function of range_max.

    Built over [1, 2^ceil(log2 range_max)] with out-of-range subtrees pruned
    and single-child chains contracted, so every internal node keeps exactly
    two children.
    """

    range_max: int
    root: str = field(init=False)
    nodes: dict = field(init=False)     # id -> Node
    leaf_of: dict = field(init=False)   # point -> leaf id

    def __post_init__(self):
        if self.range_max < 1:
            raise ValueError("range_max must be >= 1")
        self.nodes = {}
        self.leaf_of = {}
        span = 1
        while span < self.range_max:
            span *= 2
        self.root = self._build(1, span, None)

    def _build(self, lo, hi, parent):
        hi_clipped = min(hi, self.range_max)
        nid = _node_id(lo, hi_clipped)
        if lo == hi_clipped:
            self.nodes[nid] = Node(lo, lo, parent, ())
            self.leaf_of[lo] = nid
            return nid
        mid = (lo + hi) // 2
        if mid >= hi_clipped:
            # right grid child is empty: contract this chain
            return self._build(lo, mid, parent)
        left = self._build(lo, mid, nid)
        right = self._build(mid + 1, hi, nid)
        self.nodes[nid] = Node(lo, hi_clipped, parent, (left, right))
        return nid

    def point_rep(self, point):
        """Node ids on the path from the root down to the point's leaf."""
        if not 1 <= point <= self.range_max:
            raise ValueError("point %d outside [1, %d]" % (point, self.range_max))
        nid = self.leaf_of[point]
        path = []
        while nid is not None:
            path.append(nid)
            nid = self.nodes[nid].parent
        return frozenset(path)

    def interval_rep(self, lo, hi):
        """Minimal set of nodes whose leaves cover [lo, hi] exactly."""
        if not (1 <= lo <= hi <= self.range_max):
            raise ValueError("interval [%d, %d] outside [1, %d]"
                             % (lo, hi, self.range_max))
        out = []
        stack = [self.root]
        while stack:
            nid = stack.pop()
            node = self.nodes[nid]
            if lo <= node.lo and node.hi <= hi:
                out.append(nid)
            elif node.lo <= hi and lo <= node.hi:
                stack.extend(node.children)
        return frozenset(out)

    def covered_points(self, nid):
        node = self.nodes[nid]
        return range(node.lo, node.hi + 1)

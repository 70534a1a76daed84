"""Street networks, a synthetic grid generator, and route sampling.

A city is a set of streets; each street is a polyline partitioned into an
integer number of equal-length road segments. Road segments are the edges
of the routing graph, whose vertices are segment boundary points (shared
coordinates join streets at intersections).
"""

import math
from dataclasses import dataclass, field

import networkx as nx


class CityFormatError(Exception):
    pass


class RouteSamplingError(Exception):
    pass


def _polyline_length(points):
    return sum(math.dist(a, b) for a, b in zip(points, points[1:]))


def _interpolate(points, distance):
    """Point at arc-length `distance` along a polyline."""
    remaining = distance
    for a, b in zip(points, points[1:]):
        step = math.dist(a, b)
        if remaining <= step + 1e-9:
            if step == 0:
                return a
            f = remaining / step
            return (a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]))
        remaining -= step
    return points[-1]


@dataclass
class Street:
    sid: str
    rho: int
    polyline: list

    def __post_init__(self):
        if self.rho < 1:
            raise ValueError("street %r must have at least one segment" % self.sid)
        if _polyline_length(self.polyline) <= 0:
            raise ValueError("street %r has zero length" % self.sid)

    @property
    def length(self):
        return _polyline_length(self.polyline)

    def boundary(self, k):
        """Coordinate of the boundary between segment k and k+1 (k in 0..rho)."""
        return _interpolate(self.polyline, self.length * k / self.rho)


@dataclass
class CityModel:
    name: str
    streets: dict = field(default_factory=dict)   # sid -> Street
    devices: list = field(default_factory=list)   # (sid, segment) placements
    _graph: object = field(default=None, repr=False)

    def add_street(self, street):
        if street.sid in self.streets:
            raise ValueError("duplicate street id %r" % street.sid)
        self.streets[street.sid] = street
        self._graph = None

    def graph(self):
        """Routing graph: one edge per road segment, weighted by length."""
        if self._graph is None:
            g = nx.Graph()
            for street in self.streets.values():
                seg_len = street.length / street.rho
                prev = _round_pt(street.boundary(0))
                for k in range(1, street.rho + 1):
                    cur = _round_pt(street.boundary(k))
                    g.add_edge(prev, cur, length=seg_len,
                               street=street.sid, segment=k)
                    prev = cur
            self._graph = g
        return self._graph


def _round_pt(pt):
    return (round(pt[0], 6), round(pt[1], 6))


def generate_grid_city(blocks_x, blocks_y, block_size=100.0,
                       segments_per_block=1, name="grid"):
    """Deterministic rectangular grid: one street per grid line.

    Every street is partitioned into blocks * segments_per_block equal
    segments, so the segment length divides the street length exactly.
    """
    if blocks_x < 1 or blocks_y < 1 or block_size <= 0 or segments_per_block < 1:
        raise ValueError("grid dimensions must be positive")
    city = CityModel(name)
    width = blocks_x * block_size
    height = blocks_y * block_size
    for j in range(blocks_y + 1):
        y = j * block_size
        city.add_street(Street("h%d" % j, blocks_x * segments_per_block,
                               [(0.0, y), (width, y)]))
    for i in range(blocks_x + 1):
        x = i * block_size
        city.add_street(Street("v%d" % i, blocks_y * segments_per_block,
                               [(x, 0.0), (x, height)]))
    return city


def load_city(path):
    """Parse the street-network text format (see README for the grammar)."""
    city = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if fields[0] == "city":
                if len(fields) != 2:
                    raise CityFormatError("line %d: city line needs a name" % lineno)
                if city is not None:
                    raise CityFormatError("line %d: duplicate city line" % lineno)
                city = CityModel(fields[1])
            elif fields[0] == "street":
                if city is None:
                    raise CityFormatError("line %d: street before city line" % lineno)
                if len(fields) < 5:
                    raise CityFormatError(
                        "line %d: street needs id, segment count and at least "
                        "two points" % lineno)
                sid = fields[1]
                try:
                    rho = int(fields[2])
                    points = [tuple(float(v) for v in tok.split(","))
                              for tok in fields[3:]]
                    if any(len(pt) != 2 for pt in points):
                        raise ValueError
                except ValueError:
                    raise CityFormatError("line %d: malformed street fields" % lineno)
                if rho < 1:
                    raise CityFormatError(
                        "line %d: street %r needs a positive segment count"
                        % (lineno, sid))
                if sid in city.streets:
                    raise CityFormatError(
                        "line %d: duplicate street id %r" % (lineno, sid))
                city.add_street(Street(sid, rho, points))
            else:
                raise CityFormatError(
                    "line %d: unknown directive %r" % (lineno, fields[0]))
    if city is None:
        raise CityFormatError("no city line found")
    if not city.streets:
        raise CityFormatError("city has no streets")
    return city


@dataclass(frozen=True)
class RouteSpec:
    source: tuple
    destination: tuple
    length: float                 # requested line-of-sight distance
    segments: tuple               # ordered (street id, segment index) pairs

    def intervals(self):
        """Maximal runs of consecutive segments per street."""
        by_street = {}
        for sid, seg in self.segments:
            by_street.setdefault(sid, set()).add(seg)
        out = []
        for sid in sorted(by_street):
            segs = sorted(by_street[sid])
            lo = prev = segs[0]
            for seg in segs[1:]:
                if seg == prev + 1:
                    prev = seg
                    continue
                out.append((sid, lo, prev))
                lo = prev = seg
            out.append((sid, lo, prev))
        return tuple(out)


def sample_route(city, length, rng, tolerance=0.01, max_tries=200):
    """Route between a random source and a destination at line-of-sight
    distance `length` (within the relative tolerance), resolved to road
    segments along the shortest path."""
    if length <= 0:
        raise RouteSamplingError("route length must be positive")
    graph = city.graph()
    nodes = sorted(graph.nodes)
    for _ in range(max_tries):
        source = nodes[rng.randrange(len(nodes))]
        candidates = [n for n in nodes
                      if abs(math.dist(source, n) - length) <= tolerance * length]
        if not candidates:
            continue
        destination = candidates[rng.randrange(len(candidates))]
        try:
            path = nx.shortest_path(graph, source, destination, weight="length")
        except nx.NetworkXNoPath:
            continue
        segments = tuple((graph.edges[a, b]["street"], graph.edges[a, b]["segment"])
                         for a, b in zip(path, path[1:]))
        if segments:
            return RouteSpec(source, destination, length, segments)
    raise RouteSamplingError(
        "no destination at distance %g (tolerance %g%%) after %d tries"
        % (length, 100 * tolerance, max_tries))


def place_devices(city, count, rng):
    """Scatter devices uniformly over all road segments (no repeats while
    capacity allows)."""
    slots = [(sid, seg) for sid in sorted(city.streets)
             for seg in range(1, city.streets[sid].rho + 1)]
    if count <= len(slots):
        placed = rng.sample(slots, count)
    else:
        placed = [slots[rng.randrange(len(slots))] for _ in range(count)]
    city.devices = sorted(placed)
    return city.devices

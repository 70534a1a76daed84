"""Experiment drivers: revocation sweeps, key sizes, and seal benchmarks.

A population is a seeded set of users, each subscribing to a route of a
fixed line-of-sight length. The revocation sweep revokes each user in
turn counterfactually (measure, then restore) and reports the mean
percentage of other users whose keys share a road attribute with the
revoked one. Results go to CSV with a fixed, versioned column order;
wall-clock columns are the only nondeterministic ones under a fixed seed.
"""

import csv
import math
import random
import time
from dataclasses import dataclass, field, fields, replace

from . import kpabe
from .attrspace import (PolicySpec, Representation, TimeConfig,
                        build_universe, label_for_device, policy_for_user,
                        road_leaf_set)
from .city import generate_grid_city, place_devices, sample_route
from .kpabe import policy_leaves

CSV_SCHEMA = "urbanseal-metrics-v1"
CSV_COLUMNS = (
    "rep", "epsilon", "route_length_m", "users", "devices",
    "affected_mean_pct", "affected_ci95_pct",
    "key_attrs_road_mean", "key_attrs_time_mean",
    "key_bytes_road_mean", "key_bytes_time_mean", "key_bytes_mean",
    "gamma_mean", "gamma_road_mean",
    "seal_seconds", "ask_total_bytes", "seed",
)
TIMING_COLUMNS = ("seal_seconds",)


@dataclass
class ExperimentConfig:
    rep_kind: str = "segment_tree"
    epsilon: int = 1
    route_length: float = 500.0
    users: int = 50
    subscription_days: int = 365
    lifetime_days: int = 730
    seed: int = 0
    blocks_x: int = 8
    blocks_y: int = 8
    block_size: float = 100.0
    segments_per_block: int = 2
    devices: int = 20
    security_level: int = 80
    route_tolerance: float = 0.01

    def representation(self):
        if self.rep_kind == "attribute_pool":
            return Representation("attribute_pool", self.epsilon)
        return Representation(self.rep_kind)

    def time_config(self):
        return TimeConfig(self.lifetime_days)


@dataclass
class MetricsRow:
    rep: str
    epsilon: int
    route_length_m: float
    users: int = 0
    devices: int = 0
    affected_mean_pct: float = float("nan")
    affected_ci95_pct: float = float("nan")
    key_attrs_road_mean: float = float("nan")
    key_attrs_time_mean: float = float("nan")
    key_bytes_road_mean: float = float("nan")
    key_bytes_time_mean: float = float("nan")
    key_bytes_mean: float = float("nan")
    gamma_mean: float = float("nan")
    gamma_road_mean: float = float("nan")
    seal_seconds: float = float("nan")
    ask_total_bytes: int = 0
    seed: int = 0

    def as_csv_dict(self):
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, float):
                value = "" if math.isnan(value) else "%.6g" % value
            out[f.name] = value
        return out


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        fh.write("# %s\n" % CSV_SCHEMA)
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.as_csv_dict())


def read_csv(path):
    """Read rows back as dicts, enforcing the schema version."""
    with open(path) as fh:
        head = fh.readline().strip()
        if head != "# %s" % CSV_SCHEMA:
            raise ValueError("unexpected metrics schema: %r" % head)
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ValueError("metrics column set changed; bump the schema")
        return list(reader)


# -- population construction -------------------------------------------

def build_city(cfg):
    return generate_grid_city(cfg.blocks_x, cfg.blocks_y, cfg.block_size,
                              cfg.segments_per_block)


def sample_population(cfg, city=None):
    """The seeded route dataset: identical across representations."""
    city = city or build_city(cfg)
    rng = random.Random("routes:%d" % cfg.seed)
    routes = [sample_route(city, cfg.route_length, rng,
                           tolerance=cfg.route_tolerance)
              for _ in range(cfg.users)]
    return city, routes


def _policy_specs(cfg, routes):
    return [PolicySpec(route.intervals(), 1, cfg.subscription_days)
            for route in routes]


def issue_policies(cfg, city, routes):
    """Layout plus per-user access trees, issued in user order."""
    layout = build_universe(city, cfg.representation(), cfg.time_config())
    policies = {}
    for uid, spec in enumerate(_policy_specs(cfg, routes)):
        policies["u%d" % uid] = policy_for_user(layout, spec)
    return layout, policies


def _mean_ci95(values):
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    try:
        from scipy.stats import t
        crit = float(t.ppf(0.975, n - 1))
    except ImportError:
        crit = 1.96
    return mean, crit * math.sqrt(var / n)


def affected_sets(layout, policies):
    """Per-user affected sets from pairwise road-attribute intersections."""
    road = {uid: road_leaf_set(layout, pol) for uid, pol in policies.items()}
    out = {}
    for uid, attrs in road.items():
        out[uid] = {vid for vid, vattrs in road.items()
                    if vid != uid and attrs & vattrs}
    return out


def run_revocation_sweep(cfg, city=None, routes=None):
    """Revoke each user in turn (counterfactually) and average the share of
    other users whose keys would need refreshing."""
    if routes is None:
        city, routes = sample_population(cfg, city)
    layout, policies = issue_policies(cfg, city, routes)
    n = len(policies)
    affected = affected_sets(layout, policies)
    percentages = [100.0 * len(affected[uid]) / (n - 1) if n > 1 else 0.0
                   for uid in sorted(policies)]
    mean, ci = _mean_ci95(percentages)
    row = _count_row(cfg, layout, policies)
    row.affected_mean_pct = mean
    row.affected_ci95_pct = ci
    return row


def _count_row(cfg, layout, policies):
    road_counts = []
    time_counts = []
    for pol in policies.values():
        leaves = policy_leaves(pol)
        road_counts.append(sum(1 for a in leaves if a in layout.universe.road))
        time_counts.append(sum(1 for a in leaves if a in layout.universe.time))
    gamma, gamma_road = _gamma_means(cfg, layout)
    return MetricsRow(
        rep=cfg.rep_kind, epsilon=cfg.epsilon, route_length_m=cfg.route_length,
        users=len(policies), devices=cfg.devices,
        key_attrs_road_mean=sum(road_counts) / len(road_counts),
        key_attrs_time_mean=sum(time_counts) / len(time_counts),
        gamma_mean=gamma, gamma_road_mean=gamma_road, seed=cfg.seed)


def _gamma_means(cfg, layout):
    """Mean encryption-label sizes over a seeded device placement."""
    city_streets = layout.street_trees
    rng = random.Random("devices:%d" % cfg.seed)
    slots = [(sid, seg) for sid in sorted(city_streets)
             for seg in range(1, city_streets[sid].range_max + 1)]
    count = min(cfg.devices, len(slots))
    if count == 0:
        return float("nan"), float("nan")
    placements = rng.sample(slots, count)
    sizes = []
    road_sizes = []
    for sid, seg in placements:
        label = label_for_device(layout, sid, seg, 1)
        sizes.append(len(label.gamma))
        road_sizes.append(len(label.gamma_r))
    return sum(sizes) / count, sum(road_sizes) / count


def measure_key_sizes(cfg, city=None, routes=None):
    """Attribute counts plus real serialized byte sizes (runs KeyGen)."""
    if routes is None:
        city, routes = sample_population(cfg, city)
    layout, policies = issue_policies(cfg, city, routes)
    rng = random.Random("keys:%d" % cfg.seed)
    mk, params = kpabe.setup(layout.universe, cfg.security_level, rng)
    elem = 2 * params.group._fp_bytes
    road_bytes = []
    time_bytes = []
    total_bytes = []
    from . import serde
    for pol in policies.values():
        dk = kpabe.keygen(mk, pol, params, rng)
        per_attr = {attr: 4 + len(attr.encode()) + 4 + 4 + elem
                    for attr in dk.dk}
        road_bytes.append(sum(v for a, v in per_attr.items()
                              if a in layout.universe.road))
        time_bytes.append(sum(v for a, v in per_attr.items()
                              if a in layout.universe.time))
        total_bytes.append(len(serde.dump_decryption_key(dk, params.group)))
    row = _count_row(cfg, layout, policies)
    n = len(policies)
    row.key_bytes_road_mean = sum(road_bytes) / n
    row.key_bytes_time_mean = sum(time_bytes) / n
    row.key_bytes_mean = sum(total_bytes) / n
    return row


def bench_seal(cfg, device_count):
    """Wall-clock time of one full daily seal for `device_count` devices."""
    from .protocol import SystemConfig, setup_system
    city = build_city(cfg)
    rng = random.Random("devices:%d" % cfg.seed)
    place_devices(city, device_count, rng)
    system = setup_system(SystemConfig(
        city, cfg.representation(), cfg.time_config(),
        security_level=cfg.security_level, seed=cfg.seed))
    start = time.perf_counter()
    system.seal_day()
    elapsed = time.perf_counter() - start
    store = system.css.store
    ask_bytes = 0
    from . import serde
    for cts in store.ask.values():
        for ct in cts:
            ask_bytes += len(serde.dump_ciphertext(ct, system.params.group))
    sizes = [len(cts[0].gamma) for cts in store.ask.values()]
    road = system.layout.universe.road
    road_sizes = [sum(1 for a in cts[0].gamma if a in road)
                  for cts in store.ask.values()]
    row = MetricsRow(rep=cfg.rep_kind, epsilon=cfg.epsilon,
                     route_length_m=cfg.route_length, seed=cfg.seed)
    row.devices = device_count
    row.seal_seconds = elapsed
    row.ask_total_bytes = ask_bytes
    if sizes:
        row.gamma_mean = sum(sizes) / len(sizes)
        row.gamma_road_mean = sum(road_sizes) / len(road_sizes)
    return row


def sweep_rows(cfg, reps, lengths, with_key_bytes=False):
    """Cartesian representation x route-length sweep on one seed."""
    rows = []
    base_city = build_city(cfg)
    for length in lengths:
        cfg_l = replace(cfg, route_length=length)
        _, routes = sample_population(cfg_l, base_city)
        for rep_kind, epsilon in reps:
            cfg_rl = replace(cfg_l, rep_kind=rep_kind, epsilon=epsilon)
            if with_key_bytes:
                row = measure_key_sizes(cfg_rl, base_city, routes)
                sweep = run_revocation_sweep(cfg_rl, base_city, routes)
                row.affected_mean_pct = sweep.affected_mean_pct
                row.affected_ci95_pct = sweep.affected_ci95_pct
            else:
                row = run_revocation_sweep(cfg_rl, base_city, routes)
            rows.append(row)
    return rows


def linear_fit_r2(xs, ys):
    """Least-squares line fit quality, for scaling checks."""
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    if sxx == 0:
        return 0.0
    slope = sxy / sxx
    intercept = my - slope * mx
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - my) ** 2 for y in ys)
    if ss_tot == 0:
        return 1.0
    return 1.0 - ss_res / ss_tot

"""Figure rendering for experiment reports.

Renders the three standard views of a metrics CSV next to the delimited
output: average key size per representation (with the time-subtree share
stacked), affected users versus route length, and affected users versus
the pool replica count.
"""

import os
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

_REP_ORDER = ("basic", "segment_tree", "attribute_pool")
_REP_LABEL = {"basic": "basic", "segment_tree": "segment tree",
              "attribute_pool": "attribute pool"}


def _rep_key(row):
    rep = row["rep"]
    if rep == "attribute_pool":
        return "%s (eps=%s)" % (_REP_LABEL[rep], row["epsilon"])
    return _REP_LABEL[rep]


def _f(row, col):
    value = row.get(col, "")
    return float(value) if value not in ("", None) else float("nan")


def plot_key_sizes(rows, path):
    """Grouped bars of mean key attribute counts, time share stacked below."""
    lengths = sorted({_f(r, "route_length_m") for r in rows})
    reps = []
    for row in rows:
        key = _rep_key(row)
        if key not in reps:
            reps.append(key)
    fig, ax = plt.subplots(figsize=(6, 4))
    width = 0.8 / max(len(reps), 1)
    for k, rep in enumerate(reps):
        xs, road, tme = [], [], []
        for i, length in enumerate(lengths):
            match = [r for r in rows
                     if _rep_key(r) == rep and _f(r, "route_length_m") == length]
            if not match:
                continue
            xs.append(i + k * width)
            road.append(_f(match[0], "key_attrs_road_mean"))
            tme.append(_f(match[0], "key_attrs_time_mean"))
        ax.bar(xs, tme, width=width * 0.9, color="lightgray",
               edgecolor="black", linewidth=0.5)
        ax.bar(xs, road, width=width * 0.9, bottom=tme, label=rep)
    ax.set_xticks([i + width * (len(reps) - 1) / 2 for i in range(len(lengths))])
    ax.set_xticklabels(["%g m" % l for l in lengths])
    ax.set_xlabel("route length")
    ax.set_ylabel("mean key attributes (gray: time subtree)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_affected_vs_length(rows, path):
    groups = defaultdict(list)
    for row in rows:
        groups[_rep_key(row)].append(row)
    fig, ax = plt.subplots(figsize=(6, 4))
    for rep, rep_rows in groups.items():
        rep_rows.sort(key=lambda r: _f(r, "route_length_m"))
        xs = [_f(r, "route_length_m") for r in rep_rows]
        ys = [_f(r, "affected_mean_pct") for r in rep_rows]
        es = [_f(r, "affected_ci95_pct") for r in rep_rows]
        ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=rep)
    ax.set_xlabel("route length (m)")
    ax.set_ylabel("affected users per revocation (%)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_affected_vs_epsilon(rows, path):
    pool = [r for r in rows if r["rep"] == "attribute_pool"]
    pool.sort(key=lambda r: int(r["epsilon"]))
    if not pool:
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [int(r["epsilon"]) for r in pool]
    ys = [_f(r, "affected_mean_pct") for r in pool]
    es = [_f(r, "affected_ci95_pct") for r in pool]
    ax.errorbar(xs, ys, yerr=es, marker="s", capsize=3, color="tab:red")
    ax.set_xlabel("pool replicas per attribute")
    ax.set_ylabel("affected users per revocation (%)")
    ax.set_xticks(xs)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report(rows, out_csv_path):
    """Write the standard figures alongside a metrics CSV."""
    base, _ = os.path.splitext(out_csv_path)
    written = []
    for suffix, fn in (("key_sizes", plot_key_sizes),
                       ("affected_vs_length", plot_affected_vs_length),
                       ("affected_vs_epsilon", plot_affected_vs_epsilon)):
        path = "%s_%s.png" % (base, suffix)
        fn(rows, path)
        if os.path.exists(path):
            written.append(path)
    return written

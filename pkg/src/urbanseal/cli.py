"""Command-line front end: demo, experiment, and bench subcommands.

Human-readable progress goes to standard error; machine-readable output
(CSV, figures, traces) goes to files only. Exit codes: 0 on success, 1 on
an invariant violation during a run, 2 on a configuration error.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace

from . import experiments
from .attrspace import PolicySpec
from .city import CityFormatError, RouteSamplingError, load_city
from .experiments import ExperimentConfig, MetricsRow, write_csv
from .protocol import SystemConfig, setup_system
from .store import SecurityInvariantError
from .symcrypto import IntegrityError

log = logging.getLogger("urbanseal")

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2

_REP_NAMES = {"basic": "basic", "segtree": "segment_tree",
              "pool": "attribute_pool"}


class ConfigError(Exception):
    pass


def _load_config(args):
    """Merge defaults, the optional JSON config file, and CLI flags."""
    cfg = ExperimentConfig()
    extra = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("cannot read config file: %s" % exc)
        known = set(cfg.__dataclass_fields__)
        for key, value in data.items():
            if key in known:
                cfg = replace(cfg, **{key: value})
            elif key in ("lengths", "reps", "device_counts", "city_file"):
                extra[key] = value
            else:
                raise ConfigError("unknown config key %r" % key)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "rep", None):
        cfg = replace(cfg, rep_kind=_REP_NAMES[args.rep])
    if getattr(args, "epsilon", None) is not None:
        if args.epsilon < 1:
            raise ConfigError("--epsilon must be at least 1")
        cfg = replace(cfg, epsilon=args.epsilon)
    if getattr(args, "route_length", None) is not None:
        if args.route_length <= 0:
            raise ConfigError("--route-length must be positive")
        cfg = replace(cfg, route_length=args.route_length)
    if getattr(args, "users", None) is not None:
        cfg = replace(cfg, users=args.users)
    if getattr(args, "devices", None) is not None:
        cfg = replace(cfg, devices=args.devices)
    if getattr(args, "security", None) is not None:
        cfg = replace(cfg, security_level=args.security)
    return cfg, extra


def _demo_city(extra):
    if "city_file" in extra:
        return load_city(extra["city_file"])
    from .city import generate_grid_city
    return generate_grid_city(2, 2, 100.0, 2)


def cmd_demo(args):
    """Run every procedure once on a toy city and print a transcript."""
    cfg, extra = _load_config(args)
    city = _demo_city(extra)
    import random
    rng = random.Random(cfg.seed)
    from .city import place_devices
    place_devices(city, min(4, sum(s.rho for s in city.streets.values())), rng)
    system = setup_system(SystemConfig(
        city, cfg.representation(), cfg.time_config(),
        security_level=cfg.security_level, seed=cfg.seed))
    log.info("setup: %d road attrs, %d time attrs, %d devices",
             len(system.layout.universe.road), len(system.layout.universe.time),
             len(system.devices))

    street = sorted(city.streets)[0]
    rho = city.streets[street].rho
    spec = PolicySpec(((street, 1, rho),), 1, 30)
    system.register_user("alice")
    system.distribute_key("alice", spec)
    log.info("distribute: issued key for alice covering %s[1,%d], days 1..30",
             street, rho)

    system.seal_day()
    log.info("seal: day %d sealed for %d devices", system.clock.day,
             len(system.devices))

    if args.fail_inject == "tamper-boot":
        did = sorted(system.devices)[0]
        day, blob = system.css.store.boot_material[did]
        system.css.store.boot_material[did] = (day, blob[:-1]
                                               + bytes([blob[-1] ^ 1]))
        device = system.devices[did]
        try:
            day_got, blob_got, gen = system.fabric.send(
                did, "css", "fetch_boot", device=did)
            device.boot(day_got, blob_got, gen)
        except IntegrityError as exc:
            log.error("boot MAC failure on %s: %s", did, exc)
            return EXIT_INVARIANT
        log.error("tampered boot material was accepted")
        return EXIT_INVARIANT

    target = None
    for did in sorted(system.devices):
        if system.devices[did].placement[0] == street:
            target = did
            break
    if target is None:
        target = sorted(system.devices)[0]
    system.produce_data(target, b"speed=42")
    log.info("produce: %s stored one encrypted item", target)

    item = system.consume_data("alice", target, system.clock.day, 0)
    log.info("consume: alice reads %r", item)
    authorized = system.devices[target].placement[0] == street
    if authorized and item != b"speed=42":
        log.error("authorized consume failed")
        return EXIT_INVARIANT

    system.revoke_key("alice")
    log.info("revoke: alice's road attributes re-versioned, day re-sealed")

    system.produce_data(target, b"speed=17")
    item = system.consume_data("alice", target, system.clock.day, 1)
    log.info("consume after revoke: alice reads %s",
             "none (not authorized)" if item is None else repr(item))
    if item is not None:
        log.error("revoked key still decrypts")
        return EXIT_INVARIANT

    if args.out:
        system.save_trace(args.out)
        log.info("trace written to %s", args.out)
    return EXIT_OK


def _sweep_plan(cfg, extra, args):
    reps = extra.get("reps")
    if reps is None:
        if getattr(args, "rep", None):
            eps = cfg.epsilon
            reps = [[cfg.rep_kind, eps]]
        else:
            reps = [["basic", 1], ["segment_tree", 1],
                    ["attribute_pool", 3], ["attribute_pool", 5]]
    lengths = extra.get("lengths")
    if lengths is None:
        if getattr(args, "route_length", None) is not None:
            lengths = [cfg.route_length]
        else:
            lengths = [250.0, 500.0, 1000.0]
    return [(r, int(e)) for r, e in reps], [float(l) for l in lengths]


def cmd_experiment(args):
    """Representation x route-length revocation sweep, to CSV plus figures."""
    cfg, extra = _load_config(args)
    reps, lengths = _sweep_plan(cfg, extra, args)
    log.info("experiment: %d reps x %d lengths, %d users, seed %d",
             len(reps), len(lengths), cfg.users, cfg.seed)
    rows = experiments.sweep_rows(cfg, reps, lengths,
                                  with_key_bytes=args.key_bytes)
    write_csv(args.out, rows)
    log.info("wrote %d rows to %s", len(rows), args.out)
    if not args.no_figures:
        from . import plotting
        written = plotting.render_report(experiments.read_csv(args.out),
                                         args.out)
        for path in written:
            log.info("wrote figure %s", path)
    return EXIT_OK


def cmd_bench(args):
    """Seal-time and sealed-key-size scaling over device counts."""
    cfg, extra = _load_config(args)
    counts = [int(c) for c in extra.get("device_counts", (10, 50, 100))]
    rows = []
    for count in counts:
        log.info("bench: sealing one day with %d devices", count)
        row = experiments.bench_seal(cfg, count)
        log.info("bench: %d devices sealed in %.3f s (%d sealed-key bytes)",
                 count, row.seal_seconds, row.ask_total_bytes)
        rows.append(row)
    write_csv(args.out, rows)
    log.info("wrote %d rows to %s", len(rows), args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="urbanseal",
        description="Revocable attribute-based encryption for urban sensing: "
                    "demos, experiments, and benchmarks.")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug logging on standard error")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, out_required):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", required=out_required,
                       help="output file path")
        p.add_argument("--rep", choices=sorted(_REP_NAMES),
                       help="attribute representation")
        p.add_argument("--epsilon", type=int, default=None,
                       help="pool replicas per attribute")
        p.add_argument("--route-length", type=float, default=None,
                       dest="route_length", metavar="M")
        p.add_argument("--users", type=int, default=None)
        p.add_argument("--devices", type=int, default=None)
        p.add_argument("--security", type=int, default=None,
                       help="security level in bits (32 selects toy params)")

    p_demo = sub.add_parser("demo", help="run every procedure on a toy city")
    common(p_demo, out_required=False)
    p_demo.add_argument("--fail-inject", choices=["tamper-boot"],
                        default=None, help="inject a fault and report it")
    p_demo.set_defaults(fn=cmd_demo)

    p_exp = sub.add_parser("experiment",
                           help="revocation-cost and key-size sweep")
    common(p_exp, out_required=True)
    p_exp.add_argument("--key-bytes", action="store_true",
                       help="also measure real serialized key sizes")
    p_exp.add_argument("--no-figures", action="store_true",
                       help="skip rendering figures next to the CSV")
    p_exp.set_defaults(fn=cmd_experiment)

    p_bench = sub.add_parser("bench", help="daily seal benchmark")
    common(p_bench, out_required=True)
    p_bench.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr,
                        level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        return args.fn(args)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (CityFormatError, RouteSamplingError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (SecurityInvariantError, IntegrityError) as exc:
        log.error("invariant violation: %s", exc)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

    fsrr run <config.toml> [--seed N] [--out FILE] [--wait-log FILE]
    fsrr sweep <sweep.toml> [--jobs N] [--out DIR]
    fsrr audit tables
    fsrr audit trace rtr=1 ast=1 cdht=max maxval=0.5 decr=0 dr=0
    fsrr audit dec tau=30 t1=15 ts=5 v_max=10 [x=.. y=..]

Log verbosity comes from ``-v`` or the ``FSRR_LOG_LEVEL`` environment variable.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from . import fuzzy, geometry
from .sim.config import load_config
from .sim.engine import METRIC_FIELDS, WAIT_LOG_FIELDS, Simulation
from .sweep import load_sweep, run_sweep, to_csv, write_outputs

RUN_FIELDS = ("run_id", "seed", "scheduler", "forwarding") + METRIC_FIELDS
EXIT_USAGE = 2

log = logging.getLogger("fsrr")


class UsageError(Exception):
    pass


def _setup_logging(verbose: int) -> None:
    level = os.environ.get("FSRR_LOG_LEVEL", "WARNING").upper()
    if verbose == 1:
        level = "INFO"
    elif verbose > 1:
        level = "DEBUG"
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config, rng_seed=args.seed)
    except (OSError, ValueError) as exc:  # ConfigError and TOML decode errors are ValueErrors
        print(f"error: invalid config {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not config.run_id:
        config = config.replace(run_id=Path(args.config).stem)
    result = Simulation(config).run()
    m = result.metrics
    row = {"run_id": config.run_id, "seed": config.rng_seed, "scheduler": config.scheduler,
           "forwarding": config.forwarding, **{f: getattr(m, f) for f in METRIC_FIELDS}}
    text = to_csv([row], RUN_FIELDS)
    summary = sys.stderr if args.out in (None, "-") else sys.stdout
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    if args.wait_log:
        with open(args.wait_log, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(WAIT_LOG_FIELDS)
            for w in result.wait_log:
                writer.writerow([w.run_id, w.router_id, w.req_id, w.grade, repr(w.arrival), repr(w.service_start)])
    print(
        f"{config.run_id}: {config.variant}, {config.node_count} nodes, seed {config.rng_seed}\n"
        f"  per-node waiting time per router: {m.per_node_wait_per_router:.6f} s\n"
        f"  discoveries: {m.discoveries_completed}/{m.discoveries_started} completed, "
        f"mean latency {m.mean_discovery_latency:.4f} s\n"
        f"  requests forwarded: {m.rreq_forwarded}, dropped expired/duplicate: "
        f"{m.rreq_dropped_expired}/{m.rreq_dropped_duplicate}\n"
        f"  event digest: {result.digest}",
        file=summary,
    )
    if sum(result.clamp_counts.values()):
        log.info("clamped crisp inputs: %s", dict(result.clamp_counts))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        spec = load_sweep(args.spec)
    except (OSError, ValueError) as exc:
        print(f"error: invalid sweep spec {args.spec}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    total = len(spec.values) * len(spec.seeds) * len(spec.variants)
    log.info("running %d scenarios with %d worker(s)", total, args.jobs)
    result = run_sweep(spec, jobs=args.jobs)
    for run_id, message in result.failures:
        print(f"run failed: {run_id}: {message}", file=sys.stderr)
    long_path, agg_path = write_outputs(result.runs, args.out)
    print(f"{len(result.runs)}/{total} runs ok; wrote {long_path} and {agg_path}")
    return 1 if result.failures else 0


def _parse_kv(items: list[str], allowed: set[str]) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or key not in allowed:
            raise UsageError(f"expected key=value with key in {sorted(allowed)}, got {item!r}")
        out[key] = value
    return out


def _float(kv: dict[str, str], key: str, default: float | None = None) -> float:
    if key not in kv:
        if default is None:
            raise UsageError(f"missing {key}=")
        return default
    try:
        return float(kv[key])
    except ValueError:
        raise UsageError(f"{key} must be a number, got {kv[key]!r}") from None


def cmd_audit(args: argparse.Namespace) -> int:
    try:
        if args.subject == "tables":
            if args.params:
                raise UsageError("audit tables takes no arguments")
            print("\n\n".join(fuzzy.format_table(name) for name in fuzzy.TABLES))
        elif args.subject == "trace":
            kv = _parse_kv(args.params, {"rtr", "ast", "cdht", "maxval", "decr", "dr"})
            maxval = _float(kv, "maxval", 1.0)
            cdht = maxval if kv.get("cdht") == "max" else _float(kv, "cdht")
            trace = fuzzy.evaluate(
                _float(kv, "rtr"), _float(kv, "ast"), cdht, maxval, _float(kv, "decr"), _float(kv, "dr")
            )
            for key, value in trace.as_dict().items():
                print(f"{key:>10} = {value}")
        else:
            kv = _parse_kv(args.params, {"tau", "t1", "ts", "v_max", "x", "y"})
            center = geometry.Position(_float(kv, "x", 0.0), _float(kv, "y", 0.0))
            dec = geometry.dec_build(center, _float(kv, "v_max"), _float(kv, "tau"), _float(kv, "t1"), _float(kv, "ts"))
            print(f"center = ({dec.center.x:g}, {dec.center.y:g})")
            print(f"radius = {dec.radius:g}")
            print(f"expired = {str(dec.expired).lower()}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        args.parser.print_usage(sys.stderr)
        return EXIT_USAGE
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fsrr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for progress, -vv to trace every scheduling decision")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario")
    p.add_argument("config")
    p.add_argument("--seed", type=int, help="override rng_seed")
    p.add_argument("--out", help="metrics CSV path (default: stdout)")
    p.add_argument("--wait-log", help="write the per-entry waiting-time log here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a parameter sweep")
    p.add_argument("spec")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="sweep_out", help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("audit", help="print tables, a controller trace or a circle")
    p.add_argument("subject", choices=["tables", "trace", "dec"])
    p.add_argument("params", nargs="*", metavar="key=value")
    p.set_defaults(func=cmd_audit, parser=p)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

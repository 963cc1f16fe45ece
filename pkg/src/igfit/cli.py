"""
Command-line front end.

    igfit test --data FILE --stat STAT --estimator ml|mo [--a A] --seed S
    igfit power --alt FAMILY:THETA --n N --mc MC --seed S --stats LIST
    igfit reproduce --which data1|data2|power30|power50 --seed S

Exit status is 0 on success and 2 on any usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from igfit import __version__
from igfit.competing import TABLE_STATS, StatKind, StatTag
from igfit.datasets import DataFileError, load_dataset, read_data_file
from igfit.errors import IGFitError
from igfit.estimators import EstimatorKind
from igfit.montecarlo import (
    TABLE_ALTERNATIVES,
    AltSpec,
    BootstrapConfig,
    PowerStudyConfig,
    bootstrap_tests,
    warp_speed_power,
)

SCHEMA_VERSION = 1
POWER_COLUMNS = ["alt", "theta", "n", "stat", "estimator", "a", "power_pct", "mc_se"]
_WEIGHT = {StatTag.STEIN: "exp", StatTag.STEIN_SQ: "expsq"}
_REPRODUCE_DATA = {"data1": "repair_times", "data2": "jug_bridge"}
_REPRODUCE_POWER = {"power30": 30, "power50": 50}


class UsageError(Exception):
    pass


def _threads(args) -> int:
    env = os.environ.get("IGFIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"IGFIT_THREADS must be an integer, got {env!r}") from None
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        return args.threads
    return os.cpu_count() or 1


def _num(v) -> str:
    return "" if v is None else format(v, ".10g")


def _report(outcome, dataset: str, n: int) -> dict:
    k = outcome.kind
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "test",
        "dataset": dataset,
        "test": k.tag.value,
        "estimator": k.estimator.value,
        "weight": _WEIGHT.get(k.tag),
        "a": k.a,
        "n": n,
        "statistic": outcome.raw_statistic,
        "p_value": outcome.p_value,
        "critical_value": outcome.critical_value,
        "b": outcome.b,
        "alpha": outcome.alpha,
        "seed": outcome.seed,
        "reject": outcome.reject,
        "tool_version": __version__,
    }


def cmd_test(args, out) -> int:
    if args.stat in ("stein", "stein-sq") and args.a is None:
        raise UsageError(f"--a is required for --stat {args.stat}")
    if args.stat in ("hk1", "hk2", "vg") and args.estimator != "ml":
        raise UsageError(f"--stat {args.stat} uses maximum likelihood estimates; pass --estimator ml")
    try:
        kind = StatKind(StatTag(args.stat), EstimatorKind(args.estimator), args.a)
        cfg = BootstrapConfig(b=args.b, alpha=args.alpha, seed=args.seed)
    except IGFitError as exc:
        raise UsageError(str(exc)) from exc
    x = read_data_file(args.data)
    outcome = bootstrap_tests(x, [kind], cfg, threads=_threads(args))[0]
    rep = _report(outcome, os.path.basename(args.data), x.size)
    if args.format == "json":
        out.write(json.dumps(rep, indent=2) + "\n")
    else:
        for key, val in rep.items():
            out.write(f"{key:>15}: {val}\n")
    return 0


def _parse_stats(text: str):
    try:
        return [StatKind.parse(item) for item in text.split(",") if item.strip()]
    except IGFitError as exc:
        raise UsageError(str(exc)) from exc


def _power_rows(result):
    cfg = result.config
    for k in cfg.stats:
        yield [
            cfg.alt.family.value,
            _num(cfg.alt.theta),
            str(cfg.n),
            k.tag.value,
            k.estimator.value,
            _num(k.a),
            format(result.power[k], ".4f"),
            format(result.mc_se[k], ".4f"),
        ]


def cmd_power(args, out) -> int:
    try:
        alt = AltSpec.parse(args.alt)
        cfg = PowerStudyConfig(
            alt=alt, n=args.n, mc=args.mc, stats=_parse_stats(args.stats), alpha=args.alpha, seed=args.seed
        )
    except IGFitError as exc:
        raise UsageError(str(exc)) from exc
    result = warp_speed_power(cfg, threads=_threads(args))
    w = csv.writer(out, lineterminator="\n")
    w.writerow(POWER_COLUMNS)
    w.writerows(_power_rows(result))
    return 0


def _reproduce_data(args, out) -> int:
    name = _REPRODUCE_DATA[args.which]
    x = load_dataset(name)
    cfg = BootstrapConfig(b=args.b, alpha=args.alpha, seed=args.seed)
    outcomes = bootstrap_tests(x, TABLE_STATS, cfg, threads=_threads(args))
    if args.format == "json":
        rows = [_report(o, f"{name}.txt", x.size) for o in outcomes]
        for r in rows:
            r["command"] = "reproduce"
        out.write(json.dumps(rows, indent=2) + "\n")
    elif args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["test", "estimator", "a", "statistic", "p_value"])
        for o in outcomes:
            k = o.kind
            w.writerow([k.tag.value, k.estimator.value, _num(k.a), _num(o.raw_statistic), format(o.p_value, ".4f")])
    else:
        out.write(f"{name} (n = {x.size}), b = {cfg.b}, seed = {cfg.seed}\n")
        out.write(f"{'Test':<14}{'Statistic':>12}{'p-value':>10}\n")
        for o in outcomes:
            out.write(f"{o.kind.label:<14}{o.raw_statistic:>12.4f}{o.p_value:>10.4f}\n")
    return 0


def _reproduce_power(args, out) -> int:
    n = _REPRODUCE_POWER[args.which]
    threads = _threads(args)
    results = []
    for alt in TABLE_ALTERNATIVES:
        cfg = PowerStudyConfig(alt=alt, n=n, mc=args.mc, stats=TABLE_STATS, alpha=args.alpha, seed=args.seed)
        results.append(warp_speed_power(cfg, threads=threads))
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(POWER_COLUMNS)
        for r in results:
            w.writerows(_power_rows(r))
        return 0
    if args.format == "json":
        rows = [dict(zip(POWER_COLUMNS, row)) for r in results for row in _power_rows(r)]
        out.write(json.dumps(rows, indent=2) + "\n")
        return 0
    labels = [k.label for k in TABLE_STATS]
    width = max(len(s) for s in labels) + 1
    out.write(f"n = {n}, mc = {args.mc}, alpha = {args.alpha:g}, seed = {args.seed}\n")
    out.write(f"{'Distribution':<14}" + "".join(f"{s:>{width}}" for s in labels) + "\n")
    for r in results:
        rounded = r.rounded()
        out.write(f"{r.config.alt.label:<14}" + "".join(f"{rounded[k]:>{width}}" for k in TABLE_STATS) + "\n")
    return 0


def cmd_reproduce(args, out) -> int:
    if args.mc < 1 or args.b < 100:
        raise UsageError("--mc must be positive and --b at least 100")
    if args.which in _REPRODUCE_DATA:
        return _reproduce_data(args, out)
    return _reproduce_power(args, out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="igfit", description="Goodness-of-fit tests for the inverse Gaussian family.")
    parser.add_argument("--version", action="version", version=f"igfit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, required=True)
    common.add_argument("--alpha", type=float, default=0.10)
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: logical cores)")

    t = sub.add_parser("test", parents=[common], help="bootstrap test of one dataset")
    t.add_argument("--data", required=True)
    t.add_argument("--stat", required=True, choices=[s.value for s in StatTag])
    t.add_argument("--estimator", required=True, choices=["ml", "mo"])
    t.add_argument("--a", type=float, default=None)
    t.add_argument("--b", type=int, default=10_000)
    t.add_argument("--format", choices=["json", "text"], default="json")
    t.set_defaults(func=cmd_test)

    p = sub.add_parser("power", parents=[common], help="warp-speed power study")
    p.add_argument("--alt", required=True, help="FAMILY:THETA, family in weibull|lognormal|lognormal-var|gamma|chisq|dhillon|ig")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mc", type=int, required=True)
    p.add_argument("--stats", required=True, help="comma list of stat[:estimator[:a]]")
    p.set_defaults(func=cmd_power)

    r = sub.add_parser("reproduce", parents=[common], help="regenerate a data-analysis or power table")
    r.add_argument("--which", required=True, choices=[*_REPRODUCE_DATA, *_REPRODUCE_POWER])
    r.add_argument("--mc", type=int, default=10_000)
    r.add_argument("--b", type=int, default=10_000)
    r.add_argument("--format", choices=["text", "csv", "json"], default="text")
    r.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except DataFileError as exc:
        print(f"igfit: {args.data}: {exc}", file=sys.stderr)
        return 2
    except (UsageError, IGFitError) as exc:
        print(f"igfit: error: {exc}", file=sys.stderr)
        return 2
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``roboost {run,preset-list,estimate,merge-demo,plot,verify}``.

Exit codes: 0 success, 2 invalid input or configuration, 3 I/O failure,
1 when ``verify`` finds a failing property.
"""

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from xml.sax.saxutils import escape

import numpy as np

from . import harness
from .merge_rules import MERGE_KINDS, MergeRule
from .robust_scalar import VALIDATOR_KINDS, Validator, validate

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _fmt(x):
    return f"{x:.12g}"


# ---------------------------------------------------------------------------
# run / preset-list
# ---------------------------------------------------------------------------


def cmd_run(args):
    try:
        if args.preset and args.config:
            raise harness.ConfigError("config", "give either a config file or --preset, not both")
        if args.preset:
            cfg = harness.preset(args.preset, args.scale, args.noise or "lognormal")
        elif args.config:
            try:
                cfg = harness.load_config(args.config)
            except OSError as exc:
                raise CliError(f"cannot read config {args.config}: {exc.strerror}", EXIT_IO) from None
            if args.noise:
                raise harness.ConfigError("noise", "--noise only applies to presets")
        else:
            raise harness.ConfigError("config", "a config path or --preset is required")
        if args.seed is not None:
            if args.seed < 0:
                raise harness.ConfigError("seed", "expected a non-negative integer")
            cfg = dataclasses.replace(cfg, master_seed=int(args.seed))
        if args.trials is not None:
            if args.trials < 1:
                raise harness.ConfigError("trials", "expected a positive integer")
            cfg = dataclasses.replace(cfg, trials=int(args.trials))
    except harness.ConfigError as exc:
        raise CliError(f"invalid configuration: {exc}") from None
    if args.workers < 1:
        raise CliError("--workers must be >= 1")

    try:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "config.resolved.json"), "w") as fh:
            json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise CliError(f"cannot write to {args.out}: {exc.strerror}", EXIT_IO) from None

    records = harness.run_experiment(cfg, workers=args.workers)
    try:
        harness.write_records(os.path.join(args.out, "records.csv"), records)
        harness.write_summary(os.path.join(args.out, "summary.csv"), harness.summarize(records))
    except OSError as exc:
        raise CliError(f"cannot write results: {exc.strerror}", EXIT_IO) from None
    print(f"wrote {len(records)} records to {args.out}")
    return EXIT_OK


def cmd_preset_list(args):
    for eid in harness.EXPERIMENTS:
        cfg = harness.preset(eid, args.scale)
        variants = cfg.variants()
        methods = ",".join(m.name for m in cfg.methods)
        print(f"{eid.lower():6s} variants={len(variants):3d} trials={cfg.trials:4d} "
              f"curvature={cfg.curvature} methods={methods}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# estimate / merge-demo
# ---------------------------------------------------------------------------


def _read_numbers(stream):
    text = stream.read()
    try:
        vals = [float(tok) for tok in text.split()]
    except ValueError as exc:
        raise CliError(f"cannot parse input: {exc}") from None
    return vals


def cmd_estimate(args):
    xs = _read_numbers(sys.stdin)
    if not xs:
        raise CliError("no numbers on stdin")
    if not all(math.isfinite(x) for x in xs):
        raise CliError("input contains NaN or Inf")
    try:
        v = Validator(args.method, args.delta, args.k, args.variance)
        est = validate(v, np.array(xs))
    except ValueError as exc:
        raise CliError(str(exc)) from None
    print(_fmt(est))
    return EXIT_OK


def cmd_merge_demo(args):
    src = open(args.input) if args.input and args.input != "-" else sys.stdin
    try:
        rows = [line.split() for line in src.read().splitlines() if line.strip()]
    except OSError as exc:
        raise CliError(f"cannot read {args.input}: {exc.strerror}", EXIT_IO) from None
    finally:
        if src is not sys.stdin:
            src.close()
    if not rows:
        raise CliError("no candidate points given")
    try:
        pts = np.array([[float(t) for t in r] for r in rows])
    except ValueError as exc:
        raise CliError(f"cannot parse points: {exc}") from None
    if pts.ndim != 2:
        raise CliError("every row must have the same number of coordinates")
    try:
        rule = MergeRule(args.rule, beta=args.beta)
        out = rule(pts)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    print(" ".join(_fmt(x) for x in out))
    return EXIT_OK


# ---------------------------------------------------------------------------
# plot
# ---------------------------------------------------------------------------

_PALETTE = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d",
            "#666666", "#1f78b4", "#b2df8a"]


def _read_summary(path, metric):
    try:
        with open(path, newline="") as fh:
            rd = csv.DictReader(fh)
            header = rd.fieldnames or []
            rows = list(rd)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from None
    need = ["method", "cost", "mean", "sd"]
    missing = [c for c in need if c not in header]
    if missing:
        raise CliError(f"summary is missing columns: {', '.join(missing)}")
    if not rows:
        raise CliError("summary has no rows")
    series = {}
    try:
        for r in rows:
            cost = float(r["cost"])
            mean, sd = float(r["mean"]), float(r["sd"])
            if cost <= 0 or not (mean > 0 and math.isfinite(mean)):
                continue
            key = (r.get("experiment") or "", r["method"])
            series.setdefault(key, []).append((cost, mean, sd))
    except ValueError as exc:
        raise CliError(f"non-numeric value in summary: {exc}") from None
    if not series:
        raise CliError("summary has no plottable rows (need positive cost and mean)")
    experiments = sorted({k[0] for k in series})
    named = {}
    for (exp, meth), pts in series.items():
        label = meth if len(experiments) == 1 else f"{exp} {meth}"
        named[label] = sorted(pts)
    return named


def render_svg(series, title="", width=720, height=480):
    """SVG of log10(mean) against log10(cost), one polyline per series with a +-sd band."""
    ml, mr, mt, mb = 70, 170, 30, 50
    pw, ph = width - ml - mr, height - mt - mb
    xs, ys = [], []
    for pts in series.values():
        for c, m, s in pts:
            xs.append(math.log10(c))
            ys.append(math.log10(m))
            if m + s > 0:
                ys.append(math.log10(m + s))
            if m - s > 0:
                ys.append(math.log10(m - s))
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return mt + (y1 - v) / (y1 - y0) * ph

    floor_y = y0
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{ml + pw / 2:.1f}" y="{mt - 10}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="13">{escape(title)}</text>')
    for i in range(5):
        fx = x0 + (x1 - x0) * i / 4
        fy = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{sx(fx):.1f}" y="{mt + ph + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{fx:.2f}</text>')
        out.append(f'<text x="{ml - 6}" y="{sy(fy) + 4:.1f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{fy:.2f}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">log10(cost)</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="12" transform="rotate(-90 16 {mt + ph / 2:.1f})">log10(excess risk)</text>')
    for j, (label, pts) in enumerate(series.items()):
        color = _PALETTE[j % len(_PALETTE)]
        upper = [(sx(math.log10(c)), sy(math.log10(m + s))) for c, m, s in pts]
        lower = [(sx(math.log10(c)), sy(math.log10(m - s) if m - s > 0 else floor_y)) for c, m, s in pts]
        band = " ".join(f"{x:.2f},{y:.2f}" for x, y in upper + lower[::-1])
        out.append(f'<polygon class="band" points="{band}" fill="{color}" fill-opacity="0.15" stroke="none"/>')
        line = " ".join(f"{sx(math.log10(c)):.2f},{sy(math.log10(m)):.2f}" for c, m, _ in pts)
        out.append(f'<polyline class="series" data-label="{escape(label, {chr(34): "&quot;"})}" '
                   f'points="{line}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = mt + 14 + 16 * j
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly - 4}" x2="{ml + pw + 30}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw + 35}" y="{ly}" font-family="sans-serif" font-size="11">'
                   f'{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_plot(args):
    if args.metric != "excess_risk":
        raise CliError(f"unsupported metric {args.metric!r}; only excess_risk is available")
    series = _read_summary(args.summary, args.metric)
    svg = render_svg(series, title=args.title or "")
    try:
        with open(args.out, "w") as fh:
            fh.write(svg)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc.strerror}", EXIT_IO) from None
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(args):
    from .theory_checks import run_all

    reports = run_all(seed=args.seed, quick=args.quick)
    bad = 0
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        bad += not rep.passed
        print(f"{status} {rep.name}: instances={rep.instances} failures={rep.failures} "
              f"worst={_fmt(rep.worst)}")
    return EXIT_FAIL if bad else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="roboost", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    r = sub.add_parser("run", help="run an experiment from a JSON config or a preset")
    r.add_argument("config", nargs="?", help="path to an experiment config JSON file")
    r.add_argument("--preset", help="preset id, e.g. sc-e1")
    r.add_argument("--scale", choices=harness.SCALES, default="desk")
    r.add_argument("--noise", choices=("normal", "lognormal"), help="noise family for presets")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--seed", type=int, help="override the master seed")
    r.add_argument("--trials", type=int, help="override the number of trials")
    r.set_defaults(func=cmd_run)

    pl = sub.add_parser("preset-list", help="list the available presets")
    pl.add_argument("--scale", choices=harness.SCALES, default="desk")
    pl.set_defaults(func=cmd_preset_list)

    e = sub.add_parser("estimate", help="robust mean of whitespace-separated numbers on stdin")
    e.add_argument("--method", choices=VALIDATOR_KINDS, default="catoni")
    e.add_argument("--delta", type=float, default=0.05)
    e.add_argument("--k", type=int, help="number of blocks for mom")
    e.add_argument("--variance", type=float, help="variance proxy for catoni (default: empirical)")
    e.set_defaults(func=cmd_estimate)

    m = sub.add_parser("merge-demo", help="merge k candidate rows (one point per line)")
    m.add_argument("input", nargs="?", default="-", help="file with one point per line (default stdin)")
    m.add_argument("--rule", choices=MERGE_KINDS, default="geomed")
    m.add_argument("--beta", type=float, help="smallest-ball majority margin in (0, 1/2)")
    m.set_defaults(func=cmd_merge_demo)

    pt = sub.add_parser("plot", help="render summary.csv trajectories as SVG")
    pt.add_argument("summary")
    pt.add_argument("--metric", default="excess_risk")
    pt.add_argument("--out", required=True)
    pt.add_argument("--title")
    pt.set_defaults(func=cmd_plot)

    v = sub.add_parser("verify", help="run the deterministic property battery")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--quick", action="store_true", help="fewer instances per property")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"roboost {args.verb}: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

"""Command line driver: suite execution, CSV/JSON emission, figures.

Exit codes: 0 all rows pass, 1 numerical failure (failing rows listed on
stderr), 2 configuration error.  Identical config and seed produce
identical output bytes except for the timestamp header line.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import figures, suites
from .bounds import OperatorFamily, replay_witness, resolvent_ray_family
from .core import MixedNormSpec
from .errors import (ConfigError, IncompatibleSpec, NumericalFailure,
                     SectorsumError)
from .problems import (operator_from_config, parabolic_from_config,
                       problem_from_config)
from .report import config_hash, write_rows_csv, write_table_csv

OPSUM_RESIDUAL_TOL = 1e-8


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def _stem(path):
    return os.path.splitext(str(path))[0]


def _fail_rows(rows):
    bad = [r for r in rows if not r.passed]
    if not bad:
        return
    for r in bad:
        print(f"FAIL {r.suite}/{r.case}/{r.metric}: value={r.value} "
              f"tolerance={r.tolerance}", file=sys.stderr)
    raise NumericalFailure(f"{len(bad)} of {len(rows)} rows failed")


def _dump_witnesses(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# run


def cmd_run(args):
    cfg = _load_json(args.config) if args.config else {}
    if not isinstance(cfg, dict):
        raise ConfigError("run config must be an object")
    known = {"suite", "seed", "out", "tol_scale", "problems"}
    extra = set(cfg) - known
    if extra:
        raise ConfigError(f"unknown run config keys {sorted(extra)}")

    suite_arg = args.suite if args.suite else cfg.get("suite")
    if suite_arg is None:
        suite_arg = ["all"]
    if isinstance(suite_arg, str):
        suite_arg = [suite_arg]
    names = []
    for s in suite_arg:
        names.extend(suites.SUITE_NAMES if s == "all" else [s])
    if not names:
        raise ConfigError("empty suite list")
    seen = set()
    names = [n for n in names if not (n in seen or seen.add(n))]
    for n in names:
        if n not in suites.SUITE_NAMES:
            raise ConfigError(f"unknown suite {n!r}; choose from "
                              f"{', '.join(suites.SUITE_NAMES)} or all")

    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    tol_scale = (args.tol_scale if args.tol_scale is not None
                 else float(cfg.get("tol_scale", 1.0)))
    out = args.out or cfg.get("out") or "results.csv"
    problems = None
    if "problems" in cfg:
        problems = [problem_from_config(p, seed) for p in cfg["problems"]]

    effective = {"suite": names, "seed": seed, "tol_scale": tol_scale}
    if problems is not None:
        effective["problems"] = cfg["problems"]
    h = config_hash(effective)

    rows = []
    witnesses = []
    for name in names:
        kw = {}
        if name == "bounds":
            kw["witness_sink"] = witnesses
        if name == "opsum" and problems is not None:
            kw["problems"] = problems
        rows.extend(suites.run_suite(name, seed=seed, tol_scale=tol_scale,
                                     **kw))
    label = "all" if list(names) == list(suites.SUITE_NAMES) \
        else "+".join(names)
    write_rows_csv(out, rows, label, seed, h, tol_scale)
    print(f"wrote {out} ({len(rows)} rows)")
    if witnesses:
        wpath = _stem(out) + "_witness.json"
        _dump_witnesses(wpath, {"seed": seed, "config_sha256": h,
                                "witnesses": witnesses})
        print(f"wrote {wpath}")
    if not args.no_figures:
        fpath = _stem(out) + ".png"
        figures.render_rows_figure(rows, fpath, f"suite {label}, seed {seed}")
        print(f"wrote {fpath}")
    _fail_rows(rows)
    return 0


# ---------------------------------------------------------------------------
# opsum


def cmd_opsum(args):
    seed = args.seed or 0
    problems = None
    cfg = {}
    if args.config:
        cfg = _load_json(args.config)
        try:
            problems = [problem_from_config(cfg, seed)]
        except IncompatibleSpec as exc:
            raise ConfigError(str(exc)) from exc
    h = config_hash({"problem": cfg, "seed": seed})
    columns, records = suites.opsum_table(seed, problems=problems)
    write_table_csv(args.out, columns, records, "opsum", seed, h)
    print(f"wrote {args.out} ({len(records)} rows)")
    if not args.no_figures:
        fpath = _stem(args.out) + ".png"
        figures.render_opsum_figure(records, fpath)
        print(f"wrote {fpath}")
    bad = [r for r in records
           if r["residual"] > OPSUM_RESIDUAL_TOL
           or r["dpg_bound"] < r["norm_AS"]]
    if bad:
        for r in bad:
            print(f"FAIL opsum/{r['label']}: residual={r['residual']} "
                  f"dpg_bound={r['dpg_bound']} norm_AS={r['norm_AS']}",
                  file=sys.stderr)
        raise NumericalFailure(f"{len(bad)} of {len(records)} rows failed")
    return 0


# ---------------------------------------------------------------------------
# lpnorm


def cmd_lpnorm(args):
    seed = args.seed or 0
    if args.config:
        cfg = _load_json(args.config)
        columns, records = suites.lpnorm_config_table(cfg, seed)
        h = config_hash({"lpnorm": cfg, "seed": seed})
    else:
        columns, records = suites.lpnorm_table(seed)
        h = config_hash({"lpnorm": "builtin", "seed": seed})
    write_table_csv(args.out, columns, records, "lpnorm", seed, h)
    print(f"wrote {args.out} ({len(records)} rows)")
    if not args.no_figures:
        fpath = _stem(args.out) + ".png"
        figures.render_lpnorm_figure(records, fpath)
        print(f"wrote {fpath}")
    return 0


# ---------------------------------------------------------------------------
# bounds


def _norm_from_config(cfg):
    if cfg is None:
        return None
    known = {"p", "outer", "inner", "block", "weights"}
    extra = set(cfg) - known
    if extra:
        raise ConfigError(f"unknown norm keys {sorted(extra)}")
    weights = cfg.get("weights")
    if weights is not None:
        weights = tuple(float(w) for w in weights)
    if "p" in cfg:
        return MixedNormSpec.p_norm(float(cfg["p"]), weights=weights)
    if {"outer", "inner", "block"} <= set(cfg):
        return MixedNormSpec.mixed(float(cfg["outer"]), float(cfg["inner"]),
                                   int(cfg["block"]), weights=weights)
    raise ConfigError("norm needs 'p' or 'outer'/'inner'/'block'")


def _family_from_config(cfg):
    known = {"label", "members", "resolvent_ray", "norm", "q", "n_ops",
             "trials", "seed"}
    extra = set(cfg) - known
    if extra:
        raise ConfigError(f"unknown family keys {sorted(extra)}")
    if ("members" in cfg) == ("resolvent_ray" in cfg):
        raise ConfigError("family needs exactly one of "
                          "'members' or 'resolvent_ray'")
    if "members" in cfg:
        ops = [operator_from_config(m) for m in cfg["members"]]
        if not ops:
            raise ConfigError("family members list is empty")
        fam = OperatorFamily(ops, label=cfg.get("label", "family"))
    else:
        ray = dict(cfg["resolvent_ray"])
        ray_known = {"operator", "angle", "samples_per_ray", "span_decades"}
        bad = set(ray) - ray_known
        if bad:
            raise ConfigError(f"unknown resolvent_ray keys {sorted(bad)}")
        A = operator_from_config(ray["operator"])
        try:
            fam = resolvent_ray_family(
                A, float(ray["angle"]),
                samples_per_ray=int(ray.get("samples_per_ray", 64)),
                span_decades=float(ray.get("span_decades", 3.0)))
        except IncompatibleSpec as exc:
            raise ConfigError(str(exc)) from exc
    return fam


def cmd_bounds(args):
    cfg = _load_json(args.family)
    if not isinstance(cfg, dict):
        raise ConfigError("family config must be an object")
    fam = _family_from_config(cfg)
    norm = _norm_from_config(cfg.get("norm"))
    seed = int(cfg.get("seed", args.seed or 0))
    try:
        columns, records, est = suites.bounds_table(
            fam, args.kind, norm=norm,
            n_ops=int(cfg.get("n_ops", 4)),
            trials=int(cfg.get("trials", 100)), seed=seed,
            q=float(cfg.get("q", 2.0)))
    except IncompatibleSpec as exc:
        raise ConfigError(str(exc)) from exc
    h = config_hash({"family": cfg, "kind": args.kind, "seed": seed})
    write_table_csv(args.out, columns, records, "bounds", seed, h)
    print(f"wrote {args.out} ({len(records)} rows)")

    spec = norm or MixedNormSpec.p_norm(2.0)
    replay = replay_witness(fam, est.best_witness, spec)
    wpath = _stem(args.out) + "_witness.json"
    _dump_witnesses(wpath, {
        "family": est.family_label, "kind": est.kind, "seed": seed,
        "config_sha256": h, "lower_bound": est.lower_bound,
        "replayed": replay, "norm": est.norm,
        "witness": est.best_witness.to_json_dict(),
    })
    print(f"wrote {wpath}")
    if not args.no_figures:
        fpath = _stem(args.out) + ".png"
        figures.render_bounds_figure(records, fpath)
        print(f"wrote {fpath}")
    if abs(replay - est.lower_bound) > 1e-12 * max(1.0, est.lower_bound):
        print(f"FAIL bounds/{est.family_label}: witness replays to "
              f"{replay}, bound was {est.lower_bound}", file=sys.stderr)
        raise NumericalFailure("witness replay mismatch")
    return 0


# ---------------------------------------------------------------------------
# mellin


def cmd_mellin(args):
    seed = args.seed or 0
    parts = (args.suite,) if args.suite else suites.MELLIN_PARTS
    h = config_hash({"mellin": list(parts), "seed": seed})
    rows = suites.mellin_suite(seed=seed, parts=parts)
    write_rows_csv(args.out, rows, "mellin:" + "+".join(parts), seed, h)
    print(f"wrote {args.out} ({len(rows)} rows)")
    if not args.no_figures:
        fpath = _stem(args.out) + ".png"
        figures.render_rows_figure(rows, fpath,
                                   f"mellin {'+'.join(parts)}, seed {seed}")
        print(f"wrote {fpath}")
    _fail_rows(rows)
    return 0


# ---------------------------------------------------------------------------
# maxreg


def cmd_maxreg(args):
    cfg = _load_json(args.config) if args.config \
        else {"n": 8, "m": 16, "dt": 0.5}
    try:
        prob = parabolic_from_config(cfg)
    except IncompatibleSpec as exc:
        raise ConfigError(str(exc)) from exc
    seed = int(cfg.get("seed", args.seed or 0))
    refinement = tuple(int(k) for k in cfg.get("refinement", (1, 2, 4)))
    h = config_hash({"parabolic": cfg, "seed": seed})
    columns, records = suites.maxreg_table(
        prob, trials=int(cfg.get("trials", 16)), seed=seed,
        refinement=refinement)
    write_table_csv(args.out, columns, records, "maxreg", seed, h)
    print(f"wrote {args.out} ({len(records)} rows)")
    if not args.no_figures:
        fpath = _stem(args.out) + ".png"
        figures.render_maxreg_figure(records, fpath)
        print(f"wrote {fpath}")
    cs = [r["C_p"] for r in records]
    if not all(np.isfinite(cs)):
        raise NumericalFailure("non-finite maximal regularity constant")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(sub, config_flag=True):
    if config_flag:
        sub.add_argument("--config", help="JSON configuration path")
    sub.add_argument("--seed", type=int, default=None,
                     help="base seed for every random draw (default 0)")
    sub.add_argument("--no-figures", action="store_true",
                     help="skip the PNG companion of the CSV output")


def build_parser():
    p = argparse.ArgumentParser(
        prog="sectorsum",
        description="numerical experiments on sums of sectorial operators")
    sub = p.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="execute named suites into one CSV")
    _add_common(runp)
    runp.add_argument("--suite", action="append",
                      choices=list(suites.SUITE_NAMES) + ["all"],
                      help="suite name; repeatable; default all")
    runp.add_argument("--out", default=None,
                      help="output CSV path (default results.csv)")
    runp.add_argument("--tol-scale", type=float, default=None,
                      help="multiply every row tolerance by this factor")
    runp.set_defaults(func=cmd_run)

    op = sub.add_parser("opsum", help="inverse-of-a-sum table")
    _add_common(op)
    op.add_argument("--out", default="results.csv")
    op.set_defaults(func=cmd_opsum)

    lp = sub.add_parser("lpnorm", help="square-function norm table")
    _add_common(lp)
    lp.add_argument("--out", default="norms.csv")
    lp.set_defaults(func=cmd_lpnorm)

    bp = sub.add_parser("bounds", help="randomized boundedness estimate")
    bp.add_argument("--family", required=True,
                    help="JSON family configuration path")
    bp.add_argument("--kind", required=True, choices=("r", "gamma", "lq"))
    bp.add_argument("--out", default="bounds.csv")
    bp.add_argument("--seed", type=int, default=None)
    bp.add_argument("--no-figures", action="store_true")
    bp.set_defaults(func=cmd_bounds)

    mp = sub.add_parser("mellin", help="Gamma/Mellin identity report")
    mp.add_argument("--suite", choices=suites.MELLIN_PARTS, default=None,
                    help="single part; default runs every part")
    mp.add_argument("--out", default="report.csv")
    mp.add_argument("--seed", type=int, default=None)
    mp.add_argument("--no-figures", action="store_true")
    mp.set_defaults(func=cmd_mellin)

    mx = sub.add_parser("maxreg", help="maximal regularity constants")
    _add_common(mx)
    mx.add_argument("--out", default="maxreg.csv")
    mx.set_defaults(func=cmd_maxreg)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is not None and not \
            0 <= args.seed < 2 ** 64:
        parser.error("--seed must fit in an unsigned 64-bit integer")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except SectorsumError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: block spectra, verification suites, decay exponents and sweeps."""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys

import numpy as np

from . import catalog, dgroup, heat, nilpotent as nl
from . import heisenberg as hz

TOL = 1e-10


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x: float) -> str:
    return "%.17g" % x


def _clean(obj):
    """Make numpy scalars, tuples and non-finite floats JSON friendly."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def emit(text: str, path: str | None):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# spectrum

def spectrum_rows(n: int, p: int, k: float, gamma_max: int, floor: str = "standard"):
    spectra = catalog.numeric_spectra(n, p, k, gamma_max)
    report = catalog.match_spectrum(spectra, n, p, k, gamma_max=gamma_max, floor=floor)
    lookup = {}
    for gamma, v, src in report.matches:
        lookup.setdefault((gamma, round(v, 9)), src)
    rows = []
    for res in spectra:
        for v in res.values:
            src = lookup.get((res.gamma, round(float(v), 9)))
            rows.append({
                "gamma": list(res.gamma),
                "eigenvalue": float(v),
                "residual": float(res.residual),
                "catalog_family": None if src is None else src.family,
                "catalog_g": None if src is None else src.g,
                "catalog_r": None if src is None else src.r,
            })
    return rows, report


def spectrum_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["gamma", "eigenvalue", "residual", "catalog_family", "catalog_g", "catalog_r"])
    for r in rows:
        w.writerow([";".join(str(g) for g in r["gamma"]), _fmt(r["eigenvalue"]), _fmt(r["residual"]),
                    "" if r["catalog_family"] is None else r["catalog_family"],
                    "" if r["catalog_g"] is None else r["catalog_g"],
                    "" if r["catalog_r"] is None else r["catalog_r"]])
    return buf.getvalue()


def coverage_summary(report) -> dict:
    return {"n": report.n, "p": report.p, "k": report.k, "ok": report.ok,
            "numeric_orphans": [[list(g), v] for g, v in report.numeric_orphans],
            "catalog_orphans": [c[0] for c in report.catalog_orphans]}


def cmd_spectrum(args) -> int:
    _check_heisenberg(args.n, args.p, args.k)
    if args.gamma_max < 0:
        raise ValueError("--gamma-max must be non-negative")
    rows, report = spectrum_rows(args.n, args.p, args.k, args.gamma_max, args.floor)
    if args.format == "csv":
        emit(spectrum_csv(rows), args.output)
        cov = coverage_summary(report)
        sys.stderr.write("coverage: ok=%s numeric_orphans=%d catalog_orphans=%d\n"
                         % (cov["ok"], len(cov["numeric_orphans"]), len(cov["catalog_orphans"])))
    else:
        emit(dump_json({"rows": rows, "coverage": coverage_summary(report)}), args.output)
    return 0


# verification suites

def _check_heisenberg(n, p, k):
    if n is None or n < 1:
        raise ValueError("--n must be a positive integer")
    if p is not None and not 0 <= p <= 2 * n + 1:
        raise ValueError(f"--p must lie in 0..{2 * n + 1}")
    if k is not None and not k > 0:
        raise ValueError("--k must be positive")


def _degrees(args):
    return range(2 * args.n + 2) if args.p is None else [args.p]


def suite_commutators(args) -> dict:
    worst = 0.0
    for p in _degrees(args):
        ctx = hz.Context(args.n, p, args.k)
        for g in hz.enumerate_gammas(args.n, p, args.gamma_max):
            for i in range(1, args.n + 1):
                for j in range(1, args.n + 1):
                    worst = max(worst, hz.commutator_norm(ctx, "U", i, j, g))
                    if i < j:
                        worst = max(worst, hz.commutator_norm(ctx, "chi", i, j, g))
    rel = hz.chi_relations_check(args.n, args.gamma_max)
    ok = worst < TOL and max(rel.values()) < 1e-12
    return {"ok": ok, "max_commutator": worst, "chi_relations": rel}


def suite_appendix(args) -> dict:
    worst = 0.0
    for p in _degrees(args):
        for g in hz.enumerate_gammas(args.n, p, args.gamma_max):
            a = hz.parts_at(hz.block_parts(args.n, p, g, "composed"), args.k)
            b = hz.parts_at(hz.block_parts(args.n, p, g, "explicit"), args.k)
            worst = max(worst, float(np.abs(a - b).max()))
    return {"ok": worst < TOL, "max_entry_difference": worst}


def suite_kernel(args) -> dict:
    if args.n < 2:
        raise ValueError("the kernel suite needs --n >= 2")
    smallest = math.inf
    checked = 0
    for p in _degrees(args):
        ctx = hz.Context(args.n, p, args.k)
        for g in hz.enumerate_gammas(args.n, p, args.gamma_max):
            if g[1] >= 2:
                smallest = min(smallest, hz.kernel_lemma_check(ctx, g))
                checked += 1
    return {"ok": checked > 0 and smallest > 1e-8, "blocks": checked, "min_singular_value": smallest}


def suite_hodge(args) -> dict:
    degrees = range(args.n + 1) if args.p is None else [min(args.p, 2 * args.n + 1 - args.p)]
    results = [hz.hodge_pair_check(args.n, p, args.k, max(args.gamma_max, 8)) for p in degrees]
    return {"ok": all(r["ok"] for r in results), "pairs": results}


def suite_htype(args) -> dict:
    out = {}
    for name, alg in (("heisenberg", nl.heisenberg_algebra(args.n)), ("dgroup", nl.dgroup_algebra(args.n)),
                      ("degenerate", nl.degenerate_algebra())):
        flag, dev = nl.is_htype(alg)
        out[name] = {"htype": flag, "deviation": dev}
    pf_h = abs(nl.pfaffian(nl.heisenberg_algebra(args.n), [args.k]))
    lam = np.array([0.6, 0.8]) * args.k
    pf_d = abs(nl.pfaffian(nl.dgroup_algebra(args.n), lam))
    out["pfaffian_heisenberg"] = {"value": pf_h, "expected": args.k ** args.n}
    out["pfaffian_dgroup"] = {"value": pf_d, "expected": args.k ** (2 * args.n)}
    ok = (out["heisenberg"]["htype"] and out["dgroup"]["htype"] and not out["degenerate"]["htype"]
          and abs(pf_h - args.k ** args.n) < TOL * max(1, args.k ** args.n)
          and abs(pf_d - args.k ** (2 * args.n)) < TOL * max(1, args.k ** (2 * args.n)))
    out["ok"] = bool(ok)
    return out


def dgroup_report(n: int, lam, seed: int = 0, weights: str = "shifted") -> dict:
    ctx = dgroup.DContext(n, lam)
    rng = np.random.default_rng(seed)
    out = {"n": n, "lambda": list(ctx.lam), "r": ctx.r, "frame_deviation": dgroup.frame_deviation(ctx)}
    if n >= 2:
        beta = tuple(int(b) for b in rng.integers(1, 5, 2 * n))
        fam = dgroup.family_eigencheck(ctx, beta, weights)
        out["families"] = {"beta": beta, "weights": weights,
                           "max_residual": max(f.residual for f in fam),
                           "rows": [[f.family, f.j, f.target, f.residual] for f in fam]}
    else:
        beta = (1, 0)
    blocks = {}
    for which in ("first", "second"):
        rep = dgroup.check_3x3(ctx, beta, which)
        blocks[which] = {"residual": rep.residual, "charpoly_error": rep.charpoly_error,
                         "eigenvalue_error": rep.eigenvalue_error,
                         "printed_mismatch_entries": rep.mismatched_entries}
    out["invariant_blocks"] = blocks
    low = dgroup.lowest_eigenvalue(ctx)
    out["lowest"] = {"value": low.value, "multiplicity": low.multiplicity, "bracket": list(low.bracket),
                     "inside": low.inside, "converged": low.converged}
    names = list(dgroup.COMMUTING) if n >= 2 else ["U11-U22"]
    out["commutators"] = {name: dgroup.commutator_norm(ctx, name, 2) for name in names}
    if n >= 2:
        out["exploratory"] = {name: dgroup.commutator_norm(ctx, name, 2) for name in dgroup.EXPLORATORY}
    return out


def suite_dgroup(args) -> dict:
    weights = "stated" if args.literal else "shifted"
    rep = dgroup_report(args.n, args.lam, args.seed, weights)
    certs = [dgroup.cubic_bounds(b, m, 1.0).certified for b in range(1, 11) for m in range(1, 11)]
    ok = (rep["frame_deviation"] < 1e-12
          and rep.get("families", {"max_residual": 0.0})["max_residual"] < 1e-9
          and rep["invariant_blocks"]["first"]["charpoly_error"] < TOL
          and rep["invariant_blocks"]["second"]["eigenvalue_error"] < 1e-9
          and rep["lowest"]["inside"] and rep["lowest"]["converged"]
          and all(v < TOL for v in rep["commutators"].values())
          and all(certs))
    if args.literal:
        ok = ok and rep["lowest"]["multiplicity"] == 1
    rep["sign_certificates"] = all(certs)
    rep["ok"] = bool(ok)
    return rep


SUITES = {
    "commutators": suite_commutators,
    "appendixA": suite_appendix,
    "kernel": suite_kernel,
    "hodge": suite_hodge,
    "htype": suite_htype,
    "dgroup": suite_dgroup,
}


def cmd_verify(args) -> int:
    if args.suite == "dgroup":
        if args.n < 1:
            raise ValueError("--n must be a positive integer")
    else:
        _check_heisenberg(args.n, args.p, args.k)
    if args.gamma_max < 0:
        raise ValueError("--gamma-max must be non-negative")
    result = SUITES[args.suite](args)
    result["suite"] = args.suite
    emit(dump_json(result), args.output)
    return 0 if result["ok"] else 1


# decay exponents

def cmd_ns(args) -> int:
    if args.n < 1:
        raise ValueError("--n must be a positive integer")
    if not 0 < args.t_min < args.t_max:
        raise ValueError("need 0 < --t-min < --t-max")
    if args.t_count < 10:
        raise ValueError("--t-count must be at least 10")
    t_grid = np.logspace(math.log10(args.t_min), math.log10(args.t_max), args.t_count)
    if args.group == "heisenberg":
        _check_heisenberg(args.n, args.p, None)
        config = heat.HeatTraceConfig(t_grid=t_grid, mode=args.mode, workers=args.workers)
        est, theta = heat.estimate_heisenberg(args.n, args.p, config)
        summary = est.summary(config.to_dict())
        if args.csv:
            emit(heat.trace_csv(t_grid, theta), args.csv)
    else:
        if args.p not in (None, 1):
            raise ValueError("the D group pipeline covers degree 1 only")
        endpoints = ("lower", "upper") if args.endpoint == "both" else (args.endpoint,)
        summary = {}
        for e in endpoints:
            est, theta = heat.estimate_dgroup(args.n, e, t_grid)
            summary[e] = est.summary({"endpoint": e, "t_grid": [float(t) for t in t_grid]})
            if args.csv:
                root, ext = os.path.splitext(args.csv)
                path = args.csv if len(endpoints) == 1 else f"{root}_{e}{ext or '.csv'}"
                emit(heat.trace_csv(t_grid, theta), path)
    emit(dump_json(summary), args.output)
    return 0


def cmd_dgroup(args) -> int:
    if args.n < 1:
        raise ValueError("--n must be a positive integer")
    weights = "stated" if args.literal else "shifted"
    emit(dump_json(dgroup_report(args.n, args.lam, args.seed, weights)), args.output)
    return 0


# sweeps

def cmd_sweep(args) -> int:
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(cfg, dict) or "command" not in cfg:
        raise ValueError("sweep config must be an object with a 'command' key")
    command = cfg["command"]
    if command not in ("spectrum", "verify", "ns", "dgroup"):
        raise ValueError(f"sweep command {command!r} is not supported")
    grid = cfg.get("grid", {})
    base = dict(cfg.get("params", {}))
    keys = sorted(grid)
    results = []
    worst = 0
    for values in itertools.product(*(grid[k] for k in keys)):
        params = {**base, **dict(zip(keys, values))}
        argv = [command]
        for key, val in sorted(params.items()):
            flag = "--" + key.replace("_", "-")
            if isinstance(val, bool):
                if val:
                    argv.append(flag)
            elif isinstance(val, list):
                argv += [flag] + [str(v) for v in val]
            else:
                argv += [flag, str(val)]
        argv += args.override
        parsed = build_parser().parse_args(argv)
        _fill_defaults(parsed)
        parsed.output = None
        buf = io.StringIO()
        old, sys.stdout = sys.stdout, buf
        try:
            if command == "spectrum":
                parsed.format = "json"
            code = parsed.func(parsed)
        finally:
            sys.stdout = old
        worst = max(worst, code)
        results.append({"params": params, "exit": code, "result": json.loads(buf.getvalue())})
    emit(dump_json({"command": command, "runs": results}), args.output)
    return worst


# parser

def build_parser() -> Parser:
    parser = Parser(prog="nilspec", description=__doc__)
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="worker processes for parallel stages")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    sp = sub.add_parser("spectrum", help="block eigenvalues with catalog matching")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=float, default=1.0)
    sp.add_argument("--gamma-max", type=int, default=4)
    sp.add_argument("--floor", choices=sorted(catalog.FLOORS), default="standard")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_spectrum)

    vp = sub.add_parser("verify", help="run a property suite; exit 1 if it fails")
    vp.add_argument("--suite", choices=sorted(SUITES), required=True)
    vp.add_argument("--n", type=int, default=1)
    vp.add_argument("--p", type=int)
    vp.add_argument("--k", type=float, default=1.0)
    vp.add_argument("--gamma-max", type=int, default=4)
    vp.add_argument("--lam", type=float, nargs=2, default=(0.6, 0.8))
    vp.add_argument("--seed", type=int, default=0)
    vp.add_argument("--literal", action="store_true",
                    help="dgroup: check the displayed family weights and a simple lowest eigenvalue")
    vp.add_argument("--output")
    vp.set_defaults(func=cmd_verify)

    np_ = sub.add_parser("ns", help="heat-trace decay exponent")
    np_.add_argument("--group", choices=("heisenberg", "dgroup"), required=True)
    np_.add_argument("--n", type=int, required=True)
    np_.add_argument("--p", type=int)
    np_.add_argument("--mode", choices=heat.MODES, default="lowest_band")
    np_.add_argument("--endpoint", choices=("both",) + heat.ENDPOINTS, default="both")
    np_.add_argument("--t-min", type=float, default=None)
    np_.add_argument("--t-max", type=float, default=None)
    np_.add_argument("--t-count", type=int, default=25)
    np_.add_argument("--csv", help="write the (t, theta, local_slope) table here")
    np_.add_argument("--output")
    np_.set_defaults(func=cmd_ns)

    dp = sub.add_parser("dgroup", help="eigenvalue report for the double Heisenberg group")
    dp.add_argument("--n", type=int, required=True)
    dp.add_argument("--lam", type=float, nargs=2, default=(0.6, 0.8))
    dp.add_argument("--seed", type=int, default=0)
    dp.add_argument("--literal", action="store_true")
    dp.add_argument("--output")
    dp.set_defaults(func=cmd_dgroup)

    wp = sub.add_parser("sweep", help="run a command over a parameter grid from a JSON file")
    wp.add_argument("config")
    wp.add_argument("override", nargs=argparse.REMAINDER,
                    help="flags appended to every run (they take precedence over the file)")
    wp.add_argument("--output")
    wp.set_defaults(func=cmd_sweep)
    return parser


def _fill_defaults(args):
    if getattr(args, "command", None) == "ns":
        if args.p is None and args.group == "heisenberg":
            raise UsageError("--p is required for the heisenberg group")
        lo, hi = (1e3, 1e6) if args.group == "dgroup" else (1e2, 1e5)
        args.t_min = lo if args.t_min is None else args.t_min
        args.t_max = hi if args.t_max is None else args.t_max


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _fill_defaults(args)
        if args.workers < 1:
            raise UsageError("--workers must be positive")
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"nilspec: error: {exc}\n")
        return 2
    except (ValueError, hz.EmptyBlockError) as exc:
        sys.stderr.write(f"nilspec: error: {' '.join(str(exc).split())}\n")
        return 2


def main() -> None:
    sys.exit(run())

"""Command-line front end.

Every run starts with one ``#`` comment line echoing the resolved
configuration, then writes CSV (6 significant digits) or JSON (full
precision).  Exit status: 0 success, 1 numerical/runtime failure, 2 usage
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import accept, factory, optim, quad, sampler, target
from .errors import DomainError


def _g(text):
    try:
        return accept.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _target(text):
    try:
        return target.parse_target(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _count(text):
    try:
        v = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1 or v != float(text):
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _grid_count(text):
    """``a:b:n`` -> (a, b, n)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected a:b:n, got {text!r}")
    a, b = _positive(parts[0]), _positive(parts[1])
    n = _count(parts[2])
    if not a < b or n < 2:
        raise argparse.ArgumentTypeError(f"need a < b and n >= 2 in {text!r}")
    return a, b, n


def _grid_step(text):
    """``a:b:step`` -> increasing array from a to b inclusive."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected a:b:step, got {text!r}")
    a, b, step = (_positive(p) for p in parts)
    if not a < b:
        raise argparse.ArgumentTypeError(f"need a < b in {text!r}")
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    return np.round(a + step * np.arange(n), 12)


def _int_list(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive integers")
    return vals


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


class _Output:
    def __init__(self, fmt):
        self.fmt = fmt
        self.buf = io.StringIO()

    def header(self, verb, config):
        cfg = {k: _jsonable(v) for k, v in sorted(config.items())}
        self.buf.write(f"# scaling-lab {verb} {json.dumps(cfg, sort_keys=True)}\n")

    def rows(self, columns, rows):
        if self.fmt == "json":
            data = [{c: _jsonable(r.get(c)) for c in columns} for r in rows]
            self.buf.write(json.dumps(data, indent=2) + "\n")
        else:
            w = csv.writer(self.buf, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_fmt(r.get(c)) for c in columns])

    def record(self, obj):
        if self.fmt == "json":
            self.buf.write(json.dumps({k: _jsonable(v) for k, v in obj.items()}, indent=2) + "\n")
        else:
            self.rows(list(obj), [obj])

    def comment(self, text):
        if self.fmt == "csv":
            self.buf.write(f"# {text}\n")


CHAIN_COLUMNS = ["d", "l", "accept_rate_indicator", "accept_rate_rao", "lag1", "esjd", "seed"]


def _chain_row(d, l, stats, seed):
    return {
        "d": d,
        "l": l,
        "accept_rate_indicator": stats.accept_rate_indicator,
        "accept_rate_rao": stats.accept_rate_rao,
        "lag1": stats.lag1_autocorr_first_coord,
        "esjd": stats.esjd,
        "seed": seed,
    }


def _theta_grid(spec, log):
    a, b, n = spec
    return np.geomspace(a, b, n) if log else np.linspace(a, b, n)


# --- verbs -----------------------------------------------------------------


def cmd_aoar(args, out):
    g = args.g
    out.header("aoar", {"g": str(g), "I": args.I, "lo": args.lo, "hi": args.hi, "tol": args.tol})
    res = optim.optimize(g, (args.lo, args.hi), args.tol)
    out.record({
        "aoar": res.aoar,
        "l_star_sqrt_I": res.l_star_sqrtI,
        "theta_star": res.theta_star,
        "speed": res.speed_at_opt,
        "l_star": math.sqrt(res.theta_star / args.I),
    })
    return 0


def cmd_table1(args, out):
    gs = args.g or [accept.parse(s) for s in optim.REFERENCE_TABLE_SPECS]
    out.header("table1", {"g": [str(g) for g in gs]})
    rows = optim.table1(gs)
    out.rows(
        ["name", "aoar", "l_star_sqrt_I", "theta_star", "speed"],
        [
            {
                "name": r.name,
                "aoar": r.result.aoar if r.result else None,
                "l_star_sqrt_I": r.result.l_star_sqrtI if r.result else None,
                "theta_star": r.result.theta_star if r.result else None,
                "speed": r.result.speed_at_opt if r.result else None,
            }
            for r in rows
        ],
    )
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"scaling-lab: {r.name}: {r.error}", file=sys.stderr)
    return 1 if failed else 0


def cmd_sweep(args, out):
    thetas = _theta_grid(args.theta_grid, args.log)
    out.header("sweep", {"g": str(args.g), "theta_grid": list(args.theta_grid), "log": args.log})
    rows = []
    for t in thetas:
        m = quad.acceptance_rate(args.g, t)
        rows.append({"theta": t, "l_sqrt_I": math.sqrt(t), "m": m, "speed": t * m})
    out.rows(["theta", "l_sqrt_I", "m", "speed"], rows)
    return 0


def cmd_curves(args, out):
    thetas = _theta_grid(args.theta_grid, not args.linear)
    out.header("curves", {"g1": str(args.g1), "g2": str(args.g2),
                          "theta_grid": list(args.theta_grid), "log": not args.linear})
    pts = optim.efficiency_curves(args.g1, args.g2, thetas)
    out.rows(
        ["theta", "h1", "h2", "m1", "m2", "ratio"],
        [{"theta": p.theta, "h1": p.h1, "h2": p.h2, "m1": p.m1, "m2": p.m2, "ratio": p.ratio} for p in pts],
    )
    return 0


def cmd_simulate(args, out):
    cfg = sampler.ChainConfig(d=args.d, l=args.l, g=args.g, target=args.target,
                              n_iters=args.iters, burn_in=args.burn_in, seed=args.seed)
    out.header("simulate", {"g": str(args.g), "target": args.target.name, "d": args.d, "l": args.l,
                            "iters": args.iters, "burn_in": cfg.n_burn, "seed": args.seed})
    stats = sampler.run_chain(cfg)
    out.rows(CHAIN_COLUMNS, [_chain_row(args.d, args.l, stats, args.seed)])
    return 0


def cmd_dims(args, out):
    out.header("dims", {"g": str(args.g), "target": args.target.name, "l": args.l,
                        "dims": args.dims, "iters": args.iters, "seed": args.seed})
    rows = sampler.acceptance_vs_dimension(args.g, args.l, args.target, args.dims, args.iters, args.seed)
    out.rows(CHAIN_COLUMNS, [_chain_row(r.d, args.l, r.stats, r.seed) for r in rows if r.stats])
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"scaling-lab: d={r.d}: {r.error}", file=sys.stderr)
    return 1 if failed else 0


def cmd_finite_d(args, out):
    out.header("finite-d", {"g": str(args.g), "target": args.target.name, "d": args.d,
                            "l_grid": [float(v) for v in args.l_grid], "iters": args.iters,
                            "seed": args.seed})
    res = sampler.finite_d_optimal(args.g, args.target, args.d, args.l_grid, args.iters, args.seed)
    rows = [_chain_row(args.d, l, s, args.seed) for l, s in res.grid]
    if args.format == "json":
        out.record({"l_opt": res.l_opt, "accept_rate_at_opt": res.accept_rate_at_opt,
                    "endpoint": res.endpoint})
        out.rows(CHAIN_COLUMNS, rows)
    else:
        out.rows(CHAIN_COLUMNS, rows)
        out.comment(f"l_opt={res.l_opt:.6g} accept_rate_at_opt={res.accept_rate_at_opt:.6g} "
                    f"endpoint={str(res.endpoint).lower()}")
    if res.endpoint:
        print("scaling-lab: warning: lag-1 minimiser is a grid endpoint", file=sys.stderr)
    return 0


_FACTORY_OPS = {
    "two-coin": lambda r: factory.two_coin,
    "die-coin-r2": lambda r: factory.die_coin_r2,
    "general": lambda r: (lambda *a, **k: factory.die_coin_general(r, *a, **k)),
}


def _factory_op(name, r):
    if name == "auto":
        name = {1: "two-coin", 2: "die-coin-r2"}.get(r, "general")
    if name == "two-coin" and r != 1 or name == "die-coin-r2" and r != 2:
        raise DomainError(f"--op {name} does not match --r {r}")
    return name, _FACTORY_OPS[name](r)


def cmd_factory(args, out):
    if args.chain:
        if args.envelope is None:
            fd = factory.normal_factored()
        else:
            fd = factory.normal_envelope_factored(args.envelope)
        out.header("factory", {"chain": True, "r": args.r, "l": args.l, "iters": args.iters,
                               "target": "normal", "envelope": args.envelope, "seed": args.seed})
        res = factory.factory_chain(fd, args.r, args.l, args.iters, seed=args.seed)
        row = _chain_row(1, args.l, res.stats, args.seed)
        row["mean_rounds"] = res.mean_rounds
        out.rows(CHAIN_COLUMNS + ["mean_rounds"], [row])
        return 0
    name, op = _factory_op(args.op, args.r)
    out.header("factory", {"r": args.r, "op": name, "trials": args.trials, "cells": args.cells,
                           "seed": args.seed})
    rng = sampler.make_rng(args.seed)
    rows = []
    for cx, cy, px, py in factory.random_cells(rng, args.cells, r_max=max(args.r, 1)):
        fd = factory.fixed_coin((cx, cy), (px, py))
        st = factory.estimate(op, fd, 0.0, 1.0, args.trials, rng)
        rows.append({"r": args.r, "cx": cx, "cy": cy, "px": px, "py": py,
                     "alpha_exact": factory.alpha_exact(args.r, cx, cy, px, py),
                     "alpha_hat": st.alpha_hat, "se": st.se, "rounds_mean": st.rounds_mean})
    out.rows(["r", "cx", "cy", "px", "py", "alpha_exact", "alpha_hat", "se", "rounds_mean"], rows)
    return 0


def cmd_odd_check(args, out):
    g, theta = args.g, args.theta
    out.header("odd-check", {"g": str(g), "theta": theta})
    zs = np.geomspace(1e-6, 1e6, 121)
    bal = accept.check_balance(g, zs, args.tol)
    out.record({
        "g": str(g),
        "theta": theta,
        "odd_moment": quad.odd_moment(g, theta),
        "balance_violation": bal.max_violation,
        "balance_pass": bal.passed,
        "lipschitz_lower_bound": accept.lipschitz_estimate(g, np.linspace(-10, 10, 20001)),
    })
    return 0


def cmd_moment_check(args, out):
    t = args.target
    out.header("moment-check", {"target": t.name})
    rep = target.moment_check(t)
    out.record({
        "target": t.name,
        "I": target.roughness_I(t),
        "score_8th": rep.score_8th,
        "curvature_4th": rep.curvature_4th,
        "score_8th_finite": rep.score_8th_finite,
        "curvature_4th_finite": rep.curvature_4th_finite,
    })
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scaling-lab", description="Optimal scaling for random-walk MCMC.")
    sub = p.add_subparsers(dest="verb", required=True)

    def verb(name, fn, fmt="csv", seeded=False, help=None):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(fn=fn)
        sp.add_argument("--format", choices=["csv", "json"], default=fmt)
        sp.add_argument("--out", help="write output here instead of stdout")
        if seeded:
            sp.add_argument("--seed", type=_seed, default=None,
                            help=f"RNG seed (default ${sampler.SEED_ENV} or 0)")
        return sp

    sp = verb("aoar", cmd_aoar, fmt="json", help="optimal scaling and AOAR of one rule")
    sp.add_argument("--g", type=_g, required=True)
    sp.add_argument("--I", type=_positive, default=1.0)
    sp.add_argument("--lo", type=_positive, default=optim.DEFAULT_BRACKET[0])
    sp.add_argument("--hi", type=_positive, default=optim.DEFAULT_BRACKET[1])
    sp.add_argument("--tol", type=_positive, default=optim.DEFAULT_TOL)

    sp = verb("table1", cmd_table1, help="optimal scaling table over several rules")
    sp.add_argument("--g", type=_g, action="append", help="repeatable; default is the standard eight-rule set")

    sp = verb("sweep", cmd_sweep, help="acceptance rate and speed over a theta grid")
    sp.add_argument("--g", type=_g, required=True)
    sp.add_argument("--theta-grid", type=_grid_count, default=(0.01, 100.0, 100))
    sp.add_argument("--log", action="store_true", help="geometric instead of linear spacing")

    sp = verb("curves", cmd_curves, help="efficiency curves of two rules")
    sp.add_argument("--g1", type=_g, required=True)
    sp.add_argument("--g2", type=_g, required=True)
    sp.add_argument("--theta-grid", type=_grid_count, default=(0.01, 100.0, 200))
    sp.add_argument("--linear", action="store_true", help="linear instead of geometric spacing")

    sp = verb("simulate", cmd_simulate, seeded=True, help="run one random-walk chain")
    sp.add_argument("--g", type=_g, required=True)
    sp.add_argument("--d", type=_count, required=True)
    sp.add_argument("--l", type=_positive, required=True)
    sp.add_argument("--iters", type=_count, default=100_000)
    sp.add_argument("--burn-in", type=int, default=None)
    sp.add_argument("--target", type=_target, default=target.normal())

    sp = verb("dims", cmd_dims, seeded=True, help="empirical acceptance against dimension")
    sp.add_argument("--g", type=_g, required=True)
    sp.add_argument("--l", type=_positive, required=True)
    sp.add_argument("--dims", type=_int_list, default=[5, 10, 30, 100])
    sp.add_argument("--iters", type=_count, default=200_000)
    sp.add_argument("--target", type=_target, default=target.normal())

    sp = verb("finite-d", cmd_finite_d, seeded=True, help="lag-1 autocorrelation tuning at fixed d")
    sp.add_argument("--g", type=_g, required=True)
    sp.add_argument("--d", type=_count, required=True)
    sp.add_argument("--l-grid", type=_grid_step, default=_grid_step("0.5:6:0.1"))
    sp.add_argument("--iters", type=_count, default=200_000)
    sp.add_argument("--target", type=_target, default=target.normal())

    sp = verb("factory", cmd_factory, seeded=True, help="Bernoulli factory checks")
    sp.add_argument("--r", type=_count, required=True)
    sp.add_argument("--trials", type=_count, default=100_000)
    sp.add_argument("--cells", type=_count, default=20)
    sp.add_argument("--op", choices=["auto", *_FACTORY_OPS], default="auto")
    sp.add_argument("--chain", action="store_true", help="run a factory-driven chain on N(0,1)")
    sp.add_argument("--l", type=_positive, default=2.46)
    sp.add_argument("--iters", type=_count, default=100_000)
    sp.add_argument("--envelope", type=_positive, default=None, metavar="KAPPA",
                    help="move the normal tail beyond |x|=KAPPA into c (bounded coins)")

    sp = verb("odd-check", cmd_odd_check, fmt="json", help="class-membership checks for a rule")
    sp.add_argument("--g", type=_g, required=True)
    sp.add_argument("--theta", type=_positive, default=1.0)
    sp.add_argument("--tol", type=_positive, default=1e-12)

    sp = verb("moment-check", cmd_moment_check, fmt="json", help="roughness and moment conditions")
    sp.add_argument("--target", type=_target, required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if hasattr(args, "seed") and args.seed is None:
        try:
            args.seed = _seed(str(sampler.default_seed()))
        except (ValueError, argparse.ArgumentTypeError):
            print(f"scaling-lab: error: ${sampler.SEED_ENV} is not a valid seed", file=sys.stderr)
            return 2
    out = _Output(args.format)
    try:
        code = args.fn(args, out)
    except DomainError as exc:
        print(f"scaling-lab: error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"scaling-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = out.buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

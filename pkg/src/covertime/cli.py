"""Command-line driver: ``covertime {compare,budget,stats,oracle,stopping}``.

Every subcommand writes CSV (and, where it makes sense, an SVG figure) into
``--out`` and echoes the main CSV on stdout.  Options can also come from a
``--config`` file of ``key=value`` lines; flags given on the command line win.

Exit codes: 0 success, 2 bad input, 3 statistical failure or truncation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import plotting
from .budget import BUDGET_HEADER, empirical_vs_closed_form, probe_graph
from .estimator import (CURVE_HEADER, PCT_ORACLE_LIMIT, EstimatorError, TruncationError,
                        check_bounds, estimate_curve, hitting_times, oracle_pct, sample_starts)
from .graph import STATS_HEADER, GraphError, degree_histogram, generate, load_edge_list, stats
from .stopping import RewardModel, StoppingError, optimal_cutoff, reward_table
from .strategies import StrategySpec

log = logging.getLogger("covertime")

EXIT_OK, EXIT_INPUT, EXIT_STAT = 0, 2, 3


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def read_config(path) -> dict:
    """``key=value`` lines; ``#`` comments; keys use the long flag names."""
    cfg = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key=value")
            key, val = line.split("=", 1)
            cfg[key.strip().lstrip("-").replace("-", "_")] = val.strip()
    return cfg


def tau_grid(tau_min: float, tau_max: float, tau_step: float) -> list[float]:
    if not (0 < tau_min <= tau_max <= 1) or tau_step <= 0:
        raise InputError("need 0 < tau-min <= tau-max <= 1 and tau-step > 0")
    k = int(math.floor((tau_max - tau_min) / tau_step + 1e-9)) + 1
    return [round(tau_min + i * tau_step, 10) for i in range(k)]


def resolve_seed(seed):
    if seed is not None:
        return int(seed)
    env = os.environ.get("COVERTIME_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"COVERTIME_SEED={env!r} is not an integer") from None
    return 0


def load_graph(args):
    if bool(args.graph) == bool(args.gen):
        raise InputError("give exactly one of --graph FILE or --gen SPEC")
    try:
        if args.graph:
            return load_edge_list(args.graph, format=args.format)
        return generate(args.gen)
    except OSError as exc:
        raise InputError(f"cannot read graph: {exc}") from None
    except GraphError as exc:
        raise InputError(f"bad graph: {exc}") from None


def parse_strategies(text, budget, rwc_d):
    try:
        return [StrategySpec.parse(s, budget, rwc_d) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def parse_starts(text, g, seed):
    text = str(text).strip()
    if text == "all":
        return tuple(range(g.n))
    if text.startswith("node="):
        node = int(text[5:])
        if not 0 <= node < g.n:
            raise InputError(f"start node {node} not in graph (n={g.n})")
        return (node,)
    try:
        count = int(text)
    except ValueError:
        raise InputError(f"--starts takes a count, 'all' or node=ID, not {text!r}") from None
    if count < 1:
        raise InputError("--starts must be >= 1")
    return sample_starts(g, count, seed)


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text):
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def write_csv(path, header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header.split(","))
    w.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt(x, spec=".6f"):
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else format(x, spec)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_compare(args) -> int:
    g = load_graph(args)
    seed = resolve_seed(args.seed)
    specs = parse_strategies(args.strategies, args.budget, args.rwc_d)
    taus = tau_grid(args.tau_min, args.tau_max, args.tau_step)
    starts = parse_starts(args.starts, g, seed)
    out = _out(args)
    curves, rows, max_rows = [], [], []
    status = EXIT_OK
    for spec in specs:
        try:
            c = estimate_curve(g, spec, starts, taus, args.trials, seed, threads=args.threads)
        except TruncationError as exc:
            log.error("%s", exc)
            status = EXIT_STAT
            continue
        curves.append(c)
        log.info("%-10s n=%d trials=%d truncated=%d C(%g)=%.4f", spec, g.n, c.trials, c.truncated,
                 taus[-1], c.c_tau[-1])
        for i, t in enumerate(c.taus):
            rows.append([str(spec), f"{t:.6g}", _fmt(c.rho[i]), _fmt(c.c_tau[i], ".8f"),
                         _fmt(c.stddev[i]), c.trials, c.n, c.m, c.truncated])
            max_rows.append([str(spec), f"{t:.6g}", _fmt(c.rho_max[i]), len(c.starts)])
    text = write_csv(out / "curves.csv", CURVE_HEADER, rows)
    write_csv(out / "pct_max.csv", "strategy,tau,pct_max,starts", max_rows)
    if curves:
        plotting.plot_curves(curves, out / "compare.svg", title=g.name)
    sys.stdout.write(text)
    return status


def cmd_budget(args) -> int:
    g = load_graph(args)
    seed = resolve_seed(args.seed)
    budgets = _ints(args.budgets)
    if not budgets or min(budgets) < 1:
        raise InputError("--budgets must list integers >= 1")
    out = _out(args)
    probe = probe_graph(g, budgets, walks=args.walks, seed=seed, tau=args.tau)
    rows = [[probe.graph, B, _fmt(p), k] for B, p, k in zip(probe.budgets, probe.p, probe.decision_points)]
    text = write_csv(out / "budget.csv", BUDGET_HEADER, rows)
    plotting.plot_budget([probe], out / "budget.svg")
    sys.stdout.write(text)
    status = EXIT_OK
    if args.write_baseline:
        Path(args.write_baseline).write_text(json.dumps(
            {"graph": probe.graph, "seed": seed, "p": dict(zip(map(str, probe.budgets), probe.p))}, indent=1))
    if args.baseline:
        base = json.loads(Path(args.baseline).read_text())["p"]
        for B, p in zip(probe.budgets, probe.p):
            ref = base.get(str(B))
            if ref is not None and abs(p - ref) > args.baseline_tol:
                log.error("budget B=%d: p=%.4f differs from baseline %.4f by more than %g",
                          B, p, ref, args.baseline_tol)
                status = EXIT_STAT
    if args.strata:
        gap, strata = empirical_vs_closed_form(g, budgets[0], walks=args.walks, seed=seed, tau=args.tau)
        srows = [[s.l_size, s.multiplicity, s.samples, _fmt(s.empirical), _fmt(s.closed_form), _fmt(s.gap)]
                 for s in strata]
        write_csv(out / "strata.csv", "l_size,multiplicity,samples,empirical,closed_form,gap", srows)
        log.info("B=%d: largest stratum gap %.4f over %d strata", budgets[0], gap, len(strata))
    return status


def cmd_stats(args) -> int:
    g = load_graph(args)
    out = _out(args)
    exact = args.exact_diameter if args.exact_diameter is not None else g.n <= 10_000
    st = stats(g, exact_diameter=exact)
    text = write_csv(out / "stats.csv", STATS_HEADER,
                     [[st.n, st.m, f"{st.clustering:.6f}", st.diameter, str(st.diameter_exact).lower()]])
    hist = degree_histogram(g)
    write_csv(out / "degree_histogram.csv", "degree,count", hist)
    plotting.plot_degree_histogram(hist, out / "degrees.svg", label=g.name)
    if g.info.get("dropped_nodes"):
        log.warning("largest component kept: %d nodes and %d edges dropped",
                    g.info["dropped_nodes"], g.info["dropped_edges"])
    sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle(args) -> int:
    g = load_graph(args)
    if g.n > args.limit:
        raise InputError(f"graph has n={g.n} nodes; the exact oracle is limited to n <= {args.limit}")
    seed = resolve_seed(args.seed)
    specs = parse_strategies(args.strategies, args.budget, args.rwc_d)
    for s in specs:
        if not s.memoryless:
            raise InputError(f"{s}: history-dependent walk has no node-level chain")
    taus = sorted(set(_floats(args.tau)))
    starts = parse_starts(args.starts, g, seed)
    out = _out(args)
    rows = []
    status = EXIT_OK
    for spec in specs:
        for st in starts:
            c = estimate_curve(g, spec, st, taus, args.trials, seed, threads=args.threads)
            for i, t in enumerate(c.taus):
                exact = oracle_pct(g, spec, st, t, limit=args.limit)
                se = c.stderr(i)
                diff = c.rho[i] - exact
                if se > 0:
                    z = diff / se
                    ok = abs(z) <= 3
                else:
                    z = 0.0 if abs(diff) <= 1e-9 else math.inf
                    ok = abs(diff) <= 1e-9
                if not ok:
                    status = EXIT_STAT
                rows.append([str(spec), st, f"{t:.6g}", f"{exact:.9f}", _fmt(c.rho[i]), _fmt(se),
                             f"{z:.3f}", "ok" if ok else "MISMATCH"])
        H = max(hitting_times(g, spec, j).max() for j in range(g.n))
        bounds = check_bounds(g, max(oracle_pct(g, spec, st, 1.0, limit=args.limit) for st in range(g.n)))
        log.info("%s: max hitting time %.6f, max cover time %.6f (2mn=%g, status %s)",
                 spec, H, bounds.estimate, bounds.upper, bounds.status)
    text = write_csv(out / "oracle.csv", "strategy,start,tau,exact,mc_mean,mc_stderr,z,status", rows)
    sys.stdout.write(text)
    return status


def cmd_stopping(args) -> int:
    try:
        if args.weight == "constant":
            model = RewardModel.constant(args.n, args.c)
        else:
            if args.theta is None:
                raise InputError("--weight exp needs --theta")
            model = RewardModel.exponential(args.n, args.theta)
    except StoppingError as exc:
        raise InputError(str(exc)) from None
    out = _out(args)
    table = reward_table(model)
    cut = optimal_cutoff(model)
    text = write_csv(out / "stopping.csv", "r,expected_reward", [[r, f"{v:.12g}"] for r, v in table])
    summary = [[model.weight, model.N, cut.r, f"{cut.reward:.12g}",
                "" if cut.newton_r is None else f"{cut.newton_r:.6f}",
                "" if cut.newton_converged is None else str(cut.newton_converged).lower()]]
    write_csv(out / "stopping_summary.csv", "weight,N,r_star,expected_reward,newton_r,newton_converged", summary)
    plotting.plot_reward(table, out / "stopping.svg", r_star=cut.r)
    log.info("r*=%d E(R)=%.6g%s", cut.r, cut.reward,
             "" if cut.newton_r is None else f" newton r={cut.newton_r:.4f} (converged={cut.newton_converged})")
    sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags override it")
    common.add_argument("--graph", help="edge-list file")
    common.add_argument("--format", default="whitespace", choices=["whitespace", "csv"])
    common.add_argument("--gen", help="generator spec, e.g. ba:n=5000,k=2,seed=1 or complete(8)")
    common.add_argument("--seed", type=int, default=None, help="master seed (fallback: $COVERTIME_SEED, then 0)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default="results")
    common.add_argument("--budget", type=int, default=5)
    common.add_argument("--rwc-d", type=int, default=3)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="covertime", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compare", parents=[common], help="C(tau) curves for several strategies")
    c.add_argument("--strategies", default="srw,ep,ad,rwc,md")
    c.add_argument("--tau-min", type=float, default=0.01)
    c.add_argument("--tau-max", type=float, default=0.30)
    c.add_argument("--tau-step", type=float, default=0.01)
    c.add_argument("--trials", type=int, default=10)
    c.add_argument("--starts", default="32", help="count of sampled starts, 'all', or node=ID")
    c.set_defaults(func=cmd_compare)

    b = sub.add_parser("budget", parents=[common], help="probability p against budget B")
    b.add_argument("--budgets", default="1-20", help="e.g. 1-20 or 1,2,5,10")
    b.add_argument("--walks", type=int, default=20)
    b.add_argument("--tau", type=float, default=0.3, help="coverage at which each probe walk stops")
    b.add_argument("--baseline", help="JSON baseline to compare p against")
    b.add_argument("--baseline-tol", type=float, default=0.02)
    b.add_argument("--write-baseline", help="store this run's p values as a JSON baseline")
    b.add_argument("--strata", action="store_true", help="also compare strata with the closed form (first B)")
    b.set_defaults(func=cmd_budget)

    s = sub.add_parser("stats", parents=[common], help="n, m, clustering, diameter, degree histogram")
    s.add_argument("--exact-diameter", action=argparse.BooleanOptionalAction, default=None)
    s.set_defaults(func=cmd_stats)

    o = sub.add_parser("oracle", parents=[common], help="exact values against Monte-Carlo")
    o.add_argument("--strategies", default="srw,ad,mdw")
    o.add_argument("--tau", default="0.5,1.0")
    o.add_argument("--trials", type=int, default=10_000)
    o.add_argument("--starts", default="all")
    o.add_argument("--limit", type=int, default=PCT_ORACLE_LIMIT)
    o.set_defaults(func=cmd_oracle)

    st = sub.add_parser("stopping", parents=[common], help="expected reward of the stopping rule")
    st.add_argument("--weight", choices=["constant", "exp"], default="constant")
    st.add_argument("--theta", type=float)
    st.add_argument("--c", type=float, default=1.0)
    st.add_argument("--n", type=int, required=True)
    st.set_defaults(func=cmd_stopping)
    return p, sub.choices


def parse_args(argv=None):
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        known = {a.dest for a in subs[args.command]._actions}
        unknown = set(cfg) - known
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for a in subs[args.command]._actions:
            if a.dest in cfg and a.nargs == 0:
                cfg[a.dest] = cfg[a.dest].lower() in ("1", "true", "yes", "on")
        subs[args.command].set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except (InputError, OSError) as exc:
        print(f"covertime: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"covertime: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EstimatorError as exc:
        print(f"covertime: {exc}", file=sys.stderr)
        return EXIT_STAT


if __name__ == "__main__":
    sys.exit(main())

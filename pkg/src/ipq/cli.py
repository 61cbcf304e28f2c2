"""Command-line driver.

Subcommands::

    ipq gen random|planted|graph-family ...   write instance files
    ipq estimate  --matrix F --epsilon E      estimate xᵀAy (or Q for --graph)
    ipq sample    --matrix F --epsilon E --samples N
    ipq regr-test --matrix F --row I --samples N
    ipq verify    --matrix F                  brute-force totals

Every run prints one JSON report (also written to ``--json-out``).  Reports are deterministic for a fixed seed apart from
``wall_time_ms``.  ``--assert`` turns the command's checks into the exit
code: 0 only if all of them held.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .bfe import bfe
from .config import Constants
from .errors import AllZeroMatrix, ExhaustedFail, IPQError, ZeroMass
from .general import bfe_general, prepare_sau_general, sau_general_many
from .instances import (
    gen_graph_family,
    gen_planted,
    gen_random,
    gen_random_symmetric,
    graph_to_quadratic,
    read_graph,
    write_graph,
)
from .matrix import Matrix, WeightVector, exact_bilinear, read_matrix, read_weights, write_matrix, write_weights
from .oracle import QueryCounter, preprocess
from .randomness import RandomSource
from .regr import query_budget, regr_tally
from .sau import prepare_sau, sau_many
from .stats import chi_square, exact_entry_law, tv_distance

SCHEMA_VERSION = 1
VERIFY_LIMIT = 8192
EXACT_LAW_LIMIT = 512
# Documented pass bounds used by --assert.
TV_BOUND = 0.02
INTERVAL_FRACTION = 0.9


class UsageError(Exception):
    pass


def trial_source(seed: int, trial: int) -> RandomSource:
    """Independent stream for one trial, derived from the run seed and trial index."""
    return RandomSource(np.random.SeedSequence([seed, trial]))


def _fraction_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from exc


def _load_problem(args):
    """Returns (matrix, x, y, scale) where the target is ``xᵀAy / scale``."""
    if args.graph:
        if args.matrix:
            raise UsageError("give either --matrix or --graph")
        f = read_weights(args.weights) if args.weights else None
        g = read_graph(args.graph, f)
        A, w, _ = graph_to_quadratic(g)
        return A, w, w, 2
    if not args.matrix:
        raise UsageError("--matrix or --graph is required")
    A = read_matrix(args.matrix)
    x = read_weights(args.x) if getattr(args, "x", None) else None
    y = read_weights(args.y) if getattr(args, "y", None) else None
    return A, x, y, 1


def _general(A: Matrix, x, y) -> bool:
    return x is not None or y is not None or not A.is_symmetric()


def _queries(q: QueryCounter) -> dict:
    return q.as_dict()


def _check_verify(A: Matrix, args) -> None:
    if args.verify and A.n > VERIFY_LIMIT:
        raise UsageError(f"--verify is limited to n <= {VERIFY_LIMIT}")


# -- gen


def cmd_gen(args) -> dict:
    if args.kind == "random":
        make = gen_random if args.asymmetric else gen_random_symmetric
        A = make(args.n, args.rho, args.p, args.seed)
        write_matrix(A, args.output, args.format)
        return {"written": [args.output], "total": exact_bilinear(A)}
    if args.kind == "planted":
        A = gen_planted(args.n, args.rho, args.m, args.seed)
        write_matrix(A, args.output, args.format)
        return {"written": [args.output], "total": exact_bilinear(A)}
    g = gen_graph_family(args.n, args.rho, args.family, args.seed)
    wpath = args.weights_out or args.output + ".weights"
    write_graph(g, args.output)
    write_weights(WeightVector(g.n, g.gamma, g.weights), wpath)
    return {"written": [args.output, wpath], "Q": g.weighted_edge_sum(), "edges": int(len(g.edges))}


# -- estimate


def cmd_estimate(args) -> dict:
    A, x, y, scale = _load_problem(args)
    _check_verify(A, args)
    cfg = Constants.from_env()
    oracle = preprocess(A)
    general = _general(A, x, y)
    eps = args.epsilon
    trials, values = [], []
    for t in range(args.trials):
        o = oracle.session()
        rng = trial_source(args.seed, t)
        est = bfe_general(o, x, y, eps, rng, cfg) if general else bfe(o, eps, rng, cfg)
        values.append(est.value / scale)
        trials.append(
            {
                "trial": t,
                "estimate": float(est.value / scale),
                "lower_bound_used": est.lower_bound_used,
                "K": est.trial_meta["K"],
                "large_buckets": len(est.trial_meta["large_buckets"]),
                "exact_fallback": est.trial_meta["exact_fallback"],
                "queries": _queries(est.queries),
            }
        )
    report = {
        "problem": "graph-Q" if scale == 2 else ("bilinear" if general else "symmetric-total"),
        "n": A.n,
        "rho": A.rho,
        "epsilon": float(eps),
        "constants": {"c_k": cfg.c_k, "c_gamma": cfg.c_gamma, "exact_fallback": cfg.exact_fallback},
        "trials": trials,
        "estimate": trials[0]["estimate"],
        "queries": {
            "total": sum(t["queries"]["total"] for t in trials),
            "row": sum(t["queries"]["row"] for t in trials),
            "col": sum(t["queries"]["col"] for t in trials),
            "mean_per_trial": sum(t["queries"]["total"] for t in trials) / len(trials),
        },
    }
    checks = []
    if args.verify:
        exact = Fraction(exact_bilinear(A, x, y), scale)
        report["exact"] = float(exact)
        inside = [abs(v - exact) <= eps * exact for v in values]
        for t, v, ok in zip(trials, values, inside):
            t["relative_error"] = _rel_err(v, exact)
            t["in_interval"] = ok
        report["relative_error"] = trials[0]["relative_error"]
        report["in_interval_fraction"] = sum(inside) / len(inside)
        checks.append(("in_interval_fraction>=0.9", report["in_interval_fraction"] >= INTERVAL_FRACTION))
    elif args.check:
        raise UsageError("--assert on estimate needs --verify")
    return _with_checks(report, checks, args)


def _rel_err(value: Fraction, exact: Fraction):
    if exact == 0:
        return 0.0 if value == 0 else None
    return float(abs(value - exact) / exact)


# -- sample


def cmd_sample(args) -> dict:
    A, x, y, _ = _load_problem(args)
    cfg = Constants.from_env()
    oracle = preprocess(A)
    general = _general(A, x, y)
    rng = RandomSource(args.seed)
    try:
        if general:
            prep = prepare_sau_general(oracle, x, y, args.epsilon, rng, cfg)
            batch = sau_general_many(oracle, x, y, args.samples, args.epsilon, rng, cfg, prep)
        else:
            prep = prepare_sau(oracle, args.epsilon, rng, cfg)
            batch = sau_many(oracle, args.samples, args.epsilon, rng, cfg, prep)
    except AllZeroMatrix as exc:
        return _with_checks({"error": "all_zero_matrix", "message": str(exc)}, [("completed", False)], args)
    except ExhaustedFail as exc:
        return _with_checks({"error": "exhausted", "message": str(exc)}, [("completed", False)], args)
    n = A.n
    counts = np.bincount(batch.rows * n + batch.cols, minlength=n * n)
    hit = np.flatnonzero(counts)
    N = int(counts.sum())
    report = {
        "problem": "bilinear" if general else "symmetric",
        "n": n,
        "rho": A.rho,
        "epsilon": float(args.epsilon),
        "samples": N,
        "exhausted_calls": batch.exhausted,
        "attempts": batch.attempts,
        "tau": float(prep.tau),
        "m_hat": float(prep.m_hat),
        "attempt_budget": prep.gamma,
        "queries": _queries(oracle.read_counter()),
        "frequencies": {f"{k // n},{k % n}": int(counts[k]) / N for k in hit},
    }
    checks = []
    if n <= EXACT_LAW_LIMIT:
        law = exact_entry_law(A, x, y)
        keys = sorted(law)
        target = np.zeros(n * n)
        for (i, j), p in law.items():
            target[i * n + j] = float(p)
        freq = counts / N
        report["tv_distance"] = tv_distance(freq, target)
        stat, df, pval = chi_square(counts, target)
        report["chi_square"] = {"statistic": stat if np.isfinite(stat) else None, "df": df, "p_value": pval}
        flat = [i * n + j for i, j in keys]
        ratios = freq[flat] / target[flat]
        report["max_ratio_to_target"] = float(ratios.max())
        report["min_ratio_to_target"] = float(ratios.min())
        checks.append(("tv_distance<0.02", report["tv_distance"] < TV_BOUND))
    return _with_checks(report, checks, args)


# -- regr-test


def cmd_regr_test(args) -> dict:
    A = read_matrix(args.matrix)
    if not 0 <= args.row < A.n:
        raise UsageError(f"--row must lie in [0, {A.n})")
    oracle = preprocess(A)
    rng = RandomSource(args.seed)
    budget = query_budget(A.n)
    try:
        counts, maxq = regr_tally(oracle, args.row, None, args.samples, rng)
    except ZeroMass as exc:
        return _with_checks({"error": "zero_mass", "row": args.row, "message": str(exc)}, [("completed", False)], args)
    row = A.entries[args.row]
    target = row / row.sum()
    freq = counts / args.samples
    stat, df, pval = chi_square(counts, target)
    report = {
        "n": A.n,
        "row": args.row,
        "samples": args.samples,
        "frequencies": {str(j): float(freq[j]) for j in np.flatnonzero(counts)},
        "target": {str(j): float(target[j]) for j in np.flatnonzero(row)},
        "tv_distance": tv_distance(freq, target),
        "chi_square": {"statistic": stat if np.isfinite(stat) else None, "df": df, "p_value": pval},
        "max_queries_per_call": maxq,
        "query_budget": budget,
        "queries": _queries(oracle.read_counter()),
    }
    checks = [
        ("tv_distance<0.02", report["tv_distance"] < TV_BOUND),
        ("max_queries<=budget", maxq <= budget),
    ]
    return _with_checks(report, checks, args)


# -- verify


def cmd_verify(args) -> dict:
    A, x, y, scale = _load_problem(args)
    if A.n > VERIFY_LIMIT:
        raise UsageError(f"brute force is limited to n <= {VERIFY_LIMIT}")
    exact = Fraction(exact_bilinear(A, x, y), scale)
    return {
        "n": A.n,
        "rho": A.rho,
        "symmetric": A.is_symmetric(),
        "exact": int(exact) if exact.denominator == 1 else float(exact),
        "nonzero_entries": int(np.count_nonzero(A.entries)),
    }


def _with_checks(report: dict, checks: list, args) -> dict:
    report["assertions"] = [{"name": name, "passed": bool(ok)} for name, ok in checks]
    report["_ok"] = all(ok for _, ok in checks)
    return report


# -- plumbing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ipq", description="Sublinear bilinear-form estimation and entry sampling.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, sample_flags=True):
        sp.add_argument("--matrix", help="matrix file (dense or sparse format)")
        sp.add_argument("--graph", help="graph file; the target becomes Q, the weighted edge sum")
        sp.add_argument("--weights", help="vertex weights for --graph")
        sp.add_argument("--x", help="left weight vector file")
        sp.add_argument("--y", help="right weight vector file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--json-out", help="also write the report here")
        sp.add_argument("--assert", dest="check", action="store_true", help="exit nonzero unless all checks pass")
        if sample_flags:
            sp.add_argument("--epsilon", type=_fraction_arg, required=True)

    gen = sub.add_parser("gen", help="generate instances")
    gsub = gen.add_subparsers(dest="kind", required=True)
    g = gsub.add_parser("random")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--rho", type=int, required=True)
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--asymmetric", action="store_true")
    g = gsub.add_parser("planted")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--rho", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g = gsub.add_parser("graph-family")
    g.add_argument("--family", choices=["g1", "grho"], type=str.lower, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--rho", type=int, required=True)
    g.add_argument("--weights-out", help="weights file (default: <output>.weights)")
    for g in gsub.choices.values():
        g.add_argument("--seed", type=int, default=0)
        g.add_argument("-o", "--output", required=True)
        g.add_argument("--format", choices=["dense", "sparse"], default="dense")

    sp = sub.add_parser("estimate", help="estimate xᵀAy, 1ᵀA1, or Q")
    common(sp)
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--verify", action="store_true", help=f"compare with brute force (n <= {VERIFY_LIMIT})")

    sp = sub.add_parser("sample", help="draw entries nearly proportional to their weight")
    common(sp)
    sp.add_argument("--samples", type=int, required=True)

    sp = sub.add_parser("regr-test", help="empirical law of single-row sampling")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--row", type=int, required=True)
    sp.add_argument("--samples", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json-out")
    sp.add_argument("--assert", dest="check", action="store_true")

    sp = sub.add_parser("verify", help="brute-force totals")
    common(sp, sample_flags=False)
    return p


COMMANDS = {
    "gen": cmd_gen,
    "estimate": cmd_estimate,
    "sample": cmd_sample,
    "regr-test": cmd_regr_test,
    "verify": cmd_verify,
}


def _echo(args) -> dict:
    return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in sorted(vars(args).items())}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", 1) < 1 or getattr(args, "samples", 1) < 1:
        parser.error("--trials and --samples must be positive")
    eps = getattr(args, "epsilon", None)
    if eps is not None and not 0 < eps < 1:
        parser.error("--epsilon must lie in (0, 1)")
    started = time.perf_counter()
    try:
        body = COMMANDS[args.command](args)
    except (UsageError, IPQError, ValueError, OSError) as exc:
        print(f"ipq: error: {exc}", file=sys.stderr)
        return 2
    ok = body.pop("_ok", True)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": _echo(args),
        **body,
        "wall_time_ms": round((time.perf_counter() - started) * 1000, 3),
    }
    if "seed" in vars(args):
        report["seed"] = args.seed
    text = json.dumps(report, sort_keys=True, indent=2)
    print(text)
    if getattr(args, "json_out", None):
        with open(args.json_out, "w") as fh:
            fh.write(text + "\n")
    if "error" in body or (getattr(args, "check", False) and not ok):
        return 1
    return 0

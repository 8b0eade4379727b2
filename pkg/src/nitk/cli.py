"""Command-line front end.

Every subcommand prints one JSON record on a single line:
``{"command", "inputs", "seed", "params", "outputs", "wall_time"}``, where
``inputs`` maps each input file to its SHA-256 digest. ``--csv PATH`` also
writes a plot-ready table. Exit status is 0 on success, 1 on a domain error
(an error record is still printed) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import acceptance
from .codes.binning import binning_coordination
from .codes.evaluation import exact_error_probability, good_message_set, monte_carlo_error_probability
from .codes.lemma1 import lemma1_transform
from .codes.mds import mds_pipeline
from .codes.search import DEFAULT_BUDGET, search_best_code
from .codes.stacked import stacked_correction_sim
from .core import ModifiedCode
from .coupling import blowup_corollary, verify_blowup_bound
from .exponents import (ConvergenceError, InternalError, channel_capacity, check_exponent_condition,
                        dueck_exponent, exponent_slope_at_capacity)
from .io import code_to_dict, load_channel, load_code, load_joint, load_network, load_set, load_source
from .regions import (cutset_bound, ic_strong_interference_check, ic_strong_region, joint_input_grid,
                      wringing)
from .validation import ValidationError


class UsageError(Exception):
    pass


def _plain(obj):
    """Convert results to JSON-safe values; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _need_seed(args):
    if args.seed is None:
        raise UsageError(f"{args.command}: --seed is required for stochastic runs")


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    try:
        return max(1, int(os.environ.get("NITK_THREADS", "1")))
    except ValueError:
        return 1


# subcommands: each returns (inputs, params, outputs, csv_header, csv_rows)


def cmd_capacity(args):
    ch, digest = load_channel(args.channel)
    res = channel_capacity(ch, args.tol, args.max_iter)
    rows = [(x, p) for x, p in enumerate(res.input_dist.probs)]
    out = {"capacity": res.capacity, "input_dist": res.input_dist.probs,
           "output_dist": res.output_dist.probs, "iterations": res.iterations, "gap": res.gap}
    return {"channel": digest}, {"tol": args.tol, "max_iter": args.max_iter}, out, ["x", "p_x"], rows


def cmd_dueck(args):
    ch, digest = load_channel(args.channel)
    cap = channel_capacity(ch, 1e-10)
    results = [dueck_exponent(ch, r, args.grid, args.refine, _threads(args), cap) for r in args.rate]
    out = {
        "capacity": cap.capacity,
        "results": [{"rate": r.rate, "alpha": r.alpha, "kl_part": r.kl_part, "rate_part": r.rate_part,
                     "grid_resolution": r.grid_resolution, "grid_points": r.grid_points,
                     "minimizer": r.minimizer.table} for r in results],
    }
    if len(results) == 1:
        out["alpha"] = results[0].alpha
    rows = [(r.rate, r.alpha) for r in results]
    params = {"rate": args.rate, "grid": args.grid, "refine": args.refine}
    return {"channel": digest}, params, out, ["rate", "alpha"], rows


def cmd_condition(args):
    ch, digest = load_channel(args.channel)
    c = check_exponent_condition(ch, args.tol)
    out = {"holds": c.holds, "x": c.x, "y": c.y, "margin": c.margin, "capacity": c.capacity}
    return {"channel": digest}, {"tol": args.tol}, out, ["holds", "margin"], [(c.holds, c.margin)]


def cmd_slope(args):
    ch, digest = load_channel(args.channel)
    d = exponent_slope_at_capacity(ch, tuple(args.deltas), args.tol, args.grid, args.refine)
    out = {k: getattr(d, k) for k in ("condition_holds", "x0", "y0", "x1", "y1", "zeta", "lambda_max",
                                       "deltas", "alphas", "slope_estimates", "path_slopes", "capacity")}
    out["strictly_decreasing"] = d.strictly_decreasing
    rows = list(zip(d.deltas, d.alphas, d.slope_estimates, d.path_slopes))
    params = {"deltas": args.deltas, "tol": args.tol, "grid": args.grid, "refine": args.refine}
    return {"channel": digest}, params, out, ["delta", "alpha", "ratio", "path_ratio"], rows


def cmd_blowup(args):
    src, sd = load_source(args.source)
    A, ad = load_set(args.set)
    if args.samples is not None:
        _need_seed(args)
        rep = verify_blowup_bound(src, A, samples=args.samples, seed=args.seed)
    else:
        rep = verify_blowup_bound(src, A)
    out = {k: getattr(rep, k) for k in ("exact_expected_hamming", "tv_route_expected_hamming", "bound",
                                         "z_in_A", "prob_A", "z_law_tv", "samples", "ci_low", "ci_high")}
    out["holds"] = rep.holds
    rows = []
    if args.ell:
        out["corollary"] = []
        for ell in args.ell:
            c = blowup_corollary(src, A, ell, exact=args.samples is None)
            out["corollary"].append({"ell": ell, "prob_blown_up": float(c.prob_blown_up),
                                     "lower_bound": c.lower_bound, "holds": c.holds})
            rows.append((ell, float(c.prob_blown_up), c.lower_bound))
    params = {"exact": args.samples is None, "samples": args.samples, "ell": args.ell}
    return {"source": sd, "set": ad}, params, out, ["ell", "prob_blown_up", "lower_bound"], rows


def cmd_cutset(args):
    net, digest = load_network(args.network)
    cons = cutset_bound(net, joint_input_grid(net, args.grid), args.extra_edge_rate)
    out = {"constraints": [{"cut": c.cut, "crossing_flows": c.crossing_flows, "bound": c.bound,
                            "slack": c.slack, "limit": c.limit} for c in cons]}
    rows = [(" ".join(map(str, c.cut)), " ".join(map(str, c.crossing_flows)), c.bound, c.limit) for c in cons]
    params = {"grid": args.grid, "extra_edge_rate": args.extra_edge_rate}
    return {"network": digest}, params, out, ["cut", "flows", "bound", "limit"], rows


def cmd_ic_check(args):
    net, digest = load_network(args.network)
    seed = 0 if args.seed is None else args.seed
    args.seed = seed
    c = ic_strong_interference_check(net, args.grid, args.tol, args.joint_samples, seed)
    out = {k: getattr(c, k) for k in ("holds", "worst_margin", "worst_dist", "joint_holds",
                                       "joint_worst_margin", "joint_samples")}
    params = {"grid": args.grid, "tol": args.tol, "joint_samples": args.joint_samples}
    return {"network": digest}, params, out, ["holds", "worst_margin"], [(c.holds, c.worst_margin)]


def cmd_ic_region(args):
    _need_seed(args)
    net, digest = load_network(args.network)
    check = ic_strong_interference_check(net)
    samples = ic_strong_region(net, args.samples, args.seed, check)
    out = {"check_holds": check.holds,
           "samples": [{"q_dist": s.q_dist, "cond1": s.cond1, "cond2": s.cond2, "r1_bound": s.r1_bound,
                        "r2_bound": s.r2_bound, "sum_bound": s.sum_bound} for s in samples]}
    rows = [(s.r1_bound, s.r2_bound, s.sum_bound) for s in samples]
    return {"network": digest}, {"samples": args.samples}, out, ["r1", "r2", "sum"], rows


def cmd_wringing(args):
    (J, z, a1, a2), digest = load_joint(args.joint)
    r = wringing(J, z, args.kn, a1, a2)
    out = {k: getattr(r, k) for k in ("t_list", "m", "residual_mi", "threshold", "block_mi",
                                       "final_block_mi", "k_n")}
    out["within_bounds"] = r.within_bounds
    rows = [(t, v) for t, v in enumerate(r.residual_mi)]
    return {"joint": digest}, {"kn": args.kn}, out, ["t", "residual_mi"], rows


def _report_out(rep):
    return {"error_prob": rep.error_prob, "exact": rep.exact, "ci": rep.ci, "samples": rep.samples,
            "per_message_success": rep.per_message_success}


def cmd_eval_code(args):
    net, nd = load_network(args.network)
    code, cd = load_code(args.code, net)
    if args.samples is not None:
        _need_seed(args)
        if isinstance(code, ModifiedCode):
            raise ValidationError("Monte Carlo mode is only available for base-network codes")
        rep = monte_carlo_error_probability(net, code, args.samples, args.seed)
    else:
        rep = exact_error_probability(net, code, args.cap)
    out = _report_out(rep)
    rows = []
    if rep.per_message_success is not None:
        g = good_message_set(rep, rep.error_prob)
        out["good_set"] = {"size": g.size, "threshold": g.threshold, "required": g.required,
                           "certificate_holds": g.certificate_holds}
        rows = [(r, rep.message_vector(r), p) for r, p in enumerate(rep.per_message_success)]
    params = {"samples": args.samples, "cap": args.cap}
    return {"network": nd, "code": cd}, params, out, ["rank", "message", "p_correct"], rows


def _write_code(path, code):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(code_to_dict(code), fh)


def cmd_search_code(args):
    net, nd = load_network(args.network)
    if args.mode == "random":
        _need_seed(args)
    code, rep = search_best_code(net, args.n, args.message_sizes, args.budget, args.seed, args.mode,
                                 args.restarts, args.passes)
    _write_code(args.out, code)
    out = _report_out(rep)
    out["code"] = code_to_dict(code)
    params = {"n": args.n, "message_sizes": args.message_sizes, "budget": args.budget, "mode": args.mode,
              "restarts": args.restarts, "passes": args.passes}
    return {"network": nd}, params, out, ["error_prob"], [(rep.error_prob,)]


def cmd_lemma1(args):
    net, nd = load_network(args.network)
    code, cd = load_code(args.code, net)
    if not isinstance(code, ModifiedCode):
        raise ValidationError("code/modified-network mismatch: code file has no 'modified' section")
    res = lemma1_transform(net, code.network.v_set, args.k, code)
    _write_code(args.out, res.code)
    out = {"x_star": res.x_star, "error_prob": res.report.error_prob, "modified_error": res.modified_error,
           "errors_by_x": res.errors_by_x, "bound": res.bound, "within_bound": res.within_bound,
           "code": code_to_dict(res.code)}
    rows = [(x, e) for x, e in enumerate(res.errors_by_x)]
    return {"network": nd, "code": cd}, {"k": args.k}, out, ["x_star", "error_prob"], rows


def cmd_binning(args):
    _need_seed(args)
    from .codes.binning import binning_k
    k = binning_k(args.d, args.eps_tilde, args.eps)
    log_size = 2 * k if args.log_size is None else args.log_size
    rep = binning_coordination(1.0 - args.eps, (2 ** log_size,) * args.d, args.eps_tilde, args.seed,
                               args.trials)
    out = {k_: getattr(rep, k_) for k_ in ("d", "k", "eta", "epsilon", "epsilon_tilde", "gamma_size",
                                           "w_tildes", "q_estimates", "q_sigmas", "trials", "proof_bound",
                                           "feasibility")}
    out["within_tolerance"] = rep.within_tolerance
    out["feasibility_holds"] = rep.feasibility_holds
    rows = [(" ".join(map(str, w)), q, s) for w, q, s in zip(rep.w_tildes, rep.q_estimates, rep.q_sigmas)]
    params = {"d": args.d, "eps": args.eps, "eps_tilde": args.eps_tilde, "trials": args.trials,
              "log_size": log_size}
    return {}, params, out, ["w_tilde", "q_hat", "sigma"], rows


def cmd_mds(args):
    _need_seed(args)
    r = mds_pipeline(args.eps, args.N, args.seed, args.trials)
    out = {k: getattr(r, k) for k in ("N", "eps", "field_order", "formula_error", "empirical_error", "ci",
                                       "sigma", "trials")}
    out["within_3_sigma"] = r.within_3_sigma
    params = {"eps": args.eps, "N": args.N, "trials": args.trials}
    return {}, params, out, ["formula", "empirical"], [(r.formula_error, r.empirical_error)]


def cmd_stacked_sim(args):
    _need_seed(args)
    net, nd = load_network(args.network)
    code, cd = load_code(args.code, net)
    if isinstance(code, ModifiedCode):
        raise ValidationError("stacked-sim expects a base-network code")
    v_set = args.v_set if args.v_set is not None else sorted(net.transmitting_nodes)
    r = stacked_correction_sim(net, code, v_set, args.delta, args.seed, layers=args.layers, runs=args.runs)
    out = {k: getattr(r, k) for k in r.__dataclass_fields__}
    out["bound_comparable"] = r.bound_comparable
    out["e1_within_bound"] = r.e1_within_bound
    rows = [(i, b) for i, b in enumerate(r.correction_bits_used)]
    params = {"delta": args.delta, "layers": args.layers, "runs": args.runs, "v_set": v_set}
    return {"network": nd, "code": cd}, params, out, ["run", "correction_bits"], rows


def cmd_suite(args):
    results = []
    for res in acceptance.run_suite(args.name):
        print(res.line(), file=sys.stderr, flush=True)
        results.append(res)
    passed = sum(r.passed for r in results)
    out = {"checks": [{"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail,
                       "seconds": r.seconds} for r in results],
           "passed": passed, "total": len(results), "all_passed": passed == len(results)}
    rows = [(r.number, r.name, r.passed) for r in results]
    return {}, {"name": args.name}, out, ["number", "name", "passed"], rows


# parser ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser():
    p = _Parser(prog="nitk", description="Finite-alphabet network information theory toolkit.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    def add(name, fn, help_, seed=False):
        s = sub.add_parser(name, help=help_)
        s.set_defaults(func=fn)
        s.add_argument("--csv", metavar="PATH", help="also write a CSV table")
        s.add_argument("--threads", type=int, default=None, help="worker count (default NITK_THREADS or 1)")
        if seed:
            s.add_argument("--seed", type=int, default=None)
        return s

    s = add("capacity", cmd_capacity, "channel capacity by Blahut-Arimoto")
    s.add_argument("--channel", required=True)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--max-iter", type=int, default=200_000)

    s = add("dueck", cmd_dueck, "strong-converse exponent alpha(R)")
    s.add_argument("--channel", required=True)
    s.add_argument("--rate", type=_floats, required=True, help="one rate or a comma-separated list")
    s.add_argument("--grid", type=int, default=None)
    s.add_argument("--refine", type=int, default=3)

    s = add("condition", cmd_condition, "check log W(y|x)/P*(y) <= C")
    s.add_argument("--channel", required=True)
    s.add_argument("--tol", type=float, default=1e-6)

    s = add("slope", cmd_slope, "alpha(C + delta) / delta diagnostics")
    s.add_argument("--channel", required=True)
    s.add_argument("--deltas", type=_floats, default=[0.04, 0.02, 0.01])
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--grid", type=int, default=None)
    s.add_argument("--refine", type=int, default=3)

    s = add("blowup", cmd_blowup, "causal blowing-up coupling check", seed=True)
    s.add_argument("--source", required=True)
    s.add_argument("--set", required=True)
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--samples", type=int, default=None)
    s.add_argument("--ell", type=_ints, default=None, help="radii for the blown-up set corollary")

    s = add("cutset", cmd_cutset, "cut-set outer bound")
    s.add_argument("--network", required=True)
    s.add_argument("--grid", type=int, default=100)
    s.add_argument("--extra-edge-rate", type=float, default=0.0)

    s = add("ic-check", cmd_ic_check, "strong-interference condition", seed=True)
    s.add_argument("--network", required=True)
    s.add_argument("--grid", type=int, default=20)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--joint-samples", type=int, default=200)

    s = add("ic-region", cmd_ic_region, "sample the strong-interference region", seed=True)
    s.add_argument("--network", required=True)
    s.add_argument("--samples", type=int, default=100)

    s = add("wringing", cmd_wringing, "wringing coordinate selection")
    s.add_argument("--joint", required=True)
    s.add_argument("--kn", type=float, required=True)

    s = add("eval-code", cmd_eval_code, "error probability of a code", seed=True)
    s.add_argument("--network", required=True)
    s.add_argument("--code", required=True)
    s.add_argument("--samples", type=int, default=None)
    s.add_argument("--cap", type=int, default=2 ** 26)

    s = add("search-code", cmd_search_code, "best code by exhaustive or random search", seed=True)
    s.add_argument("--network", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--message-sizes", type=_ints, required=True)
    s.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.add_argument("--restarts", type=int, default=20)
    s.add_argument("--passes", type=int, default=5)
    s.add_argument("--out", metavar="PATH", help="write the best code as a code file")

    s = add("lemma1", cmd_lemma1, "remove the extra edge by fixing its content")
    s.add_argument("--network", required=True)
    s.add_argument("--code", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--out", metavar="PATH")

    s = add("binning", cmd_binning, "random-binning coordination estimate", seed=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--eps-tilde", type=float, required=True)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--log-size", type=int, default=None, help="nR_i in bits (default 2k)")

    s = add("mds", cmd_mds, "MDS pipelining simulation", seed=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--trials", type=int, default=100_000)

    s = add("stacked-sim", cmd_stacked_sim, "stacked correction and hashing simulation", seed=True)
    s.add_argument("--network", required=True)
    s.add_argument("--code", required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--layers", type=int, default=None)
    s.add_argument("--runs", type=int, default=1)
    s.add_argument("--v-set", type=_ints, default=None)

    s = add("suite", cmd_suite, "run acceptance checks")
    s.add_argument("name", choices=sorted(acceptance.SUITES))
    return p


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([json.dumps(_plain(v)) if isinstance(v, (tuple, list)) else _plain(v) for v in row])


def run(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    record = {"command": args.command, "inputs": {}, "seed": getattr(args, "seed", None), "params": {}}
    t0 = time.perf_counter()
    status = 0
    try:
        inputs, params, outputs, header, rows = args.func(args)
        record.update(inputs=inputs, params=params, outputs=outputs, seed=getattr(args, "seed", None))
        if args.csv:
            _write_csv(args.csv, header, rows)
        if args.command == "suite" and not outputs["all_passed"]:
            status = 1
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"nitk: error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, ConvergenceError, InternalError, OSError) as exc:
        record["error"] = f"{type(exc).__name__}: {exc}"
        status = 1
    record["wall_time"] = time.perf_counter() - t0
    print(json.dumps(_plain(record), sort_keys=True, allow_nan=False), file=stdout)
    return status


def main(argv=None):
    try:
        return run(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2


if __name__ == "__main__":
    sys.exit(main())

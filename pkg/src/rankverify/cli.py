"""Command-line interface: ``rankverify <subcommand> [options]``.

Exit status is 0 on success, 2 for usage, parse or validation errors and 1
for anything unexpected.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .data_io import AnalysisReport, fingerprint, format_csv, format_text, ingest, summary_rows
from .errors import RankVerifyError
from .naive import REFERENCE_SCENARIO, NaiveBoundConfig, naive_error_lower_bound, naive_error_mc
from .procedures import rank_bottom, rank_top, topk_set_test
from .simulation import (
    Scenario,
    SimConfig,
    calibrate_sigma,
    run_inflation_grid,
    spaced_means,
)
from .winner import verify_loser, verify_winner

SEED_ENV = "RANKVERIFY_SEED"


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise RankVerifyError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text", "csv"), default="json")
    common.add_argument("--output", help="write the report here instead of stdout")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", required=True,
                      help="summary CSV (label,n,mean,sd) or raw CSV (label,value)")
    data.add_argument("--alpha", type=float, default=0.05)

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--procedure", choices=("ranking", "set"), default="ranking")
    sim.add_argument("--k", type=int, default=1)
    sim.add_argument("--draws", type=int, default=10_000)
    sim.add_argument("--seed", type=int, default=None,
                     help=f"default: ${SEED_ENV} or 0")
    sim.add_argument("--alpha", type=float, default=0.05)
    sim.add_argument("--jobs", type=int, default=1)

    parser = argparse.ArgumentParser(
        prog="rankverify",
        description="Rank verification for Gaussian means with known, unequal variances.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common, data], help="verify the winner (or loser)")
    p.add_argument("--direction", choices=("top", "bottom"), default="top")

    p = sub.add_parser("rank", parents=[common, data], help="sequentially verify ranks")
    p.add_argument("--direction", choices=("top", "bottom"), default="top")

    p = sub.add_parser("top-set", parents=[common, data], help="verify the top-k set")
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("simulate", parents=[common, sim], help="error-rate inflation grid")
    p.add_argument("--error", choices=("type1-tied", "type1-spaced", "type2"),
                   default="type1-tied")
    p.add_argument("--sigma", type=float, default=None,
                   help="common sd; calibrated to --target-power when omitted")
    p.add_argument("--target-power", type=float, default=0.9)
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--ranks", type=_ints, default=[2, 4])
    p.add_argument("--multipliers", type=_floats, default=None)

    p = sub.add_parser("calibrate", parents=[common, sim], help="find sigma with target power")
    p.add_argument("--target-power", type=float, default=0.9)
    p.add_argument("--means", type=_floats, default=None, help="default: 4,3,2,1,0")

    p = sub.add_parser("naive-error", parents=[common],
                       help="type I error bound of the naive winner vs runner-up test")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--span", type=float, default=4.0)
    p.add_argument("--exact-inner", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--rule", choices=("simpson", "trapezoid"), default="simpson")
    p.add_argument("--means", type=_floats, default=None)
    p.add_argument("--sds", type=_floats, default=None)
    p.add_argument("--ranks", type=_ints, default=[1, 2, 3], help="A,B,C (1-based)")
    p.add_argument("--mc-draws", type=int, default=0,
                   help="also run a Monte-Carlo cross-check with this many draws")
    p.add_argument("--seed", type=int, default=None)
    return parser


def _seed(args):
    return _default_seed() if args.seed is None else args.seed


def _input_block(path, obs):
    info = fingerprint(path)
    info["rows_data"] = summary_rows(obs)
    return info


def _cmd_verify(args):
    obs = ingest(args.input)
    fn = verify_winner if args.direction == "top" else verify_loser
    res = fn(obs, args.alpha)
    report = AnalysisReport("verify", res, args.alpha, None, _input_block(args.input, obs),
                            {"direction": args.direction})
    rows = [(res.tested_label, t.competitor_rank, t.competitor_label, t.mu_bar, t.sigma_bar,
             t.trunc_threshold, t.z, t.p_value, t.direction) for t in res.pairwise]
    header = ("tested_label", "competitor_rank", "competitor_label", "mu_bar", "sigma_bar",
              "trunc_threshold", "z", "p_value", "direction")
    return report, header, rows


def _cmd_rank(args):
    obs = ingest(args.input)
    res = (rank_top if args.direction == "top" else rank_bottom)(obs, args.alpha)
    report = AnalysisReport("rank", res, args.alpha, None, _input_block(args.input, obs),
                            {"direction": args.direction})
    rows = [(s.rank, s.label, s.p_star, s.argmax_competitor, s.p_star <= args.alpha)
            for s in res.per_rank]
    return report, ("rank", "label", "p_star", "argmax_competitor", "rejected"), rows


def _cmd_top_set(args):
    obs = ingest(args.input)
    res = topk_set_test(obs, args.k, args.alpha)
    report = AnalysisReport("top-set", res, args.alpha, None, _input_block(args.input, obs),
                            {"k": args.k})
    rows = [(j + 1, res.labels[j], p) for j, p in enumerate(res.per_element)]
    return report, ("element_rank", "label", "p_max"), rows


def _cmd_calibrate(args):
    seed = _seed(args)
    means = np.asarray(args.means) if args.means else spaced_means(5)
    cfg = SimConfig(args.draws, args.alpha, seed, args.procedure, args.k, "type2")
    res = calibrate_sigma(means, args.target_power, cfg, n_jobs=args.jobs)
    report = AnalysisReport(
        "calibrate", {"sigma": res.sigma, "power": res.power, "n_effective": res.n_effective,
                      "evaluations": res.evaluations},
        args.alpha, seed, None,
        {"procedure": args.procedure, "k": args.k, "draws": args.draws,
         "target_power": args.target_power, "means": means})
    rows = [(args.procedure, args.k, res.sigma, res.power, res.n_effective)]
    return report, ("procedure", "k", "sigma", "power", "n_effective"), rows


def _cmd_simulate(args):
    seed = _seed(args)
    kind = args.error.replace("-", "_")
    cfg = SimConfig(args.draws, args.alpha, seed, args.procedure, args.k, kind)
    params = {"procedure": args.procedure, "k": args.k, "error": args.error,
              "draws": args.draws, "d": args.d, "ranks": args.ranks}
    sigma = args.sigma
    if sigma is None:
        cal = calibrate_sigma(spaced_means(args.d), args.target_power, cfg, n_jobs=args.jobs)
        sigma = cal.sigma
        params["calibrated_power"] = cal.power
        params["target_power"] = args.target_power
    params["sigma_bar"] = sigma
    cells = run_inflation_grid(cfg, sigma, args.d, args.ranks, args.multipliers, args.jobs)
    report = AnalysisReport("simulate", cells, args.alpha, seed, None, params)
    header = ("procedure", "k", "error", "rank_j", "multiplier", "sd_j", "sigma_bar",
              "n_draws", "n_effective", "estimate", "mc_se")
    rows = [(c.procedure, c.k, args.error, c.rank_j, c.multiplier, c.sd_j, c.sigma_bar,
             c.report.n_draws, c.report.n_effective, c.report.estimate,
             c.report.mc_standard_error) for c in cells]
    return report, header, rows


def _cmd_naive(args):
    if args.means is None and args.sds is None:
        scenario = REFERENCE_SCENARIO
    elif args.means is None or args.sds is None:
        raise RankVerifyError("--means and --sds must be given together")
    else:
        scenario = Scenario(args.means, args.sds)
    if len(args.ranks) != 3:
        raise RankVerifyError("--ranks needs exactly three indices A,B,C")
    cfg = NaiveBoundConfig(scenario, args.alpha, tuple(args.ranks), args.grid, args.span,
                           args.exact_inner, args.rule)
    bound = naive_error_lower_bound(cfg)
    results = {"bound": bound}
    rows = [("quadrature", bound, None, None)]
    seed = None
    if args.mc_draws:
        seed = _seed(args)
        mc = naive_error_mc(cfg, args.mc_draws, seed)
        results["monte_carlo"] = mc
        rows.append(("monte_carlo", mc.estimate, mc.mc_standard_error, mc.n_effective))
    report = AnalysisReport(
        "naive-error", results, args.alpha, seed, None,
        {"means": scenario.means, "sds": scenario.sds, "ranks": args.ranks,
         "grid": args.grid, "span": args.span, "exact_inner": args.exact_inner,
         "rule": args.rule, "mc_draws": args.mc_draws})
    return report, ("method", "estimate", "mc_se", "n_effective"), rows


COMMANDS = {
    "verify": _cmd_verify,
    "rank": _cmd_rank,
    "top-set": _cmd_top_set,
    "simulate": _cmd_simulate,
    "calibrate": _cmd_calibrate,
    "naive-error": _cmd_naive,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report, header, rows = COMMANDS[args.command](args)
        if args.format == "json":
            text = report.to_json()
        elif args.format == "text":
            text = format_text(report)
        else:
            text = format_csv(header, rows)
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (RankVerifyError, ValueError, IndexError, OSError) as exc:
        print(f"rankverify: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"rankverify: internal error: {exc!r}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

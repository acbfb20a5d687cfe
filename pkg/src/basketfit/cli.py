"""Command-line interface: fit models, run simulation studies, print exact
partition posteriors, and render reports to plot-ready CSV."""

import argparse
import sys
import time
from dataclasses import asdict
from pathlib import Path

from .bhm import run_bhm, summarize
from .data import BhmConfig, ExnexConfig, MfmConfig
from .exnex import run_exnex, summarize_exnex
from .pipeline import PtPolicy, run_two_step
from .reporting import (
    DatasetError,
    RunReport,
    estimates_csv,
    load_vemurafenib,
    parse_dataset,
    write_fit_outputs,
)
from .rng import RngStream
from .simulate import exact_partition_posterior, run_study, write_study_csvs

BUNDLED = "vemurafenib"


def _load_data(value):
    if value == BUNDLED:
        return load_vemurafenib()
    return parse_dataset(value)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="basketfit",
        description="Cluster-then-shrink Bayesian analysis of basket-trial response rates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit one method to a cohort CSV")
    fit.add_argument("--data", required=True,
                     help=f"cohort CSV (header cohort,n,r[,p_t]); '{BUNDLED}' for the bundled dataset")
    fit.add_argument("--method", choices=["mfm-bd", "berry", "exnex"], default="mfm-bd")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--p-t", type=float, default=0.15, dest="p_t",
                     help="dataset-level benchmark rate used where a cohort has no p_t")
    fit.add_argument("--pt-mode", choices=["fixed", "cluster-rate"], default="fixed",
                     help="step-two benchmark policy for the two-step method")
    fit.add_argument("--iters1", type=int, default=5000, help="clustering-step sweeps")
    fit.add_argument("--burn1", type=int, default=2000)
    fit.add_argument("--iters2", type=int, default=None,
                     help="second-step / comparator sweeps (default 8000 two-step, 10000 comparators)")
    fit.add_argument("--burn2", type=int, default=2000)
    fit.add_argument("--gamma", type=float, default=1.0)
    fit.add_argument("--alpha", type=float, default=1.0)
    fit.add_argument("--beta", type=float, default=1.0)
    fit.add_argument("--lam", type=float, default=1.0,
                     help="rate of the truncated-Poisson prior on the cluster count")
    fit.add_argument("--out", default="basketfit_out", help="output directory")

    sim = sub.add_parser("simulate", help="replicate study over a preset scenario")
    sim.add_argument("--scenario", type=int, choices=[1, 2, 3, 4, 5], required=True)
    sim.add_argument("--n", type=int, choices=[20, 30], required=True)
    sim.add_argument("--replicates", type=int, default=200)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--methods", default="mfm-bd,berry,exnex",
                     help="comma-separated subset of mfm-bd,berry,exnex")
    sim.add_argument("--workers", type=int, default=None,
                     help="parallel worker processes (default: BASKETFIT_WORKERS or all cores)")
    sim.add_argument("--out", default="basketfit_sim", help="output directory")

    ex = sub.add_parser("exact-posterior",
                        help="exact partition posterior by enumeration (N <= 8)")
    ex.add_argument("--data", required=True)
    ex.add_argument("--gamma", type=float, default=1.0)
    ex.add_argument("--alpha", type=float, default=1.0)
    ex.add_argument("--beta", type=float, default=1.0)
    ex.add_argument("--lam", type=float, default=1.0)
    ex.add_argument("--out", default=None, help="write CSV here instead of stdout")

    rep = sub.add_parser("report", help="render a report.json to plot-ready CSV")
    rep.add_argument("--report", required=True, help="path to a report.json")
    rep.add_argument("--out", default=None, help="write CSV here instead of stdout")
    return parser


def _fit(args) -> int:
    dataset = _load_data(args.data)
    policy = PtPolicy(default=args.p_t, mode=args.pt_mode)
    rng = RngStream(args.seed)
    rows = [
        {"name": c.name, "n": c.n, "r": c.r, "p_t": c.p_t}
        for c in dataset.cohorts
    ]
    policy_dict = {"default": policy.default, "mode": policy.mode}

    if args.method == "mfm-bd":
        mfm_cfg = MfmConfig(gamma=args.gamma, alpha=args.alpha, beta=args.beta,
                            lam=args.lam, iterations=args.iters1, burn_in=args.burn1)
        bhm_cfg = BhmConfig(iterations=args.iters2 or 8000, burn_in=args.burn2)
        result = run_two_step(dataset, mfm_cfg, bhm_cfg, policy, rng)
        estimates = [
            {"cohort": e.name, "cluster": e.cluster,
             "raw_rate": c.r / c.n, "post_mean": e.mean,
             "ci_low": e.ci_low, "ci_high": e.ci_high}
            for c, e in zip(dataset.cohorts, result.estimates)
        ]
        report = RunReport(
            method=args.method, seed=args.seed, dataset=rows,
            p_t=list(result.p_t),
            configs={"mfm": asdict(mfm_cfg), "bhm": asdict(bhm_cfg),
                     "p_t_policy": policy_dict},
            partition=list(result.partition.labels),
            k_point=result.k_point,
            k_pmf=result.k_pmf,
            coclustering=result.coclustering.tolist(),
            estimates=estimates,
        )
    elif args.method == "berry":
        bhm_cfg = BhmConfig(iterations=args.iters2 or 10000, burn_in=args.burn2)
        p_t = policy.resolve(dataset, None) if policy.mode == "fixed" \
            else [policy.default] * len(dataset)
        fit = run_bhm(list(dataset.cohorts), p_t, bhm_cfg, rng)
        ests = summarize(fit, dataset.cohorts, p_t)
        estimates = [
            {"cohort": e.name, "cluster": None, "raw_rate": c.r / c.n,
             "post_mean": e.mean, "ci_low": e.ci_low, "ci_high": e.ci_high}
            for c, e in zip(dataset.cohorts, ests)
        ]
        report = RunReport(
            method=args.method, seed=args.seed, dataset=rows, p_t=list(p_t),
            configs={"bhm": asdict(bhm_cfg), "p_t_policy": policy_dict},
            partition=None, k_point=None, k_pmf=None, coclustering=None,
            estimates=estimates,
        )
    else:
        ex_cfg = ExnexConfig(iterations=args.iters2 or 10000, burn_in=args.burn2)
        fit = run_exnex(dataset, ex_cfg, rng)
        ests = summarize_exnex(fit, dataset)
        estimates = [
            {"cohort": e.name, "cluster": None, "raw_rate": c.r / c.n,
             "post_mean": e.mean, "ci_low": e.ci_low, "ci_high": e.ci_high}
            for c, e in zip(dataset.cohorts, ests)
        ]
        report = RunReport(
            method=args.method, seed=args.seed, dataset=rows, p_t=None,
            configs={"exnex": asdict(ex_cfg)},
            partition=None, k_point=None, k_pmf=None, coclustering=None,
            estimates=estimates,
        )
    paths = write_fit_outputs(report, args.out)
    print(f"wrote {paths['report']} and {paths['estimates']}")
    return 0


def _simulate(args) -> int:
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    summary = run_study(
        args.scenario, args.n, args.replicates, methods=methods,
        seed=args.seed, workers=args.workers,
    )
    write_study_csvs(summary, args.out)
    if summary.khat_mean is not None:
        print(f"scenario {args.scenario} n={args.n}: "
              f"mean khat={summary.khat_mean:.3f} sd={summary.khat_sd:.3f}")
    for method in methods:
        m = summary.metrics[method]
        print(f"  {method}: aab={m['aab']:.4f} amse={m['amse']:.4f}")
    print(f"wrote CSV tables under {args.out}")
    return 0


def _exact_posterior(args) -> int:
    dataset = _load_data(args.data)
    partitions, probs = exact_partition_posterior(
        dataset, gamma=args.gamma, alpha=args.alpha, beta=args.beta, lam=args.lam
    )
    lines = ["partition,probability"]
    for part, prob in zip(partitions, probs):
        lines.append(f"{'|'.join(map(str, part.labels))},{float(prob)!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _report(args) -> int:
    report = RunReport.from_json(Path(args.report).read_text(encoding="utf-8"))
    text = estimates_csv(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


_HANDLERS = {
    "fit": _fit,
    "simulate": _simulate,
    "exact-posterior": _exact_posterior,
    "report": _report,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        code = _HANDLERS[args.command](args)
    except (DatasetError, ValueError, OSError) as exc:
        print(f"basketfit: error: {exc}", file=sys.stderr)
        return 1
    print(f"elapsed {time.perf_counter() - start:.2f}s", file=sys.stderr)
    return code


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()

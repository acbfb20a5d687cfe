"""Simulation harness: scenario presets, replicate execution across methods,
bias/error metrics, and the exact small-N partition posterior used as the
sampler's ground-truth oracle."""

import math
import os
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .bhm import run_bhm, summarize
from .data import BhmConfig, CohortData, ExnexConfig, MfmConfig, TrialDataset
from .exnex import run_exnex, summarize_exnex
from .kernel import log_beta, log_choose
from .mfm import Partition, all_partitions, compute_v_table, run_mfm
from .pipeline import PtPolicy, run_two_step
from .rng import RngStream
from .summary import dahl_select

WORKERS_ENV = "BASKETFIT_WORKERS"

SCENARIO_RATES = {
    1: (0.4,) * 10,
    2: (0.2,) * 5 + (0.6,) * 5,
    3: (0.2,) * 5 + (0.5,) * 5,
    4: (0.1,) * 3 + (0.4,) * 3 + (0.7,) * 4,
    5: (0.2,) * 10,
}

METHODS = ("mfm-bd", "berry", "exnex")


@dataclass(frozen=True)
class Scenario:
    id: int
    rates: tuple
    n: int

    def __post_init__(self):
        if not all(0.0 < p < 1.0 for p in self.rates):
            raise ValueError("true rates must lie in (0, 1)")
        if self.n not in (20, 30):
            raise ValueError("per-cohort sample size must be 20 or 30")

    @classmethod
    def preset(cls, scenario_id: int, n: int) -> "Scenario":
        if scenario_id not in SCENARIO_RATES:
            raise ValueError(f"scenario must be 1..5, got {scenario_id}")
        return cls(scenario_id, SCENARIO_RATES[scenario_id], n)


def generate_replicate(scenario: Scenario, rng: RngStream) -> TrialDataset:
    """Draw one dataset: independent binomial responses at the true rates."""
    rs = rng.gen.binomial(scenario.n, scenario.rates)
    cohorts = [
        CohortData(f"c{i + 1}", scenario.n, int(r))
        for i, r in enumerate(rs)
    ]
    return TrialDataset(tuple(cohorts))


def aab(estimates, truth) -> float:
    """Mean over cohorts of |average signed error across replicates|."""
    est = np.asarray(estimates, dtype=float)
    tr = np.asarray(truth, dtype=float)
    if est.ndim != 2 or est.shape[1] != tr.shape[0]:
        raise ValueError("estimates must be (replicates, cohorts) matching truth")
    n_rep, n_coh = est.shape
    per_cohort = [
        abs(math.fsum(est[r, i] - tr[i] for r in range(n_rep)) / n_rep)
        for i in range(n_coh)
    ]
    return math.fsum(per_cohort) / n_coh


def amse(estimates, truth) -> float:
    """Mean over cohorts of the root-mean-square error across replicates."""
    est = np.asarray(estimates, dtype=float)
    tr = np.asarray(truth, dtype=float)
    if est.ndim != 2 or est.shape[1] != tr.shape[0]:
        raise ValueError("estimates must be (replicates, cohorts) matching truth")
    n_rep, n_coh = est.shape
    per_cohort = [
        math.sqrt(math.fsum((est[r, i] - tr[i]) ** 2 for r in range(n_rep)) / n_rep)
        for i in range(n_coh)
    ]
    return math.fsum(per_cohort) / n_coh


@dataclass(frozen=True)
class StudyConfigs:
    """Per-method sampler settings for one study."""

    mfm: MfmConfig = MfmConfig()
    step2: BhmConfig = BhmConfig(iterations=8000, burn_in=2000)
    berry: BhmConfig = BhmConfig(iterations=10000, burn_in=2000)
    exnex: ExnexConfig = ExnexConfig(iterations=10000, burn_in=2000)
    pt_policy: PtPolicy = PtPolicy()


@dataclass(frozen=True)
class ReplicateResult:
    index: int
    khat: int | None
    means: dict  # method -> tuple of per-cohort posterior means


def run_replicate(
    scenario: Scenario,
    index: int,
    methods: tuple,
    seed: int,
    configs: StudyConfigs,
) -> ReplicateResult:
    """One replicate: fresh data, then every requested method on it.

    Stream layout: replicate index is the stream id; split 0 generates data,
    splits 1..3 feed the methods, so adding or removing a method never
    perturbs another method's draws.
    """
    base = RngStream(seed, index)
    dataset = generate_replicate(scenario, base.split(0))
    khat = None
    means = {}
    for method in methods:
        if method == "mfm-bd":
            result = run_two_step(
                dataset, configs.mfm, configs.step2, configs.pt_policy, base.split(1)
            )
            khat = result.k_point
            means[method] = tuple(e.mean for e in result.estimates)
        elif method == "berry":
            p_t = configs.pt_policy.resolve(dataset, None) \
                if configs.pt_policy.mode == "fixed" else \
                [configs.pt_policy.default] * len(dataset)
            fit = run_bhm(list(dataset.cohorts), p_t, configs.berry, base.split(2))
            means[method] = tuple(
                e.mean for e in summarize(fit, dataset.cohorts, p_t)
            )
        elif method == "exnex":
            fit = run_exnex(dataset, configs.exnex, base.split(3))
            means[method] = tuple(e.mean for e in summarize_exnex(fit, dataset))
        else:
            raise ValueError(f"unknown method {method!r}")
    return ReplicateResult(index, khat, means)


@dataclass(frozen=True)
class StudySummary:
    scenario: int
    n: int
    replicates: int
    seed: int
    methods: tuple
    khat_mean: float | None
    khat_sd: float | None
    khat_values: tuple
    metrics: dict  # method -> {"aab": float, "amse": float}


def _replicate_star(args):
    return run_replicate(*args)


def resolve_workers(workers=None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_study(
    scenario_id: int,
    n: int,
    replicates: int,
    methods: tuple = METHODS,
    seed: int = 0,
    configs: StudyConfigs = StudyConfigs(),
    workers=None,
) -> StudySummary:
    """Run all replicates (in parallel when workers > 1) and summarize.

    Replicate r always uses streams derived from (seed, r), so results are
    independent of the worker count and of execution order.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    scenario = Scenario.preset(scenario_id, n)
    args = [(scenario, r, tuple(methods), seed, configs) for r in range(replicates)]
    n_workers = min(resolve_workers(workers), replicates)
    if n_workers > 1:
        import multiprocessing as mp

        with mp.get_context("fork").Pool(n_workers) as pool:
            results = pool.map(_replicate_star, args, chunksize=1)
    else:
        results = [run_replicate(*a) for a in args]
    results.sort(key=lambda r: r.index)

    khat_mean = khat_sd = None
    khat_values = ()
    if "mfm-bd" in methods:
        khat_values = tuple(r.khat for r in results)
        khat_mean = math.fsum(khat_values) / replicates
        if replicates > 1:
            var = math.fsum((k - khat_mean) ** 2 for k in khat_values) / (replicates - 1)
            khat_sd = math.sqrt(var)
        else:
            khat_sd = 0.0
    metrics = {}
    for method in methods:
        est = np.array([r.means[method] for r in results])
        metrics[method] = {
            "aab": aab(est, scenario.rates),
            "amse": amse(est, scenario.rates),
        }
    return StudySummary(
        scenario=scenario_id,
        n=n,
        replicates=replicates,
        seed=seed,
        methods=tuple(methods),
        khat_mean=khat_mean,
        khat_sd=khat_sd,
        khat_values=khat_values,
        metrics=metrics,
    )


def write_study_csvs(summary: StudySummary, out_dir):
    """Emit clustering and estimation summaries as two small CSV tables."""
    os.makedirs(out_dir, exist_ok=True)
    if summary.khat_mean is not None:
        with open(os.path.join(out_dir, "khat.csv"), "w", encoding="utf-8") as fh:
            fh.write("scenario,n,replicates,khat_mean,khat_sd\n")
            fh.write(
                f"{summary.scenario},{summary.n},{summary.replicates},"
                f"{summary.khat_mean!r},{summary.khat_sd!r}\n"
            )
    with open(os.path.join(out_dir, "metrics.csv"), "w", encoding="utf-8") as fh:
        fh.write("scenario,n,replicates,method,aab,amse\n")
        for method in summary.methods:
            m = summary.metrics[method]
            fh.write(
                f"{summary.scenario},{summary.n},{summary.replicates},"
                f"{method},{m['aab']!r},{m['amse']!r}\n"
            )


def exact_partition_posterior(
    dataset: TrialDataset,
    gamma: float = 1.0,
    alpha: float = 1.0,
    beta: float = 1.0,
    lam: float = 1.0,
):
    """Enumerate every set partition (N <= 8) and return its exact posterior
    probability: urn coefficient at the block count, times a rising-factorial
    size factor per block, times each block's pooled beta-binomial evidence.

    Returns (partitions, probabilities) with probabilities summing to one.
    """
    n_items = len(dataset)
    if n_items > 8:
        raise ValueError("exact enumeration is limited to N <= 8 cohorts")
    vtable = compute_v_table(n_items, gamma, lam)
    rs = [int(c.r) for c in dataset.cohorts]
    ns = [int(c.n) for c in dataset.cohorts]
    lchoose = [log_choose(n, r) for n, r in zip(ns, rs)]
    lb0 = log_beta(alpha, beta)
    lgamma = math.lgamma
    lg_gamma = lgamma(gamma)

    partitions = []
    log_post = []
    for labels in all_partitions(n_items):
        t = max(labels)
        lp = float(vtable.log_v[t])
        for s in range(1, t + 1):
            members = [i for i, z in enumerate(labels) if z == s]
            size = len(members)
            r_tot = sum(rs[i] for i in members)
            f_tot = sum(ns[i] - rs[i] for i in members)
            lp += lgamma(gamma + size) - lg_gamma  # rising factorial gamma^(size)
            lp += math.fsum(lchoose[i] for i in members)
            lp += log_beta(alpha + r_tot, beta + f_tot) - lb0
        partitions.append(Partition.from_labels(labels))
        log_post.append(lp)
    log_post = np.array(log_post)
    log_post -= log_post.max()
    probs = np.exp(log_post)
    probs /= probs.sum()
    return partitions, probs


def partition_tv_distance(draws, partitions, probs) -> float:
    """Total-variation distance between the draws' empirical distribution over
    set partitions and an exact reference."""
    counts = Counter(p.labels for p in draws.partitions)
    total = len(draws)
    emp = {labels: c / total for labels, c in counts.items()}
    exact = {p.labels: float(q) for p, q in zip(partitions, probs)}
    keys = set(emp) | set(exact)
    return 0.5 * math.fsum(abs(emp.get(k, 0.0) - exact.get(k, 0.0)) for k in keys)


def mfm_khat_for_dataset(dataset, config, rng) -> int:
    """Cluster count of the least-squares-selected draw for one dataset."""
    draws = run_mfm(dataset, config, rng)
    selected, _ = dahl_select(draws)
    return selected.k

"""Empirical probe of posterior concentration on the true cluster count as
the number of cohorts grows."""

import math
import os
from dataclasses import dataclass

from .data import CohortData, MfmConfig, TrialDataset
from .mfm import run_mfm
from .rng import RngStream


@dataclass(frozen=True)
class ProbePoint:
    n_cohorts: int
    prob_true_k: float  # retained-draw frequency of k == true cluster count


def probe_consistency(
    cluster_rates: tuple,
    schedule: tuple,
    n_per_cohort: int,
    rng: RngStream,
    config: MfmConfig = MfmConfig(),
) -> list:
    """For each N in the schedule, build a dataset with equal-sized true
    clusters at the given rates, run the partition sampler, and record how
    often the retained draws hit the true cluster count."""
    k_true = len(cluster_rates)
    if len(set(cluster_rates)) != k_true:
        raise ValueError("cluster rates must be distinct")
    if any(schedule[i] >= schedule[i + 1] for i in range(len(schedule) - 1)):
        raise ValueError("schedule must be strictly increasing")
    points = []
    for idx, n_cohorts in enumerate(schedule):
        if n_cohorts % k_true != 0:
            raise ValueError(
                f"schedule entry {n_cohorts} is not divisible by {k_true} clusters"
            )
        per = n_cohorts // k_true
        data_rng = rng.split(2 * idx)
        cohorts = []
        for g, rate in enumerate(cluster_rates):
            rs = data_rng.gen.binomial(n_per_cohort, rate, size=per)
            cohorts.extend(
                CohortData(f"g{g + 1}_c{j + 1}", n_per_cohort, int(r))
                for j, r in enumerate(rs)
            )
        dataset = TrialDataset(tuple(cohorts))
        draws = run_mfm(dataset, config, rng.split(2 * idx + 1))
        hits = sum(1 for p in draws.partitions if p.k == k_true)
        points.append(ProbePoint(n_cohorts, hits / len(draws)))
    return points


def write_probe_csv(points, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("n_cohorts,prob_true_k\n")
        for p in points:
            fh.write(f"{p.n_cohorts},{p.prob_true_k!r}\n")

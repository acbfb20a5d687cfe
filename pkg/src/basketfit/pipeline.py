"""Two-step analysis: cluster cohorts by response rate, then fit the
hierarchical shrinkage model inside each cluster."""

from dataclasses import dataclass

import numpy as np

from .bhm import run_bhm, summarize
from .data import BhmConfig, MfmConfig, TrialDataset, validate
from .mfm import Partition, run_mfm
from .rng import RngStream
from .summary import dahl_select, k_hat, mean_membership


@dataclass(frozen=True)
class PtPolicy:
    """How step two picks each cohort's benchmark rate.

    mode "fixed": use the cohort's own p_t when present, else ``default``.
    mode "cluster-rate": benchmark every cohort at its cluster's pooled
    smoothed response rate (ignores per-cohort p_t).
    """

    default: float = 0.15
    mode: str = "fixed"

    def __post_init__(self):
        if not (0.0 < self.default < 1.0):
            raise ValueError("default benchmark must lie in (0, 1)")
        if self.mode not in ("fixed", "cluster-rate"):
            raise ValueError(f"unknown p_t policy mode: {self.mode!r}")

    def resolve(self, dataset: TrialDataset, partition: Partition) -> list:
        if self.mode == "fixed":
            return [c.p_t if c.p_t is not None else self.default
                    for c in dataset.cohorts]
        out = [None] * len(dataset)
        for members in partition.clusters():
            r_tot = sum(dataset.cohorts[i].r for i in members)
            n_tot = sum(dataset.cohorts[i].n for i in members)
            bench = (r_tot + 0.5) / (n_tot + 1.0)
            for i in members:
                out[i] = bench
        return out


@dataclass(frozen=True)
class TwoStepResult:
    partition: Partition
    estimates: list  # CohortEstimate per cohort, input order
    k_point: int
    k_pmf: dict
    coclustering: np.ndarray
    selected_index: int
    p_t: list


def run_two_step(
    dataset: TrialDataset,
    mfm_config: MfmConfig = MfmConfig(),
    bhm_config: BhmConfig = BhmConfig(iterations=8000, burn_in=2000),
    pt_policy: PtPolicy = PtPolicy(),
    rng: RngStream = None,
) -> TwoStepResult:
    """Cluster with the partition sampler, pick the representative partition by
    least-squares selection, then fit the shrinkage model per cluster.

    Singleton clusters run through the same hierarchical fit (the hierarchy
    collapses toward the prior-likelihood product), keeping one code path and
    one prior semantics for every cluster. Estimates come back in input
    cohort order, tagged with their cluster label.
    """
    errors = validate(dataset)
    if errors:
        raise ValueError("invalid dataset: " + "; ".join(errors))
    if rng is None:
        rng = RngStream(0)
    draws = run_mfm(dataset, mfm_config, rng.split(0))
    selected, idx = dahl_select(draws)
    k_point, pmf = k_hat(draws, selected)
    coclust = mean_membership(draws)
    p_t = pt_policy.resolve(dataset, selected)

    estimates = [None] * len(dataset)
    for label, members in enumerate(selected.clusters(), start=1):
        cohorts = [dataset.cohorts[i] for i in members]
        p_t_s = [p_t[i] for i in members]
        fit = run_bhm(cohorts, p_t_s, bhm_config, rng.split(label))
        for est, i in zip(summarize(fit, cohorts, p_t_s, [label] * len(members)), members):
            estimates[i] = est
    return TwoStepResult(
        partition=selected,
        estimates=estimates,
        k_point=k_point,
        k_pmf=pmf,
        coclustering=coclust,
        selected_index=idx,
        p_t=p_t,
    )

"""Collapsed Gibbs sampler for the mixture-of-finite-mixtures partition model.

One sweep alternates a conjugate refresh of the per-cluster response
probabilities with a restaurant-style reassignment pass whose new-cluster
weight is damped by the ratio of urn coefficients V_N(t+1) / V_N(t). The
damping is what prunes the tiny extraneous clusters a plain Chinese
restaurant process would keep creating.
"""

import math
from dataclasses import dataclass

import numpy as np

from .data import MfmConfig, TrialDataset, validate
from .kernel import log_beta, log_choose
from .rng import RngStream

SERIES_TOL = 1e-14
SERIES_CAP = 2000

# Conjugate Beta draws can round to 0.0 or 1.0; keep logs finite.
_P_LO = 1e-300
_P_HI = 1.0 - 1e-16


def canonical_labels(labels) -> tuple:
    """Relabel so cluster ids are 1..k in order of first appearance."""
    mapping = {}
    out = []
    for z in labels:
        if z not in mapping:
            mapping[z] = len(mapping) + 1
        out.append(mapping[z])
    return tuple(out)


@dataclass(frozen=True)
class Partition:
    """Cluster assignment over cohorts with canonical labels 1..k.

    Canonical means cohort 1 always sits in cluster 1 and new labels appear
    in order of first appearance, so equal set partitions compare equal.
    Build through :meth:`from_labels` to guarantee the invariant.
    """

    labels: tuple
    k: int

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        canon = canonical_labels(labels)
        if not canon:
            raise ValueError("partition needs at least one cohort")
        return cls(canon, max(canon))

    def clusters(self) -> list:
        """Member indices (0-based) per cluster, in label order."""
        out = [[] for _ in range(self.k)]
        for i, z in enumerate(self.labels):
            out[z - 1].append(i)
        return out

    def __len__(self):
        return len(self.labels)


def all_partitions(n: int):
    """Yield every set partition of n items as canonical label tuples."""
    if n < 1:
        raise ValueError("n must be >= 1")
    labels = [1] * n

    def rec(i, kmax):
        if i == n:
            yield tuple(labels)
            return
        for c in range(1, kmax + 2):
            labels[i] = c
            yield from rec(i + 1, max(kmax, c))

    yield from rec(1, 1)


@dataclass(frozen=True)
class VTable:
    """Precomputed ln V_N(t) urn coefficients for t = 1..N+1.

    ``log_v[t]`` holds ln V_N(t); index 0 is unused (NaN).
    """

    log_v: np.ndarray
    n: int
    gamma: float
    lam: float

    def log_ratio(self, t: int) -> float:
        """ln V_N(t+1) - ln V_N(t), the new-cluster damping at t occupied clusters."""
        return float(self.log_v[t + 1] - self.log_v[t])


def compute_v_table(n: int, gamma: float = 1.0, lam: float = 1.0) -> VTable:
    """Urn coefficients V_N(t) = sum_k falling(k, t) / rising(gamma*k, N) * p(k).

    p is a Poisson(lam) pmf truncated to {1, 2, ...}. Terms with k < t vanish
    (the falling factorial hits zero), so each series starts at k = t and is
    summed in log space until the next term's relative contribution drops
    below SERIES_TOL, with a hard cap at k = SERIES_CAP.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if gamma <= 0 or lam <= 0:
        raise ValueError("gamma and lam must be positive")
    log_lam = math.log(lam)
    log_trunc = math.log1p(-math.exp(-lam))
    lgamma = math.lgamma
    log_v = np.full(n + 2, np.nan)
    for t in range(1, n + 2):
        first = None
        acc = 0.0
        prev_rel = math.inf
        k = t
        while k <= SERIES_CAP:
            term = (
                lgamma(k + 1.0) - lgamma(k - t + 1.0)
                - (lgamma(gamma * k + n) - lgamma(gamma * k))
                - lam + k * log_lam - lgamma(k + 1.0) - log_trunc
            )
            if first is None:
                first = term
                acc = 1.0
            else:
                rel = math.exp(term - first)
                acc += rel
                # stop only once the terms are decreasing AND negligible
                if rel < prev_rel and rel < SERIES_TOL * acc:
                    break
                prev_rel = rel
            k += 1
        log_v[t] = first + math.log(acc)
    return VTable(log_v, n, gamma, lam)


def log_marginal(r: int, n: int, alpha: float = 1.0, beta: float = 1.0) -> float:
    """ln of the beta-binomial evidence C(n,r) B(r+alpha, n-r+beta) / B(alpha, beta)."""
    if n < 1 or not 0 <= r <= n:
        raise ValueError(f"log_marginal requires 0 <= r <= n, n >= 1, got r={r}, n={n}")
    return (
        log_choose(n, r)
        + log_beta(r + alpha, n - r + beta)
        - log_beta(alpha, beta)
    )


@dataclass(frozen=True)
class ClusterParams:
    """Per-cluster response probabilities, aligned with a Partition's labels."""

    p: np.ndarray


@dataclass(frozen=True)
class PartitionDraws:
    """Retained post-burn-in partitions plus the run's iteration metadata."""

    partitions: tuple
    iterations: int
    burn_in: int
    seed: tuple

    def __len__(self):
        return len(self.partitions)

    @property
    def n_cohorts(self) -> int:
        return len(self.partitions[0]) if self.partitions else 0

    def label_matrix(self) -> np.ndarray:
        return np.array([p.labels for p in self.partitions], dtype=np.int32)


def update_cluster_params(
    partition: Partition,
    dataset: TrialDataset,
    rng: RngStream,
    alpha: float = 1.0,
    beta: float = 1.0,
) -> ClusterParams:
    """Conjugate refresh: P_s ~ Beta(alpha + responders, beta + non-responders) per cluster."""
    k = partition.k
    r_sum = np.zeros(k)
    f_sum = np.zeros(k)
    for z, c in zip(partition.labels, dataset.cohorts):
        r_sum[z - 1] += c.r
        f_sum[z - 1] += c.n - c.r
    p = rng.gen.beta(alpha + r_sum, beta + f_sum)
    return ClusterParams(np.clip(p, _P_LO, _P_HI))


def existing_cluster_log_weight(size: int, gamma: float, r: int, n: int, p: float) -> float:
    """Reassignment weight for joining an occupied cluster with parameter p."""
    return (
        math.log(size + gamma)
        + log_choose(n, r)
        + r * math.log(p)
        + (n - r) * math.log1p(-p)
    )


def new_cluster_log_weight(
    vtable: VTable, t: int, gamma: float, r: int, n: int,
    alpha: float = 1.0, beta: float = 1.0,
) -> float:
    """Reassignment weight for opening a fresh cluster, with t clusters currently occupied."""
    return vtable.log_ratio(t) + math.log(gamma) + log_marginal(r, n, alpha, beta)


def _sweep(z, sizes, p, lp, l1p, r, f, log_m_red, log_size_g, log_v, log_gamma_w,
           gen, alpha, beta):
    """One in-place reassignment pass over all cohorts.

    z holds 0-based working labels; sizes/p/lp/l1p stay aligned with the live
    clusters. The shared ln C(n_i, r_i) factor cancels between the occupied-
    and new-cluster weights and is omitted from both.
    """
    n_items = len(z)
    us = gen.random(n_items)
    exp = math.exp
    log1p = math.log1p
    log = math.log
    for i in range(n_items):
        c = z[i]
        sizes[c] -= 1
        if sizes[c] == 0:
            # cluster died: drop its parameter and close the label gap
            sizes.pop(c)
            p.pop(c)
            lp.pop(c)
            l1p.pop(c)
            for j in range(n_items):
                if z[j] > c:
                    z[j] -= 1
        t = len(sizes)
        ri = r[i]
        fi = f[i]
        w = [0.0] * (t + 1)
        m = -math.inf
        for cc in range(t):
            wcc = log_size_g[sizes[cc]] + ri * lp[cc] + fi * l1p[cc]
            w[cc] = wcc
            if wcc > m:
                m = wcc
        wn = log_v[t + 1] - log_v[t] + log_gamma_w + log_m_red[i]
        w[t] = wn
        if wn > m:
            m = wn
        tot = 0.0
        for cc in range(t + 1):
            v = exp(w[cc] - m)
            w[cc] = v
            tot += v
        u = us[i] * tot
        acc = 0.0
        pick = t
        for cc in range(t + 1):
            acc += w[cc]
            if u < acc:
                pick = cc
                break
        if pick == t:
            z[i] = t
            sizes.append(1)
            pn = gen.beta(alpha + ri, beta + fi)
            pn = _P_LO if pn < _P_LO else (_P_HI if pn > _P_HI else pn)
            p.append(pn)
            lp.append(log(pn))
            l1p.append(log1p(-pn))
        else:
            z[i] = pick
            sizes[pick] += 1


def _working_state(partition: Partition, params: ClusterParams):
    z = [lbl - 1 for lbl in partition.labels]
    sizes = [0] * partition.k
    for lbl in z:
        sizes[lbl] += 1
    p = [float(v) for v in params.p]
    lp = [math.log(v) for v in p]
    l1p = [math.log1p(-v) for v in p]
    return z, sizes, p, lp, l1p


def _sweep_constants(dataset: TrialDataset, gamma: float, alpha: float, beta: float):
    r = [int(c.r) for c in dataset.cohorts]
    f = [int(c.n - c.r) for c in dataset.cohorts]
    lb0 = log_beta(alpha, beta)
    log_m_red = [log_beta(ri + alpha, fi + beta) - lb0 for ri, fi in zip(r, f)]
    log_size_g = [math.log(m + gamma) for m in range(len(r) + 1)]
    return r, f, log_m_red, log_size_g


def update_assignments(
    partition: Partition,
    params: ClusterParams,
    dataset: TrialDataset,
    vtable: VTable,
    rng: RngStream,
    gamma: float = 1.0,
    alpha: float = 1.0,
    beta: float = 1.0,
):
    """One reassignment pass; returns the new canonical Partition and its params.

    Cohorts are visited in input order. Removing a cohort can empty its
    cluster, in which case the cluster's parameter is discarded before the
    cohort chooses among the survivors or a fresh cluster whose parameter is
    drawn from its single-cohort posterior.
    """
    if len(params.p) != partition.k:
        raise ValueError("params are not aligned with the partition")
    z, sizes, p, lp, l1p = _working_state(partition, params)
    r, f, log_m_red, log_size_g = _sweep_constants(dataset, gamma, alpha, beta)
    log_v = [float(v) for v in vtable.log_v]
    _sweep(z, sizes, p, lp, l1p, r, f, log_m_red, log_size_g, log_v,
           math.log(gamma), rng.gen, alpha, beta)
    new_part = Partition.from_labels(z)
    # permute parameters into canonical label order
    order = {}
    for old in z:
        if old not in order:
            order[old] = len(order)
    p_canon = np.empty(new_part.k)
    for old, new in order.items():
        p_canon[new] = p[old]
    return new_part, ClusterParams(p_canon)


def run_mfm(dataset: TrialDataset, config: MfmConfig, rng: RngStream) -> PartitionDraws:
    """Run the collapsed sampler and retain every post-burn-in partition.

    The chain starts from ``init_clusters`` uniformly random labels
    (canonicalized) and alternates the conjugate parameter refresh with the
    reassignment pass for ``iterations`` sweeps.
    """
    errors = validate(dataset)
    if errors:
        raise ValueError("invalid dataset: " + "; ".join(errors))
    n_items = len(dataset)
    gamma, alpha, beta = config.gamma, config.alpha, config.beta
    vtable = compute_v_table(n_items, gamma, config.lam)
    log_v = [float(v) for v in vtable.log_v]
    log_gamma_w = math.log(gamma)
    r, f, log_m_red, log_size_g = _sweep_constants(dataset, gamma, alpha, beta)

    gen = rng.gen
    init = gen.integers(0, config.init_clusters, size=n_items)
    z = list(canonical_labels(init))
    z = [lbl - 1 for lbl in z]
    k = max(z) + 1
    sizes = [0] * k
    for lbl in z:
        sizes[lbl] += 1

    retained = []
    r_arr = np.array(r, dtype=float)
    f_arr = np.array(f, dtype=float)
    for it in range(config.iterations):
        k = len(sizes)
        r_sum = np.zeros(k)
        f_sum = np.zeros(k)
        for i in range(n_items):
            r_sum[z[i]] += r_arr[i]
            f_sum[z[i]] += f_arr[i]
        pvec = np.clip(gen.beta(alpha + r_sum, beta + f_sum), _P_LO, _P_HI)
        p = pvec.tolist()
        lp = np.log(pvec).tolist()
        l1p = np.log1p(-pvec).tolist()
        _sweep(z, sizes, p, lp, l1p, r, f, log_m_red, log_size_g, log_v,
               log_gamma_w, gen, alpha, beta)
        if it >= config.burn_in:
            retained.append(Partition.from_labels(z))
    return PartitionDraws(tuple(retained), config.iterations, config.burn_in, rng.key)

"""Post-MCMC inference on partition draws: Dahl selection and cluster-count summaries."""

from collections import Counter

import numpy as np

from .mfm import Partition, PartitionDraws


def membership(partition: Partition) -> np.ndarray:
    """N x N matrix with entry (i, j) = 1 iff cohorts i and j share a cluster."""
    z = np.asarray(partition.labels)
    return (z[:, None] == z[None, :]).astype(float)


def mean_membership(draws: PartitionDraws) -> np.ndarray:
    """Element-wise average of the draw membership matrices (co-clustering probabilities)."""
    if len(draws) == 0:
        raise ValueError("no retained draws")
    lab = draws.label_matrix()
    eq = lab[:, :, None] == lab[:, None, :]
    return eq.mean(axis=0)


def dahl_select(draws: PartitionDraws):
    """Pick the retained draw whose membership matrix is least-squares closest
    to the average membership matrix. Ties go to the smallest draw index."""
    if len(draws) == 0:
        raise ValueError("no retained draws")
    lab = draws.label_matrix()
    eq = lab[:, :, None] == lab[:, None, :]
    b_bar = eq.mean(axis=0)
    dist = ((eq - b_bar) ** 2).sum(axis=(1, 2))
    idx = int(np.argmin(dist))
    return draws.partitions[idx], idx


def k_hat(draws: PartitionDraws, selected: Partition):
    """Point estimate of the cluster count (k of the selected draw) plus the
    empirical pmf of k across all retained draws."""
    counts = Counter(p.k for p in draws.partitions)
    total = len(draws)
    pmf = {k: counts[k] / total for k in sorted(counts)}
    return selected.k, pmf

"""Domain model for basket-trial inputs and sampler configuration."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class CohortData:
    """One disease cohort: n enrolled patients, r responders.

    ``p_t`` is an optional per-cohort benchmark (null/control) response rate
    used by the hierarchical models to center the logit effect.
    """

    name: str
    n: int
    r: int
    p_t: float | None = None

    @property
    def raw_rate(self) -> float:
        return self.r / self.n


@dataclass(frozen=True)
class TrialDataset:
    """Ordered collection of cohorts; order is preserved in every report."""

    cohorts: tuple

    def __post_init__(self):
        object.__setattr__(self, "cohorts", tuple(self.cohorts))

    def __len__(self):
        return len(self.cohorts)

    @property
    def names(self) -> list:
        return [c.name for c in self.cohorts]

    @property
    def ns(self) -> np.ndarray:
        return np.array([c.n for c in self.cohorts], dtype=np.int64)

    @property
    def rs(self) -> np.ndarray:
        return np.array([c.r for c in self.cohorts], dtype=np.int64)


def validate(dataset: TrialDataset) -> list:
    """Collect every invariant violation; an empty list means the data are usable."""
    errors = []
    if len(dataset.cohorts) == 0:
        errors.append("empty dataset: at least one cohort is required")
        return errors
    seen = set()
    for idx, c in enumerate(dataset.cohorts, start=1):
        where = f"cohort {idx} ({c.name!r})"
        if not isinstance(c.n, (int, np.integer)) or isinstance(c.n, bool):
            errors.append(f"{where}: n must be an integer, got {c.n!r}")
            continue
        if not isinstance(c.r, (int, np.integer)) or isinstance(c.r, bool):
            errors.append(f"{where}: r must be an integer, got {c.r!r}")
            continue
        if c.n < 1:
            errors.append(f"{where}: n must be >= 1, got {c.n}")
        if c.r < 0:
            errors.append(f"{where}: r must be >= 0, got {c.r}")
        elif c.n >= 1 and c.r > c.n:
            errors.append(f"{where}: r exceeds n ({c.r} > {c.n})")
        if c.p_t is not None and not (0.0 < c.p_t < 1.0):
            errors.append(f"{where}: p_t must lie in (0, 1), got {c.p_t}")
        if c.name in seen:
            errors.append(f"{where}: duplicate cohort name")
        seen.add(c.name)
    return errors


def _require(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


@dataclass(frozen=True)
class MfmConfig:
    """Knobs for the partition sampler.

    gamma is the Dirichlet concentration, (alpha, beta) the Beta base measure,
    lam the rate of the positive-truncated Poisson prior on the component count.
    """

    gamma: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    lam: float = 1.0
    iterations: int = 5000
    burn_in: int = 2000
    init_clusters: int = 5

    def __post_init__(self):
        _require(self.gamma > 0, "gamma must be positive")
        _require(self.alpha > 0 and self.beta > 0, "alpha and beta must be positive")
        _require(self.lam > 0, "lam must be positive")
        _require(self.iterations > 0, "iterations must be positive")
        _require(0 <= self.burn_in < self.iterations, "burn_in must be < iterations")
        _require(self.init_clusters >= 1, "init_clusters must be >= 1")


@dataclass(frozen=True)
class BhmConfig:
    """Hierarchical shrinkage model: N(0, mu_prior_sd^2) on the hyper-mean,
    half-normal(tau_prior_scale) on the between-cohort standard deviation."""

    mu_prior_sd: float = 2.0
    tau_prior_scale: float = 1.0
    iterations: int = 10000
    burn_in: int = 2000

    def __post_init__(self):
        _require(self.mu_prior_sd > 0, "mu_prior_sd must be positive")
        _require(self.tau_prior_scale > 0, "tau_prior_scale must be positive")
        _require(self.iterations > 0, "iterations must be positive")
        _require(0 <= self.burn_in < self.iterations, "burn_in must be < iterations")


@dataclass(frozen=True)
class ExnexConfig:
    """Two-component mixture model configuration.

    Each cohort's logit rate is exchangeable (weight pi_ex) with hyperpriors
    mu ~ N(ex_mean, ex_sd^2), tau ~ half-normal(tau_scale), or nonexchangeable
    with a fixed N(nex_means[i], nex_vars[i]) prior. Unset fields default to
    weakly informative values derived from the plausible response guess
    ``p_guess``: ex_mean = logit(p_guess), nex mean logit(benchmark or
    p_guess), nex variance 1 / (p_guess * (1 - p_guess)) (roughly one
    observation of information).
    """

    pi_ex: float | tuple = 0.5
    p_guess: float = 0.2
    ex_mean: float | None = None
    ex_sd: float = 2.0
    tau_scale: float = 1.0
    nex_means: tuple | None = None
    nex_vars: tuple | None = None
    iterations: int = 10000
    burn_in: int = 2000

    def __post_init__(self):
        pis = self.pi_ex if isinstance(self.pi_ex, tuple) else (self.pi_ex,)
        _require(all(0.0 <= p <= 1.0 for p in pis), "pi_ex must lie in [0, 1]")
        _require(0.0 < self.p_guess < 1.0, "p_guess must lie in (0, 1)")
        _require(self.ex_sd > 0, "ex_sd must be positive")
        _require(self.tau_scale > 0, "tau_scale must be positive")
        if self.nex_vars is not None:
            _require(all(v > 0 for v in self.nex_vars), "nex_vars must be positive")
        _require(self.iterations > 0, "iterations must be positive")
        _require(0 <= self.burn_in < self.iterations, "burn_in must be < iterations")

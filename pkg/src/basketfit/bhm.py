"""Hierarchical shrinkage model for binomial cohorts, fit by adaptive
Metropolis-within-Gibbs.

Each cohort's effect is its logit response rate minus the logit of its
benchmark rate; effects are exchangeable draws from N(mu, tau^2) with a
normal hyperprior on mu and a half-normal prior on tau.
"""

import math
from dataclasses import dataclass

import numpy as np

from .data import BhmConfig
from .kernel import half_normal_logpdf, log_choose, logit, normal_logpdf
from .rng import RngStream

ACCEPT_TARGET = 0.44


@dataclass(frozen=True)
class BhmState:
    theta: np.ndarray
    mu: float
    tau: float


@dataclass(frozen=True)
class BhmDraws:
    """Retained (theta, mu, tau) draws plus adaptation diagnostics."""

    theta: np.ndarray  # (L, J)
    mu: np.ndarray  # (L,)
    tau: np.ndarray  # (L,)
    accept_rates: np.ndarray  # (J + 2,) post-burn-in, order: theta_1..theta_J, mu, tau
    proposal_scales: np.ndarray  # (J + 2,) frozen at end of burn-in
    iterations: int
    burn_in: int

    def __len__(self):
        return self.theta.shape[0]


@dataclass(frozen=True)
class CohortEstimate:
    """Posterior mean and equal-tailed 95% interval for one cohort's response rate."""

    name: str
    mean: float
    ci_low: float
    ci_high: float
    cluster: int | None = None


def _binom_loglik(x: float, r: float, f: float) -> float:
    """r * ln p + f * ln(1-p) at p = expit(x), without the binomial coefficient."""
    if x >= 0.0:
        lp = -math.log1p(math.exp(-x))
        l1p = lp - x
    else:
        l1p = -math.log1p(math.exp(x))
        lp = l1p + x
    return r * lp + f * l1p


def bhm_log_posterior(state: BhmState, cohorts, p_t, config: BhmConfig) -> float:
    """Joint log density of (theta, mu, tau) and the data, up to a constant.

    -inf at tau <= 0 (and in the tau -> 0 limit whenever any theta_j != mu).
    """
    if state.tau <= 0.0:
        return -math.inf
    total = 0.0
    for c, pt, th in zip(cohorts, p_t, state.theta):
        x = th + logit(pt)
        total += log_choose(c.n, c.r) + _binom_loglik(x, c.r, c.n - c.r)
        total += normal_logpdf(th, state.mu, state.tau)
    total += normal_logpdf(state.mu, 0.0, config.mu_prior_sd)
    total += half_normal_logpdf(state.tau, config.tau_prior_scale)
    return total


def run_bhm(cohorts, p_t, config: BhmConfig, rng: RngStream) -> BhmDraws:
    """Sample the posterior with per-coordinate Gaussian random walks.

    theta_j and mu move on their own scale; tau moves on the log scale with
    the matching Jacobian term. Proposal scales adapt toward a 0.44
    acceptance rate during burn-in (Robbins-Monro on the log scale) and are
    frozen afterwards, so every post-burn-in sweep uses identical scales.
    """
    n_cohorts = len(cohorts)
    if n_cohorts == 0:
        raise ValueError("at least one cohort is required")
    if len(p_t) != n_cohorts:
        raise ValueError("p_t must provide one benchmark per cohort")
    offs = [logit(pt) for pt in p_t]
    r = [float(c.r) for c in cohorts]
    f = [float(c.n - c.r) for c in cohorts]

    theta = [logit((ri + 0.5) / (ri + fi + 1.0)) - off
             for ri, fi, off in zip(r, f, offs)]
    mu = math.fsum(theta) / n_cohorts
    tau = 1.0
    mu_sd = config.mu_prior_sd
    tau_scale = config.tau_prior_scale

    n_coord = n_cohorts + 2
    log_scale = [0.0] * n_coord
    accept = [0] * n_coord
    kept = config.iterations - config.burn_in
    out_theta = np.empty((kept, n_cohorts))
    out_mu = np.empty(kept)
    out_tau = np.empty(kept)

    gen = rng.gen
    exp = math.exp
    log = math.log
    for it in range(config.iterations):
        zs = gen.standard_normal(n_coord)
        us = gen.random(n_coord)
        adapting = it < config.burn_in
        step = min(0.5, (it + 1.0) ** -0.6) if adapting else 0.0
        inv2tau2 = 0.5 / (tau * tau)

        for j in range(n_cohorts):
            cur = theta[j]
            prop = cur + exp(log_scale[j]) * zs[j]
            dcur = cur - mu
            dprop = prop - mu
            delta = (
                _binom_loglik(prop + offs[j], r[j], f[j])
                - _binom_loglik(cur + offs[j], r[j], f[j])
                - (dprop * dprop - dcur * dcur) * inv2tau2
            )
            acc = delta >= 0.0 or us[j] == 0.0 or log(us[j]) < delta
            if acc:
                theta[j] = prop
                if not adapting:
                    accept[j] += 1
            if adapting:
                log_scale[j] += step * ((1.0 if acc else 0.0) - ACCEPT_TARGET)

        sum_theta = math.fsum(theta)
        jm = n_cohorts
        prop_mu = mu + exp(log_scale[jm]) * zs[jm]
        delta = (
            (2.0 * (prop_mu - mu) * sum_theta + n_cohorts * (mu * mu - prop_mu * prop_mu))
            * inv2tau2
            + (mu * mu - prop_mu * prop_mu) / (2.0 * mu_sd * mu_sd)
        )
        acc = delta >= 0.0 or us[jm] == 0.0 or log(us[jm]) < delta
        if acc:
            mu = prop_mu
            if not adapting:
                accept[jm] += 1
        if adapting:
            log_scale[jm] += step * ((1.0 if acc else 0.0) - ACCEPT_TARGET)

        ss = math.fsum((th - mu) ** 2 for th in theta)
        jt = n_cohorts + 1
        phi = log(tau)
        prop_phi = phi + exp(log_scale[jt]) * zs[jt]
        prop_tau = exp(prop_phi)
        delta = (
            -n_cohorts * (prop_phi - phi)
            - 0.5 * ss * (1.0 / (prop_tau * prop_tau) - 1.0 / (tau * tau))
            - (prop_tau * prop_tau - tau * tau) / (2.0 * tau_scale * tau_scale)
            + (prop_phi - phi)
        )
        acc = delta >= 0.0 or us[jt] == 0.0 or log(us[jt]) < delta
        if acc:
            tau = prop_tau
            if not adapting:
                accept[jt] += 1
        if adapting:
            log_scale[jt] += step * ((1.0 if acc else 0.0) - ACCEPT_TARGET)

        if it >= config.burn_in:
            out_theta[it - config.burn_in] = theta
            out_mu[it - config.burn_in] = mu
            out_tau[it - config.burn_in] = tau

    rates = np.array(accept, dtype=float) / max(kept, 1)
    return BhmDraws(
        theta=out_theta,
        mu=out_mu,
        tau=out_tau,
        accept_rates=rates,
        proposal_scales=np.exp(log_scale),
        iterations=config.iterations,
        burn_in=config.burn_in,
    )


def rate_draws(draws: BhmDraws, p_t) -> np.ndarray:
    """Response-rate draws: expit(theta_j + logit(p_t_j)), shape (L, J)."""
    offs = np.array([logit(pt) for pt in p_t])
    x = draws.theta + offs[None, :]
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def summarize(draws: BhmDraws, cohorts, p_t, clusters=None) -> list:
    """Posterior mean and equal-tailed 95% interval per cohort, in input order."""
    if len(draws) == 0:
        raise ValueError("no retained draws")
    p = rate_draws(draws, p_t)
    means = p.mean(axis=0)
    lo, hi = np.quantile(p, [0.025, 0.975], axis=0)
    if clusters is None:
        clusters = [None] * len(cohorts)
    return [
        CohortEstimate(c.name, float(m), float(l), float(h), cl)
        for c, m, l, h, cl in zip(cohorts, means, lo, hi, clusters)
    ]

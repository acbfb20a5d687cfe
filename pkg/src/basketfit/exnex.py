"""Two-component mixture comparator: each cohort's logit response rate is
either exchangeable with the others (shared normal with unknown mean and
scale) or nonexchangeable (fixed cohort-specific normal), with explicit
per-cohort component indicators kept in the chain.
"""

import math
from dataclasses import dataclass

import numpy as np

from .data import ExnexConfig, TrialDataset, validate
from .kernel import logit, normal_logpdf
from .rng import RngStream

ACCEPT_TARGET = 0.44


@dataclass(frozen=True)
class ExnexState:
    theta: np.ndarray
    delta: np.ndarray  # 1 = exchangeable, 0 = nonexchangeable
    mu: float
    tau: float


@dataclass(frozen=True)
class ExnexDraws:
    theta: np.ndarray  # (L, J)
    delta: np.ndarray  # (L, J) int8
    mu: np.ndarray
    tau: np.ndarray
    accept_rates: np.ndarray  # (J + 2,) theta_1..theta_J, mu, tau
    proposal_scales: np.ndarray
    iterations: int
    burn_in: int

    def __len__(self):
        return self.theta.shape[0]

    def ex_probability(self) -> np.ndarray:
        """Posterior probability of the exchangeable component per cohort."""
        return self.delta.mean(axis=0)


def ex_component_prob(pi: float, log_den_ex: float, log_den_nex: float) -> float:
    """Conditional probability that a cohort sits in the exchangeable component."""
    if pi <= 0.0:
        return 0.0
    if pi >= 1.0:
        return 1.0
    m = max(log_den_ex, log_den_nex)
    a = pi * math.exp(log_den_ex - m)
    b = (1.0 - pi) * math.exp(log_den_nex - m)
    return a / (a + b)


def resolve_hyperparams(config: ExnexConfig, dataset: TrialDataset):
    """Fill per-cohort defaults from the plausible guess and any benchmarks."""
    n = len(dataset)
    if isinstance(config.pi_ex, tuple):
        if len(config.pi_ex) != n:
            raise ValueError("pi_ex tuple must have one entry per cohort")
        pi = [float(p) for p in config.pi_ex]
    else:
        pi = [float(config.pi_ex)] * n
    guess_logit = logit(config.p_guess)
    ex_mean = guess_logit if config.ex_mean is None else float(config.ex_mean)
    if config.nex_means is None:
        nex_means = [
            logit(c.p_t) if c.p_t is not None else guess_logit
            for c in dataset.cohorts
        ]
    else:
        if len(config.nex_means) != n:
            raise ValueError("nex_means must have one entry per cohort")
        nex_means = [float(m) for m in config.nex_means]
    if config.nex_vars is None:
        nex_vars = [1.0 / (config.p_guess * (1.0 - config.p_guess))] * n
    else:
        if len(config.nex_vars) != n:
            raise ValueError("nex_vars must have one entry per cohort")
        nex_vars = [float(v) for v in config.nex_vars]
    return pi, ex_mean, nex_means, nex_vars


def _binom_loglik(x: float, r: float, f: float) -> float:
    if x >= 0.0:
        lp = -math.log1p(math.exp(-x))
        l1p = lp - x
    else:
        l1p = -math.log1p(math.exp(x))
        lp = l1p + x
    return r * lp + f * l1p


def run_exnex(dataset: TrialDataset, config: ExnexConfig, rng: RngStream) -> ExnexDraws:
    """Gibbs over component indicators, random-walk Metropolis elsewhere.

    Indicators are drawn from their conditional Bernoulli given the current
    effect and both component densities; mu and tau see only the cohorts
    currently in the exchangeable component. Proposal scales adapt toward
    0.44 acceptance during burn-in and freeze afterwards.
    """
    errors = validate(dataset)
    if errors:
        raise ValueError("invalid dataset: " + "; ".join(errors))
    n_cohorts = len(dataset)
    pi, ex_mean, nex_means, nex_vars = resolve_hyperparams(config, dataset)
    log_pi = [math.log(p) if p > 0.0 else -math.inf for p in pi]
    log_1mpi = [math.log1p(-p) if p < 1.0 else -math.inf for p in pi]
    nex_sd = [math.sqrt(v) for v in nex_vars]
    b_sd = config.ex_sd
    tau_scale = config.tau_scale
    r = [float(c.r) for c in dataset.cohorts]
    f = [float(c.n - c.r) for c in dataset.cohorts]

    theta = [logit((ri + 0.5) / (ri + fi + 1.0)) for ri, fi in zip(r, f)]
    delta = [1 if p >= 0.5 else 0 for p in pi]
    mu = math.fsum(theta) / n_cohorts
    tau = 1.0

    n_coord = n_cohorts + 2
    log_scale = [0.0] * n_coord
    accept = [0] * n_coord
    kept = config.iterations - config.burn_in
    out_theta = np.empty((kept, n_cohorts))
    out_delta = np.empty((kept, n_cohorts), dtype=np.int8)
    out_mu = np.empty(kept)
    out_tau = np.empty(kept)

    gen = rng.gen
    exp = math.exp
    log = math.log
    for it in range(config.iterations):
        zs = gen.standard_normal(n_coord)
        us = gen.random(n_coord)
        ud = gen.random(n_cohorts)
        adapting = it < config.burn_in
        step = min(0.5, (it + 1.0) ** -0.6) if adapting else 0.0

        # component indicators: conditional Bernoulli
        for j in range(n_cohorts):
            if pi[j] <= 0.0:
                delta[j] = 0
                continue
            if pi[j] >= 1.0:
                delta[j] = 1
                continue
            lex = log_pi[j] + normal_logpdf(theta[j], mu, tau)
            lnex = log_1mpi[j] + normal_logpdf(theta[j], nex_means[j], nex_sd[j])
            m = lex if lex > lnex else lnex
            a = exp(lex - m)
            b = exp(lnex - m)
            delta[j] = 1 if ud[j] * (a + b) < a else 0

        inv2tau2 = 0.5 / (tau * tau)
        for j in range(n_cohorts):
            cur = theta[j]
            prop = cur + exp(log_scale[j]) * zs[j]
            if delta[j] == 1:
                dp = prop - mu
                dc = cur - mu
                prior_delta = -(dp * dp - dc * dc) * inv2tau2
            else:
                dp = prop - nex_means[j]
                dc = cur - nex_means[j]
                prior_delta = -(dp * dp - dc * dc) * (0.5 / nex_vars[j])
            d = (
                _binom_loglik(prop, r[j], f[j])
                - _binom_loglik(cur, r[j], f[j])
                + prior_delta
            )
            acc = d >= 0.0 or us[j] == 0.0 or log(us[j]) < d
            if acc:
                theta[j] = prop
                if not adapting:
                    accept[j] += 1
            if adapting:
                log_scale[j] += step * ((1.0 if acc else 0.0) - ACCEPT_TARGET)

        ex_members = [j for j in range(n_cohorts) if delta[j] == 1]
        n_ex = len(ex_members)
        sum_ex = math.fsum(theta[j] for j in ex_members)

        jm = n_cohorts
        prop_mu = mu + exp(log_scale[jm]) * zs[jm]
        d = (
            (2.0 * (prop_mu - mu) * sum_ex + n_ex * (mu * mu - prop_mu * prop_mu))
            * inv2tau2
            + ((mu - ex_mean) ** 2 - (prop_mu - ex_mean) ** 2) / (2.0 * b_sd * b_sd)
        )
        acc = d >= 0.0 or us[jm] == 0.0 or log(us[jm]) < d
        if acc:
            mu = prop_mu
            if not adapting:
                accept[jm] += 1
        if adapting:
            log_scale[jm] += step * ((1.0 if acc else 0.0) - ACCEPT_TARGET)

        ss_ex = math.fsum((theta[j] - mu) ** 2 for j in ex_members)
        jt = n_cohorts + 1
        phi = log(tau)
        prop_phi = phi + exp(log_scale[jt]) * zs[jt]
        prop_tau = exp(prop_phi)
        d = (
            -n_ex * (prop_phi - phi)
            - 0.5 * ss_ex * (1.0 / (prop_tau * prop_tau) - 1.0 / (tau * tau))
            - (prop_tau * prop_tau - tau * tau) / (2.0 * tau_scale * tau_scale)
            + (prop_phi - phi)
        )
        acc = d >= 0.0 or us[jt] == 0.0 or log(us[jt]) < d
        if acc:
            tau = prop_tau
            if not adapting:
                accept[jt] += 1
        if adapting:
            log_scale[jt] += step * ((1.0 if acc else 0.0) - ACCEPT_TARGET)

        if it >= config.burn_in:
            idx = it - config.burn_in
            out_theta[idx] = theta
            out_delta[idx] = delta
            out_mu[idx] = mu
            out_tau[idx] = tau

    rates = np.array(accept, dtype=float) / max(kept, 1)
    return ExnexDraws(
        theta=out_theta,
        delta=out_delta,
        mu=out_mu,
        tau=out_tau,
        accept_rates=rates,
        proposal_scales=np.exp(log_scale),
        iterations=config.iterations,
        burn_in=config.burn_in,
    )


def summarize_exnex(draws: ExnexDraws, dataset: TrialDataset) -> list:
    """Posterior mean and equal-tailed 95% interval for each cohort's rate."""
    from .bhm import CohortEstimate

    if len(draws) == 0:
        raise ValueError("no retained draws")
    x = draws.theta
    p = np.empty_like(x)
    pos = x >= 0
    p[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    p[~pos] = ex / (1.0 + ex)
    means = p.mean(axis=0)
    lo, hi = np.quantile(p, [0.025, 0.975], axis=0)
    return [
        CohortEstimate(c.name, float(m), float(l), float(h), None)
        for c, m, l, h in zip(dataset.cohorts, means, lo, hi)
    ]

"""Log-space special functions, densities, and variate generation for the samplers."""

import math

import numpy as np

from .rng import RngStream

LOG_2PI = math.log(2.0 * math.pi)


def log_gamma(x) -> float:
    """ln Gamma(x) for finite x > 0."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"log_gamma requires finite x > 0, got {x}")
    return math.lgamma(x)


def log_beta(a, b) -> float:
    """ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a+b)."""
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def log_choose(n: int, r: int) -> float:
    """ln of the binomial coefficient C(n, r), 0 <= r <= n."""
    if r < 0 or r > n:
        raise ValueError(f"log_choose requires 0 <= r <= n, got r={r}, n={n}")
    return math.lgamma(n + 1) - math.lgamma(r + 1) - math.lgamma(n - r + 1)


def logit(p) -> float:
    """log(p / (1-p)) for p strictly inside (0, 1)."""
    p = float(p)
    if not (0.0 < p < 1.0):
        raise ValueError(f"logit requires 0 < p < 1, got {p}")
    return math.log(p / (1.0 - p))


def expit(x) -> float:
    """Inverse of logit, evaluated stably for large |x|."""
    x = float(x)
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def binom_logpmf(r: int, n: int, p: float) -> float:
    """Binomial log-pmf; -inf where the outcome is impossible."""
    if not 0 <= r <= n:
        raise ValueError(f"binom_logpmf requires 0 <= r <= n, got r={r}, n={n}")
    if p <= 0.0:
        return 0.0 if r == 0 else -math.inf
    if p >= 1.0:
        return 0.0 if r == n else -math.inf
    return log_choose(n, r) + r * math.log(p) + (n - r) * math.log1p(-p)


def normal_logpdf(x: float, mean: float, sd: float) -> float:
    if sd <= 0.0:
        raise ValueError(f"normal_logpdf requires sd > 0, got {sd}")
    z = (x - mean) / sd
    return -0.5 * z * z - math.log(sd) - 0.5 * LOG_2PI


def half_normal_logpdf(x: float, scale: float) -> float:
    """Half-normal on (0, inf): 2 * N(x; 0, scale) for x > 0, else -inf."""
    if scale <= 0.0:
        raise ValueError(f"half_normal_logpdf requires scale > 0, got {scale}")
    if x <= 0.0:
        return -math.inf
    return math.log(2.0) + normal_logpdf(x, 0.0, scale)


def sample_beta(rng: RngStream, a: float, b: float) -> float:
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"sample_beta requires a, b > 0, got a={a}, b={b}")
    return float(rng.gen.beta(a, b))


def sample_normal(rng: RngStream, mean: float, sd: float) -> float:
    if sd <= 0.0:
        raise ValueError(f"sample_normal requires sd > 0, got {sd}")
    return float(rng.gen.normal(mean, sd))


def sample_half_normal(rng: RngStream, scale: float) -> float:
    if scale <= 0.0:
        raise ValueError(f"sample_half_normal requires scale > 0, got {scale}")
    return abs(float(rng.gen.normal(0.0, scale)))


def sample_uniform(rng: RngStream) -> float:
    return float(rng.gen.random())


def sample_categorical(rng: RngStream, log_weights) -> int:
    """Index i with probability proportional to exp(log_weights[i]).

    Normalizes in log space via the max-shift trick; entries may be -inf
    but at least one must be finite, and none may be NaN or +inf.
    """
    lw = np.asarray(log_weights, dtype=float)
    if lw.ndim != 1 or lw.size == 0:
        raise ValueError("log_weights must be a nonempty 1-D array")
    if np.isnan(lw).any() or np.isposinf(lw).any():
        raise ValueError("log_weights must be free of NaN and +inf")
    m = lw.max()
    if m == -math.inf:
        raise ValueError("all categorical weights are -inf")
    w = np.exp(lw - m)
    cum = np.cumsum(w)
    u = rng.gen.random() * cum[-1]
    idx = int(np.searchsorted(cum, u, side="right"))
    return min(idx, lw.size - 1)

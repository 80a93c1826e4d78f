"""Log-space arithmetic for small probabilities."""

import math

import numpy as np
from scipy.special import gammaln, logsumexp

NEG_INF = float("-inf")
LN10 = math.log(10.0)


def log_binom(n, k) -> float:
    """Natural log of C(n, k); -inf outside 0 <= k <= n."""
    if k < 0 or k > n:
        return NEG_INF
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def safe_log(x):
    """np.log that maps 0 to -inf without a warning. Accepts scalars and arrays."""
    with np.errstate(divide="ignore"):
        out = np.log(x)
    return float(out) if np.ndim(out) == 0 else out


def log_pow(log_base, exponent):
    """exponent * log_base with 0 ** 0 == 1."""
    if exponent == 0:
        return 0.0 if np.ndim(log_base) == 0 else np.zeros_like(log_base)
    return exponent * log_base


def log_add(*values):
    """log(sum(exp(v))) for scalars or broadcastable arrays."""
    out = values[0]
    for v in values[1:]:
        out = np.logaddexp(out, v)
    return float(out) if np.ndim(out) == 0 else out


def log_sum(values) -> float:
    """log-sum-exp of a sequence of scalar logs; -inf when empty or all -inf."""
    finite = [v for v in values if v != NEG_INF]
    if not finite:
        return NEG_INF
    return float(logsumexp(finite))


def clamp_log(value):
    """Cap a log-probability at 0."""
    if np.ndim(value) == 0:
        return min(0.0, float(value))
    return np.minimum(0.0, value)


def to_log10(value: float) -> float:
    return value / LN10


def format_log_probability(value: float):
    """Linear probability for JSON: a float, or a 'MeN' string below 1e-300."""
    if value == NEG_INF:
        return 0.0
    if value >= math.log(1e-300):
        return math.exp(value)
    log10 = to_log10(value)
    exponent = math.floor(log10)
    mantissa = round(10 ** (log10 - exponent), 6)
    if mantissa >= 10.0:
        mantissa, exponent = mantissa / 10, exponent + 1
    return f"{mantissa:.6f}e{exponent}"

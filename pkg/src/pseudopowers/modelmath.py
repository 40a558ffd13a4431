"""Closed-form constants of the pseudo s-th power model."""

import math

import numpy as np


def _check_s(s, smin=2):
    if int(s) != s or s < smin:
        raise ValueError(f"s must be an integer >= {smin}, got {s!r}")


def gamma_reciprocal_power(s: int) -> float:
    """Return Gamma(1/s)."""
    _check_s(s, smin=1)
    return math.gamma(1.0 / s)


def lambda_s(s: int) -> float:
    """Poisson parameter Gamma(1/s)^s / (s^s s!) of the representation counts."""
    _check_s(s)
    # log space keeps s^s and s! finite for large s
    log_val = s * math.log(gamma_reciprocal_power(s)) - s * math.log(s) - math.lgamma(s + 1)
    return math.exp(log_val)


def gap_constant(s: int) -> float:
    """Almost-sure limsup of (b_{n+1} - b_n) / log b_n, equal to 1 / lambda_s."""
    return 1.0 / lambda_s(s)


def membership_probability(n, s: int):
    """P(n in A) = n^(-1 + 1/s) / s.

    Accepts a scalar or an integer array; arrays are evaluated elementwise.
    """
    _check_s(s)
    arr = np.asarray(n)
    if np.any(arr < 1):
        raise ValueError("n must be >= 1")
    out = np.power(arr.astype(np.float64), -1.0 + 1.0 / s) / s
    if arr.ndim == 0:
        return float(out)
    return out


def poisson_pmf(lam: float, d):
    """Poisson(lam) mass at d, evaluated as exp(d log lam - lam - lgamma(d + 1))."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    arr = np.asarray(d)
    if np.any(arr < 0):
        raise ValueError("d must be non-negative")
    if arr.ndim == 0:
        k = int(arr)
        return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1))
    k = arr.astype(np.float64)
    log_fact = np.array([math.lgamma(x + 1.0) for x in k.ravel()]).reshape(k.shape)
    return np.exp(k * math.log(lam) - lam - log_fact)

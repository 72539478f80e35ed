"""Generalized exponential integrals and complex-vector norms.

The ergodic-rate closed forms need E_n(x) = int_1^inf exp(-x t)/t^n dt for
n up to the antenna count, always multiplied by exp(x).  To keep that product
finite for large x we work internally with the scaled function
Ê_n(x) = exp(x) * E_n(x).
"""

from __future__ import annotations

import math

import numpy as np

_EULER_GAMMA = 0.57721566490153286061
_MAX_ITER = 500
# Upward recurrence amplifies relative error by ~x/n per step; past this
# point each order is evaluated by its own continued fraction instead.
_RECURRENCE_X_MAX = 4.0


def _check_domain(n: int, x: float) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"order n must be an integer >= 1, got {n!r}")
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"argument x must be a finite positive real, got {x!r}")


def _e1_series(x: float) -> float:
    # E_1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!), for x <= 1
    total = -_EULER_GAMMA - math.log(x)
    term = 1.0
    for k in range(1, _MAX_ITER):
        term *= -x / k
        delta = -term / k
        total += delta
        if abs(delta) < 1e-18 * max(abs(total), 1e-30):
            return total
    raise RuntimeError(f"E_1 series did not converge for x={x}")


def _en_cf_scaled(n: int, x: float) -> float:
    # Modified Lentz continued fraction for exp(x)*E_n(x), valid for x > 1
    tiny = 1e-300
    b = x + n
    c = 1.0 / tiny
    d = 1.0 / b
    f = d
    for i in range(1, _MAX_ITER):
        a = -i * (n + i - 1)
        b += 2.0
        d = b + a * d
        if d == 0.0:
            d = tiny
        c = b + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            return f
    raise RuntimeError(f"E_{n} continued fraction did not converge for x={x}")


def _e1_scaled(x: float) -> float:
    if x <= 1.0:
        return math.exp(x) * _e1_series(x)
    return _en_cf_scaled(1, x)


def gen_exp_integral_scaled(n: int, x: float) -> float:
    """exp(x) * E_n(x); overflow-safe form used by the rate formulas."""
    _check_domain(n, x)
    if n == 1:
        return _e1_scaled(x)
    if x > _RECURRENCE_X_MAX:
        return _en_cf_scaled(n, x)
    # upward recurrence E_{k+1}(x) = (exp(-x) - x E_k(x)) / k, scaled by exp(x)
    val = _e1_scaled(x)
    for k in range(1, n):
        val = (1.0 - x * val) / k
    return val


def gen_exp_integral(n: int, x: float) -> float:
    """Generalized exponential integral E_n(x) for integer n >= 1, x > 0."""
    scaled = gen_exp_integral_scaled(n, x)
    return math.exp(-x) * scaled


def gen_exp_integral_scaled_sum(n_max: int, x: float) -> float:
    """sum_{n=1..n_max} exp(x) * E_n(x), accumulated in one recurrence pass."""
    _check_domain(n_max, x)
    if x > _RECURRENCE_X_MAX:
        return sum(_en_cf_scaled(n, x) if n > 1 else _e1_scaled(x)
                   for n in range(1, n_max + 1))
    val = _e1_scaled(x)
    total = val
    for k in range(1, n_max):
        val = (1.0 - x * val) / k
        total += val
    return total


def _as_vector(v) -> np.ndarray:
    arr = np.asarray(v)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("expected a non-empty 1-D vector")
    return arr


def norm_1(v) -> float:
    """Sum of entry moduli."""
    return float(np.sum(np.abs(_as_vector(v))))


def norm_2(v) -> float:
    """Root of the sum of squared entry moduli."""
    return float(np.linalg.norm(_as_vector(v)))


def norm_inf(v) -> float:
    """Largest entry modulus."""
    return float(np.max(np.abs(_as_vector(v))))

"""Gaussian tail function and its inverse.

``q_func`` is the upper tail P[Z >= x] of a standard normal Z. The
finite-blocklength literature writes this function as Phi; it is *not*
the CDF, so the names here are deliberately explicit.
"""

from __future__ import annotations

import math

from scipy.special import erfc, erfcx

SQRT2 = math.sqrt(2.0)
LN2 = math.log(2.0)
LOG2E = 1.0 / LN2
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Above this the plain erfc form starts losing relative accuracy.
_TAIL_SWITCH = 8.0


def q_func(x: float) -> float:
    """Upper tail probability of the standard normal at ``x``."""
    x = float(x)
    if math.isnan(x):
        raise ValueError("q_func: x is NaN")
    if x > _TAIL_SWITCH:
        # erfcx(t) = exp(t^2) erfc(t); exp(-x^2/2) underflows gracefully to 0.
        return 0.5 * float(erfcx(x / SQRT2)) * math.exp(-0.5 * x * x)
    return 0.5 * float(erfc(x / SQRT2))


def log_q_func(x: float) -> float:
    """Natural log of :func:`q_func`, finite for any finite ``x``."""
    x = float(x)
    if x > _TAIL_SWITCH:
        return math.log(0.5 * float(erfcx(x / SQRT2))) - 0.5 * x * x
    if x < -_TAIL_SWITCH:
        return math.log1p(-q_func(-x))
    return math.log(q_func(x))


def _normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x - _LOG_SQRT_2PI)


def _solve_upper_tail(log_p: float) -> float:
    """Return x >= 0 with log Q(x) = log_p, for log_p <= log(1/2)."""
    lo, hi = 0.0, 40.0
    while log_q_func(hi) > log_p:
        hi *= 2.0
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        if log_q_func(mid) > log_p:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10:
            break
    x = 0.5 * (lo + hi)
    # Newton on log Q: d/dx log Q(x) = -pdf(x)/Q(x)
    for _ in range(4):
        lq = log_q_func(x)
        slope = -math.exp(-0.5 * x * x - _LOG_SQRT_2PI - lq)
        step = (lq - log_p) / slope
        x_new = x - step
        if not (lo <= x_new <= hi):
            break
        x = x_new
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return x


def q_inv(p: float) -> float:
    """Inverse of :func:`q_func` on the open interval (0, 1).

    Antisymmetry ``q_inv(1 - p) == -q_inv(p)`` holds by construction:
    the upper half is solved through its complement.
    """
    p = float(p)
    if not (0.0 < p < 1.0):
        raise ValueError(f"q_inv: probability must lie in (0, 1), got {p!r}")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return _solve_upper_tail(math.log(p))
    return -_solve_upper_tail(math.log1p(-p))


def q_inv_log(log_p: float) -> float:
    """Inverse tail from a natural-log probability; reaches below 1e-308."""
    if not log_p < 0.0:
        raise ValueError("q_inv_log: log probability must be negative")
    if log_p <= -LN2:
        return _solve_upper_tail(log_p)
    return -_solve_upper_tail(math.log(-math.expm1(log_p)))

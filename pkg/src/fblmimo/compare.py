"""Closed-form ST vs TD comparison at high per-antenna SNR.

With per-link rate r and margin delta = log2(1 + rho) - r:

    eps_TD = Q(delta * sqrt(n) * ln 2)
    eps_ST = Q(delta * sqrt(m * n) * ln 2)

so the ST error depends on (m, n) only through m * n. Tails are handled in
natural-log space; error probabilities far below 1e-300 stay comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from .channel import OperatingPoint, SystemConfig
from .infodensity import Scheme, link_capacity, link_dispersion
from .special import LN2, log_q_func, q_inv

LN10 = math.log(10.0)


def normalized_penalty(m: int, n: int, epsilon: float, scheme) -> float:
    """Rate loss per link below log2(1 + rho)."""
    z = q_inv(epsilon) / LN2
    if Scheme.parse(scheme) is Scheme.ST:
        return z / math.sqrt(m * n)
    return z / math.sqrt(n)


def normalized_rate(cfg: SystemConfig, op: OperatingPoint, scheme) -> float:
    """Average maximal achievable rate per link (bits/use/link)."""
    return math.log2(1.0 + cfg.snr) - normalized_penalty(cfg.m, op.n, op.epsilon, scheme)


def margin(cfg: SystemConfig, per_link_rate: float) -> float:
    return math.log2(1.0 + cfg.snr) - per_link_rate


def _tail_argument(delta: float, m: int, n: int, scheme) -> float:
    uses = m * n if Scheme.parse(scheme) is Scheme.ST else n
    return delta * math.sqrt(uses) * LN2


def log_error_probability(cfg: SystemConfig, n: int, per_link_rate: float, scheme, m: int | None = None) -> float:
    """Natural log of the decoding error probability."""
    if per_link_rate < 0:
        raise ValueError("per-link rate must be nonnegative")
    if n < 1:
        raise ValueError("n must be >= 1")
    m = cfg.m if m is None else m
    return log_q_func(_tail_argument(margin(cfg, per_link_rate), m, n, scheme))


def error_probability(cfg: SystemConfig, n: int, per_link_rate: float, scheme, m: int | None = None) -> float:
    """Decoding error probability; values >= 0.5 mean the rate is at or above capacity.

    ``m`` overrides the spatial DoF of ``cfg`` (the antenna counts only enter
    through m and rho here).
    """
    return math.exp(log_error_probability(cfg, n, per_link_rate, scheme, m))


@dataclass(frozen=True)
class ComparisonPoint:
    cfg: SystemConfig
    n: int
    per_link_rate: float
    eps_st: float
    eps_td: float
    log10_eps_st: float
    log10_eps_td: float
    delta: float


def compare_point(cfg: SystemConfig, n: int, per_link_rate: float) -> ComparisonPoint:
    lst = log_error_probability(cfg, n, per_link_rate, Scheme.ST)
    ltd = log_error_probability(cfg, n, per_link_rate, Scheme.TD)
    return ComparisonPoint(cfg, n, per_link_rate, math.exp(lst), math.exp(ltd),
                           lst / LN10, ltd / LN10, margin(cfg, per_link_rate))


@dataclass(frozen=True)
class ExchangeSolution:
    solved_for: str
    value: int
    achieved_eps: float
    log_achieved_eps: float


class Unsatisfiable(ValueError):
    pass


def solve_exchange(cfg: SystemConfig, per_link_rate: float, target_eps: float | None,
                   solve_for: str, fixed_other: int, log_target: float | None = None,
                   limit: int = 1 << 62) -> ExchangeSolution:
    """Smallest n (or m) with ST error at most the target.

    The target can be given as a probability or as its natural log (for
    targets below the double-precision range).
    """
    if solve_for not in ("n", "m"):
        raise ValueError("solve_for must be 'n' or 'm'")
    if fixed_other < 1:
        raise ValueError("fixed_other must be >= 1")
    if log_target is None:
        if target_eps is None or not (0.0 < target_eps < 1.0):
            raise ValueError("target error must lie in (0, 1)")
        log_target = math.log(target_eps)
    delta = margin(cfg, per_link_rate)
    if delta <= 0.0:
        if log_target >= math.log(0.5) and delta == 0.0:
            pass
        else:
            raise Unsatisfiable(f"per-link rate {per_link_rate} is not below log2(1+rho); margin {delta:.6g}")

    def log_eps(k: int) -> float:
        m, n = (fixed_other, k) if solve_for == "n" else (k, fixed_other)
        return log_q_func(delta * math.sqrt(m * n) * LN2)

    if log_eps(1) <= log_target:
        best = 1
    else:
        hi = 2
        while log_eps(hi) > log_target:
            hi *= 2
            if hi > limit:
                raise Unsatisfiable("no solution below the search limit")
        lo = hi // 2  # log_eps(lo) > target
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if log_eps(mid) <= log_target:
                hi = mid
            else:
                lo = mid
        best = hi
    le = log_eps(best)
    return ExchangeSolution(solve_for, best, math.exp(le), le)


# -- Monte Carlo counterpart ---------------------------------------------------------------

def per_draw_error_probability(eigs, cfg: SystemConfig, n: int, per_link_rate: float, scheme):
    """Normal-approximation error of each channel draw at total rate m * r.

    ST codes all links jointly: Q((C - m r) sqrt(n / V_ST)). TD runs one code
    per link, and the frame fails if any link fails.
    """
    a = np.asarray(eigs, dtype=float) * cfg.a_scale
    c = link_capacity(a)
    v = link_dispersion(a)
    if Scheme.parse(scheme) is Scheme.ST:
        x = (np.sum(c, axis=1) - a.shape[1] * per_link_rate) * np.sqrt(n / np.sum(v, axis=1))
        return np.exp(log_ndtr(-x))
    x = (c - per_link_rate) * np.sqrt(n / v)
    log_success = np.sum(log_ndtr(x), axis=1)
    return -np.expm1(log_success)

"""Finite-blocklength bounds for a fixed channel realization.

All results are log2 M / n in bits per channel use. The finite-n bounds use
the Berry-Esseen constant B = 6 * theta / V^{3/2} of the per-use information
density; every argument of ``q_inv`` is written in terms of the error
probability epsilon (never the success probability 1 - epsilon).

For TD each of the m links carries its own code with target error epsilon,
so the finite-n TD bounds are per-link bounds summed over links.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .channel import OperatingPoint
from .infodensity import LinkStats, Scheme, SchemeStats
from .special import q_inv

NORMAL_APPROX = "normal_approx"
ACHIEVABILITY_ASYMPTOTIC = "achievability_asymptotic"
ACHIEVABILITY_FINITE = "achievability_finite"
CONVERSE_FINITE = "converse_finite"


@dataclass(frozen=True)
class RatePoint:
    n: int
    rate: float
    kind: str
    scheme: str
    feasible: bool = True
    note: str = ""
    slack: float = 0.0  # rate minus the normal approximation at the same (n, eps)


@dataclass(frozen=True)
class KappaPolicy:
    """Lower bound used for log2 kappa_tau in the achievability bound.

    ``tau``: log2 kappa = log2 tau. ``custom``: kappa >= ``value`` (a fixed
    constant K1 in (0, 1]).
    """

    kind: str = "tau"
    value: float | None = None

    @classmethod
    def parse(cls, text: str) -> "KappaPolicy":
        text = text.strip()
        if text == "tau":
            return cls("tau")
        match = re.fullmatch(r"custom:(.+)", text)
        if match:
            value = float(match.group(1))
            if not (0.0 < value <= 1.0):
                raise ValueError("custom kappa constant must lie in (0, 1]")
            return cls("custom", value)
        raise ValueError(f"unknown kappa policy {text!r}")

    def log2_kappa(self, tau: float) -> float:
        if self.kind == "tau":
            return math.log2(tau) if tau > 0 else 0.0
        return math.log2(self.value)

    def __str__(self):
        return "tau" if self.kind == "tau" else f"custom:{self.value!r}"


def berry_esseen_constant(theta: float, dispersion: float) -> float:
    if dispersion <= 0.0:
        return 0.0
    return 6.0 * theta / dispersion ** 1.5


def _scheme_name(stats: SchemeStats) -> str:
    return Scheme.parse(stats.scheme).value


def _link_be(link: LinkStats) -> float:
    return berry_esseen_constant(link.third_abs_moment, link.dispersion)


def scheme_be_constant(stats: SchemeStats) -> float:
    """B for ST; for TD the worst link decides feasibility, so its B is reported."""
    if Scheme.parse(stats.scheme) is Scheme.ST:
        return berry_esseen_constant(stats.third_abs_moment, stats.dispersion)
    return max((_link_be(l) for l in stats.per_link if l.dispersion > 0), default=0.0)


def normal_approx_rate(stats: SchemeStats, op: OperatingPoint) -> RatePoint:
    if stats.dispersion < 0:
        raise ValueError("dispersion must be nonnegative")
    rate = stats.capacity - math.sqrt(stats.dispersion / op.n) * q_inv(op.epsilon)
    return RatePoint(op.n, rate, NORMAL_APPROX, _scheme_name(stats), True, "negative" if rate < 0 else "")


def achievability_asymptotic(stats: SchemeStats, op: OperatingPoint) -> RatePoint:
    """The achievability bound with its tau and kappa corrections dropped."""
    point = normal_approx_rate(stats, op)
    return RatePoint(point.n, point.rate, ACHIEVABILITY_ASYMPTOTIC, point.scheme, True, point.note)


# -- converse ---------------------------------------------------------------------

def _converse_log_m(capacity, dispersion, B, n, eps, delta):
    """Upper bound on log2 M, or None when eps + (B + delta)/sqrt(n) >= 1."""
    if dispersion == 0.0:
        return n * capacity - math.log2(delta) + 0.5 * math.log2(n)
    shifted = eps + (B + delta) / math.sqrt(n)
    if shifted >= 1.0:
        return None
    return (n * capacity - math.sqrt(n * dispersion) * q_inv(shifted)
            - math.log2(delta) + 0.5 * math.log2(n))


def converse_finite(stats: SchemeStats, op: OperatingPoint, delta: float = 1.0) -> RatePoint:
    if not delta > 0:
        raise ValueError("delta must be positive")
    scheme = _scheme_name(stats)
    n, eps = op.n, op.epsilon
    if scheme == "ST":
        B = scheme_be_constant(stats)
        parts = [_converse_log_m(stats.capacity, stats.dispersion, B, n, eps, delta)]
    else:
        parts = [_converse_log_m(l.capacity, l.dispersion, _link_be(l), n, eps, delta)
                 for l in stats.per_link if l.dispersion > 0]
    if any(p is None for p in parts):
        return RatePoint(n, math.nan, CONVERSE_FINITE, scheme, False, "eps+(B+delta)/sqrt(n)>=1", math.nan)
    rate = math.fsum(parts) / n
    return RatePoint(n, rate, CONVERSE_FINITE, scheme, slack=rate - normal_approx_rate(stats, op).rate)


# -- achievability ------------------------------------------------------------------

def _achievability_log_m(capacity, dispersion, B, n, eps, policy):
    if dispersion == 0.0:
        return n * capacity
    tau = B / math.sqrt(n)
    shifted = eps - 2.0 * tau
    if shifted <= 0.0:
        return None
    return n * capacity - math.sqrt(n * dispersion) * q_inv(shifted) + policy.log2_kappa(tau)


def achievability_finite(stats: SchemeStats, op: OperatingPoint, kappa_policy: KappaPolicy | None = None) -> RatePoint:
    policy = kappa_policy or KappaPolicy()
    scheme = _scheme_name(stats)
    n, eps = op.n, op.epsilon
    if scheme == "ST":
        parts = [_achievability_log_m(stats.capacity, stats.dispersion, scheme_be_constant(stats), n, eps, policy)]
    else:
        parts = [_achievability_log_m(l.capacity, l.dispersion, _link_be(l), n, eps, policy)
                 for l in stats.per_link if l.dispersion > 0]
    if any(p is None for p in parts):
        return RatePoint(n, math.nan, ACHIEVABILITY_FINITE, scheme, False, "eps-2B/sqrt(n)<=0", math.nan)
    rate = math.fsum(parts) / n
    return RatePoint(n, rate, ACHIEVABILITY_FINITE, scheme, slack=rate - normal_approx_rate(stats, op).rate)


def achievability_min_blocklength(stats: SchemeStats, epsilon: float) -> int:
    """Smallest n at which the finite achievability bound is evaluable."""
    B = scheme_be_constant(stats)
    if B == 0.0:
        return 1
    # eps - 2B/sqrt(n) > 0  <=>  n > (2B/eps)^2
    n = max(1, int(math.floor((2.0 * B / epsilon) ** 2)))
    while epsilon - 2.0 * B / math.sqrt(n) <= 0.0:
        n += 1
    while n > 1 and epsilon - 2.0 * B / math.sqrt(n - 1) > 0.0:
        n -= 1
    return n


# -- TD error aggregation -----------------------------------------------------------

@dataclass(frozen=True)
class ErrorAggregate:
    exact: float
    approx: float
    qinv_rel_err: float


def td_error_aggregate(m: int, epsilon: float) -> ErrorAggregate:
    """Overall error of m independent links at per-link error epsilon.

    ``qinv_rel_err`` measures how far q_inv(eps) is from q_inv(m*eps).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    exact = -math.expm1(m * math.log1p(-epsilon))
    approx = m * epsilon
    if approx >= 1.0:
        return ErrorAggregate(exact, approx, math.nan)
    ref = q_inv(approx)
    rel = abs(q_inv(epsilon) - ref) / abs(ref) if ref != 0 else math.inf
    return ErrorAggregate(exact, approx, rel)


# -- validity diagnostics -------------------------------------------------------------

@dataclass(frozen=True)
class ValidityDiagnostics:
    berry_esseen_ratio: float
    dominance_ratio: float
    feasible: bool


def na_validity(stats: SchemeStats, op: OperatingPoint) -> ValidityDiagnostics:
    """How far the normal-approximation numerator dominates log2 n."""
    n, eps = op.n, op.epsilon
    B = scheme_be_constant(stats)
    ratio = B / math.sqrt(n)
    numerator = n * stats.capacity - math.sqrt(n * stats.dispersion) * q_inv(eps)
    log_n = math.log2(n)
    dominance = numerator / log_n if log_n > 0 else math.copysign(math.inf, numerator)
    return ValidityDiagnostics(ratio, dominance, eps - 2.0 * ratio > 0.0)


def berry_esseen_gap(stats: SchemeStats, n: int) -> float:
    """Berry-Esseen bound on |P[normalized sum >= t] - Q(t)| for n uses."""
    return scheme_be_constant(stats) / math.sqrt(n)


__all__ = [
    "RatePoint", "KappaPolicy", "ValidityDiagnostics", "ErrorAggregate",
    "normal_approx_rate", "achievability_asymptotic", "converse_finite",
    "achievability_finite", "achievability_min_blocklength", "td_error_aggregate",
    "na_validity", "berry_esseen_constant", "scheme_be_constant", "berry_esseen_gap",
]

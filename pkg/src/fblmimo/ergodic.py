"""Monte Carlo averages over Rayleigh channel draws and their high-SNR surrogates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import OperatingPoint, SystemConfig, sample_eigenvalues
from .infodensity import LOG2E_SQ, Scheme, link_capacity, link_dispersion
from .special import LN2, LOG2E, q_inv


class DivergentMomentError(ValueError):
    """E[tr(U^-2)] does not exist for |L - N| <= 1."""


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    trials: int
    seed: int

    @classmethod
    def of(cls, samples: np.ndarray, seed: int) -> "McEstimate":
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        return cls(float(np.mean(samples)), se, n, seed)


def _variance_estimate(samples: np.ndarray, seed: int) -> McEstimate:
    """Sample variance with a fourth-moment standard error."""
    n = samples.size
    centered = samples - samples.mean()
    s2 = float(np.sum(centered ** 2) / (n - 1))
    m4 = float(np.mean(centered ** 4))
    se = math.sqrt(max(m4 - s2 * s2, 0.0) / n)
    return McEstimate(s2, se, n, seed)


def per_draw_statistics(eigs: np.ndarray, cfg: SystemConfig) -> dict:
    """Per-draw capacity and dispersions for an array of eigenvalues (trials, m)."""
    a = np.asarray(eigs, dtype=float) * cfg.a_scale
    v = link_dispersion(a)
    sqrt_v = np.sqrt(v)
    return {
        "capacity": np.sum(link_capacity(a), axis=1),
        "dispersion_st": np.sum(v, axis=1),
        "sqrt_dispersion_td": np.sum(sqrt_v, axis=1),
        "dispersion_td": np.sum(sqrt_v, axis=1) ** 2,
        "taylor_sqrt_dispersion_td": np.sum(1.0 - 0.5 / (1.0 + a) ** 2, axis=1) * LOG2E,
    }


def high_snr_capacity(cfg: SystemConfig) -> float:
    return cfg.m * math.log2(1.0 + cfg.snr)


def high_snr_dispersion_st(cfg: SystemConfig) -> float:
    return cfg.m * LOG2E_SQ


def high_snr_sqrt_dispersion_td(cfg: SystemConfig) -> float:
    return cfg.m * LOG2E


@dataclass(frozen=True)
class ErgodicReport:
    cfg: SystemConfig
    e_capacity: McEstimate
    e_dispersion_st: McEstimate
    var_dispersion_st: McEstimate
    e_sqrt_dispersion_td: McEstimate
    e_dispersion_td: McEstimate
    e_taylor_sqrt_dispersion_td: McEstimate
    high_snr_capacity: float
    high_snr_dispersion_st: float
    high_snr_sqrt_dispersion_td: float
    wishart_sqrt_dispersion_td: float


def ergodic_report(cfg: SystemConfig, trials: int = 10_000, seed: int = 0, mapper=map, eigs=None) -> ErgodicReport:
    """Monte Carlo expectations over channel draws next to the closed forms.

    ``eigs`` may carry precomputed draws (shape (trials, m)) so SNR sweeps
    can reuse one set of channels.
    """
    if trials < 100:
        raise ValueError("at least 100 trials are required")
    if eigs is None:
        eigs = sample_eigenvalues(cfg.tx, cfg.rx, trials, seed, mapper)
    stats = per_draw_statistics(eigs, cfg)
    return ErgodicReport(
        cfg=cfg,
        e_capacity=McEstimate.of(stats["capacity"], seed),
        e_dispersion_st=McEstimate.of(stats["dispersion_st"], seed),
        var_dispersion_st=_variance_estimate(stats["dispersion_st"], seed),
        e_sqrt_dispersion_td=McEstimate.of(stats["sqrt_dispersion_td"], seed),
        e_dispersion_td=McEstimate.of(stats["dispersion_td"], seed),
        e_taylor_sqrt_dispersion_td=McEstimate.of(stats["taylor_sqrt_dispersion_td"], seed),
        high_snr_capacity=high_snr_capacity(cfg),
        high_snr_dispersion_st=high_snr_dispersion_st(cfg),
        high_snr_sqrt_dispersion_td=high_snr_sqrt_dispersion_td(cfg),
        wishart_sqrt_dispersion_td=wishart_sqrt_dispersion_td(cfg),
    )


def wishart_sqrt_dispersion_td(cfg: SystemConfig) -> float:
    """m log2(e) minus the inverse-Wishart correction (1/(1+a)^2 ~ (L/(rho lambda))^2).

    NaN when the inverse moment diverges.
    """
    inv = wishart_inverse_trace(cfg.tx, cfg.rx)
    if math.isinf(inv):
        return math.nan
    return (cfg.m - cfg.tx ** 2 / (2.0 * cfg.snr ** 2) * inv) * LOG2E


def high_snr_rate(cfg: SystemConfig, op: OperatingPoint, scheme) -> float:
    """Closed-form average maximal rate for rho/L >> 1."""
    scheme = Scheme.parse(scheme)
    m = cfg.m
    penalty = q_inv(op.epsilon) / LN2
    if scheme is Scheme.ST:
        return m * math.log2(1.0 + cfg.snr) - math.sqrt(m / op.n) * penalty
    return m * math.log2(1.0 + cfg.snr) - m / math.sqrt(op.n) * penalty


def per_draw_rates(eigs: np.ndarray, cfg: SystemConfig, op: OperatingPoint, scheme) -> np.ndarray:
    """Normal-approximation rate of each channel draw."""
    stats = per_draw_statistics(eigs, cfg)
    z = q_inv(op.epsilon)
    if Scheme.parse(scheme) is Scheme.ST:
        spread = np.sqrt(stats["dispersion_st"])
    else:
        spread = stats["sqrt_dispersion_td"]
    return stats["capacity"] - spread / math.sqrt(op.n) * z


def max_achievable_rate(cfg: SystemConfig, op: OperatingPoint, scheme, mode: str = "mc",
                        trials: int = 10_000, seed: int = 0, mapper=map, eigs=None):
    """Average maximal achievable rate: a float for ``high_snr``, an McEstimate for ``mc``."""
    if mode == "high_snr":
        return high_snr_rate(cfg, op, scheme)
    if mode != "mc":
        raise ValueError("mode must be 'mc' or 'high_snr'")
    if eigs is None:
        eigs = sample_eigenvalues(cfg.tx, cfg.rx, trials, seed, mapper)
    return McEstimate.of(per_draw_rates(eigs, cfg, op, scheme), seed)


# -- inverse Wishart moment --------------------------------------------------------------

def wishart_inverse_trace(tx: int, rx: int) -> float:
    """E[tr(U^-2)] for the m x m complex Wishart U built from an L x N Gaussian H.

    Returns ``inf`` when |L - N| <= 1 (the moment does not exist).
    """
    d = abs(tx - rx)
    if d <= 1:
        return math.inf
    return tx * rx / (d ** 3 - d)


def wishart_inverse_trace_mc(tx: int, rx: int, trials: int = 200_000, seed: int = 0, mapper=map) -> McEstimate:
    if abs(tx - rx) <= 1:
        raise DivergentMomentError(f"E[tr(U^-2)] diverges for L={tx}, N={rx}")
    eigs = sample_eigenvalues(tx, rx, trials, seed, mapper)
    return McEstimate.of(np.sum(eigs ** -2.0, axis=1), seed)

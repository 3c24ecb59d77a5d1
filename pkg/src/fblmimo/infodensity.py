"""Information-density statistics for the canonical Gaussian codeword.

With effective link SNR a = rho * lambda_i / L and W ~ CN(0, 1), one channel
use on link i contributes

    u = log2(1 + a) + (1 - |sqrt(a) W - 1|^2 / (1 + a)) * log2(e)

bits to the information density. Spatiotemporal (ST) coding sums these over
all links and channel uses; time-domain (TD) coding treats each link as its
own code. All quantities are in bits (bits^2, bits^3 for the moments).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import i0e

from .channel import MC_BLOCK, ChannelRealization, SystemConfig, block_sizes
from .rng import RngState, complex_gaussian_block
from .special import LOG2E

LOG2E_SQ = LOG2E * LOG2E
LOG2E_CUBE = LOG2E_SQ * LOG2E


class Scheme(str, enum.Enum):
    ST = "ST"
    TD = "TD"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        return cls(str(value).upper())


def link_capacity(a):
    return np.log1p(a) * LOG2E


def link_dispersion(a):
    """(1 - 1/(1+a)^2) log2(e)^2, written to stay accurate for tiny a."""
    a = np.asarray(a, dtype=float)
    return a * (2.0 + a) / (1.0 + a) ** 2 * LOG2E_SQ


# -- third absolute central moment ------------------------------------------------

def _rice_power_pdf(z, a):
    """Density of |sqrt(a) W - 1|^2, W ~ CN(0, 1)."""
    r = np.sqrt(z)
    return np.exp(-((r - 1.0) ** 2) / a) * i0e(2.0 * r / a) / a


def third_abs_moment(a: float) -> float:
    """E|u - C|^3 for one link, by quadrature over the per-use density."""
    a = float(a)
    if a < 0:
        raise ValueError("link SNR must be nonnegative")
    if a == 0.0:
        return 0.0
    mean = 1.0 + a
    s = math.sqrt(a * a + 2.0 * a) / mean  # std of Z/(1+a)

    def integrand(x):
        z = mean * (1.0 + s * x)
        return abs(x) ** 3 * _rice_power_pdf(z, a) * mean * s

    lo = max(-1.0 / s, -60.0)
    left, _ = integrate.quad(integrand, lo, 0.0, limit=400, epsabs=0.0, epsrel=1e-12)
    right, _ = integrate.quad(integrand, 0.0, 60.0, limit=400, epsabs=0.0, epsrel=1e-12,
                              points=[1.0, 5.0, 20.0])
    return (left + right) * s ** 3 * LOG2E_CUBE


def _centered_cumulants(a: np.ndarray, orders):
    """Cumulants of sum_i (Z_i/(1+a_i) - 1)."""
    out = {}
    for k in orders:
        out[k] = float(np.sum(math.factorial(k - 1) * a ** (k - 1) * (k + a) / (1.0 + a) ** k))
    return out


def aggregate_third_abs_moment(a_values) -> float:
    """E|sum_i (u_i - C_i)|^3 for independent links with SNRs ``a_values``.

    Uses |x|^3 = (12/pi) int_0^inf (cos(tx) - 1 + t^2 x^2 / 2) / t^4 dt with
    the closed-form characteristic function of each link.
    """
    a = np.asarray(a_values, dtype=float)
    if np.any(a < 0):
        raise ValueError("link SNRs must be nonnegative")
    a = a[a > 0]
    if a.size == 0:
        return 0.0
    k = _centered_cumulants(a, (2, 3, 4, 6))
    var = k[2]
    sigma = math.sqrt(var)
    mu4 = k[4] + 3 * var ** 2
    mu6 = k[6] + 15 * k[4] * var + 10 * k[3] ** 2 + 15 * var ** 3
    inv = 1.0 / (1.0 + a)

    def log_cf(t):
        s = t * inv
        return np.sum(1j * s / (1.0 - 1j * s * a) - np.log(1.0 - 1j * s * a) - 1j * t)

    def full(t):
        return (np.expm1(log_cf(t)).real + 0.5 * var * t * t) / t ** 4

    def osc(t):
        return np.exp(log_cf(t)).real / t ** 4

    t0 = 0.01 / sigma
    t1 = 2.0 / sigma
    # Series near the origin avoids the t^4 cancellation.
    head = mu4 / 24.0 * t0 - mu6 / 720.0 * t0 ** 3 / 3.0
    mid, _ = integrate.quad(full, t0, t1, limit=400, epsabs=0.0, epsrel=1e-12)
    tail = 0.0
    lo = t1
    # |cf| is nonincreasing in t, so |cf(T)| / (3 T^3) bounds everything past T.
    while True:
        hi = lo * 4.0
        part, _ = integrate.quad(osc, lo, hi, limit=2000, epsabs=1e-14 * sigma ** 3, epsrel=1e-11)
        tail += part
        lo = hi
        if abs(np.exp(log_cf(hi))) / (3.0 * hi ** 3) < 1e-15 * sigma ** 3 or hi > 1e7 / sigma:
            break
    # Smooth remainder of the integrand beyond t1, done analytically.
    tail += 0.5 * var / t1 - 1.0 / (3.0 * t1 ** 3)
    return (head + mid + tail) * 12.0 / math.pi * LOG2E_CUBE


# -- per-link and per-scheme statistics ---------------------------------------------

@dataclass(frozen=True)
class LinkStats:
    gain: float
    a: float
    capacity: float
    dispersion: float
    third_abs_moment: float


def link_stats(gain: float, cfg: SystemConfig) -> LinkStats:
    gain = float(gain)
    if gain < 0:
        raise ValueError("link gain must be nonnegative")
    a = cfg.a_scale * gain
    return LinkStats(gain, a, float(link_capacity(a)), float(link_dispersion(a)), third_abs_moment(a))


@dataclass(frozen=True)
class SchemeStats:
    """Aggregate statistics of one channel realization under a coding scheme.

    ``third_abs_moment`` is the Berry-Esseen moment of the per-use ST sum
    for ST; for TD each link is its own code, so the field holds the sum of
    per-link moments and the per-link values live in ``per_link``.
    """

    scheme: Scheme
    per_link: tuple = field(repr=False)
    capacity: float
    dispersion: float
    third_abs_moment: float

    @property
    def m(self) -> int:
        return len(self.per_link)


def _gains_of(ch) -> np.ndarray:
    if isinstance(ch, ChannelRealization):
        return np.asarray(ch.eigenvalues, dtype=float)
    return np.asarray(ch, dtype=float)


def scheme_stats(ch, cfg: SystemConfig, scheme) -> SchemeStats:
    """Capacity, dispersion and third moment of ``ch`` (a realization or its gains)."""
    scheme = Scheme.parse(scheme)
    gains = _gains_of(ch)
    if gains.ndim != 1 or len(gains) != cfg.m:
        raise ValueError(f"expected {cfg.m} eigenvalues for a {cfg.tx}x{cfg.rx} system, got {gains.shape}")
    links = tuple(link_stats(g, cfg) for g in gains)
    capacity = math.fsum(l.capacity for l in links)
    if scheme is Scheme.ST:
        dispersion = math.fsum(l.dispersion for l in links)
        theta = aggregate_third_abs_moment([l.a for l in links]) if len(links) > 1 else links[0].third_abs_moment
    else:
        if sum(l.dispersion > 0 for l in links) <= 1:
            dispersion = math.fsum(l.dispersion for l in links)  # exact: no sqrt round trip
        else:
            dispersion = math.fsum(math.sqrt(l.dispersion) for l in links) ** 2
        theta = math.fsum(l.third_abs_moment for l in links)
    return SchemeStats(scheme, links, capacity, dispersion, theta)


# -- sampling ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InfoDensitySample:
    value: float
    n: int
    scheme: str


def _per_use_terms(a: np.ndarray, W: np.ndarray) -> np.ndarray:
    """u for each (link, use); ``a`` broadcasts against the link axis of W."""
    z = np.abs(np.sqrt(a) * W - 1.0) ** 2
    return np.log1p(a) * LOG2E + (1.0 - z / (1.0 + a)) * LOG2E


def sample_info_density(ch, cfg: SystemConfig, scheme, n: int, rng: RngState, link: int = 0) -> InfoDensitySample:
    """One draw of the n-use information density.

    ST sums n*m per-use terms; TD draws the n terms of link ``link`` only.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    scheme = Scheme.parse(scheme)
    a = _gains_of(ch) * cfg.a_scale
    gen = rng.generator()
    if scheme is Scheme.ST:
        W = complex_gaussian_block(gen, (len(a), n))
        value = float(np.sum(_per_use_terms(a[:, None], W)))
        label = "ST"
    else:
        W = complex_gaussian_block(gen, (n,))
        value = float(np.sum(_per_use_terms(a[link], W)))
        label = f"TD-{link}"
    return InfoDensitySample(value, n, label)


def _density_block(args) -> np.ndarray:
    a, n, seed, block, count, method = args
    gen = RngState(seed, block).generator()
    if method == "direct":
        W = complex_gaussian_block(gen, (count, len(a), n))
        return np.sum(_per_use_terms(a[None, :, None], W), axis=(1, 2))
    # Exact aggregation: sum_j |sqrt(a) W_j - 1|^2 = (a/2) * ncx2(2n, 2n/a).
    total = np.zeros(count)
    for ai in a:
        if ai == 0:
            continue
        s = 0.5 * ai * gen.noncentral_chisquare(2 * n, 2.0 * n / ai, size=count)
        total += n * math.log1p(ai) * LOG2E + (n - s / (1.0 + ai)) * LOG2E
    return total


def info_density_samples(ch, cfg: SystemConfig, scheme, n: int, trials: int, seed: int,
                         link: int | None = None, method: str = "direct", mapper=map) -> np.ndarray:
    """``trials`` independent information-density draws (bits).

    ``method='direct'`` draws every per-use noise sample; ``'aggregate'`` uses
    the exact noncentral chi-square law of the per-link sums. Trial ``t``
    lives in stream ``t // MC_BLOCK`` of ``seed``.
    """
    if method not in ("direct", "aggregate"):
        raise ValueError("method must be 'direct' or 'aggregate'")
    scheme = Scheme.parse(scheme)
    a = _gains_of(ch) * cfg.a_scale
    if scheme is Scheme.TD:
        a = a[[0 if link is None else link]]
    jobs = [(a, n, seed, b, c, method) for b, c in enumerate(block_sizes(trials, MC_BLOCK))]
    return np.concatenate(list(mapper(_density_block, jobs)))

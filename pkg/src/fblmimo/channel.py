"""Quasi-static flat Rayleigh-fading MIMO channel.

The channel matrix H is L x N (transmit x receive) with i.i.d. CN(0, 1)
entries and is held fixed for a whole codeword. Everything downstream only
needs the m = min(L, N) nonzero eigenvalues of H^H H.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import batched_hermitian_eigenvalues, gram_small_side
from .rng import RngState, complex_gaussian_block, sample_complex_gaussian

# Trials per random stream in batched Monte Carlo. Part of the reproducibility
# contract: changing it changes every stochastic output.
MC_BLOCK = 1024


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts and linear SNR rho."""

    tx: int
    rx: int
    snr: float

    def __post_init__(self):
        if self.tx < 1 or self.rx < 1:
            raise ValueError("antenna counts must be >= 1")
        if not (self.snr > 0 and math.isfinite(self.snr)):
            raise ValueError("snr must be a positive finite linear ratio")

    @classmethod
    def from_db(cls, tx: int, rx: int, snr_db: float) -> "SystemConfig":
        return cls(tx, rx, db_to_linear(snr_db))

    @property
    def m(self) -> int:
        return min(self.tx, self.rx)

    @property
    def a_scale(self) -> float:
        """Per-antenna SNR rho / L."""
        return self.snr / self.tx

    @property
    def snr_db(self) -> float:
        return linear_to_db(self.snr)


@dataclass(frozen=True)
class OperatingPoint:
    n: int
    epsilon: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("blocklength must be a positive integer")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("target error must lie in (0, 1)")


@dataclass(frozen=True)
class ChannelRealization:
    H: np.ndarray
    eigenvalues: np.ndarray

    @property
    def m(self) -> int:
        return len(self.eigenvalues)


def gram_eigenvalues(H: np.ndarray) -> np.ndarray:
    """The m = min(L, N) eigenvalues of H^H H, descending.

    Negative round-off on a numerically singular Gram matrix is clipped to 0.
    """
    H = np.asarray(H)
    if H.ndim != 2:
        raise ValueError("H must be a 2-D matrix")
    w = batched_hermitian_eigenvalues(gram_small_side(H)[None])[0]
    return np.maximum(w, 0.0)


def sample_channel(cfg: SystemConfig, rng: RngState) -> ChannelRealization:
    H = sample_complex_gaussian(cfg.tx, cfg.rx, 1.0, rng)
    H.setflags(write=False)
    lam = gram_eigenvalues(H)
    lam.setflags(write=False)
    return ChannelRealization(H, lam)


def channel_from_eigenvalues(eigenvalues) -> ChannelRealization:
    """Diagonal channel with the given Gram eigenvalues (for fixtures)."""
    lam = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    if np.any(lam < 0):
        raise ValueError("eigenvalues must be nonnegative")
    H = np.diag(np.sqrt(lam)).astype(complex)
    return ChannelRealization(H, lam)


def _eigen_block(args) -> np.ndarray:
    tx, rx, seed, block, count = args
    gen = RngState(seed, block).generator()
    H = complex_gaussian_block(gen, (count, tx, rx))
    lam = batched_hermitian_eigenvalues(gram_small_side(H))
    return np.maximum(lam, 0.0)


def block_sizes(trials: int, block: int = MC_BLOCK):
    full, rest = divmod(trials, block)
    return [block] * full + ([rest] if rest else [])


def sample_eigenvalues(tx: int, rx: int, trials: int, seed: int, mapper=map) -> np.ndarray:
    """Eigenvalues of ``trials`` independent channel draws, shape (trials, m).

    Draw ``b`` uses stream ``b // MC_BLOCK``; ``mapper`` only changes where
    blocks are evaluated, never what they contain.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    jobs = [(tx, rx, seed, b, c) for b, c in enumerate(block_sizes(trials))]
    return np.concatenate(list(mapper(_eigen_block, jobs)), axis=0)

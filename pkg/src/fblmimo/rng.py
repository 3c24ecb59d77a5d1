"""Counter-based, splittable random streams.

An :class:`RngState` is a plain value. Turning it into a generator always
yields the same draws, and two states differing only in ``stream`` give
statistically independent sequences (Philox keyed by ``(seed, stream)``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngState:
    seed: int
    stream: int = 0

    def __post_init__(self):
        if not (0 <= self.seed <= _U64 and 0 <= self.stream <= _U64):
            raise ValueError("seed and stream must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=[self.seed, self.stream]))

    def substream(self, stream: int) -> "RngState":
        return RngState(self.seed, stream)

    def child(self, tag: int) -> "RngState":
        """Fresh seed derived from ``(seed, tag)`` for an unrelated purpose."""
        ss = np.random.SeedSequence([self.seed, tag, 0x5EED])
        return RngState(int(ss.generate_state(1, dtype=np.uint64)[0]), 0)


def sample_complex_gaussian(rows: int, cols: int, variance: float, rng: RngState) -> np.ndarray:
    """i.i.d. circularly symmetric complex Gaussian matrix, E|x|^2 = variance."""
    if variance <= 0:
        raise ValueError("variance must be positive")
    g = rng.generator()
    parts = g.standard_normal((2, rows, cols)) * np.sqrt(variance / 2.0)
    return parts[0] + 1j * parts[1]


def complex_gaussian_block(gen: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Same law as :func:`sample_complex_gaussian` for an arbitrary shape."""
    parts = gen.standard_normal((2,) + tuple(shape)) * np.sqrt(variance / 2.0)
    return parts[0] + 1j * parts[1]

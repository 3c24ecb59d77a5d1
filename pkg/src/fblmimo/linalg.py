"""Cyclic Jacobi eigenvalues for small complex Hermitian matrices.

Matrices are plain complex numpy arrays. The batched routine applies the
same (p, q) sweep order to a whole stack at once, which is what makes
Monte Carlo over 10^5 channel draws affordable without LAPACK.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_RTOL = 1e-12
_MAX_SWEEPS = 60


def _check_hermitian(G: np.ndarray) -> None:
    if G.ndim < 2 or G.shape[-1] != G.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {G.shape}")
    if G.shape[-1] == 0:
        raise ValueError("empty matrix")
    if not np.all(np.isfinite(G)):
        raise ValueError("matrix has non-finite entries")
    scale = np.max(np.abs(G)) if G.size else 0.0
    asym = np.max(np.abs(G - np.conj(np.swapaxes(G, -1, -2)))) if G.size else 0.0
    if asym > HERMITIAN_RTOL * max(scale, 1e-300):
        raise ValueError("matrix is not Hermitian within tolerance")


def batched_hermitian_eigenvalues(G: np.ndarray) -> np.ndarray:
    """Eigenvalues of a stack ``(..., k, k)`` of Hermitian matrices, descending."""
    G = np.asarray(G)
    _check_hermitian(G)
    k = G.shape[-1]
    batch_shape = G.shape[:-2]
    A = np.array(G, dtype=complex).reshape((-1, k, k))
    # Symmetrize so round-off never feeds an anti-Hermitian part into the rotations.
    A = 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))
    if k > 1:
        fro = np.sqrt(np.sum(np.abs(A) ** 2, axis=(1, 2)))
        thresh = 1e-15 * np.maximum(fro, 1e-300)
        off_mask = ~np.eye(k, dtype=bool)
        for _ in range(_MAX_SWEEPS):
            off = np.sqrt(np.sum(np.abs(A[:, off_mask]) ** 2, axis=1))
            todo = np.flatnonzero(off > thresh)
            if todo.size == 0:
                break
            sub = A[todo]
            for p in range(k - 1):
                for q in range(p + 1, k):
                    _rotate(sub, p, q, 1e-3 * thresh[todo])
            A[todo] = sub
        else:  # pragma: no cover - Jacobi converges quadratically
            raise RuntimeError("Jacobi iteration did not converge")
    w = np.real(np.diagonal(A, axis1=1, axis2=2)).copy()
    w = -np.sort(-w, axis=1)
    return w.reshape(batch_shape + (k,))


def _rotate(A: np.ndarray, p: int, q: int, negligible: np.ndarray) -> None:
    """Annihilate A[:, p, q] in place with one unitary plane rotation per matrix."""
    b = A[:, p, q]
    mag = np.abs(b)
    active = mag > negligible
    if not np.any(active):
        return
    safe = np.where(active, mag, 1.0)
    phase = np.where(active, b / safe, 1.0)  # e^{i phi}
    app = A[:, p, p].real
    aqq = A[:, q, q].real
    zeta = (aqq - app) / (2.0 * safe)
    t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
    t = np.where(active, t, 0.0)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    # U = diag(1, e^{-i phi}) on (p, q) followed by the real rotation [[c, s], [-s, c]].
    u_pp = c
    u_qp = -s * np.conj(phase)
    u_pq = s
    u_qq = c * np.conj(phase)
    cp = A[:, :, p].copy()
    cq = A[:, :, q].copy()
    A[:, :, p] = cp * u_pp[:, None] + cq * u_qp[:, None]
    A[:, :, q] = cp * u_pq[:, None] + cq * u_qq[:, None]
    rp = A[:, p, :].copy()
    rq = A[:, q, :].copy()
    A[:, p, :] = rp * np.conj(u_pp)[:, None] + rq * np.conj(u_qp)[:, None]
    A[:, q, :] = rp * np.conj(u_pq)[:, None] + rq * np.conj(u_qq)[:, None]
    A[:, p, q] = 0.0
    A[:, q, p] = 0.0


def hermitian_eigenvalues(G: np.ndarray) -> np.ndarray:
    """Real eigenvalues of one Hermitian matrix, sorted descending."""
    G = np.asarray(G)
    if G.ndim != 2:
        raise ValueError("expected a single 2-D matrix")
    return batched_hermitian_eigenvalues(G[None])[0]


def gram_small_side(H: np.ndarray) -> np.ndarray:
    """Gram matrix on the smaller side: H^H H if rows >= cols else H H^H.

    Works on a single matrix or a stack ``(..., rows, cols)``.
    """
    H = np.asarray(H)
    if H.ndim < 2 or H.shape[-1] == 0 or H.shape[-2] == 0:
        raise ValueError("empty or non-matrix input")
    Hh = np.conj(np.swapaxes(H, -1, -2))
    if H.shape[-2] >= H.shape[-1]:
        G = Hh @ H
    else:
        G = H @ Hh
    return 0.5 * (G + np.conj(np.swapaxes(G, -1, -2)))

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fblmimo.linalg import batched_hermitian_eigenvalues, gram_small_side, hermitian_eigenvalues


def random_hermitian(rng, k):
    A = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    return 0.5 * (A + A.conj().T)


def test_identity():
    assert np.array_equal(hermitian_eigenvalues(np.eye(3)), [1.0, 1.0, 1.0])


def test_diagonal():
    assert np.array_equal(hermitian_eigenvalues(np.diag([2.0, 5.0])), [5.0, 2.0])


@pytest.mark.parametrize("seed", range(5))
def test_trace_and_determinant(seed):
    G = random_hermitian(np.random.default_rng(seed), 4)
    w = hermitian_eigenvalues(G)
    # oracle: trace and determinant straight from the entries
    tr = np.trace(G).real
    det = np.linalg.det(G).real
    assert np.sum(w) == pytest.approx(tr, rel=1e-9, abs=1e-12)
    assert np.prod(w) == pytest.approx(det, rel=1e-9)


def test_matches_lapack_on_a_batch():
    rng = np.random.default_rng(1)
    G = np.stack([random_hermitian(rng, 5) for _ in range(300)])
    ours = batched_hermitian_eigenvalues(G)
    ref = np.linalg.eigvalsh(G)[:, ::-1]
    assert np.max(np.abs(ours - ref)) < 1e-12


def test_descending_order():
    G = random_hermitian(np.random.default_rng(3), 6)
    w = hermitian_eigenvalues(G)
    assert np.all(np.diff(w) <= 0)


@pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros((0, 0)), np.array([[1.0, 2.0], [0.0, 1.0]]),
                                 np.array([[np.nan, 0.0], [0.0, 1.0]])])
def test_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        hermitian_eigenvalues(bad)


def test_accepts_round_off_asymmetry():
    G = np.array([[2.0, 1.0 + 1e-14], [1.0, 2.0]])
    assert hermitian_eigenvalues(G) == pytest.approx([3.0, 1.0], rel=1e-12)


def test_tiny_off_diagonal_converges():
    G = np.array([[1.0, 1e-310], [1e-310, 1.0 + 1e-15]], dtype=complex)
    assert hermitian_eigenvalues(G) == pytest.approx([1.0, 1.0], rel=1e-14)


@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_gram_spectrum_psd_and_frobenius(rows, cols, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    w = hermitian_eigenvalues(gram_small_side(A))
    assert len(w) == min(rows, cols)
    assert np.all(w >= -1e-10 * np.sum(np.abs(w)))
    assert np.sum(w) == pytest.approx(np.sum(np.abs(A) ** 2), rel=1e-9)

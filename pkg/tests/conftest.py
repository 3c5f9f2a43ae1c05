import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hermitian2(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return a + a.conj().T


def random_psd4(rng):
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    d = g @ g.conj().T
    return d / np.linalg.eigvalsh(d)[-1]


def rank_by_elimination(m, tol=1e-10):
    """Rank via Gaussian elimination with partial pivoting (independent of LAPACK SVD)."""
    a = np.array(m, dtype=float)
    rank, rows, cols = 0, a.shape[0], a.shape[1]
    scale = max(np.max(np.abs(a)), 1.0)
    for c in range(cols):
        if rank == rows:
            break
        p = rank + int(np.argmax(np.abs(a[rank:, c])))
        if abs(a[p, c]) <= tol * scale:
            continue
        a[[rank, p]] = a[[p, rank]]
        a[rank + 1 :] -= np.outer(a[rank + 1 :, c] / a[rank, c], a[rank])
        rank += 1
    return rank

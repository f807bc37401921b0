"""Independent reference computations and random generators for the tests.

Nothing here calls the package's own eigensolver: spectra come from
``numpy.linalg.eigh`` and subspace dimensions from ``matrix_rank``.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

BELL_VECTORS = {
    "phi+": np.array([1, 0, 0, 1]) / math.sqrt(2),
    "phi-": np.array([1, 0, 0, -1]) / math.sqrt(2),
    "psi+": np.array([0, 1, 1, 0]) / math.sqrt(2),
    "psi-": np.array([0, 1, -1, 0]) / math.sqrt(2),
}


def proj(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def eigh_sqrt(m) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def eigh_support(m, tol=1e-9) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    cols = v[:, w > tol]
    return cols @ cols.conj().T


def rank_intersection(p, q) -> int:
    """dim(range p & range q) = rank p + rank q - rank [p q]."""
    rp = np.linalg.matrix_rank(p, tol=1e-8)
    rq = np.linalg.matrix_rank(q, tol=1e-8)
    return int(rp + rq - np.linalg.matrix_rank(np.hstack([p, q]), tol=1e-8))


def log_pool(dists, weights) -> np.ndarray:
    """exp(sum_i w_i log p_i) normalised; log 0 = -inf."""
    with np.errstate(divide="ignore"):
        logs = sum(w * np.log(np.asarray(d, float)) for w, d in zip(weights, dists))
    un = np.exp(logs)
    return un / un.sum()


# --- random objects --------------------------------------------------------------


def random_unitary(rng, n) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, n) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (z + z.conj().T) / 2


def random_psd(rng, n, rank=None) -> np.ndarray:
    rank = n if rank is None else rank
    z = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    return z @ z.conj().T


def random_psd_with_root(rng, n, rank=None):
    """``(Z Z^dagger, U S U^dagger)`` from the SVD ``Z = U S V^dagger``.

    The root is exact even for rank-deficient ``Z``, unlike an eigh-based
    root, which turns ~1e-16 noise eigenvalues into ~1e-8 entries.
    """
    rank = n if rank is None else rank
    z = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    u, s, _ = np.linalg.svd(z, full_matrices=False)
    return z @ z.conj().T, (u * s) @ u.conj().T


def random_density(rng, n, rank=None) -> np.ndarray:
    m = random_psd(rng, n, rank)
    return m / np.trace(m).real


def random_dist(rng, n, support=None) -> np.ndarray:
    """Dirichlet draw, zeroed outside ``support`` (an index list)."""
    p = rng.dirichlet(np.ones(n))
    if support is not None:
        mask = np.zeros(n, bool)
        mask[list(support)] = True
        p = np.where(mask, p, 0.0)
        p = p / p.sum()
    return p


def random_support(rng, n) -> list[int]:
    k = int(rng.integers(1, n + 1))
    return sorted(rng.choice(n, size=k, replace=False).tolist())


def random_pair(rng, n, compatible=None):
    """Two distributions on ``n`` outcomes with random supports."""
    while True:
        sa, sb = random_support(rng, n), random_support(rng, n)
        if compatible is None or bool(set(sa) & set(sb)) == compatible:
            return random_dist(rng, n, sa), random_dist(rng, n, sb)


def random_dominated_pair(rng, n=4):
    """(friend, wigner) with supp(wigner) inside supp(friend)."""
    rank_f = int(rng.integers(1, n + 1))
    basis = random_unitary(rng, n)[:, :rank_f]
    friend = basis @ np.diag(rng.dirichlet(np.ones(rank_f))) @ basis.conj().T
    rank_w = int(rng.integers(1, rank_f + 1))
    inner = random_density(rng, rank_f, rank_w)
    wigner = basis @ inner @ basis.conj().T
    return friend, wigner


# --- objective-compatibility witness search -------------------------------------


def objective_witness_exists(a0: float, b0: float, steps: int = 20, tol: float = 1e-9) -> bool:
    """Grid search for a joint P(Y, X1, X2) over binary Y, X1, X2 witnessing compatibility.

    Needs P(X1=0, X2=0) > 0, P(Y=0 | X1=0) = a0 and P(Y=0 | X2=0) = b0.
    ``q_ij = P(X1=i, X2=j)`` and ``r00 = P(Y=0 | X1=0, X2=0)`` are gridded;
    ``r01`` and ``r10`` then follow in closed form and must land in [0, 1].
    """
    grid = np.linspace(0.0, 1.0, steps + 1)
    for q00, q01, q10 in itertools.product(grid[1:], grid, grid):
        if q00 + q01 + q10 > 1 + 1e-12:
            continue
        for r00 in grid:
            if q01 > 0:
                r01 = (a0 * (q00 + q01) - q00 * r00) / q01
                ok_a = -tol <= r01 <= 1 + tol
            else:
                ok_a = abs(r00 - a0) <= tol
            if q10 > 0:
                r10 = (b0 * (q00 + q10) - q00 * r00) / q10
                ok_b = -tol <= r10 <= 1 + tol
            else:
                ok_b = abs(r00 - b0) <= tol
            if ok_a and ok_b:
                return True
    return False

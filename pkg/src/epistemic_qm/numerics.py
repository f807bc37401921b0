"""Dense complex-matrix primitives.

Everything here works on plain ``numpy`` arrays of dtype ``complex128``.
The Hermitian eigensolver is a self-contained cyclic Jacobi method so the
support computations do not depend on which LAPACK build is installed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NotHermitian, NotProjector, NotPSD

ATOL = 1e-10
RTOL = 1e-8
SUPPORT_TOL = 1e-9

TOL_ENV_VAR = "EPISTEMIC_QM_TOL"

_MAX_SWEEPS = 64


def default_tol() -> float:
    """Support cutoff, overridable through the ``EPISTEMIC_QM_TOL`` env var."""
    raw = os.environ.get(TOL_ENV_VAR)
    if raw is None or raw.strip() == "":
        return SUPPORT_TOL
    value = float(raw)
    if not value > 0:
        raise ValueError(f"{TOL_ENV_VAR} must be positive, got {raw!r}")
    return value


def as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimMismatch(f"expected a non-empty square matrix, got shape {arr.shape}")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def is_hermitian(m, atol: float = ATOL) -> bool:
    m = as_matrix(m)
    return bool(np.max(np.abs(m - dagger(m))) <= atol)


def is_unitary(u, rtol: float = RTOL) -> bool:
    u = as_matrix(u)
    return bool(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))) <= rtol)


def is_projector(p, rtol: float = RTOL) -> bool:
    p = as_matrix(p)
    return bool(
        np.max(np.abs(p - dagger(p))) <= rtol and np.max(np.abs(p @ p - p)) <= rtol
    )


def check_same_dim(*mats: np.ndarray) -> None:
    dims = {m.shape[0] for m in mats}
    if len(dims) > 1:
        raise DimMismatch(f"operator dimensions differ: {sorted(dims)}")


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition ``M = V diag(w) V^dagger`` with ``w`` descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)

    def __len__(self) -> int:
        return len(self.eigenvalues)


def fix_phase(v: np.ndarray) -> np.ndarray:
    # Largest-magnitude component made real-positive; first index wins near-ties.
    mags = np.abs(v)
    idx = int(np.argmax(mags >= mags.max() - 1e-12))
    if mags[idx] == 0.0:
        return v
    return v * (np.conj(v[idx]) / mags[idx])


def _jacobi(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Plain Python complex arithmetic: at the dims used here (<= 16) numpy's
    # per-call overhead on 2-element updates dominates the flops.
    n = m.shape[0]
    a = [[complex(x) for x in row] for row in m.tolist()]
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    scale = max(sum(abs(x) ** 2 for row in a for x in row) ** 0.5, 1e-300)
    for _ in range(_MAX_SWEEPS):
        off = sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n) if i != j) ** 0.5
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                c = a[p][q]
                mag = abs(c)
                if mag <= 1e-18 * scale:
                    continue
                phase_c = (c / mag).conjugate()
                tau = (a[q][q].real - a[p][p].real) / (2.0 * mag)
                if tau == 0.0:
                    t = 1.0
                else:
                    t = (1.0 if tau > 0 else -1.0) / (abs(tau) + (1.0 + tau * tau) ** 0.5)
                cs = 1.0 / (1.0 + t * t) ** 0.5
                sn = t * cs
                # rotation [[cs, sn], [-sn*phase_c, cs*phase_c]] applied as A <- R^dagger A R
                r10 = -sn * phase_c
                r11 = cs * phase_c
                r10c, r11c = r10.conjugate(), r11.conjugate()
                for row in a:
                    x, y = row[p], row[q]
                    row[p] = cs * x + r10 * y
                    row[q] = sn * x + r11 * y
                ap, aq = a[p], a[q]
                for k in range(n):
                    x, y = ap[k], aq[k]
                    ap[k] = cs * x + r10c * y
                    aq[k] = sn * x + r11c * y
                ap[q] = aq[p] = 0j
                ap[p] = complex(ap[p].real)
                aq[q] = complex(aq[q].real)
                for row in v:
                    x, y = row[p], row[q]
                    row[p] = cs * x + r10 * y
                    row[q] = sn * x + r11 * y
    return np.array([a[i][i].real for i in range(n)]), np.array(v, dtype=np.complex128)


def hermitian_eig(m) -> Spectrum:
    """Eigen-decompose a Hermitian matrix by cyclic Jacobi rotations.

    Eigenvalues come back sorted in descending order; every eigenvector has
    its largest-magnitude component made real and positive so repeated runs
    give identical output.

    Raises:
        NotHermitian: if ``m`` deviates from its adjoint by more than ATOL.
    """
    m = as_matrix(m)
    if not is_hermitian(m):
        raise NotHermitian("matrix is not Hermitian to ATOL")
    m = 0.5 * (m + dagger(m))
    w, v = _jacobi(m)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    v = np.column_stack([fix_phase(v[:, k]) for k in range(v.shape[1])])
    return Spectrum(eigenvalues=w, eigenvectors=v)


def _checked_spectrum(m) -> Spectrum:
    spec = hermitian_eig(m)
    if spec.eigenvalues[-1] < -ATOL:
        raise NotPSD(f"smallest eigenvalue {spec.eigenvalues[-1]:.3e} is below -ATOL")
    return spec


def psd_sqrt(m) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix.

    Eigenvalues in ``[-ATOL, 0)`` are treated as rounding noise and clamped,
    as are positive ones below the rounding floor ``n * eps * max|w|``: the
    square root would otherwise amplify that noise to ~1e-8.
    """
    spec = _checked_spectrum(m)
    w = spec.eigenvalues
    floor = len(w) * np.finfo(float).eps * max(float(np.max(np.abs(w))), 0.0)
    w = np.sqrt(np.where(w > floor, w, 0.0))
    r = (spec.eigenvectors * w) @ dagger(spec.eigenvectors)
    return 0.5 * (r + dagger(r))


def star_product(m, n) -> np.ndarray:
    """Return ``n^{1/2} m n^{1/2}``, the kernel of the quantum Bayes update."""
    m = as_matrix(m)
    n = as_matrix(n)
    check_same_dim(m, n)
    root = psd_sqrt(n)
    return root @ m @ root


def support_projector(m, tol: float | None = None) -> np.ndarray:
    """Orthogonal projector onto the eigenvectors of ``m`` with eigenvalue > tol."""
    tol = default_tol() if tol is None else tol
    spec = _checked_spectrum(m)
    cols = spec.eigenvectors[:, spec.eigenvalues > tol]
    p = cols @ dagger(cols)
    return 0.5 * (p + dagger(p))


def subspace_intersection_rank(p, q, tol: float = RTOL) -> int:
    """Dimension of ``range(p) & range(q)`` for two orthogonal projectors.

    ``p + q`` has eigenvalue 2 exactly on the intersection, so the rank is
    the multiplicity of that eigenvalue within ``tol``.
    """
    p = as_matrix(p)
    q = as_matrix(q)
    check_same_dim(p, q)
    for name, x in (("p", p), ("q", q)):
        if not is_projector(x):
            raise NotProjector(f"{name} is not an orthogonal projector")
    w = hermitian_eig(p + q).eigenvalues
    return int(np.sum(w > 2.0 - tol))


def intersection_basis(p, q, tol: float = RTOL) -> np.ndarray:
    """Orthonormal columns spanning ``range(p) & range(q)`` (possibly zero columns)."""
    rank = subspace_intersection_rank(p, q, tol)
    spec = hermitian_eig(as_matrix(p) + as_matrix(q))
    return spec.eigenvectors[:, :rank]

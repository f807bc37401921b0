"""Quantum Bayesian agents: density operators, measurements, updates.

Qubit order is (system S, friend memory F); the computational basis is
``|00>, |01>, |10>, |11>`` and CNOT is controlled on S. Bell-basis labels are
always in the order phi+, phi-, psi+, psi-.

Quantum pooling is deliberately absent: the multiplicative pool has no
unique quantum generalisation because the factors do not commute.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import numerics as nx
from .classical import BELL, BINARY, OutcomeSpace, ProbDist
from .errors import (
    DimMismatch,
    Incompatible,
    InvalidChannel,
    InvalidDistribution,
    NotPSD,
    NotPure,
    NotUnitary,
    UnsupportedDecomposition,
    ZeroEvidence,
)
from .numerics import ATOL, RTOL, dagger

TRACE_TOL = 1e-9
AGREE_TOL = 1e-9
CONTAINMENT_TOL = 1e-8

# --- standard gates and states -------------------------------------------

I2 = np.eye(2, dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)


def controlled_phase(phi: float) -> np.ndarray:
    return np.diag([1, 1, 1, np.exp(1j * phi)]).astype(np.complex128)


def sigma_y_evolution(omega_t: float) -> np.ndarray:
    """``exp(-i (omega t / 2) sigma_y)`` on a single qubit."""
    c, s = np.cos(omega_t / 2), np.sin(omega_t / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def basis_ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


_S2 = 1 / np.sqrt(2)
BELL_KETS = {
    "phi+": np.array([_S2, 0, 0, _S2], dtype=np.complex128),
    "phi-": np.array([_S2, 0, 0, -_S2], dtype=np.complex128),
    "psi+": np.array([0, _S2, _S2, 0], dtype=np.complex128),
    "psi-": np.array([0, _S2, -_S2, 0], dtype=np.complex128),
}


def ket_projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    v = v / np.linalg.norm(v)
    return np.outer(v, np.conj(v))


# --- types ------------------------------------------------------------------


def _readonly(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=np.complex128)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    matrix: np.ndarray
    label: str | None = None

    def __post_init__(self):
        m = nx.as_matrix(self.matrix)
        if not nx.is_hermitian(m):
            raise InvalidDistribution("density operator is not Hermitian")
        m = 0.5 * (m + dagger(m))
        if abs(np.trace(m).real - 1.0) > TRACE_TOL:
            raise InvalidDistribution(f"density operator has trace {np.trace(m).real!r}")
        if nx.hermitian_eig(m).eigenvalues[-1] < -ATOL:
            raise NotPSD("density operator has a negative eigenvalue")
        object.__setattr__(self, "matrix", _readonly(m))

    @classmethod
    def pure(cls, ket, label: str | None = None) -> "DensityOperator":
        return cls(ket_projector(ket), label)

    @classmethod
    def mixture(cls, weighted: Iterable[tuple[float, np.ndarray]], label: str | None = None):
        """Convex combination of already-normalised operators."""
        return cls(sum(w * np.asarray(m) for w, m in weighted), label)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def support(self, tol: float | None = None) -> np.ndarray:
        return nx.support_projector(self.matrix, tol)

    def rank(self, tol: float | None = None) -> int:
        return int(round(np.trace(self.support(tol)).real))

    def __repr__(self) -> str:
        name = f" {self.label!r}" if self.label else ""
        return f"DensityOperator{name}(dim={self.dim})"


def bell_state(label: str) -> DensityOperator:
    return DensityOperator.pure(BELL_KETS[label], label)


def diagonal_embedding(dist: ProbDist, label: str | None = None) -> DensityOperator:
    """Classical assignment as a diagonal operator on a register indexed by its outcomes."""
    return DensityOperator(np.diag(dist.probs).astype(np.complex128), label)


@dataclass(frozen=True, eq=False)
class PVM:
    """Projection-valued measure: labelled orthogonal projectors summing to 1."""

    labels: tuple[str, ...]
    effects: tuple[np.ndarray, ...]

    def __post_init__(self):
        effects = tuple(_readonly(nx.as_matrix(e)) for e in self.effects)
        if len(effects) != len(self.labels):
            raise InvalidDistribution("one projector per label is required")
        nx.check_same_dim(*effects)
        for lab, e in zip(self.labels, effects):
            if not nx.is_projector(e):
                raise InvalidDistribution(f"effect {lab!r} is not a projector")
        for i, a in enumerate(effects):
            for b in effects[i + 1 :]:
                if np.max(np.abs(a @ b)) > RTOL:
                    raise InvalidDistribution("PVM effects are not mutually orthogonal")
        if np.max(np.abs(sum(effects) - np.eye(effects[0].shape[0]))) > RTOL:
            raise InvalidDistribution("PVM effects do not sum to the identity")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "effects", effects)

    @property
    def space(self) -> OutcomeSpace:
        return OutcomeSpace(self.labels)


def bell_pvm() -> PVM:
    """Wigner's measurement in the Bell basis."""
    return PVM(BELL.labels, tuple(ket_projector(BELL_KETS[k]) for k in BELL.labels))


def computational_pvm(n_qubits: int = 1) -> PVM:
    dim = 2**n_qubits
    labels = tuple(format(i, f"0{n_qubits}b") for i in range(dim))
    return PVM(labels, tuple(ket_projector(basis_ket(i, dim)) for i in range(dim)))


@dataclass(frozen=True, eq=False)
class KrausChannel:
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(_readonly(nx.as_matrix(k)) for k in self.operators)
        if not ops:
            raise InvalidChannel("a channel needs at least one Kraus operator")
        try:
            nx.check_same_dim(*ops)
        except DimMismatch as exc:
            raise InvalidChannel(str(exc)) from None
        completeness = sum(dagger(k) @ k for k in ops)
        if np.max(np.abs(completeness - np.eye(ops[0].shape[0]))) > RTOL:
            raise InvalidChannel("Kraus operators are not trace preserving")
        object.__setattr__(self, "operators", ops)


def noisy_phase_channel(epsilon: float) -> KrausChannel:
    """``sqrt(1-eps) 1x1`` and ``sqrt(eps) sigma_z x 1``: flips phi+ into phi- with probability eps."""
    if not 0.0 <= epsilon <= 1.0:
        raise InvalidChannel(f"epsilon must lie in [0, 1], got {epsilon}")
    return KrausChannel(
        (
            np.sqrt(1 - epsilon) * np.kron(I2, I2),
            np.sqrt(epsilon) * np.kron(SIGMA_Z, I2),
        )
    )


def system_measurement_channel() -> KrausChannel:
    """Non-selective computational-basis measurement of the system qubit."""
    return KrausChannel(tuple(np.kron(ket_projector(basis_ket(i, 2)), I2) for i in range(2)))


@dataclass(frozen=True, eq=False)
class LikelihoodOperator:
    """Outcome-indexed PSD effects summing to the identity (a hybrid conditional state)."""

    outcome_space: OutcomeSpace
    effects: tuple[np.ndarray, ...]

    def __post_init__(self):
        space = (
            self.outcome_space
            if isinstance(self.outcome_space, OutcomeSpace)
            else OutcomeSpace(tuple(self.outcome_space))
        )
        effects = tuple(_readonly(nx.as_matrix(e)) for e in self.effects)
        if len(effects) != len(space):
            raise InvalidDistribution("one effect per outcome is required")
        nx.check_same_dim(*effects)
        for e in effects:
            if nx.hermitian_eig(e).eigenvalues[-1] < -ATOL:
                raise NotPSD("likelihood effect is not positive semidefinite")
        if np.max(np.abs(sum(effects) - np.eye(effects[0].shape[0]))) > RTOL:
            raise InvalidDistribution("likelihood effects do not sum to the identity")
        object.__setattr__(self, "outcome_space", space)
        object.__setattr__(self, "effects", effects)

    def effect(self, outcome: str) -> np.ndarray:
        return self.effects[self.outcome_space.index(outcome)]

    @classmethod
    def report(
        cls, effect, report_label: str = "report", other_label: str = "other"
    ) -> "LikelihoodOperator":
        """Two-outcome likelihood from the effect of a single announced report.

        The complementary effect ``1 - effect`` covers every other report.
        """
        e = nx.as_matrix(effect)
        return cls(OutcomeSpace((report_label, other_label)), (e, np.eye(e.shape[0]) - e))


@dataclass(frozen=True, eq=False)
class Branch:
    weight: float
    state: DensityOperator
    placeholder: bool = False


@dataclass(frozen=True, eq=False)
class HybridState:
    """Ensemble of density operators indexed by the classical pair (F, W).

    Zero-weight branches carry ``placeholder=True``: their operator is
    arbitrary and ignored by :meth:`equivalent`.
    """

    branches: dict[tuple[str, str], Branch]
    mixing: tuple[float, float] | None = None

    def __post_init__(self):
        total = sum(b.weight for b in self.branches.values())
        if abs(total - 1.0) > TRACE_TOL:
            raise InvalidDistribution(f"branch weights sum to {total!r}")
        nx.check_same_dim(*(b.state.matrix for b in self.branches.values()))

    @property
    def dim(self) -> int:
        return next(iter(self.branches.values())).state.dim

    def classical_marginal(self) -> dict[tuple[str, str], float]:
        return {k: b.weight for k, b in self.branches.items()}

    def matrix(self) -> np.ndarray:
        """Block-diagonal operator ``sum_fw P(f,w) rho_{S|f,w} (x) |fw><fw|``."""
        keys = sorted(self.branches)
        out = np.zeros((self.dim * len(keys),) * 2, dtype=np.complex128)
        for k in keys:
            fw = int(k[0]) * 2 + int(k[1])
            reg = ket_projector(basis_ket(fw, 4))
            b = self.branches[k]
            out += b.weight * np.kron(b.state.matrix, reg)
        return out

    def equivalent(self, other: "HybridState", tol: float = AGREE_TOL) -> bool:
        for key in set(self.branches) | set(other.branches):
            a = self.branches.get(key)
            b = other.branches.get(key)
            wa = a.weight if a else 0.0
            wb = b.weight if b else 0.0
            if abs(wa - wb) > tol:
                return False
            if wa > tol and np.max(np.abs(a.state.matrix - b.state.matrix)) > tol:
                return False
        return True


# --- operations ---------------------------------------------------------------


def _same_dim(*states: DensityOperator) -> None:
    nx.check_same_dim(*(s.matrix for s in states))


def _hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + dagger(m))


def born_probabilities(state: DensityOperator, pvm: PVM) -> ProbDist:
    if state.dim != pvm.effects[0].shape[0]:
        raise DimMismatch(f"state has dim {state.dim}, PVM acts on {pvm.effects[0].shape[0]}")
    probs = np.array([np.trace(e @ state.matrix).real for e in pvm.effects])
    return ProbDist(pvm.space, np.clip(probs, 0.0, 1.0))


def evolve_unitary(state: DensityOperator, u) -> DensityOperator:
    u = nx.as_matrix(u)
    if u.shape != state.matrix.shape:
        raise DimMismatch(f"unitary is {u.shape}, state is {state.matrix.shape}")
    if not nx.is_unitary(u):
        raise NotUnitary("operator is not unitary to RTOL")
    return DensityOperator(_hermitian_part(u @ state.matrix @ dagger(u)), state.label)


def evolve_channel(state: DensityOperator, ch: KrausChannel) -> DensityOperator:
    if ch.operators[0].shape != state.matrix.shape:
        raise DimMismatch("channel and state dimensions differ")
    out = sum(k @ state.matrix @ dagger(k) for k in ch.operators)
    return DensityOperator(_hermitian_part(out), state.label)


def intersection_rank(a: DensityOperator, b: DensityOperator, tol: float | None = None) -> int:
    _same_dim(a, b)
    return nx.subspace_intersection_rank(a.support(tol), b.support(tol))


def quantum_compatible(a: DensityOperator, b: DensityOperator, tol: float | None = None) -> bool:
    """True iff the supports of ``a`` and ``b`` share a non-zero vector.

    Raises:
        DimMismatch: states on different Hilbert spaces are incomparable.
    """
    return intersection_rank(a, b, tol) >= 1


def quantum_agree(states: Sequence[DensityOperator], tol: float = AGREE_TOL) -> bool:
    _same_dim(*states)
    ref = states[0].matrix
    return all(np.max(np.abs(s.matrix - ref)) <= tol for s in states[1:])


def support_contained(inner: DensityOperator, outer: DensityOperator, tol: float = CONTAINMENT_TOL) -> bool:
    """Whether ``supp(inner)`` lies inside ``supp(outer)``."""
    _same_dim(inner, outer)
    p_in = inner.support()
    leak = (np.eye(outer.dim) - outer.support()) @ p_in
    return bool(np.max(np.abs(leak)) <= tol)


def projective_likelihood(target: DensityOperator) -> LikelihoodOperator:
    """The test "is the system in the pure state ``target``?" as a likelihood operator.

    Outcome ``"0"`` has effect ``|Psi><Psi|`` and outcome ``"1"`` its complement.
    """
    if target.rank() != 1 or abs(np.trace(target.matrix @ target.matrix).real - 1.0) > RTOL:
        raise NotPure("target state must be rank one")
    p = target.support()
    return LikelihoodOperator(BINARY, (p, np.eye(target.dim) - p))


def quantum_bayes_update(prior: DensityOperator, lik: LikelihoodOperator, observed: str) -> DensityOperator:
    """Posterior ``(E * prior) / Tr(E prior)`` with ``*`` the star product.

    Raises:
        ZeroEvidence: the prior assigns probability zero to ``observed``.
    """
    effect = lik.effect(observed)
    if effect.shape != prior.matrix.shape:
        raise DimMismatch("likelihood and prior dimensions differ")
    evidence = float(np.trace(effect @ prior.matrix).real)
    if evidence <= ATOL:
        raise ZeroEvidence(f"outcome {observed!r} has probability {evidence:.3e} under the prior")
    post = nx.star_product(effect, prior.matrix) / evidence
    post = _hermitian_part(post)
    return DensityOperator(post / np.trace(post).real, prior.label)


def quantum_improve(prior: DensityOperator, report_lik: LikelihoodOperator, report: str = "report") -> DensityOperator:
    return quantum_bayes_update(prior, report_lik, report)


def common_support_state(a: DensityOperator, b: DensityOperator, tol: float | None = None) -> DensityOperator:
    """A pure state inside ``supp(a) & supp(b)``.

    Walks ``a``'s eigenvectors from the largest eigenvalue down and returns
    the first one with a non-zero projection onto the intersection.
    """
    _same_dim(a, b)
    basis = nx.intersection_basis(a.support(tol), b.support(tol))
    if basis.shape[1] == 0:
        raise Incompatible("supports intersect only in the zero vector")
    proj = basis @ dagger(basis)
    for v in nx.hermitian_eig(a.matrix).eigenvectors.T:
        w = proj @ v
        if np.linalg.norm(w) > 1e-6:
            return DensityOperator.pure(nx.fix_phase(w / np.linalg.norm(w)))
    return DensityOperator.pure(basis[:, 0])


def _max_weight(state: np.ndarray, component: np.ndarray) -> float:
    # Largest p with state - p * component still PSD (component inside supp(state)).
    spec = nx.hermitian_eig(state)
    keep = spec.eigenvalues > nx.default_tol()
    v = spec.eigenvectors[:, keep]
    inv_root = (v / np.sqrt(spec.eigenvalues[keep])) @ dagger(v)
    top = nx.hermitian_eig(_hermitian_part(inv_root @ component @ inv_root)).eigenvalues[0]
    return min(1.0, 1.0 / top)


def _residual_state(state: np.ndarray, component: np.ndarray, weight: float, dim: int) -> tuple[DensityOperator, bool]:
    if weight >= 1.0 - TRACE_TOL:
        return DensityOperator(np.eye(dim) / dim), True
    rest = _hermitian_part(state - weight * component)
    spec = nx.hermitian_eig(rest)
    w = np.clip(spec.eigenvalues, 0.0, None)
    rest = (spec.eigenvectors * w) @ dagger(spec.eigenvectors)
    return DensityOperator(rest / np.trace(rest).real), False


def construct_hybrid_joint(friend: DensityOperator, wigner: DensityOperator) -> HybridState:
    """Hybrid state ``rho_SFW`` whose conditionals recover both agents' states.

    The shared component is Wigner's own state, so it must lie inside the
    Friend's support. Conditioning on ``F=0`` returns ``friend`` and on
    ``W=0`` returns ``wigner``.

    Raises:
        Incompatible: the supports do not intersect.
        UnsupportedDecomposition: Wigner's support is not inside the Friend's.
    """
    if not quantum_compatible(friend, wigner):
        raise Incompatible("supports intersect only in the zero vector")
    if not support_contained(wigner, friend):
        raise UnsupportedDecomposition("Wigner's state must lie inside the Friend's support")
    dim = friend.dim
    shared = wigner
    p_f = _max_weight(friend.matrix, shared.matrix)
    p_w = 1.0
    eta_f, f_placeholder = _residual_state(friend.matrix, shared.matrix, p_f, dim)
    eta_w, _ = _residual_state(wigner.matrix, shared.matrix, p_w, dim)
    nu = DensityOperator(np.eye(dim) / dim)

    weights = {
        ("0", "0"): p_f * p_w,
        ("0", "1"): (1 - p_f) * p_w,
        ("1", "0"): p_f * (1 - p_w),
        ("1", "1"): (1 - p_f) * (1 - p_w),
    }
    states = {("0", "0"): shared, ("0", "1"): eta_f, ("1", "0"): eta_w, ("1", "1"): nu}
    branches = {
        k: Branch(weights[k], states[k], placeholder=weights[k] <= TRACE_TOL or (k == ("0", "1") and f_placeholder))
        for k in weights
    }
    return HybridState(branches, mixing=(p_f, p_w))


def hybrid_condition(h: HybridState, which: str, value: str) -> DensityOperator:
    """State of S given ``F=value`` (``which="F"``) or ``W=value`` (``which="W"``)."""
    which = which.upper()
    if which not in ("F", "W"):
        raise ValueError(f"can only condition on 'F' or 'W', got {which!r}")
    pos = 0 if which == "F" else 1
    value = str(value)
    picked = [b for k, b in h.branches.items() if k[pos] == value]
    evidence = sum(b.weight for b in picked)
    if evidence <= ATOL:
        raise ZeroEvidence(f"P({which}={value}) is zero")
    mixed = sum(b.weight * b.state.matrix for b in picked if b.weight > 0) / evidence
    return DensityOperator(_hermitian_part(mixed), f"{which}={value}")

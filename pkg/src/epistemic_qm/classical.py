"""Classical Bayesian agents over finite outcome spaces.

Covers support and compatibility, agreement, Bayesian conditioning, the
reconciliation experiment built from a common-support label, improvement
on another agent's report, the "virtual past" joint distribution, and the
linear, multiplicative and supra-Bayesian pools.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadWeights,
    Incompatible,
    InvalidDistribution,
    JointlyIncompatible,
    SpaceMismatch,
    ZeroEvidence,
)
from .numerics import ATOL, default_tol

SUM_TOL = 1e-9
AGREE_TOL = 1e-9

BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")
BINARY_LABELS = ("0", "1")


@dataclass(frozen=True)
class OutcomeSpace:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if not labels:
            raise InvalidDistribution("outcome space needs at least one label")
        if len(set(labels)) != len(labels):
            raise InvalidDistribution(f"duplicate labels in {labels}")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise InvalidDistribution(f"unknown label {label!r}; space is {self.labels}") from None


BELL = OutcomeSpace(BELL_LABELS)
BINARY = OutcomeSpace(BINARY_LABELS)


def _as_space(space) -> OutcomeSpace:
    return space if isinstance(space, OutcomeSpace) else OutcomeSpace(tuple(space))


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _validated_probs(values, what: str) -> np.ndarray:
    p = np.array(values, dtype=float)
    if not np.all(np.isfinite(p)):
        raise InvalidDistribution(f"{what} has non-finite entries")
    if np.any(p < -ATOL) or np.any(p > 1 + ATOL):
        raise InvalidDistribution(f"{what} has entries outside [0, 1]: {p}")
    p = np.clip(p, 0.0, 1.0)
    if abs(p.sum() - 1.0) > SUM_TOL:
        raise InvalidDistribution(f"{what} sums to {p.sum()!r}, not 1")
    return p


@dataclass(frozen=True, eq=False)
class ProbDist:
    """A probability vector over a labelled finite outcome space."""

    space: OutcomeSpace
    probs: np.ndarray

    def __post_init__(self):
        space = _as_space(self.space)
        p = _validated_probs(self.probs, "distribution")
        if p.shape != (len(space),):
            raise InvalidDistribution(
                f"{p.shape[0] if p.ndim == 1 else p.shape} probabilities for {len(space)} labels"
            )
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "probs", _readonly(p))

    @classmethod
    def from_labels(cls, labels: Sequence[str], probs) -> "ProbDist":
        return cls(OutcomeSpace(tuple(labels)), probs)

    @classmethod
    def point_mass(cls, space, label: str) -> "ProbDist":
        space = _as_space(space)
        p = np.zeros(len(space))
        p[space.index(label)] = 1.0
        return cls(space, p)

    def __getitem__(self, label: str) -> float:
        return float(self.probs[self.space.index(label)])

    def as_dict(self) -> dict[str, float]:
        return {lab: float(x) for lab, x in zip(self.space.labels, self.probs)}

    def __repr__(self) -> str:
        return f"ProbDist({self.as_dict()})"


def _normalise(weights: np.ndarray, space: OutcomeSpace, what: str) -> ProbDist:
    total = float(weights.sum())
    if total <= ATOL:
        raise ZeroEvidence(f"{what}: evidence {total:.3e} is zero")
    return ProbDist(space, weights / total)


@dataclass(frozen=True, eq=False)
class ConditionalTable:
    """Likelihood table ``P(X | Y)``: one normalised row over X per value of Y."""

    given_space: OutcomeSpace
    result_space: OutcomeSpace
    table: np.ndarray

    def __post_init__(self):
        given = _as_space(self.given_space)
        result = _as_space(self.result_space)
        t = np.array(self.table, dtype=float)
        if t.shape != (len(given), len(result)):
            raise InvalidDistribution(
                f"table shape {t.shape} does not match ({len(given)}, {len(result)})"
            )
        rows = [_validated_probs(row, f"row {y!r}") for y, row in zip(given.labels, t)]
        object.__setattr__(self, "given_space", given)
        object.__setattr__(self, "result_space", result)
        object.__setattr__(self, "table", _readonly(np.array(rows)))

    def column(self, outcome: str) -> np.ndarray:
        """Likelihood vector ``y -> P(X=outcome | Y=y)``."""
        return self.table[:, self.result_space.index(outcome)]

    def row(self, given: str) -> ProbDist:
        return ProbDist(self.result_space, self.table[self.given_space.index(given)])

    @classmethod
    def binary_report(
        cls, given_space, report_probs, report_label: str = "report", other_label: str = "other"
    ) -> "ConditionalTable":
        """Two-outcome table with ``P(report | y)`` given per ``y``; the rest goes to ``other``."""
        r = np.asarray(report_probs, dtype=float)
        return cls(given_space, OutcomeSpace((report_label, other_label)), np.column_stack([r, 1.0 - r]))


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Joint distribution over a product of outcome spaces, stored as an n-d array.

    ``mixing`` holds the ``(p_friend, p_wigner)`` weights when the joint was
    built by :func:`construct_objective_joint`.
    """

    spaces: tuple[OutcomeSpace, ...]
    probs: np.ndarray
    mixing: tuple[float, float] | None = field(default=None)

    def __post_init__(self):
        spaces = tuple(_as_space(s) for s in self.spaces)
        p = np.array(self.probs, dtype=float).reshape([len(s) for s in spaces])
        if np.any(p < -ATOL):
            raise InvalidDistribution("joint distribution has negative entries")
        p = np.clip(p, 0.0, None)
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise InvalidDistribution(f"joint distribution sums to {p.sum()!r}")
        object.__setattr__(self, "spaces", spaces)
        object.__setattr__(self, "probs", _readonly(p))

    def flat(self) -> np.ndarray:
        return self.probs.ravel()

    def marginal(self, axis: int) -> ProbDist:
        others = tuple(i for i in range(self.probs.ndim) if i != axis)
        return ProbDist(self.spaces[axis], self.probs.sum(axis=others))

    def condition(self, axis: int, value: str) -> ProbDist:
        """Distribution of the first variable given ``variable[axis] = value``."""
        if axis == 0:
            raise ValueError("cannot condition the target variable on itself")
        sliced = np.take(self.probs, self.spaces[axis].index(value), axis=axis)
        rest = tuple(range(1, sliced.ndim))
        return _normalise(sliced.sum(axis=rest), self.spaces[0], f"condition on axis {axis}")


def _check_same_space(dists: Iterable[ProbDist]) -> OutcomeSpace:
    dists = list(dists)
    if not dists:
        raise ValueError("need at least one distribution")
    first = dists[0].space
    for d in dists[1:]:
        if d.space != first:
            raise SpaceMismatch(f"outcome spaces differ: {first.labels} vs {d.space.labels}")
    return first


def support(d: ProbDist, tol: float | None = None) -> set[str]:
    tol = default_tol() if tol is None else tol
    return {lab for lab, x in zip(d.space.labels, d.probs) if x > tol}


def common_support(a: ProbDist, b: ProbDist, tol: float | None = None) -> list[str]:
    """Labels in both supports, in outcome-space order."""
    _check_same_space([a, b])
    both = support(a, tol) & support(b, tol)
    return [lab for lab in a.space.labels if lab in both]


def compatible(a: ProbDist, b: ProbDist, tol: float | None = None) -> bool:
    """True iff the two supports intersect.

    Raises:
        SpaceMismatch: the distributions are over different outcome spaces;
            such pairs are not comparable at all, which is not the same as
            incompatible.
    """
    return bool(common_support(a, b, tol))


def agree(dists: Sequence[ProbDist], tol: float = AGREE_TOL) -> bool:
    _check_same_space(dists)
    ref = dists[0].probs
    return all(np.max(np.abs(d.probs - ref)) <= tol for d in dists[1:])


def _check_likelihood(prior: ProbDist, lik: ConditionalTable) -> None:
    if lik.given_space != prior.space:
        raise SpaceMismatch(
            f"likelihood conditions on {lik.given_space.labels}, prior is over {prior.space.labels}"
        )


def bayes_condition(prior: ProbDist, lik: ConditionalTable, observed: str) -> ProbDist:
    """Posterior ``P(Y | X=observed)`` by Bayes' theorem.

    Raises:
        ZeroEvidence: when the prior gives the observation probability zero.
    """
    _check_likelihood(prior, lik)
    return _normalise(lik.column(observed) * prior.probs, prior.space, f"observe X={observed}")


def improve(prior: ProbDist, report_lik: ConditionalTable, report_label: str = "report") -> ProbDist:
    """Update ``prior`` treating an expert's announced assignment as data.

    The posterior is the entrywise product of the report likelihood column
    with the prior, renormalised.
    """
    _check_likelihood(prior, report_lik)
    hadamard = np.multiply(report_lik.column(report_label), prior.probs)
    return _normalise(hadamard, prior.space, f"report {report_label}")


def reconciliation_likelihood(
    a: ProbDist, b: ProbDist, tol: float | None = None
) -> tuple[ConditionalTable, str]:
    """Build the test experiment on which two compatible agents can agree.

    Picks the first label ``y*`` common to both supports and returns the binary
    table ``P(X=0 | y*) = 1``, ``P(X=0 | y != y*) = 0`` together with the
    outcome ``"0"`` that leads both agents to the point mass on ``y*``.
    """
    common = common_support(a, b, tol)
    if not common:
        raise Incompatible("supports do not intersect; no reconciliation experiment exists")
    target = common[0]
    flags = np.array([1.0 if lab == target else 0.0 for lab in a.space.labels])
    table = np.column_stack([flags, 1.0 - flags])
    return ConditionalTable(a.space, BINARY, table), "0"


def _check_weights(weights, n: int, *, open_interval: bool) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise BadWeights(f"expected {n} weights, got {w.shape}")
    if not np.all(np.isfinite(w)) or abs(w.sum() - 1.0) > SUM_TOL:
        raise BadWeights(f"weights must sum to 1, got {w.sum()!r}")
    if open_interval and np.any((w <= 0) | (w >= 1)):
        raise BadWeights("multiplicative pooling needs every weight strictly inside (0, 1)")
    if np.any(w < 0):
        raise BadWeights("weights must be non-negative")
    return w


def pool_linear(dists: Sequence[ProbDist], weights) -> ProbDist:
    space = _check_same_space(dists)
    w = _check_weights(weights, len(dists), open_interval=False)
    mixed = sum(wi * d.probs for wi, d in zip(w, dists))
    return ProbDist(space, np.clip(mixed, 0.0, 1.0) / mixed.sum())


def pool_multiplicative(
    dists: Sequence[ProbDist], weights, shared_prior: ProbDist | None = None
) -> ProbDist:
    """Logarithmic pool ``c * prod_i P_i(y)^{w_i}``, optionally times a shared prior.

    A zero probability stays zero under any positive exponent, so the pooled
    support is the intersection of the input supports.
    """
    space = _check_same_space(list(dists) + ([shared_prior] if shared_prior is not None else []))
    w = _check_weights(weights, len(dists), open_interval=True)
    pooled = np.ones(len(space))
    for wi, d in zip(w, dists):
        pooled *= np.power(d.probs, wi, out=np.zeros(len(space)), where=d.probs > 0)
    if shared_prior is not None:
        pooled *= shared_prior.probs
    total = pooled.sum()
    if total <= 0:
        raise JointlyIncompatible("no outcome is possible for every agent")
    return ProbDist(space, pooled / total)


def pool_supra(prior: ProbDist, liks: Sequence[tuple[ConditionalTable, str]]) -> ProbDist:
    """Supra-Bayesian pool: condition a neutral prior on every agent's report.

    Reports are taken as conditionally independent given Y.
    """
    post = prior.probs.copy()
    for lik, outcome in liks:
        _check_likelihood(prior, lik)
        post *= lik.column(outcome)
    return _normalise(post, prior.space, "supra-Bayesian pool")


def _residual(d: ProbDist, common: np.ndarray, weight: float) -> np.ndarray:
    if weight >= 1.0:
        return np.full(len(d.space), 1.0 / len(d.space))  # zero-weight placeholder
    rest = np.clip(d.probs - weight * common, 0.0, None)
    return rest / rest.sum()


def construct_objective_joint(a: ProbDist, b: ProbDist, tol: float | None = None) -> JointDistribution:
    """Build ``P(Y, F, W)`` from which ``a`` and ``b`` follow by conditioning.

    ``a`` is recovered as ``P(Y | F=0)`` and ``b`` as ``P(Y | W=0)``. The shared
    part is the point mass on the first common-support label; each input is
    split as ``p * shared + (1 - p) * residual`` with ``p`` as large as possible.
    Branch weights follow ``P(F=0,W=0) = p_F p_W``, ``P(F=0,W=1) = (1-p_F) p_W``,
    ``P(F=1,W=0) = p_F (1-p_W)``, ``P(F=1,W=1) = (1-p_F)(1-p_W)``.
    """
    common = common_support(a, b, tol)
    if not common:
        raise Incompatible("supports do not intersect; no common past exists")
    shared = ProbDist.point_mass(a.space, common[0]).probs
    k = a.space.index(common[0])
    p_f = min(1.0, float(a.probs[k]))
    p_w = min(1.0, float(b.probs[k]))
    resid_f = _residual(a, shared, p_f)
    resid_w = _residual(b, shared, p_w)
    uniform = np.full(len(a.space), 1.0 / len(a.space))

    joint = np.zeros((len(a.space), 2, 2))
    joint[:, 0, 0] = p_f * p_w * shared
    joint[:, 0, 1] = (1 - p_f) * p_w * resid_f
    joint[:, 1, 0] = p_f * (1 - p_w) * resid_w
    joint[:, 1, 1] = (1 - p_f) * (1 - p_w) * uniform
    return JointDistribution(
        (a.space, OutcomeSpace(("F=0", "F=1")), OutcomeSpace(("W=0", "W=1"))),
        joint,
        mixing=(p_f, p_w),
    )


def recover_friend(joint: JointDistribution) -> ProbDist:
    return joint.condition(1, "F=0")


def recover_wigner(joint: JointDistribution) -> ProbDist:
    return joint.condition(2, "W=0")

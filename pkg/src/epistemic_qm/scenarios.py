"""Catalog of Wigner's-Friend variants and the reconciliation procedures run on them.

Every scenario yields Wigner's and the Friend's assignments twice: as
density operators on the joint system/memory pair and as Born
distributions under the Bell-basis measurement. The Friend's assignment
is the same in every variant; only Wigner's model of the laboratory
changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

from . import classical as cl
from . import quantum as qm
from .errors import BadConfig, DimMismatch, Incompatible, SpaceMismatch, ZeroEvidence

VARIANTS = (
    "canonical",
    "wrong_initial",
    "not_gate",
    "time_evolution",
    "phase",
    "two_wigners",
    "benefit_of_doubt",
    "ignorant_wigner",
)

_PARAMS: dict[str, tuple[str, ...]] = {
    "canonical": (),
    "wrong_initial": (),
    "not_gate": (),
    "time_evolution": ("omega_t",),
    "phase": ("phi",),
    "two_wigners": ("phi_left", "phi_right"),
    "benefit_of_doubt": ("epsilon",),
    "ignorant_wigner": (),
}

DEFAULT_PARAMS: dict[str, float] = {
    "omega_t": 0.0,
    "phi": 0.0,
    "phi_left": 0.0,
    "phi_right": math.pi,
    "epsilon": 0.01,
}

EPS_MIN, EPS_MAX = 1e-6, 0.5

SPACE_MISMATCH = "SpaceMismatch"
DIM_MISMATCH = "DimMismatch"

Verdict = Union[bool, str, None]


def check_epsilon(epsilon) -> float:
    if epsilon is None:
        raise BadConfig("epsilon is required")
    epsilon = float(epsilon)
    if not EPS_MIN < epsilon < EPS_MAX:
        raise BadConfig(f"epsilon must lie in ({EPS_MIN}, {EPS_MAX}), got {epsilon}")
    return epsilon


@dataclass(frozen=True)
class ScenarioConfig:
    variant: str
    params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in _PARAMS:
            raise BadConfig(f"unknown scenario {self.variant!r}; choose from {', '.join(VARIANTS)}")
        wanted = set(_PARAMS[self.variant])
        given = set(self.params)
        if given != wanted:
            missing = sorted(wanted - given)
            extra = sorted(given - wanted)
            raise BadConfig(
                f"scenario {self.variant!r} takes parameters {sorted(wanted)}; "
                f"missing {missing}, unexpected {extra}"
            )
        params = {k: float(v) for k, v in self.params.items()}
        if any(not math.isfinite(v) for v in params.values()):
            raise BadConfig("parameters must be finite")
        if "epsilon" in params:
            check_epsilon(params["epsilon"])
        object.__setattr__(self, "params", params)

    @classmethod
    def with_defaults(cls, variant: str, **given: float | None) -> "ScenarioConfig":
        """Fill in the variant's missing parameters from ``DEFAULT_PARAMS``.

        Parameters the variant does not consume must be ``None``.
        """
        if variant not in _PARAMS:
            raise BadConfig(f"unknown scenario {variant!r}; choose from {', '.join(VARIANTS)}")
        params = {}
        for key, value in given.items():
            if value is None:
                continue
            if key not in _PARAMS[variant]:
                raise BadConfig(f"scenario {variant!r} does not take parameter {key!r}")
            params[key] = value
        for key in _PARAMS[variant]:
            params.setdefault(key, DEFAULT_PARAMS[key])
        return cls(variant, params)


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    """Both agents' assignments plus the compatibility verdicts.

    A verdict is ``True``/``False``, the name of the error that makes the pair
    incomparable (``"SpaceMismatch"`` or ``"DimMismatch"``), or ``None`` when
    the comparison is not part of the variant.
    """

    config: ScenarioConfig
    wigner_dist: cl.ProbDist
    friend_dist: cl.ProbDist
    wigner_state: qm.DensityOperator
    friend_state: qm.DensityOperator
    classical_compatible: Verdict
    quantum_compatible: Verdict
    wigner_right_dist: cl.ProbDist | None = None
    wigner_right_state: qm.DensityOperator | None = None
    pairwise: dict[str, bool] = field(default_factory=dict)


# --- assignments -----------------------------------------------------------------

_KET00 = qm.basis_ket(0, 4)


def _ket(index: int) -> qm.DensityOperator:
    return qm.DensityOperator.pure(qm.basis_ket(index, 4))


def entangling_unitary() -> np.ndarray:
    """``CNOT . (H x 1)``: the pre-measurement interaction as Wigner models it."""
    return qm.CNOT @ np.kron(qm.H, qm.I2)


def wigner_canonical_state() -> qm.DensityOperator:
    return qm.evolve_unitary(_ket(0), entangling_unitary())


def friend_state() -> qm.DensityOperator:
    """The Friend's state: the entangled state dephased by her measurement of S."""
    return qm.evolve_channel(wigner_canonical_state(), qm.system_measurement_channel())


def friend_register_state() -> qm.DensityOperator:
    """The Friend's record as a diagonal operator on a register indexed by the Bell outcomes."""
    return qm.diagonal_embedding(qm.born_probabilities(friend_state(), qm.bell_pvm()))


def wigner_state_for(cfg: ScenarioConfig) -> qm.DensityOperator:
    v, p = cfg.variant, cfg.params
    if v in ("canonical", "two_wigners"):
        return wigner_canonical_state()
    if v == "wrong_initial":
        return qm.evolve_unitary(_ket(3), entangling_unitary())
    if v == "not_gate":
        return qm.evolve_unitary(_ket(0), qm.CNOT @ np.kron(qm.X, qm.I2))
    if v == "time_evolution":
        return qm.evolve_unitary(_ket(0), np.kron(qm.sigma_y_evolution(p["omega_t"]), qm.I2))
    if v == "phase":
        return phase_state(p["phi"])
    if v == "benefit_of_doubt":
        return open_minded_state(p["epsilon"])
    raise BadConfig(f"no quantum model of Wigner for {v!r}")


def phase_state(phi: float) -> qm.DensityOperator:
    u = qm.controlled_phase(phi) @ entangling_unitary()
    return qm.evolve_unitary(_ket(0), u)


def open_minded_state(epsilon: float) -> qm.DensityOperator:
    """Wigner's entangled state sent through the noisy phase channel."""
    return qm.evolve_channel(wigner_canonical_state(), qm.noisy_phase_channel(check_epsilon(epsilon)))


def _classical_verdict(a: cl.ProbDist, b: cl.ProbDist) -> Verdict:
    try:
        return cl.compatible(a, b)
    except SpaceMismatch:
        return SPACE_MISMATCH


def _quantum_verdict(a: qm.DensityOperator, b: qm.DensityOperator) -> Verdict:
    try:
        return qm.quantum_compatible(a, b)
    except DimMismatch:
        return DIM_MISMATCH


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    pvm = qm.bell_pvm()
    f_state = friend_state()
    f_dist = qm.born_probabilities(f_state, pvm)

    if cfg.variant == "ignorant_wigner":
        w_dist = cl.ProbDist(cl.BINARY, [0.5, 0.5])
        w_state = qm.diagonal_embedding(w_dist)
        return ScenarioResult(
            cfg, w_dist, f_dist, w_state, f_state,
            _classical_verdict(w_dist, f_dist), _quantum_verdict(w_state, f_state),
        )

    if cfg.variant == "two_wigners":
        left = phase_state(cfg.params["phi_left"])
        right = phase_state(cfg.params["phi_right"])
        left_d = qm.born_probabilities(left, pvm)
        right_d = qm.born_probabilities(right, pvm)
        pairwise = {
            "left_friend": cl.compatible(left_d, f_dist),
            "friend_right": cl.compatible(f_dist, right_d),
            "left_right": cl.compatible(left_d, right_d),
            "quantum_left_friend": qm.quantum_compatible(left, f_state),
            "quantum_friend_right": qm.quantum_compatible(f_state, right),
            "quantum_left_right": qm.quantum_compatible(left, right),
        }
        return ScenarioResult(
            cfg, left_d, f_dist, left, f_state,
            pairwise["left_friend"], pairwise["quantum_left_friend"],
            wigner_right_dist=right_d, wigner_right_state=right, pairwise=pairwise,
        )

    w_state = wigner_state_for(cfg)
    w_dist = qm.born_probabilities(w_state, pvm)
    # the Friend's quantum assignment under Wigner's sigma_y model is not specified
    q_verdict = None if cfg.variant == "time_evolution" else _quantum_verdict(w_state, f_state)
    return ScenarioResult(cfg, w_dist, f_dist, w_state, f_state, _classical_verdict(w_dist, f_dist), q_verdict)


# --- reconciliation ---------------------------------------------------------------

AgentOutcome = Union[cl.ProbDist, qm.DensityOperator, ZeroEvidence]


@dataclass(frozen=True, eq=False)
class ReconciliationResult:
    """Each agent's posterior, or the ``ZeroEvidence`` error if the outcome was impossible for them."""

    mode: str
    outcome: str
    likelihood: Any
    wigner: AgentOutcome
    friend: AgentOutcome

    @property
    def agreed(self) -> bool:
        if isinstance(self.wigner, ZeroEvidence) or isinstance(self.friend, ZeroEvidence):
            return False
        if self.mode == "classical":
            return cl.agree([self.wigner, self.friend])
        return qm.quantum_agree([self.wigner, self.friend])


def _attempt(fn, *args) -> AgentOutcome:
    try:
        return fn(*args)
    except ZeroEvidence as exc:
        return exc


def run_reconciliation(cfg: ScenarioConfig, mode: str, outcome: str) -> ReconciliationResult:
    """Build the agreed test experiment and condition both agents on ``outcome``.

    Classically the test flags the first label both supports share; in the
    quantum case it asks whether the system is in a pure state from the
    common support.

    Raises:
        Incompatible: the agents' assignments have no common support.
        BadConfig: unknown mode, or a variant without two comparable agents.
    """
    outcome = str(outcome)
    if cfg.variant in ("ignorant_wigner",):
        raise BadConfig("the ignorant-Wigner assignments are not comparable")
    res = run_scenario(cfg)
    if mode == "classical":
        lik, _ = cl.reconciliation_likelihood(res.wigner_dist, res.friend_dist)
        return ReconciliationResult(
            mode, outcome, lik,
            _attempt(cl.bayes_condition, res.wigner_dist, lik, outcome),
            _attempt(cl.bayes_condition, res.friend_dist, lik, outcome),
        )
    if mode == "quantum":
        target = qm.common_support_state(res.wigner_state, res.friend_state)
        lik = qm.projective_likelihood(target)
        return ReconciliationResult(
            mode, outcome, lik,
            _attempt(qm.quantum_bayes_update, res.wigner_state, lik, outcome),
            _attempt(qm.quantum_bayes_update, res.friend_state, lik, outcome),
        )
    raise BadConfig(f"mode must be 'classical' or 'quantum', got {mode!r}")


# --- improvement ------------------------------------------------------------------

IMPROVEMENT_CASES = ("c1a", "c1b", "c1c", "c1d", "q2a", "q2b", "q2c", "q2d")
_NEEDS_EPSILON = {"c1c", "c1d", "q2c", "q2d"}


@dataclass(frozen=True, eq=False)
class ImprovementResult:
    case_id: str
    decision_maker: str
    expert: str
    prior: Any
    likelihood: Any
    report_label: str
    posterior: Any


def _bell_proj(label: str) -> np.ndarray:
    return qm.ket_projector(qm.BELL_KETS[label])


def stubborn_wigner_dist() -> cl.ProbDist:
    return cl.ProbDist(cl.BELL, [1, 0, 0, 0])


def open_minded_dist(epsilon: float) -> cl.ProbDist:
    e = check_epsilon(epsilon)
    return cl.ProbDist(cl.BELL, [1 - e, e, 0, 0])


def canonical_friend_dist() -> cl.ProbDist:
    return cl.ProbDist(cl.BELL, [0.5, 0.5, 0, 0])


def run_improvement(case_id: str, epsilon: float | None = None) -> ImprovementResult:
    """Run one of the eight improvement cases.

    ``c1*`` are classical, ``q2*`` quantum. In ``a``/``c`` Wigner improves on
    the Friend's report, in ``b``/``d`` the Friend improves on Wigner's; ``c``
    and ``d`` use the open-minded Wigner with parameter ``epsilon``.
    """
    if case_id not in IMPROVEMENT_CASES:
        raise BadConfig(f"unknown improvement case {case_id!r}; choose from {', '.join(IMPROVEMENT_CASES)}")
    if case_id in _NEEDS_EPSILON:
        epsilon = check_epsilon(epsilon)
    elif epsilon is not None:
        raise BadConfig(f"case {case_id!r} does not take epsilon")
    w_to_f = case_id[-1] in "ac"
    dm, expert = ("wigner", "friend") if w_to_f else ("friend", "wigner")

    if case_id.startswith("c"):
        if case_id == "c1a":
            prior, row, report = stubborn_wigner_dist(), [0.5, 0.5, 0, 0], "P_F"
        elif case_id == "c1b":
            prior, row, report = canonical_friend_dist(), [1, 0, 0, 0], "P_W"
        elif case_id == "c1c":
            prior, row, report = open_minded_dist(epsilon), [epsilon, 1 - epsilon, 0, 0], "P_F"
        else:
            # Only the phi+/phi- entries are fixed by the model; psi+- default to 0.
            prior, row, report = canonical_friend_dist(), [1, 0, 0, 0], "P'_W"
        lik = cl.ConditionalTable.binary_report(cl.BELL, row, report_label=report)
        post = cl.improve(prior, lik, report)
        return ImprovementResult(case_id, dm, expert, prior, lik, report, post)

    sigma_f = friend_state()
    if case_id == "q2a":
        prior = wigner_canonical_state()
        effect = 0.5 * (_bell_proj("phi+") + _bell_proj("phi-"))
        report = "sigma_F"
    elif case_id == "q2b":
        prior, effect, report = sigma_f, _bell_proj("phi+"), "sigma_W"
    elif case_id == "q2c":
        prior = open_minded_state(epsilon)
        effect = epsilon * _bell_proj("phi+") + (1 - epsilon) * _bell_proj("phi-")
        report = "sigma_F"
    else:
        prior, effect, report = sigma_f, _bell_proj("phi+"), "sigma_W_eps"
    lik = qm.LikelihoodOperator.report(effect, report_label=report)
    post = qm.quantum_improve(prior, lik, report)
    return ImprovementResult(case_id, dm, expert, prior, lik, report, post)


# --- pooling ----------------------------------------------------------------------

POOLING_METHODS = ("linear", "multiplicative", "supra")


def run_pooling(method: str, weights=None, epsilon: float | None = None) -> cl.ProbDist:
    """Pool the canonical Wigner and Friend assignments.

    ``weights`` are ordered (Wigner, Friend) and default to equal weights.
    With ``epsilon`` Wigner's open-minded assignment replaces the stubborn one.
    """
    wigner = stubborn_wigner_dist() if epsilon is None else open_minded_dist(epsilon)
    friend = canonical_friend_dist()
    if method == "linear":
        return cl.pool_linear([wigner, friend], (0.5, 0.5) if weights is None else weights)
    if method == "multiplicative":
        return cl.pool_multiplicative([wigner, friend], (0.5, 0.5) if weights is None else weights)
    if method == "supra":
        if weights is not None:
            raise BadConfig("supra-Bayesian pooling takes no weights")
        neutral = cl.ProbDist(cl.BELL, [0.5, 0.5, 0, 0])
        w_lik = cl.ConditionalTable.binary_report(cl.BELL, wigner.probs, report_label="x_W")
        f_lik = cl.ConditionalTable.binary_report(cl.BELL, [0.5, 0.5, 0, 0], report_label="x_F")
        return cl.pool_supra(neutral, [(w_lik, "x_W"), (f_lik, "x_F")])
    raise BadConfig(f"unknown pooling method {method!r}; choose from {', '.join(POOLING_METHODS)}")


def sample_outcome(dist: cl.ProbDist, seed: int) -> str:
    """Draw one label from ``dist``. Demo output only; never used by the library's results."""
    rng = np.random.default_rng(seed)
    return str(rng.choice(dist.space.labels, p=dist.probs))


__all__ = [
    "VARIANTS",
    "IMPROVEMENT_CASES",
    "POOLING_METHODS",
    "ScenarioConfig",
    "ScenarioResult",
    "ReconciliationResult",
    "ImprovementResult",
    "run_scenario",
    "run_reconciliation",
    "run_improvement",
    "run_pooling",
    "friend_state",
    "friend_register_state",
    "wigner_canonical_state",
    "open_minded_state",
    "phase_state",
    "sample_outcome",
]

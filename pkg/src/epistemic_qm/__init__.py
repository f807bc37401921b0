"""Compatibility, reconciliation and pooling of agents' probability and quantum-state assignments."""

from . import classical, numerics, quantum, scenarios
from .classical import (
    BELL,
    BINARY,
    ConditionalTable,
    JointDistribution,
    OutcomeSpace,
    ProbDist,
    agree,
    bayes_condition,
    common_support,
    compatible,
    construct_objective_joint,
    improve,
    pool_linear,
    pool_multiplicative,
    pool_supra,
    reconciliation_likelihood,
)
from .errors import *  # noqa: F401,F403
from .quantum import (
    PVM,
    DensityOperator,
    HybridState,
    KrausChannel,
    LikelihoodOperator,
    bell_pvm,
    born_probabilities,
    construct_hybrid_joint,
    quantum_agree,
    quantum_bayes_update,
    quantum_compatible,
)
from .scenarios import ScenarioConfig, run_improvement, run_pooling, run_reconciliation, run_scenario

__version__ = "0.1.0"

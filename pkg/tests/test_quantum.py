import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epistemic_qm import classical as cl
from epistemic_qm import quantum as qm
from epistemic_qm.errors import (
    DimMismatch,
    Incompatible,
    InvalidChannel,
    InvalidDistribution,
    NotPSD,
    NotPure,
    UnsupportedDecomposition,
    ZeroEvidence,
)

import oracles
from oracles import BELL_VECTORS, proj

PHI_P = proj(BELL_VECTORS["phi+"])
PHI_M = proj(BELL_VECTORS["phi-"])
SIGMA_F = np.diag([0.5, 0, 0, 0.5]).astype(complex)


def seeds():
    return st.integers(0, 2**32 - 1)


# --- construction -----------------------------------------------------------------


def test_density_operator_validation():
    with pytest.raises(InvalidDistribution):
        qm.DensityOperator(np.eye(2))
    with pytest.raises(NotPSD):
        qm.DensityOperator(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidDistribution):
        qm.DensityOperator(np.array([[0.5, 1], [0, 0.5]]))


def test_bell_kets_orthonormal():
    kets = np.column_stack([qm.BELL_KETS[k] for k in cl.BELL_LABELS])
    np.testing.assert_allclose(kets.conj().T @ kets, np.eye(4), atol=1e-15)
    for k, v in BELL_VECTORS.items():
        np.testing.assert_allclose(qm.BELL_KETS[k], v, atol=1e-15)


def test_gates_are_unitary():
    for u in (qm.H, qm.X, qm.CNOT, qm.controlled_phase(0.3), qm.sigma_y_evolution(1.1)):
        np.testing.assert_allclose(u.conj().T @ u, np.eye(len(u)), atol=1e-14)


def test_pvm_validation():
    with pytest.raises(InvalidDistribution):
        qm.PVM(("a", "b"), (np.diag([1, 0]), np.diag([1, 0])))
    with pytest.raises(InvalidDistribution):
        qm.PVM(("a",), (np.diag([1, 0]),))


def test_kraus_validation():
    with pytest.raises(InvalidChannel):
        qm.KrausChannel((0.5 * np.eye(2),))
    with pytest.raises(InvalidChannel):
        qm.noisy_phase_channel(1.5)


def test_likelihood_operator_validation():
    with pytest.raises(InvalidDistribution):
        qm.LikelihoodOperator(cl.BINARY, (np.eye(2), np.eye(2)))
    with pytest.raises(NotPSD):
        qm.LikelihoodOperator(cl.BINARY, (np.diag([1.5, 1]), np.diag([-0.5, 0])))


# --- dynamics ---------------------------------------------------------------------


def test_entangling_circuit_gives_phi_plus():
    start = qm.DensityOperator.pure(qm.basis_ket(0, 4))
    out = qm.evolve_unitary(start, qm.CNOT @ np.kron(qm.H, qm.I2))
    np.testing.assert_allclose(out.matrix, PHI_P, atol=1e-15)
    np.testing.assert_allclose(qm.born_probabilities(out, qm.bell_pvm()).probs, [1, 0, 0, 0], atol=1e-15)


def test_system_measurement_dephases():
    out = qm.evolve_channel(qm.bell_state("phi+"), qm.system_measurement_channel())
    np.testing.assert_allclose(out.matrix, SIGMA_F, atol=1e-15)
    np.testing.assert_allclose(qm.born_probabilities(out, qm.bell_pvm()).probs, [0.5, 0.5, 0, 0], atol=1e-15)


@pytest.mark.parametrize("eps", [0.0, 0.01, 0.3, 1.0])
def test_noisy_phase_channel_mixes_phi_plus_into_phi_minus(eps):
    out = qm.evolve_channel(qm.bell_state("phi+"), qm.noisy_phase_channel(eps))
    np.testing.assert_allclose(out.matrix, (1 - eps) * PHI_P + eps * PHI_M, atol=1e-15)


def test_sigma_y_evolution_amplitudes():
    wt = 0.7
    ket = np.kron(qm.sigma_y_evolution(wt), qm.I2) @ qm.basis_ket(0, 4)
    np.testing.assert_allclose(ket, [math.cos(wt / 2), 0, math.sin(wt / 2), 0], atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(seed=seeds())
def test_born_probabilities_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    rho = qm.DensityOperator(oracles.random_density(rng, 4))
    p = qm.born_probabilities(rho, qm.bell_pvm()).probs
    ref = [np.trace(rho.matrix @ proj(BELL_VECTORS[k])).real for k in cl.BELL_LABELS]
    np.testing.assert_allclose(p, ref, atol=1e-12)


# --- compatibility ----------------------------------------------------------------


def test_canonical_states_compatible():
    w, f = qm.bell_state("phi+"), qm.DensityOperator(SIGMA_F)
    assert qm.intersection_rank(w, f) == 1
    assert qm.quantum_compatible(w, f) and qm.quantum_compatible(f, w)


def test_orthogonal_states_incompatible():
    assert not qm.quantum_compatible(qm.bell_state("phi+"), qm.bell_state("psi-"))


def test_overlapping_but_not_intersecting_supports():
    # non-orthogonal pure states: overlap without a common support vector
    a = qm.DensityOperator.pure(np.array([1, 0]))
    b = qm.DensityOperator.pure(np.array([1, 1]) / math.sqrt(2))
    assert not qm.quantum_compatible(a, b)


def test_dim_mismatch():
    with pytest.raises(DimMismatch):
        qm.quantum_compatible(qm.bell_state("phi+"), qm.DensityOperator(np.eye(2) / 2))


def test_quantum_non_transitivity():
    left, right = qm.bell_state("phi+"), qm.bell_state("phi-")
    f = qm.DensityOperator(SIGMA_F)
    assert qm.quantum_compatible(left, f) and qm.quantum_compatible(f, right)
    assert not qm.quantum_compatible(left, right)


@settings(max_examples=50, deadline=None)
@given(seed=seeds())
def test_compatibility_matches_rank_oracle(seed):
    rng = np.random.default_rng(seed)
    a = oracles.random_density(rng, 4, int(rng.integers(1, 5)))
    b = oracles.random_density(rng, 4, int(rng.integers(1, 5)))
    ref = oracles.rank_intersection(oracles.eigh_support(a), oracles.eigh_support(b))
    assert qm.intersection_rank(qm.DensityOperator(a), qm.DensityOperator(b)) == ref


# --- updates ----------------------------------------------------------------------


def test_projective_likelihood_requires_pure_target():
    with pytest.raises(NotPure):
        qm.projective_likelihood(qm.DensityOperator(SIGMA_F))


def test_canonical_quantum_reconciliation():
    lik = qm.projective_likelihood(qm.bell_state("phi+"))
    w, f = qm.bell_state("phi+"), qm.DensityOperator(SIGMA_F)
    for prior in (w, f):
        np.testing.assert_allclose(qm.quantum_bayes_update(prior, lik, "0").matrix, PHI_P, atol=1e-12)
    np.testing.assert_allclose(qm.quantum_bayes_update(f, lik, "1").matrix, PHI_M, atol=1e-12)
    with pytest.raises(ZeroEvidence):
        qm.quantum_bayes_update(w, lik, "1")


def test_update_against_hand_formula():
    rng = np.random.default_rng(5)
    rho = oracles.random_density(rng, 3)
    e = np.diag([0.9, 0.4, 0.1]).astype(complex)
    lik = qm.LikelihoodOperator(cl.BINARY, (e, np.eye(3) - e))
    root = oracles.eigh_sqrt(rho)
    ref = root @ e @ root / np.trace(e @ rho).real
    np.testing.assert_allclose(qm.quantum_bayes_update(qm.DensityOperator(rho), lik, "0").matrix, ref, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(seed=seeds())
def test_cromwell_support_containment(seed):
    rng = np.random.default_rng(seed)
    prior = qm.DensityOperator(oracles.random_density(rng, 4, int(rng.integers(1, 5))))
    e = oracles.random_psd(rng, 4)
    e = e / (np.linalg.eigvalsh(e).max() * 1.01)
    lik = qm.LikelihoodOperator(cl.BINARY, (e, np.eye(4) - e))
    post = qm.quantum_bayes_update(prior, lik, "0")
    assert qm.support_contained(post, prior)


def test_common_support_state_is_in_both_supports():
    w, f = qm.bell_state("phi+"), qm.DensityOperator(SIGMA_F)
    t = qm.common_support_state(w, f)
    np.testing.assert_allclose(t.matrix, PHI_P, atol=1e-12)
    with pytest.raises(Incompatible):
        qm.common_support_state(w, qm.bell_state("psi+"))


# --- hybrid joint --------------------------------------------------------------


def test_hybrid_joint_canonical_two_branch_form():
    h = qm.construct_hybrid_joint(qm.DensityOperator(SIGMA_F), qm.bell_state("phi+"))
    assert h.mixing == pytest.approx((0.5, 1.0))
    weights = h.classical_marginal()
    assert weights[("0", "0")] == pytest.approx(0.5)
    assert weights[("0", "1")] == pytest.approx(0.5)
    np.testing.assert_allclose(h.branches[("0", "0")].state.matrix, PHI_P, atol=1e-9)
    np.testing.assert_allclose(h.branches[("0", "1")].state.matrix, PHI_M, atol=1e-9)
    reg = [proj(np.eye(4)[i]) for i in range(4)]
    ref = 0.5 * np.kron(PHI_P, reg[0]) + 0.5 * np.kron(PHI_M, reg[1])
    np.testing.assert_allclose(h.matrix(), ref, atol=1e-9)
    np.testing.assert_allclose(qm.hybrid_condition(h, "F", "0").matrix, SIGMA_F, atol=1e-9)
    np.testing.assert_allclose(qm.hybrid_condition(h, "W", "0").matrix, PHI_P, atol=1e-9)
    with pytest.raises(ZeroEvidence):
        qm.hybrid_condition(h, "F", "1")


def test_hybrid_joint_errors():
    with pytest.raises(Incompatible):
        qm.construct_hybrid_joint(qm.bell_state("phi+"), qm.bell_state("phi-"))
    # supports intersect, but Wigner's is not inside the Friend's
    f = qm.DensityOperator(np.diag([0.5, 0.5, 0, 0]))
    w = qm.DensityOperator(np.diag([0, 0.5, 0.5, 0]))
    with pytest.raises(UnsupportedDecomposition):
        qm.construct_hybrid_joint(f, w)


def test_hybrid_equivalence_ignores_placeholders():
    h = qm.construct_hybrid_joint(qm.DensityOperator(SIGMA_F), qm.bell_state("phi+"))
    other = dict(h.branches)
    other[("1", "1")] = qm.Branch(0.0, qm.bell_state("psi-"), placeholder=True)
    assert h.equivalent(qm.HybridState(other))


@settings(max_examples=50, deadline=None)
@given(seed=seeds())
def test_pure_prior_is_a_fixed_point(seed):
    rng = np.random.default_rng(seed)
    prior = qm.DensityOperator(oracles.random_density(rng, 4, 1))
    e = oracles.random_psd(rng, 4)
    e = e / (np.linalg.eigvalsh(e).max() * 1.01)
    lik = qm.LikelihoodOperator(cl.BINARY, (e, np.eye(4) - e))
    try:
        post = qm.quantum_bayes_update(prior, lik, "0")
    except ZeroEvidence:
        return
    np.testing.assert_allclose(post.matrix, prior.matrix, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(seed=seeds())
def test_compatibility_symmetric_and_reflexive(seed):
    rng = np.random.default_rng(seed)
    a = qm.DensityOperator(oracles.random_density(rng, 4, int(rng.integers(1, 5))))
    b = qm.DensityOperator(oracles.random_density(rng, 4, int(rng.integers(1, 5))))
    assert qm.quantum_compatible(a, b) == qm.quantum_compatible(b, a)
    assert qm.quantum_compatible(a, a)


def test_phi_plus_psi_minus_gram_check():
    # span{phi+} and span{psi-} are orthogonal: the Gram entry vanishes
    assert abs(np.vdot(BELL_VECTORS["phi+"], BELL_VECTORS["psi-"])) == 0
    assert qm.intersection_rank(qm.bell_state("phi+"), qm.bell_state("psi-")) == 0

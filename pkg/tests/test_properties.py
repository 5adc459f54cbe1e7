"""Randomized invariants checked with hypothesis."""
import numpy as np
from hypothesis import given, settings, strategies as st

from quasinormal.hilbert import TolerancePolicy
from quasinormal.operators import FiniteMatrixOp
from quasinormal.spectral import herm_eig, random_unitary
from quasinormal.trees import random_tree, basis_power_norms_test
from quasinormal.operators import matrix_of
from quasinormal.verdicts import (
    commutation_agreement,
    embry_suite,
    normality_test,
    paranormal_decisive,
    power_identity_test,
    quasinormal_test,
)

TOL = TolerancePolicy(1e-8, 1e-8)
seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 6)


def gauss(seed, n):
    rng = np.random.default_rng(seed)
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)


def normal_matrix(seed, n):
    rng = np.random.default_rng(seed)
    v = random_unitary(rng, n)
    return (v * (rng.standard_normal(n) + 1j * rng.standard_normal(n))) @ v.conj().T


@settings(max_examples=60, deadline=None)
@given(seeds, dims)
def test_eigendecomposition_reconstructs(seed, n):
    a = gauss(seed, n)
    h = a + a.conj().T
    e = herm_eig(h)
    assert np.abs(e.eigenvectors @ np.diag(e.eigenvalues) @ e.eigenvectors.conj().T - h).max() < 1e-10 * max(1, np.abs(h).max())
    assert np.all(np.diff(e.eigenvalues) >= 0)


@settings(max_examples=60, deadline=None)
@given(seeds, dims)
def test_generic_matrices_agree_and_satisfy_biconditional(seed, n):
    op = FiniteMatrixOp(gauss(seed, n))
    assert commutation_agreement(op, TOL).get("commute.agreement").holds
    rep = embry_suite(op, 4, tol=TOL)
    assert rep.get("power.biconditional").holds


@settings(max_examples=60, deadline=None)
@given(seeds, dims, st.floats(0.1, 10.0))
def test_normal_matrices_pass_everything(seed, n, scale):
    op = FiniteMatrixOp(scale * normal_matrix(seed, n))
    assert normality_test(op, tol=TOL).holds
    assert quasinormal_test(op, tol=TOL).holds
    for k in range(2, 6):
        assert power_identity_test(op, k, tol=TOL).holds
    assert paranormal_decisive(op, TOL).holds


@settings(max_examples=40, deadline=None)
@given(seeds, dims, st.floats(0.1, 10.0))
def test_quasinormality_is_unitarily_invariant(seed, n, scale):
    a = scale * gauss(seed, n)
    u = random_unitary(np.random.default_rng(seed + 1), n)
    v1 = quasinormal_test(FiniteMatrixOp(a), tol=TOL)
    v2 = quasinormal_test(FiniteMatrixOp(u @ a @ u.conj().T), tol=TOL)
    assert v1.status is v2.status


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 25), st.sampled_from([0.0, 0.3, 1.0]), st.integers(2, 4))
def test_tree_basis_test_matches_matrix(seed, nv, zero_prob, n):
    s = random_tree(np.random.default_rng(seed), nv, zero_prob=zero_prob)
    m = matrix_of(s, s.labels()).matrix
    mh = m.conj().T
    diff = np.linalg.matrix_power(mh @ m, n) - np.linalg.matrix_power(mh, n) @ np.linalg.matrix_power(m, n)
    scale = max(1.0, np.linalg.norm(m, 2)) ** (2 * n)
    direct = np.linalg.norm(diff, 2) <= 1e-8 * scale
    assert basis_power_norms_test(s, n, tol=TOL).holds == direct

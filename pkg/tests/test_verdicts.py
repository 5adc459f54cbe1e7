import math

import numpy as np
import pytest

from quasinormal.exhibits import build_prz2, build_prz3, g_of, gamma_n
from quasinormal.hilbert import Nat, SparseVec, TolerancePolicy, TreeVertex, norm
from quasinormal.operators import FiniteMatrixOp, identity, matrix_of, shift_isometry
from quasinormal.results import ProbeConfig, Status
from quasinormal.spectral import random_unitary
from quasinormal.trees import FiniteTree, TreeShiftOp, t2kappa, t2kappa_weights, tree_shift
from quasinormal.verdicts import (
    commutation_agreement,
    embry_suite,
    hyponormal_falsify,
    hyponormal_form,
    identity_residual,
    moment_matrices,
    moment_solvability_test,
    normality_test,
    paranormal_decisive,
    paranormal_falsify,
    paranormal_margin,
    paranormal_sampling,
    power2_normality_check,
    power_identity_test,
    power_words,
    quasinormal_power_check,
    quasinormal_test,
    quasinormal_words,
)

from conftest import cgauss

JORDAN = FiniteMatrixOp(np.array([[0, 1], [0, 0]]))


def normal(rng, n):
    v = random_unitary(rng, n)
    return FiniteMatrixOp((v * cgauss(rng, n)) @ v.conj().T)


def test_quasinormal_examples(rng):
    assert quasinormal_test(normal(rng, 4)).holds
    v = quasinormal_test(JORDAN)
    # CC*C e_1 = e_0 while C*CC e_1 = 0
    assert v.fails and v.discrepancy == pytest.approx(1.0)
    assert v.witness == SparseVec.basis(Nat(1))
    v = quasinormal_test(build_prz2().operator)
    assert v.fails and v.witness == SparseVec.basis(TreeVertex(0))


def test_fails_witness_replays(rng):
    c = FiniteMatrixOp(cgauss(rng, 4, 4))
    v = quasinormal_test(c)
    assert abs(identity_residual(c, *quasinormal_words(), v.witness) - v.discrepancy) <= 1e-12
    s = build_prz3(3).operator
    v = power_identity_test(s, 2)
    assert abs(identity_residual(s, *power_words(2), v.witness) - v.discrepancy) <= 1e-12


def test_normality_examples(rng):
    assert normality_test(FiniteMatrixOp(random_unitary(rng, 3))).holds
    v = normality_test(shift_isometry())
    assert v.fails and v.witness == SparseVec.basis(Nat(0))
    h = cgauss(rng, 4, 4)
    assert normality_test(FiniteMatrixOp(h + h.conj().T)).holds


def test_power_identity_trivial_orders(rng):
    c = FiniteMatrixOp(cgauss(rng, 3, 3))
    assert power_identity_test(c, 0).holds and power_identity_test(c, 1).holds
    assert power_identity_test(shift_isometry(), 1).holds


def test_power_identity_separating_shift():
    for n in (2, 3):
        assert power_identity_test(build_prz3(n).operator, n).holds
    gamma = gamma_n(2)
    v = power_identity_test(build_prz3(2).operator, 3)
    assert v.fails and v.witness == SparseVec.basis(TreeVertex(0))
    assert v.discrepancy == pytest.approx(abs(0.5 * g_of(2, gamma, 2) - 1), rel=1e-12)


def test_local_operator_window_and_probe_context():
    v = quasinormal_test(shift_isometry(), ProbeConfig(seed=3, num_probes=17))
    assert v.holds
    assert v.context["probes_used"] == 17 and v.context["seed"] == 3
    assert v.context["window"] == [Nat(k) for k in range(4)]


def test_commutation_agreement_examples(rng):
    for _ in range(20):
        rep = commutation_agreement(normal(rng, 4))
        assert all(e.verdict.holds for e in rep.entries)
        rep = commutation_agreement(FiniteMatrixOp(cgauss(rng, 4, 4)))
        assert rep.get("commute.agreement").holds
        assert rep.get("commute.triple").fails and rep.get("commute.spectral").fails
    rep = commutation_agreement(FiniteMatrixOp(np.zeros((3, 3))))
    assert all(e.verdict.holds for e in rep.entries)


def test_embry_suite_examples(rng):
    rep = embry_suite(normal(rng, 3), 5)
    assert rep.ok and all(e.verdict.holds for e in rep.entries)
    rep = embry_suite(build_prz2().operator, 4)
    assert rep.get("power_identity[n=2]").holds
    assert rep.get("power_identity[n=3]").fails
    assert rep.get("quasinormal").fails
    assert rep.notes["separation"] == [2]
    with pytest.raises(ValueError):
        embry_suite(JORDAN, 2)


def test_moment_examples(rng):
    x = cgauss(rng, 4, 4)
    m1 = x @ x.conj().T
    assert moment_solvability_test(m1, m1 @ m1, m1 @ m1 @ m1).holds
    v = moment_solvability_test(np.eye(2), np.eye(2), 2 * np.eye(2))
    assert v.fails and v.witness == "third_moment"
    v = moment_solvability_test(-np.eye(2), np.eye(2), -np.eye(2))
    assert v.fails and v.witness == "positivity"
    s = build_prz3(2, depth_cap=5).operator
    labels = s.labels()
    m = matrix_of(s, labels).matrix
    mats = moment_matrices(m)
    v = moment_solvability_test(*mats)
    assert v.fails
    from quasinormal.spectral import NotHermitianError
    with pytest.raises(NotHermitianError):
        moment_solvability_test(JORDAN.matrix, np.eye(2), np.eye(2))


def test_moment_third_identity_breaks_on_separating_shift():
    s = build_prz3(2, depth_cap=5).operator
    m = matrix_of(s, s.labels()).matrix
    m1, m2, m3 = moment_matrices(m)
    i0 = s.labels().index(TreeVertex(0))
    # the depth-5 compression keeps the e_0 column of all three moments exact
    assert m3[i0, i0] == pytest.approx(0.5 * g_of(2, gamma_n(2), 2))
    assert (m1 @ m1 @ m1)[i0, i0] == pytest.approx(1.0)


def test_paranormal_examples(rng):
    n = normal(rng, 4)
    assert paranormal_decisive(n).holds
    assert paranormal_sampling(n).inconclusive
    assert paranormal_falsify(n).holds
    weighted = TreeShiftOp(FiniteTree({k + 1: k for k in range(7)}), {1: 2.0, **{k: 1.0 for k in range(2, 8)}})
    v = paranormal_falsify(weighted)
    assert v.fails
    assert v.witness.support() == [TreeVertex(0)]
    assert paranormal_margin(weighted, v.witness) == pytest.approx(v.discrepancy)
    assert paranormal_falsify(build_prz2().operator, ProbeConfig(num_probes=2000)).inconclusive


def test_paranormal_decisive_finds_jordan_witness():
    v = paranormal_decisive(JORDAN)
    assert v.fails
    assert paranormal_margin(JORDAN, v.witness) > 0


def test_hyponormal_examples():
    v = hyponormal_falsify(shift_isometry())
    assert v.inconclusive
    s8 = FiniteMatrixOp(matrix_of(shift_isometry(), [Nat(k) for k in range(8)]).matrix)
    v = hyponormal_falsify(s8)
    assert v.fails  # the compression is a nilpotent partial isometry
    v = hyponormal_falsify(JORDAN)
    assert v.fails and v.witness == SparseVec.basis(Nat(0))
    assert v.context["form"] == pytest.approx(-1.0)
    prz2 = build_prz2().operator
    v = hyponormal_falsify(prz2)
    assert v.fails
    assert {lab.id for lab in v.witness.support()} <= {0, (1, 1), (2, 1)}
    assert hyponormal_form(prz2, v.witness) < -1e-3
    assert hyponormal_form(prz2, v.witness) == pytest.approx(-v.discrepancy, abs=1e-12)


def test_hyponormal_prz2_three_dim_oracle():
    prz2 = build_prz2().operator
    support = [TreeVertex(0), TreeVertex((1, 1)), TreeVertex((2, 1))]
    from quasinormal.operators import local_columns
    _, a = local_columns(prz2, support)
    _, b = local_columns(prz2, support, adjoint=True)
    oracle = np.linalg.eigvalsh(a.conj().T @ a - b.conj().T @ b)[0]
    v = hyponormal_falsify(prz2)
    assert v.context["form"] <= oracle + 1e-12


def test_power2_normality(rng):
    for _ in range(50):
        n = int(rng.integers(2, 7))
        assert power2_normality_check(FiniteMatrixOp(cgauss(rng, n, n))).holds
    assert power2_normality_check(normal(rng, 3)).context["normality"] is Status.HOLDS
    v = power2_normality_check(JORDAN)
    assert v.holds and v.context["power_identity_2"] is Status.FAILS


def test_quasinormal_power_check(rng):
    assert quasinormal_power_check(normal(rng, 4), 2, 3).holds
    v = quasinormal_power_check(FiniteMatrixOp(np.diag([1.0, 2.0, 3.0])), 3, 2)
    assert v.holds
    d = np.diag([1.0, 2.0, 3.0])
    lhs = np.linalg.matrix_power(np.linalg.matrix_power(d, 3), 2) ** 2
    np.testing.assert_allclose(np.diag(lhs), [1, 2**12, 3**12])
    assert quasinormal_power_check(FiniteMatrixOp(random_unitary(rng, 3)), 4, 5).holds
    assert quasinormal_power_check(JORDAN, 2, 2).inconclusive

import numpy as np
import pytest

from quasinormal.hilbert import Block, Nat, SparseVec, TreeVertex, inner, norm
from quasinormal.operators import (
    SCALE_RULES,
    FiniteMatrixOp,
    ScaleRule,
    adjoint,
    adjoint_duality_check,
    add,
    compose,
    direct_sum,
    identity,
    local_columns,
    matrix_of,
    power,
    scale,
    shift_isometry,
)
from quasinormal.results import ProbeConfig
from quasinormal.trees import random_tree

e = lambda k: SparseVec.basis(Nat(k))  # noqa: E731
S = shift_isometry()


def pairs(window, seed=0, count=100):
    probes = list(ProbeConfig(seed=seed, num_probes=2 * count).probes(window))
    return list(zip(probes[::2], probes[1::2]))


NAT_WINDOW = [Nat(k) for k in range(10)]


def test_shift_action():
    assert S.apply(e(3)) == e(4)
    assert S.adjoint_apply(e(0)) == SparseVec()
    assert S.adjoint_apply(e(5)) == e(4)


def test_compose_and_power():
    assert compose(S, S).apply(e(0)) == e(2)
    assert power(S, 0).apply(e(5)) == e(5)
    assert power(S, 3).apply(e(0)) == e(3)
    for u, _ in pairs(NAT_WINDOW, count=20):
        assert compose(S, identity()).apply(u) == S.apply(u)
        assert power(S, 2).apply(u) == compose(S, S).apply(u)
        assert power(S, 5).apply(u) == compose(power(S, 2), power(S, 3)).apply(u)


def test_compose_duality_on_probes():
    assert adjoint_duality_check(compose(S, S), pairs(NAT_WINDOW)) < 1e-12


def test_scale_add_adjoint():
    assert scale(S, 0).apply(e(1)) == SparseVec()
    assert adjoint(S).apply(e(2)) == e(1)
    assert add(S, scale(S, -1)).apply(e(0)) == SparseVec()
    for u, _ in pairs(NAT_WINDOW, count=10):
        assert adjoint(adjoint(S)).apply(u) == S.apply(u)


def test_direct_sum_examples():
    assert direct_sum(S, SCALE_RULES["const1"]).apply(SparseVec.basis(Block(2, Nat(0)))) == \
        SparseVec.basis(Block(2, Nat(1)))
    lin = direct_sum(S, SCALE_RULES["linear"])
    assert lin.apply(SparseVec.basis(Block(3, Nat(0)))) == SparseVec.basis(Block(3, Nat(1)), 3)


def test_direct_sum_duality_mixed_blocks():
    op = direct_sum(S, SCALE_RULES["poly1"])
    window = [Block(j, Nat(k)) for j in range(4) for k in range(5)]
    assert adjoint_duality_check(op, pairs(window)) < 1e-12


def test_direct_sum_rejects_negative_scale():
    with pytest.raises(ValueError):
        direct_sum(S, [1.0, -1.0])
    with pytest.raises(ValueError):
        direct_sum(S, ScaleRule("neg", lambda j: -float(j + 1)))


def test_direct_sum_blocks_never_mix(rng):
    blocks = [FiniteMatrixOp(rng.standard_normal((3, 3))), FiniteMatrixOp(rng.standard_normal((2, 2)))]
    op = direct_sum(blocks, [1.0, 2.0])
    out = op.apply(SparseVec.basis(Block(1, Nat(0))))
    assert {lab.j for lab in out.support()} == {1}


def test_matrix_of_examples():
    m = matrix_of(S, [Nat(0), Nat(1), Nat(2)]).matrix
    np.testing.assert_array_equal(m, np.eye(3, k=-1))
    labs = [Nat(3), Nat(0), Nat(7), Nat(1)]
    np.testing.assert_array_equal(matrix_of(identity(), labs).matrix, np.eye(4))


def test_matrix_of_reproduces_finite_tree_shift(rng):
    s = random_tree(rng, 25)
    labels = s.labels()
    m = matrix_of(s, labels).matrix
    for j, lab in enumerate(labels):
        col = s.apply(SparseVec.basis(lab))
        dense = np.array([col[l] for l in labels])
        np.testing.assert_array_equal(m[:, j], dense)


def test_matrix_of_compose_is_product(rng):
    a = FiniteMatrixOp(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
    b = FiniteMatrixOp(rng.standard_normal((5, 5)))
    labels = a.labels()
    np.testing.assert_allclose(matrix_of(compose(a, b), labels).matrix,
                               matrix_of(a, labels).matrix @ matrix_of(b, labels).matrix, atol=1e-13)


def test_finite_matrix_rejects_foreign_labels():
    a = FiniteMatrixOp(np.eye(2))
    with pytest.raises(ValueError):
        a.apply(e(5))


def test_finite_matrix_duality(rng):
    a = FiniteMatrixOp(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    assert adjoint_duality_check(a, pairs(a.labels())) < 1e-12


def test_local_columns_exact():
    rows, m = local_columns(S, [Nat(0), Nat(2)])
    assert rows == [Nat(1), Nat(3)]
    np.testing.assert_array_equal(m, np.eye(2))
    rows, m = local_columns(S, [Nat(0), Nat(2)], adjoint=True)
    assert rows == [Nat(1)]

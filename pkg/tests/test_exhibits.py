import math

import numpy as np
import pytest

from quasinormal.exhibits import (
    ALIASES,
    CATALOG,
    ExhibitError,
    achtenZ_demo,
    build_exhibit,
    build_prz1,
    build_prz2,
    build_prz3,
    build_prz4,
    f_of,
    g_of,
    gamma_n,
    harmonic_crossing,
    interior_width,
    parse_exhibit_name,
    separation_margin,
    toeplitz,
    toeplitz_study,
)
from quasinormal.hilbert import TreeVertex
from quasinormal.operators import FiniteMatrixOp, matrix_of
from quasinormal.results import ProbeConfig, Status
from quasinormal.verdicts import identity_residual, power_identity_test, power_words


def test_prz2_constraints():
    build_prz2()
    with pytest.raises(ExhibitError, match="alpha_1"):
        build_prz2(alpha=(0.0, 1.0))
    with pytest.raises(ExhibitError, match="normalization"):
        build_prz2(alpha=(0.5, 0.5))
    with pytest.raises(ExhibitError, match="beta"):
        build_prz2(beta=(1.0, 1.0))
    # |a1 b1|^2 + |a2 b2|^2 = 1 with a = (cos, sin)
    c, s = math.cos(0.3), math.sin(0.3)
    b1 = 0.5
    b2 = math.sqrt((1 - (c * b1) ** 2)) / s
    build_prz2(alpha=(c, s), beta=(b1, b2))


@pytest.mark.parametrize("kappa", [0, 1, 3, math.inf])
def test_prz2_power_two_holds_for_every_kappa(kappa):
    spec = build_prz2(kappa=kappa, depth_cap=6)
    assert power_identity_test(spec.operator, 2).holds
    assert power_identity_test(spec.operator, 3).fails


def test_prz2_report_meets_expectations():
    rep = build_prz2().run(ProbeConfig(num_probes=200))
    assert rep.ok
    assert rep.notes["d(0)"] == pytest.approx(1.0)
    assert rep.notes["norm_S2_e0"] == pytest.approx(1.0)


def test_f_and_g():
    x = 0.25
    assert f_of(x) == pytest.approx(math.log(math.log(1.75) / -math.log(0.25)) / math.log(0.25 / 1.75))
    with pytest.raises(ValueError):
        f_of(1.0)
    # g(x) = 2 at x = 0 and x = n-1 reduces to gamma + (2 - gamma) = 2
    assert g_of(0.0, 0.3, 3) == pytest.approx(2.0)
    assert g_of(2.0, 0.3, 3) == pytest.approx(2.0)
    xs = np.linspace(1.0, 12.0, 50)
    vals = [g_of(t, 0.3, 2) for t in xs]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_gamma_scan_values():
    assert gamma_n(2) == 0.5
    assert gamma_n(3) == 0.5
    assert gamma_n(4) == 2.0**-9
    assert gamma_n(5) == 2.0**-15
    assert gamma_n(6) == 2.0**-21
    for n in range(2, 7):
        v = (n - 1) * f_of(gamma_n(n))
        assert 0 < v <= 1


@pytest.mark.parametrize("n", [2, 3, 4])
def test_prz3_discrepancies_match_closed_form(n):
    spec = build_prz3(n)
    gamma = spec.parameters["gamma"]
    for k in range(2, n + 4):
        v = power_identity_test(spec.operator, k)
        if k == n:
            assert v.holds
            continue
        assert v.fails and v.witness.support() == [TreeVertex(0)]
        assert v.discrepancy == pytest.approx(separation_margin(k, gamma, n), rel=1e-9)
        assert identity_residual(spec.operator, *power_words(k), v.witness) == pytest.approx(v.discrepancy)


def test_prz3_rejects_bad_n():
    with pytest.raises(ExhibitError):
        build_prz3(1)
    with pytest.raises(ExhibitError):
        build_prz3(2.5)


def test_toeplitz_matrix():
    t = toeplitz({0: 2.0, 1: 1.0, -1: 1.0}, 4)
    np.testing.assert_array_equal(t.real, [[2, 1, 0, 0], [1, 2, 1, 0], [0, 1, 2, 1], [0, 0, 1, 2]])
    t = toeplitz({1: 3.0}, 3)
    assert t[1, 0] == 3 and t[0, 1] == 0


def test_toeplitz_study_trend():
    rows = [toeplitz_study(n, {0: 2.0, 1: 1.0, -1: 1.0}) for n in (16, 32, 64)]
    assert all(r["banded_residual"] <= 1e-14 for r in rows)
    d = [r["discrepancy"] for r in rows]
    assert d[0] > d[1] > d[2]
    assert rows[-1]["commutator"] > 0.1
    assert interior_width(64) == 32


def test_prz1_validation():
    with pytest.raises(ExhibitError, match="real"):
        build_prz1(fourier={0: 2.0, 1: 1.0})
    with pytest.raises(ExhibitError, match="negative"):
        build_prz1(fourier={0: 1.0, 1: 1.0, -1: 1.0})
    with pytest.raises(ExhibitError, match="c_1"):
        build_prz1(fourier={0: 1.0})


def test_prz1_report():
    rep = build_prz1().run()
    assert rep.ok
    assert rep.get("toeplitz.discrepancy_ratio").discrepancy < 1e-2


def test_harmonic_crossing_by_summation():
    j, total = harmonic_crossing(10.0)
    assert total > 10.0
    assert sum(1.0 / (i + 1) for i in range(j)) <= 10.0
    assert j + 1 <= 12367


@pytest.mark.parametrize("n", [2, 3])
def test_prz4_report(n):
    rep = build_prz4("poly1", n).run()
    assert rep.ok
    assert rep.get("unbounded.adjoint_power_side").discrepancy == 0.0
    assert rep.get("unbounded.square_summable").discrepancy < math.pi**2 / 6


def test_prz4_rule_validation():
    with pytest.raises(ExhibitError):
        build_prz4("const")
    with pytest.raises(ExhibitError):
        build_prz4("poly1", n=1)
    assert build_prz4("exp2").run().ok


def test_achtenZ_default_and_localization():
    rep = build_exhibit("achtenZ").run()
    assert rep.ok
    jordan = np.array([[0, 1], [0, 0]])
    demo = achtenZ_demo([np.eye(2), jordan, np.diag([1.0, 2.0])])
    assert demo.get("blocks.quasinormal_sum").fails
    assert demo.notes["failing_blocks"] == [1]
    assert demo.get("blocks.quasinormal_iff").context["localized"]
    with pytest.raises(ExhibitError):
        achtenZ_demo([np.eye(2)])


def test_catalog_parser():
    assert parse_exhibit_name("prz3:n=4") == ("prz3", {"n": 4})
    assert parse_exhibit_name("prz4:r=poly1,n=3") == ("prz4", {"r": "poly1", "n": 3})
    assert parse_exhibit_name("separating-shift:n=2") == ("prz3", {"n": 2})
    with pytest.raises(KeyError):
        parse_exhibit_name("prz9")
    with pytest.raises(ValueError):
        parse_exhibit_name("prz3:n")
    with pytest.raises(ValueError):
        build_exhibit("prz3:m=2")
    assert set(ALIASES.values()) == set(CATALOG)
    assert build_exhibit("prz1", N=[16, 32]).parameters["sizes"] == [16, 32]
    assert build_exhibit("prz2:kappa=inf").parameters["kappa"] == "inf"


def test_every_catalog_entry_runs():
    for name in CATALOG:
        rep = build_exhibit(name).run(ProbeConfig(num_probes=50))
        assert rep.ok, name
        assert all(e.expected in (None, *Status) for e in rep.entries)


def test_finite_subtree_matches_matrix_oracle():
    spec = build_prz3(2, depth_cap=6)
    s = spec.operator
    labels = s.labels()
    m = matrix_of(s, labels).matrix
    finite = FiniteMatrixOp(m)
    for k in (2, 3):
        i0 = labels.index(TreeVertex(0))
        lhs = np.linalg.matrix_power(m.conj().T @ m, k)
        rhs = np.linalg.matrix_power(m.conj().T, k) @ np.linalg.matrix_power(m, k)
        assert abs(lhs - rhs)[:, i0].max() == pytest.approx(
            power_identity_test(s, k).discrepancy, abs=1e-12)
    assert finite.n == len(labels)

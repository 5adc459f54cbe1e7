"""Reconstructions of the counterexample operators, each with its expected outcomes.

Catalog names (used by the CLI):

``prz1``
    Toeplitz compression C_N = S_N T_N^{1/2}: a convergence study of
    (C^*C)^2 = C^{*2}C^2 in N.
``prz2``
    Weighted shift on T_(2,kappa) with (C^*C)^2 = C^{*2}C^2 that is not
    quasinormal and not hyponormal.
``prz3:n=<n>``
    Weighted shift on T_(2,0) whose power identity holds exactly at k = n.
``prz4:r=<rule>,n=<n>``
    Unbounded direct sum of scaled shifts with a vector in D((C^n)^*) outside
    D(C^{*n}).
``achtenZ``
    Finite direct sums: quasinormal iff every block is.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .hilbert import DEFAULT_TOL, Block, Nat, SparseVec, TolerancePolicy, norm
from .operators import (
    SCALE_RULES,
    DirectSumOp,
    FiniteMatrixOp,
    LocalOperator,
    ScaleRule,
    direct_sum,
    matrix_of,
    power,
    shift_isometry,
    sparse_to_dense,
)
from .results import Fails, Holds, ProbeConfig, Report, Status, Verdict, decide
from .spectral import herm_eig, modulus, opnorm, random_unitary
from .trees import (
    T2Kappa,
    TreeShiftOp,
    branch_weight_sum,
    norm_power_on_basis,
    basis_power_norms_test,
    quasinormal_tree_test,
    t2kappa_weights,
)
from .verdicts import (
    ANCHORS,
    embry_suite,
    hyponormal_falsify,
    paranormal_falsify,
    power_identity_test,
    quasinormal_test,
)

HOLDS, FAILS, INCONCLUSIVE = Status.HOLDS, Status.FAILS, Status.INCONCLUSIVE
CONSTRAINT_TOL = 1e-12


class ExhibitError(ValueError):
    """A parameter constraint of an exhibit is violated."""


@dataclass(frozen=True)
class Expectation:
    predicate: str
    status: Status
    anchor: str


@dataclass
class ExhibitSpec:
    """A built exhibit: validated parameters, operator(s) and expected outcomes.

    ``runner(spec, probes, tol)`` evaluates the bundled suite and returns a
    Report whose entries carry the expectations.
    """

    name: str
    parameters: dict
    operator: LocalOperator | None
    expected: list[Expectation]
    runner: Callable[["ExhibitSpec", ProbeConfig, TolerancePolicy], Report]
    extras: dict = field(default_factory=dict)

    def expectation(self, predicate: str) -> Status | None:
        for e in self.expected:
            if e.predicate == predicate:
                return e.status
        return None

    def power_expectation(self, k: int) -> Status | None:
        """Expected status of the k-th power identity, when the exhibit fixes it."""
        table = self.extras.get("power_expectation", {})
        return table.get(k, self.extras.get("power_default"))

    def run(self, probes: ProbeConfig | None = None, tol: TolerancePolicy = DEFAULT_TOL) -> Report:
        return self.runner(self, probes or ProbeConfig(), tol)

    def _report(self, probes: ProbeConfig, tol: TolerancePolicy) -> Report:
        desc = self.operator.descriptor if self.operator is not None else self.name
        return Report(desc, {"exhibit": self.name, "parameters": self.parameters,
                             "probes": probes.to_json(), "tol": tol.to_json()}, seed=probes.seed)

    def _add(self, rep: Report, predicate: str, verdict: Verdict):
        anchor = next((e.anchor for e in self.expected if e.predicate == predicate), "")
        return rep.add(predicate, anchor, verdict, self.expectation(predicate))


# ---------------------------------------------------------------------------
# branching shift with the n = 2 power identity


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= CONSTRAINT_TOL


def build_prz2(alpha: Sequence[complex] = (2 ** -0.5, 2 ** -0.5),
               beta: Sequence[complex] = (2 ** -0.5, math.sqrt(1.5)),
               kappa=1, depth_cap: int = 8, paranormal_probes: int = 10_000) -> ExhibitSpec:
    """Shift on T_(2,kappa), trunk weights 1, alpha_i at (i,1), beta_i deeper.

    Constraints: all weights nonzero, |a1|^2 + |a2|^2 = 1,
    |a1 b1|^2 + |a2 b2|^2 = 1 and (1 - |b1|)(1 - |b2|) != 0.
    """
    a1, a2 = (complex(x) for x in alpha)
    b1, b2 = (complex(x) for x in beta)
    errors = []
    if 0 in (a1, a2, b1, b2):
        errors.append("all of alpha_1, alpha_2, beta_1, beta_2 must be nonzero")
    if not _close(abs(a1) ** 2 + abs(a2) ** 2, 1.0):
        errors.append("normalization |alpha_1|^2 + |alpha_2|^2 = 1 violated")
    if not _close(abs(a1 * b1) ** 2 + abs(a2 * b2) ** 2, 1.0):
        errors.append("normalization |alpha_1 beta_1|^2 + |alpha_2 beta_2|^2 = 1 violated")
    if _close((1 - abs(b1)) * (1 - abs(b2)), 0.0):
        errors.append("(1 - |beta_1|)(1 - |beta_2|) must be nonzero")
    if errors:
        raise ExhibitError("; ".join(errors))
    tree = T2Kappa(kappa, depth_cap, trunk_depth_cap=depth_cap if kappa == math.inf else None)
    op = TreeShiftOp(tree, t2kappa_weights((a1, a2), (b1, b2)))
    expected = [
        Expectation("power_identity[n=2]", HOLDS, ANCHORS["power_identity"]),
        Expectation("power_identity[n=3]", FAILS, ANCHORS["power.biconditional"]),
        Expectation("basis_power_norms[n=2]", HOLDS, "||S e_u||^n = ||S^n e_u|| for every vertex u"),
        Expectation("quasinormal", FAILS, ANCHORS["quasinormal"]),
        Expectation("quasinormal_tree", FAILS, "d(v) = d(u) for each child v with nonzero weight"),
        Expectation("hyponormal", FAILS, ANCHORS["hyponormal"]),
        Expectation("paranormal", INCONCLUSIVE, ANCHORS["paranormal"]),
    ]
    params = dict(alpha=[a1, a2], beta=[b1, b2], kappa="inf" if kappa == math.inf else kappa,
                  depth_cap=depth_cap, paranormal_probes=paranormal_probes)
    extras = {"power_expectation": {0: HOLDS, 1: HOLDS, 2: HOLDS, 3: FAILS}}
    return ExhibitSpec("prz2", params, op, expected, _run_prz2, extras)


def _run_prz2(spec: ExhibitSpec, probes: ProbeConfig, tol: TolerancePolicy) -> Report:
    op = spec.operator
    rep = spec._report(probes, tol)
    for n in (2, 3):
        spec._add(rep, f"power_identity[n={n}]", power_identity_test(op, n, probes, tol))
    spec._add(rep, "basis_power_norms[n=2]", basis_power_norms_test(op, 2, tol=tol))
    spec._add(rep, "quasinormal", quasinormal_test(op, probes, tol))
    spec._add(rep, "quasinormal_tree", quasinormal_tree_test(op, tol=tol))
    spec._add(rep, "hyponormal", hyponormal_falsify(op, probes, tol))
    budget = ProbeConfig(probes.seed, max(probes.num_probes, spec.parameters["paranormal_probes"]),
                         probes.support_size, probes.label_window)
    spec._add(rep, "paranormal", paranormal_falsify(op, budget, tol))
    rep.notes["d(0)"] = branch_weight_sum(op, 0)
    rep.notes["norm_S2_e0"] = norm_power_on_basis(op, 0, 2)
    return rep


# ---------------------------------------------------------------------------
# branching shift separating the power identities


def f_of(x: float) -> float:
    """log(log(2-x) / (-log x)) / log(x / (2-x)) on (0, 1)."""
    if not 0.0 < x < 1.0:
        raise ValueError(f"f is defined on (0, 1), got {x}")
    return math.log(math.log(2.0 - x) / (-math.log(x))) / math.log(x / (2.0 - x))


def g_of(x: float, gamma: float, n: int) -> float:
    """gamma^{x/(n-1)} + (2-gamma)^{x/(n-1)}."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0.0 < gamma < 2.0:
        raise ValueError("gamma must lie in (0, 2)")
    e = x / (n - 1)
    return gamma**e + (2.0 - gamma) ** e


def gamma_n(n: int, max_m: int = 64) -> float:
    """Largest x = 2^-m (m = 1, 2, ...) with 0 < (n-1) f(x) <= 1."""
    if n < 2:
        raise ValueError("n must be at least 2")
    for m in range(1, max_m + 1):
        x = 2.0**-m
        v = (n - 1) * f_of(x)
        if 0.0 < v <= 1.0:
            return x
    raise ArithmeticError(f"scan for gamma_{n} exhausted at m = {max_m}")


def separation_margin(k: int, gamma: float, n: int) -> float:
    """|g(k-1)/2 - 1|: the e_0 discrepancy of the k-th power identity."""
    return abs(0.5 * g_of(k - 1, gamma, n) - 1.0)


def build_prz3(n: int = 2, depth_cap: int = 8) -> ExhibitSpec:
    """Shift on T_(2,0) with alpha = 2^{-1/2}, beta = (gamma^{1/(2(n-1))}, (2-gamma)^{1/(2(n-1))})."""
    if int(n) != n or n < 2:
        raise ExhibitError("n must be an integer >= 2")
    n = int(n)
    gamma = gamma_n(n)
    a = 2 ** -0.5
    b1 = gamma ** (1.0 / (2 * (n - 1)))
    b2 = (2.0 - gamma) ** (1.0 / (2 * (n - 1)))
    op = TreeShiftOp(T2Kappa(0, depth_cap), t2kappa_weights((a, a), (b1, b2)))
    k_max = n + 3
    expected = [Expectation(f"power_identity[n={k}]", HOLDS if k in (0, 1, n) else FAILS,
                            ANCHORS["power_identity"]) for k in range(k_max + 1)]
    expected.append(Expectation("quasinormal", FAILS, ANCHORS["quasinormal"]))
    expected.append(Expectation("separation_margin", HOLDS,
                                "|g(k-1)/2 - 1| > 0 for k != n, g strictly increasing on [1, inf)"))
    margins = {k: separation_margin(k, gamma, n) for k in range(2, k_max + 1)}
    params = dict(n=n, gamma=gamma, depth_cap=depth_cap, beta=[b1, b2], f_gamma=(n - 1) * f_of(gamma))
    extras = {"margins": margins, "k_max": k_max, "power_expectation": {0: HOLDS, 1: HOLDS, n: HOLDS},
              "power_default": FAILS}
    return ExhibitSpec(f"prz3:n={n}", params, op, expected, _run_prz3, extras)


MARGIN_FLOOR = 1e-4


def _run_prz3(spec: ExhibitSpec, probes: ProbeConfig, tol: TolerancePolicy, n_max: int | None = None) -> Report:
    op = spec.operator
    n = spec.parameters["n"]
    k_max = spec.extras["k_max"] if n_max is None else n_max
    rep = spec._report(probes, tol)
    rep.config["n_max"] = k_max
    expected_power = {k: spec.power_expectation(k) for k in range(k_max + 1)}
    suite = embry_suite(op, k_max, probes, tol, expected_power, FAILS)
    rep.extend(suite)
    gamma = spec.parameters["gamma"]
    margins = {k: separation_margin(k, gamma, n) for k in range(2, k_max + 1) if k != n}
    worst_k = min(margins, key=margins.get)
    spec._add(rep, "separation_margin",
              Holds(margins[worst_k], k=worst_k, floor=MARGIN_FLOOR) if margins[worst_k] > MARGIN_FLOOR
              else Fails(margins[worst_k], f"k={worst_k}", floor=MARGIN_FLOOR))
    rep.notes["gamma_n"] = gamma
    rep.notes["margins"] = {str(k): m for k, m in margins.items()}
    return rep


# ---------------------------------------------------------------------------
# Toeplitz compressions


DEFAULT_SYMBOL = {0: 2.0, 1: 1.0, -1: 1.0}
SYMBOL_GRID = 4096


def symbol_values(coeffs: dict, grid: int = SYMBOL_GRID) -> np.ndarray:
    t = 2 * np.pi * np.arange(grid) / grid
    return sum(c * np.exp(1j * k * t) for k, c in coeffs.items())


def toeplitz(coeffs: dict, n: int) -> np.ndarray:
    """(T_N)_{jk} = c_{j-k}."""
    t = np.zeros((n, n), dtype=complex)
    for k, c in coeffs.items():
        t += c * np.eye(n, k=-k)
    return t


def shift_compression(n: int) -> np.ndarray:
    return np.eye(n, k=-1, dtype=complex)


def psd_sqrt(h: np.ndarray) -> np.ndarray:
    return herm_eig(h).apply_function(lambda lam: np.sqrt(np.clip(lam, 0.0, None)))


def interior_width(n: int) -> int:
    """Interior window [0, N//2): away from the truncation edge at N - 1."""
    return n // 2


def toeplitz_study(n: int, coeffs: dict) -> dict:
    """Banded identity residual, interior power-identity and commutator norms at size N."""
    t = toeplitz(coeffs, n)
    s = shift_compression(n)
    band = max(abs(k) for k in coeffs)
    banded = s.conj().T @ t @ s
    banded_res = float(np.abs((banded - t)[: n - 1, : n - 1]).max())
    c = s @ psd_sqrt(t)
    ch = c.conj().T
    g = ch @ c
    d2 = g @ g - ch @ ch @ c @ c
    q = c @ ch @ c - ch @ c @ c
    w = interior_width(n)
    edge = max(n - 2 * band, 1)
    comm = s @ t - t @ s
    return {
        "N": n,
        "interior": w,
        "banded_residual": banded_res,
        "discrepancy": opnorm(d2[:w, :w]),
        "discrepancy_edge_window": opnorm(d2[:edge, :edge]),
        "quasinormal_residual": opnorm(q[:w, :w]),
        "commutator": opnorm(comm[:w, :w]),
    }


def build_prz1(sizes: Sequence[int] = (16, 32, 64), fourier: dict | None = None) -> ExhibitSpec:
    """Compressions of T_phi for a nonnegative trigonometric polynomial phi."""
    coeffs = dict(DEFAULT_SYMBOL if fourier is None else fourier)
    coeffs = {int(k): complex(v) for k, v in coeffs.items()}
    for k, c in coeffs.items():
        if abs(c - np.conj(coeffs.get(-k, 0.0))) > CONSTRAINT_TOL:
            raise ExhibitError("symbol must be real: need c_{-k} = conj(c_k)")
    if abs(coeffs.get(1, 0.0)) == 0:
        raise ExhibitError("c_1 must be nonzero")
    vals = symbol_values(coeffs).real
    if vals.min() < -CONSTRAINT_TOL:
        raise ExhibitError(f"symbol takes the negative value {vals.min():.3e}")
    sizes = sorted(int(n) for n in sizes)
    if not sizes or sizes[0] < 4:
        raise ExhibitError("sizes must be >= 4")
    expected = [
        Expectation("toeplitz.banded_identity", HOLDS, "S*T_phi S = T_phi"),
        Expectation("toeplitz.discrepancy_decreasing", HOLDS, "(C*C)^2 = C*^2 C^2 in the limit N -> inf"),
        Expectation("toeplitz.discrepancy_ratio", HOLDS, "(C*C)^2 = C*^2 C^2 in the limit N -> inf"),
        Expectation("toeplitz.power_identity[n=2]", HOLDS, ANCHORS["power_identity"]),
        Expectation("toeplitz.quasinormal", FAILS, ANCHORS["quasinormal"]),
        Expectation("toeplitz.commutator", HOLDS, "<S T_phi 1, 1> = 0 != <T_phi S 1, 1>"),
    ]
    params = {"sizes": sizes, "symbol": {str(k): coeffs[k] for k in sorted(coeffs)}}
    return ExhibitSpec("prz1", params, None, expected, _run_prz1, {"coeffs": coeffs})


BANDED_TOL = 1e-14
RATIO_TARGET = 1e-2
INTERIOR_TARGET = 1e-6
COMMUTATOR_FLOOR = 0.1


def _run_prz1(spec: ExhibitSpec, probes: ProbeConfig, tol: TolerancePolicy) -> Report:
    rep = spec._report(probes, tol)
    coeffs = spec.extras["coeffs"]
    rows = [toeplitz_study(n, coeffs) for n in spec.parameters["sizes"]]
    first, last = rows[0], rows[-1]
    worst_banded = max(r["banded_residual"] for r in rows)
    spec._add(rep, "toeplitz.banded_identity", decide(worst_banded, BANDED_TOL, "entrywise"))
    disc = [r["discrepancy"] for r in rows]
    steps = [b - a for a, b in zip(disc, disc[1:])]
    spec._add(rep, "toeplitz.discrepancy_decreasing",
              Holds(max(steps, default=0.0)) if all(s < 0 for s in steps)
              else Fails(max(steps), f"N={rows[steps.index(max(steps)) + 1]['N']}"))
    ratio = disc[-1] / disc[0] if disc[0] > 0 else 0.0
    spec._add(rep, "toeplitz.discrepancy_ratio",
              decide(ratio, RATIO_TARGET, f"N={last['N']}", first_N=first["N"], last_N=last["N"]))
    spec._add(rep, "toeplitz.power_identity[n=2]", decide(last["discrepancy"], INTERIOR_TARGET, f"N={last['N']}"))
    spec._add(rep, "toeplitz.quasinormal",
              decide(last["quasinormal_residual"], tol.bound(1.0), f"N={last['N']}"))
    spec._add(rep, "toeplitz.commutator",
              Holds(last["commutator"], floor=COMMUTATOR_FLOOR) if last["commutator"] > COMMUTATOR_FLOOR
              else Fails(last["commutator"], f"N={last['N']}", floor=COMMUTATOR_FLOOR))
    rep.notes["table"] = rows
    return rep


# ---------------------------------------------------------------------------
# unbounded direct sum of scaled shifts

# Rules accepted for the unbounded sum: r_j >= 1, nondecreasing, unbounded
# and r_j^2 >= j + 1, so that sum t_j^2 <= sum 1/(j+1)^2.
UNBOUNDED_RULES = ("poly1", "poly2", "exp2")
HARMONIC_TARGET = 10.0
SYMBOLIC_TARGET = 1000.0


def harmonic_crossing(m: float) -> tuple[int, float]:
    """Smallest J with sum_{j<=J} 1/(j+1) > m, by direct summation."""
    total, j = 0.0, -1
    while total <= m:
        j += 1
        total += 1.0 / (j + 1)
    return j, total


def build_prz4(growth: str | ScaleRule = "poly1", n: int = 2) -> ExhibitSpec:
    """C = sum_j r_j S with t_j = 1/(r_j sqrt(j+1)) and g = sum_j t_j e_{n-1}^{(j)}."""
    if int(n) != n or n < 2:
        raise ExhibitError("n must be an integer >= 2")
    n = int(n)
    rule = SCALE_RULES.get(growth) if isinstance(growth, str) else growth
    if rule is None or rule.name not in UNBOUNDED_RULES or not rule.monotone_unbounded:
        raise ExhibitError(f"growth rule must be one of {', '.join(UNBOUNDED_RULES)} (monotone, unbounded)")
    for j in range(64):
        if rule(j) < 1.0 or rule(j) ** 2 < j + 1:
            raise ExhibitError(f"rule {rule.name} violates r_j >= 1 or r_j^2 >= j+1 at j={j}")
    op = direct_sum(shift_isometry(), rule)
    expected = [
        Expectation("unbounded.adjoint_power_side", HOLDS, "S*^k e_n = 0 for k > n"),
        Expectation("unbounded.square_summable", HOLDS, "sum t_j^2 <= sum 1/(j+1)^2 < pi^2/6"),
        Expectation("unbounded.divergence_numeric", HOLDS, "sum_j t_j^2 r_j^2 ||S* e_(n-1)||^2 diverges"),
        Expectation("unbounded.divergence_symbolic", HOLDS, "sum_j t_j^2 r_j^2 ||S* e_(n-1)||^2 diverges"),
        Expectation("unbounded.term_formula", HOLDS, "||C* (t_j e_(n-1)^(j))||^2 = 1/(j+1)"),
    ]
    return ExhibitSpec(f"prz4:r={rule.name},n={n}", {"rule": rule.name, "n": n}, op, expected, _run_prz4,
                       {"rule": rule})


def witness_component(rule: ScaleRule, n: int, j: int) -> SparseVec:
    t = 1.0 / (rule(j) * math.sqrt(j + 1))
    return SparseVec({Block(j, Nat(n - 1)): t})


def _run_prz4(spec: ExhibitSpec, probes: ProbeConfig, tol: TolerancePolicy, blocks: int = 200) -> Report:
    op: DirectSumOp = spec.operator
    rule = spec.extras["rule"]
    n = spec.parameters["n"]
    rep = spec._report(probes, tol)
    adj_n = power(op, n)
    # (C^n)^* side: sum_j ||(C^n)^* t_j e_{n-1}^{(j)}||^2, each term exactly 0
    side = sum(norm(adj_n.adjoint_apply(witness_component(rule, n, j))) ** 2 for j in range(blocks))
    spec._add(rep, "unbounded.adjoint_power_side",
              Holds(side, blocks_checked=blocks) if side == 0.0 else Fails(side, "nonzero", blocks_checked=blocks))
    # t_j^2 partial sums against the Basel bound
    tsq = 0.0
    for j in range(10_000):
        try:
            r = rule(j)
        except OverflowError:
            break  # remaining terms are below 2^-2046
        tsq += 1.0 / (r * r * (j + 1))
    basel = math.pi**2 / 6
    spec._add(rep, "unbounded.square_summable",
              Holds(tsq, basel=basel, terms=10_000, comparison="t_j^2 <= 1/(j+1)^2")
              if tsq < basel else Fails(tsq, "partial_sum", basel=basel))
    # k = 1 term equals 1/(j+1) by direct application of C^*
    term_err = max(abs(norm(op.adjoint_apply(witness_component(rule, n, j))) ** 2 - 1.0 / (j + 1)) * (j + 1)
                   for j in range(blocks))
    spec._add(rep, "unbounded.term_formula", decide(term_err, 1e-12, "term", blocks_checked=blocks))
    j_cross, total = harmonic_crossing(HARMONIC_TARGET)
    spec._add(rep, "unbounded.divergence_numeric",
              Holds(total, M=HARMONIC_TARGET, J=j_cross, terms=j_cross + 1, partial_sum=total))
    # closed form: H_{J+1} > ln(J+2) > ln J >= M for J = ceil(e^M)
    log_j = SYMBOLIC_TARGET
    spec._add(rep, "unbounded.divergence_symbolic",
              Holds(0.0, M=SYMBOLIC_TARGET, J="ceil(exp(M))", log_J=log_j,
                    bound="sum_{j<=J} 1/(j+1) > ln(J+2) > ln(J) >= M"))
    return rep


# ---------------------------------------------------------------------------
# finite direct sums


def block_diag(mats: Sequence[np.ndarray]) -> np.ndarray:
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for m in mats:
        k = m.shape[0]
        out[i:i + k, i:i + k] = m
        i += k
    return out


def sum_labels(blocks: Sequence[FiniteMatrixOp]) -> list:
    return [Block(j, Nat(k)) for j, b in enumerate(blocks) for k in range(b.n)]


def achtenZ_demo(blocks: Sequence, probes: ProbeConfig | None = None,
                 tol: TolerancePolicy = DEFAULT_TOL) -> Report:
    """Finite direct sum of matrices checked blockwise.

    Entries: adjoint powers act blockwise (n <= 3, on probes), C^*C and |C|
    are blockwise, and the sum is quasinormal iff every block is.
    """
    blocks = [b if isinstance(b, FiniteMatrixOp) else FiniteMatrixOp(np.asarray(b)) for b in blocks]
    if len(blocks) < 2:
        raise ExhibitError("at least two blocks required")
    probes = probes or ProbeConfig()
    op = DirectSumOp(blocks, [1.0] * len(blocks))
    labels = sum_labels(blocks)
    rep = Report(op.descriptor, {"blocks": len(blocks), "probes": probes.to_json(), "tol": tol.to_json()},
                 seed=probes.seed)
    whole = matrix_of(op, labels).matrix
    mats = [b.matrix for b in blocks]
    scale = max(1.0, max(opnorm(m) for m in mats))

    worst = 0.0
    for n in (1, 2, 3):
        pw = power(op, n)
        per = [np.linalg.matrix_power(m, n).conj().T for m in mats]
        for f in probes.probes(labels):
            lhs = pw.adjoint_apply(f)
            x = sparse_to_dense(f, labels)
            y = block_diag(per) @ x
            rhs = SparseVec((lab, v) for lab, v in zip(labels, y))
            worst = max(worst, norm(lhs - rhs) / (norm(f) * scale**n))
    rep.add("blocks.adjoint_powers", "(C^n)* = sum of (C_w^n)*", decide(worst, tol.bound(1.0), "probe"),
            HOLDS)

    g_res = opnorm(whole.conj().T @ whole - block_diag([m.conj().T @ m for m in mats]))
    rep.add("blocks.gram", "C*C = sum of C_w* C_w", decide(g_res, tol.bound(scale**2), "gram"), HOLDS)
    mod_res = opnorm(modulus(whole) - block_diag([modulus(m) for m in mats]))
    rep.add("blocks.modulus", "|sum C_w| = sum |C_w|", decide(mod_res, 1e-9 * scale, "modulus"), HOLDS)

    per_block = [quasinormal_test(b, tol=tol) for b in blocks]
    total = quasinormal_test(op, probes.with_window(labels), tol)
    rep.add("blocks.quasinormal_sum", ANCHORS["quasinormal"], total)
    for j, v in enumerate(per_block):
        rep.add(f"blocks.quasinormal[{j}]", ANCHORS["quasinormal"], v)
    agree = total.holds == all(v.holds for v in per_block)
    localized = True
    if total.fails and isinstance(total.witness, SparseVec):
        bad = {lab.j for lab in total.witness.support()}
        localized = all(not per_block[j].holds for j in bad)
    rep.add("blocks.quasinormal_iff", "sum quasinormal <=> every block quasinormal",
            Holds(0.0, localized=localized) if agree and localized
            else Fails(1.0, "disagreement", localized=localized), HOLDS)
    rep.notes["failing_blocks"] = [j for j, v in enumerate(per_block) if not v.holds]
    return rep


def random_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    v = random_unitary(rng, n)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return (v * z) @ v.conj().T


def default_achtenZ_blocks() -> list[list[np.ndarray]]:
    rng = np.random.Generator(np.random.PCG64(0))
    jordan = np.array([[0, 1], [0, 0]], dtype=complex)
    return [[random_normal(rng, 3), random_normal(rng, 2)], [random_normal(rng, 3), jordan]]


def build_achtenZ(block_sets: Sequence[Sequence] | None = None) -> ExhibitSpec:
    sets = default_achtenZ_blocks() if block_sets is None else [list(s) for s in block_sets]
    for s in sets:
        if len(s) < 2:
            raise ExhibitError("each direct sum needs at least two blocks")
    expected = [Expectation(f"sum[{i}].blocks.quasinormal_iff", HOLDS, "sum quasinormal <=> every block")
                for i in range(len(sets))]
    return ExhibitSpec("achtenZ", {"sums": len(sets)}, None, expected, _run_achtenZ, {"sets": sets})


def _run_achtenZ(spec: ExhibitSpec, probes: ProbeConfig, tol: TolerancePolicy) -> Report:
    rep = spec._report(probes, tol)
    for i, s in enumerate(spec.extras["sets"]):
        rep.extend(achtenZ_demo(s, probes, tol), prefix=f"sum[{i}].")
    return rep


# ---------------------------------------------------------------------------
# catalog


CATALOG = {
    "prz1": build_prz1,
    "prz2": build_prz2,
    "prz3": build_prz3,
    "prz4": build_prz4,
    "achtenZ": build_achtenZ,
}

ALIASES = {
    "toeplitz": "prz1",
    "branching-shift": "prz2",
    "separating-shift": "prz3",
    "unbounded-sum": "prz4",
    "direct-sum": "achtenZ",
}


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_exhibit_name(name: str) -> tuple[str, dict]:
    """``'prz3:n=4'`` -> ``('prz3', {'n': 4})``; ``'prz4:r=poly1,n=3'`` likewise."""
    base, _, rest = name.partition(":")
    base = ALIASES.get(base, base)
    if base not in CATALOG:
        raise KeyError(f"unknown exhibit {name!r}; known: {', '.join(CATALOG)}")
    params = {}
    if rest:
        for part in rest.split(","):
            key, eq, val = part.partition("=")
            if not eq or not key:
                raise ValueError(f"malformed exhibit parameter {part!r}")
            params[key.strip()] = _parse_value(val.strip())
    return base, params


_PARAM_NAMES = {
    "prz1": {"N": "sizes"},
    "prz2": {"kappa": "kappa", "depth_cap": "depth_cap"},
    "prz3": {"n": "n", "depth_cap": "depth_cap"},
    "prz4": {"r": "growth", "n": "n"},
    "achtenZ": {},
}


def build_exhibit(name: str, **overrides) -> ExhibitSpec:
    base, params = parse_exhibit_name(name)
    kwargs = {}
    allowed = _PARAM_NAMES[base]
    for key, val in {**params, **overrides}.items():
        if key not in allowed:
            raise ValueError(f"exhibit {base} takes no parameter {key!r}")
        kwargs[allowed[key]] = val
    if base == "prz1" and "sizes" in kwargs and not isinstance(kwargs["sizes"], (list, tuple)):
        kwargs["sizes"] = [kwargs["sizes"]]
    if base == "prz2" and kwargs.get("kappa") in ("inf", math.inf):
        kwargs["kappa"] = math.inf
    return CATALOG[base](**kwargs)

"""Predicates deciding or falsifying operator identities, with witnesses.

Identities between words in C and C^* (``CC^*C = C^*CC``, ``(C^*C)^n =
C^{*n}C^n``, ``C^*C = CC^*``) are decided exactly for finite matrices and
checked on basis vectors of a label window plus random probes for local
operators.  Paranormality and hyponormality are decided for finite matrices
and only falsified for infinite-dimensional local operators.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .hilbert import DEFAULT_TOL, Label, Nat, SparseVec, TolerancePolicy, norm
from .operators import (
    FiniteMatrixOp,
    LocalOperator,
    dense_to_sparse,
    local_columns,
    power,
    sparse_to_dense,
)
from .results import (
    Fails,
    Holds,
    Inconclusive,
    ProbeConfig,
    Report,
    Status,
    Verdict,
    decide,
)
from .spectral import (
    as_matrix,
    herm_eig,
    resolvent_commutation_check,
    spectral_commutation_check,
    window_norm,
)

DEFAULT_PROBES = ProbeConfig()

ANCHORS = {
    "quasinormal": "quasinormality: CC*C = C*CC",
    "normality": "normality: C*C = CC*",
    "power_identity": "power identity: C*^n C^n = (C*C)^n",
    "commute.triple": "CC*C = C*CC",
    "commute.resolvent": "(I+C*C)^-1 C = C (I+C*C)^-1",
    "commute.spectral": "E_|C| C = C E_|C|",
    "commute.agreement": "triple-product, resolvent and spectral-measure commutation are equivalent",
    "power.biconditional": "quasinormal <=> power identities at n = 2 and n = 3",
    "power.all_n": "quasinormal => (C*C)^n = C*^n C^n for every n",
    "moment": "truncated operator Stieltjes moment problem M_k = int x^k dE, k <= 3",
    "paranormal": "paranormality: ||Cf||^2 <= ||C^2 f|| ||f||",
    "hyponormal": "hyponormality: C*C >= CC*",
    "finite.power2_normal": "finite dimension: (C*C)^2 = C*^2 C^2 <=> C normal",
    "quasinormal_power": "C quasinormal => (C^n)*^k (C^n)^k = (C*C)^(nk) and C^n quasinormal",
}


# ---------------------------------------------------------------------------
# words in C and C^*


def quasinormal_words():
    return "CAC", "ACC"


def normality_words():
    return "AC", "CA"


def power_words(n: int):
    return "AC" * n, "A" * n + "C" * n


def apply_word(c: LocalOperator, word: str, f: SparseVec) -> SparseVec:
    """Apply a word in C ('C') and C^* ('A'), rightmost letter first."""
    for letter in reversed(word):
        f = c.apply(f) if letter == "C" else c.adjoint_apply(f)
    return f


def matrix_word(m: np.ndarray, word: str) -> np.ndarray:
    out = np.eye(m.shape[0], dtype=complex)
    mh = m.conj().T
    for letter in word:
        out = out @ (m if letter == "C" else mh)
    return out


def identity_residual(c: LocalOperator, lhs: str, rhs: str, f: SparseVec) -> float:
    """||lhs f - rhs f|| / ||f||; the replay function for word identities."""
    nf = norm(f)
    if nf == 0:
        return 0.0
    return norm(apply_word(c, lhs, f) - apply_word(c, rhs, f)) / nf


def resolve_window(c: LocalOperator, probes: ProbeConfig, n: int = 1) -> list:
    if probes.label_window is not None:
        return list(probes.label_window)
    if hasattr(c, "default_window"):
        return list(c.default_window(n))
    raise ValueError(f"no label window for {c.descriptor}; set ProbeConfig.label_window")


def local_window_norm(c: LocalOperator, window: Sequence[Label]) -> float:
    w = 0.0
    for lab in window:
        w = max(w, norm(c.image(lab)), norm(c.coimage(lab)))
    return w


def word_identity_test(c: LocalOperator, lhs: str, rhs: str, probes: ProbeConfig = DEFAULT_PROBES,
                       tol: TolerancePolicy = DEFAULT_TOL, window_depth: int = 1) -> Verdict:
    """Decide ``lhs = rhs`` (finite matrix) or check it on window + probes."""
    degree = max(len(lhs), len(rhs))
    if isinstance(c, FiniteMatrixOp):
        m = c.matrix
        d = matrix_word(m, lhs) - matrix_word(m, rhs)
        cols = np.linalg.norm(d, axis=0) if d.size else np.zeros(0)
        bound = tol.bound(window_norm(m) ** degree)
        if cols.size == 0:
            return Holds(0.0, bound=bound, tol=tol, exact=True)
        j = int(np.argmax(cols))
        return decide(float(cols[j]), bound, SparseVec.basis(Nat(j)), tol=tol, exact=True)
    window = resolve_window(c, probes, window_depth)
    bound = tol.bound(local_window_norm(c, window) ** degree)
    worst_basis, worst_lab = 0.0, None
    for lab in window:
        r = identity_residual(c, lhs, rhs, SparseVec.basis(lab))
        if worst_lab is None or r > worst_basis:
            worst_basis, worst_lab = r, lab
    worst_probe, worst_f = 0.0, None
    used = 0
    for f in probes.probes(window):
        used += 1
        r = identity_residual(c, lhs, rhs, f)
        if worst_f is None or r > worst_probe:
            worst_probe, worst_f = r, f
    ctx = dict(window=window, seed=probes.seed, probes_used=used, tol=tol, bound=bound)
    if worst_basis > bound:
        return Fails(worst_basis, SparseVec.basis(worst_lab), **ctx)
    if worst_f is not None and worst_probe > bound:
        return Fails(worst_probe, worst_f / norm(worst_f), **ctx)
    return Holds(max(worst_basis, worst_probe), **ctx)


def quasinormal_test(c: LocalOperator, probes: ProbeConfig = DEFAULT_PROBES,
                     tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    return word_identity_test(c, *quasinormal_words(), probes, tol)


def normality_test(c: LocalOperator, probes: ProbeConfig = DEFAULT_PROBES,
                   tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    return word_identity_test(c, *normality_words(), probes, tol)


def power_identity_test(c: LocalOperator, n: int, probes: ProbeConfig = DEFAULT_PROBES,
                        tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    """(C^*C)^n = C^{*n}C^n; trivially true for n in {0, 1}."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n <= 1:
        return Holds(0.0, n=n, trivial=True)
    v = word_identity_test(c, *power_words(n), probes, tol, window_depth=n)
    v.context["n"] = n
    return v


# ---------------------------------------------------------------------------
# suites


def commutation_agreement(c, tol: TolerancePolicy = DEFAULT_TOL) -> Report:
    """Evaluate conditions (i), (iii), (iv) on a matrix and check they agree.

    In finite dimension the inclusion in (i) and the equality in (ii) coincide,
    so (i) is evaluated as the equality CC^*C = C^*CC.
    """
    m = as_matrix(c)
    op = c if isinstance(c, FiniteMatrixOp) else FiniteMatrixOp(m)
    rep = Report(op.descriptor, {"tol": tol.to_json()})
    vi = rep.add("commute.triple", ANCHORS["commute.triple"], quasinormal_test(op, tol=tol))
    viii = rep.add("commute.resolvent", ANCHORS["commute.resolvent"], resolvent_commutation_check(m, tol))
    viv = rep.add("commute.spectral", ANCHORS["commute.spectral"], spectral_commutation_check(m, tol))
    statuses = {vi.status, viii.status, viv.status}
    agree = len(statuses) == 1
    verdict = Holds(0.0, statuses=[vi.status, viii.status, viv.status]) if agree else \
        Fails(1.0, "disagreement", statuses=[vi.status, viii.status, viv.status])
    rep.add("commute.agreement", ANCHORS["commute.agreement"], verdict, Status.HOLDS)
    return rep


def embry_suite(c: LocalOperator, n_max: int = 3, probes: ProbeConfig = DEFAULT_PROBES,
                tol: TolerancePolicy = DEFAULT_TOL, expected_power: dict | None = None,
                expected_quasinormal: Status | None = None) -> Report:
    """Power identities for n = 0..n_max with quasinormality and the n in {2, 3} biconditional."""
    if n_max < 3:
        raise ValueError("n_max must be at least 3")
    rep = Report(c.descriptor, {"n_max": n_max, "probes": probes.to_json(), "tol": tol.to_json()},
                 seed=probes.seed)
    expected_power = expected_power or {}
    powers = {}
    for n in range(n_max + 1):
        powers[n] = rep.add(f"power_identity[n={n}]", ANCHORS["power_identity"],
                            power_identity_test(c, n, probes, tol), expected_power.get(n))
    q = rep.add("quasinormal", ANCHORS["quasinormal"], quasinormal_test(c, probes, tol), expected_quasinormal)
    both = powers[2].holds and powers[3].holds
    consistent = q.holds == both
    rep.add("power.biconditional", ANCHORS["power.biconditional"],
            Holds(0.0, quasinormal=q.status, n2=powers[2].status, n3=powers[3].status) if consistent
            else Fails(1.0, "biconditional", quasinormal=q.status, n2=powers[2].status, n3=powers[3].status),
            Status.HOLDS)
    if q.holds:
        bad = [n for n, v in powers.items() if not v.holds]
        rep.add("power.all_n", ANCHORS["power.all_n"],
                Holds(0.0) if not bad else Fails(1.0, f"n={bad[0]}", failing=bad), Status.HOLDS)
    separation = [n for n, v in powers.items() if n >= 2 and v.holds and not q.holds]
    rep.notes["separation"] = separation
    rep.notes["holds_at"] = [n for n, v in powers.items() if v.holds]
    return rep


# ---------------------------------------------------------------------------
# moments


def moment_solvability_test(m1, m2, m3, tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    """Is there a spectral measure E on R_+ with M_k = int x^k dE for k = 1, 2, 3?

    In finite dimension M_1 = int x dE forces E = E_{M_1}, so the problem is
    solvable iff M_1 >= 0, M_2 = M_1^2 and M_3 = M_1^3.
    """
    m1, m2, m3 = (as_matrix(x) for x in (m1, m2, m3))
    eig = herm_eig(m1, tol=max(tol.rel_tol, 1e-10))
    herm_eig(m2, tol=max(tol.rel_tol, 1e-10))
    herm_eig(m3, tol=max(tol.rel_tol, 1e-10))
    s = max(float(np.abs(eig.eigenvalues).max()) if eig.eigenvalues.size else 0.0, 0.0)
    lam_min = float(eig.eigenvalues.min()) if eig.eigenvalues.size else 0.0
    checks = [
        ("positivity", max(-lam_min, 0.0), tol.bound(s)),
        ("second_moment", float(np.linalg.norm(m2 - m1 @ m1, 2)) if m1.size else 0.0, tol.bound(s**2)),
        ("third_moment", float(np.linalg.norm(m3 - m1 @ m1 @ m1, 2)) if m1.size else 0.0, tol.bound(s**3)),
    ]
    residuals = {name: r for name, r, _ in checks}
    for name, r, b in checks:
        if r > b:
            return Fails(r, name, residuals=residuals, tol=tol)
    return Holds(max(residuals.values()), residuals=residuals, tol=tol)


def moment_matrices(c) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(C^*C, C^{*2}C^2, C^{*3}C^3) for a matrix."""
    m = as_matrix(c)
    return tuple(matrix_word(m, "A" * k + "C" * k) for k in (1, 2, 3))


# ---------------------------------------------------------------------------
# paranormality


def paranormal_margin(c: LocalOperator, f: SparseVec) -> float:
    """(||Cf||^2 - ||C^2 f|| ||f||) / ||f||^2; positive values witness non-paranormality."""
    nf = norm(f)
    if nf == 0:
        return 0.0
    cf = c.apply(f)
    return (norm(cf) ** 2 - norm(c.apply(cf)) * nf) / nf**2


def _margins(a1: np.ndarray, a2: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Row-wise paranormal margins for probe rows ``x`` given exact local matrices."""
    nx = np.linalg.norm(x, axis=1)
    c1 = np.linalg.norm(x @ a1.T, axis=1)
    c2 = np.linalg.norm(x @ a2.T, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (c1**2 - c2 * nx) / nx**2
    return np.where(nx > 0, out, 0.0)


def _paranormal_form_search(a1: np.ndarray, a2: np.ndarray, tol: TolerancePolicy):
    """Minimise lambda_min(A2^*A2 - 2 t A1^*A1 + t^2 I) over t > 0.

    Grid t = s 2^k for k = -20..20 (s = ||A1^*A1||), refined by golden-section
    search in log t around the best grid point.  Returns
    ``(worst_value, bound_at_worst, t, eigenvector)`` with the value normalised
    by ``||A2^*A2|| + 2t||A1^*A1|| + t^2``.
    """
    g1 = a1.conj().T @ a1
    g2 = a2.conj().T @ a2
    n1 = float(np.linalg.norm(g1, 2)) if g1.size else 0.0
    n2 = float(np.linalg.norm(g2, 2)) if g2.size else 0.0
    s = n1 if n1 > 0 else 1.0
    eye = np.eye(g1.shape[0])

    def evaluate(logt):
        t = s * 2.0**logt
        eig = herm_eig(g2 - 2 * t * g1 + t * t * eye, tol=1e-8)
        scale = n2 + 2 * t * n1 + t * t
        return eig.eigenvalues[0] / scale, t, eig.eigenvectors[:, 0], scale

    grid = [evaluate(float(k)) for k in range(-20, 21)]
    k_best = int(np.argmin([g[0] for g in grid]))
    lo, hi = float(k_best - 21), float(k_best - 19)
    invphi = (math.sqrt(5) - 1) / 2
    x1, x2 = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
    f1, f2 = evaluate(x1), evaluate(x2)
    for _ in range(40):
        if f1[0] < f2[0]:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = evaluate(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = evaluate(x2)
    best = min(grid + [f1, f2], key=lambda g: g[0])
    value, t, vec, scale = best
    return value, tol.bound(scale) / scale, t, vec


def paranormal_decisive(c, tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    """Finite matrices: C is paranormal iff C^{*2}C^2 - 2tC^*C + t^2 >= 0 for all t > 0."""
    m = as_matrix(c)
    op = c if isinstance(c, FiniteMatrixOp) else FiniteMatrixOp(m)
    value, rel_bound, t, vec = _paranormal_form_search(m, m @ m, tol)
    ctx = dict(t=t, form_min=value, bound=rel_bound, tol=tol, decisive=True)
    if value >= -rel_bound:
        return Holds(max(-value, 0.0), **ctx)
    f = dense_to_sparse(vec, op.labels())
    return Fails(paranormal_margin(op, f / norm(f)), f / norm(f), **ctx)


def paranormal_sampling(c: LocalOperator, probes: ProbeConfig = DEFAULT_PROBES,
                        tol: TolerancePolicy = DEFAULT_TOL, window_form: bool = True) -> Verdict:
    """Search for f with ||Cf||^2 > ||C^2 f|| ||f||; Fails with a witness or Inconclusive.

    Candidates: basis vectors of the window, random probes, a two-vector
    refinement f = p + r e^{i theta} q over the two worst probes (360 angles x
    20 moduli), and, when ``window_form`` is set, least eigenvectors of the
    quadratic form ||C^2 f||^2 - 2t||Cf||^2 + t^2||f||^2 restricted to the
    window (an exact falsifier: a negative value implies a violation).
    """
    window = resolve_window(c, probes, 2)
    _, a1 = local_columns(c, window)
    _, a2 = local_columns(power(c, 2), window)
    w = max(local_window_norm(c, window), 0.0)
    bound = tol.bound(w * w)
    m = len(window)
    candidates = [np.eye(m, dtype=complex)]
    x = probes.dense_probes(m) if probes.num_probes else np.zeros((0, m), dtype=complex)
    candidates.append(x)
    if x.shape[0] >= 2:
        marg = _margins(a1, a2, x)
        i1, i2 = np.argsort(-marg, kind="stable")[:2]
        p, q = x[i1], x[i2]
        theta = np.linspace(0, 2 * np.pi, 360, endpoint=False)
        rho = np.geomspace(1e-2, 1e2, 20)
        z = (rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
        candidates.append(p[None, :] + z[:, None] * q[None, :])
    if window_form and m:
        value, rel_bound, t, vec = _paranormal_form_search(a1, a2, tol)
        candidates.append(vec[None, :])
    allx = np.vstack(candidates)
    marg = _margins(a1, a2, allx)
    i = int(np.argmax(marg))
    ctx = dict(window=window, seed=probes.seed, probes_used=int(x.shape[0]), bound=bound, tol=tol,
               candidates=int(allx.shape[0]))
    if marg[i] > bound:
        f = dense_to_sparse(allx[i] / np.linalg.norm(allx[i]), window)
        return Fails(paranormal_margin(c, f), f, **ctx)
    return Inconclusive("no counterexample in budget", float(max(marg[i], 0.0)), **ctx)


def paranormal_falsify(c: LocalOperator, probes: ProbeConfig = DEFAULT_PROBES,
                       tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    """Sampling falsifier; finite matrices additionally get the decisive test."""
    sampled = paranormal_sampling(c, probes, tol)
    if not isinstance(c, FiniteMatrixOp):
        return sampled
    decisive = paranormal_decisive(c, tol)
    decisive.context["sampling"] = sampled.status
    if sampled.fails and decisive.holds:
        # the two routes disagree; report the sampled witness, it replays exactly
        sampled.context["decisive"] = Status.HOLDS
        return sampled
    return decisive


# ---------------------------------------------------------------------------
# hyponormality


def hyponormal_form(c: LocalOperator, f: SparseVec) -> float:
    """<(C^*C - CC^*) f, f> / ||f||^2 = (||Cf||^2 - ||C^*f||^2) / ||f||^2."""
    nf = norm(f)
    if nf == 0:
        return 0.0
    return (norm(c.apply(f)) ** 2 - norm(c.adjoint_apply(f)) ** 2) / nf**2


def _form_matrix(c: LocalOperator, support: Sequence[Label]) -> np.ndarray:
    _, a = local_columns(c, support)
    _, b = local_columns(c, support, adjoint=True)
    q = a.conj().T @ a - b.conj().T @ b
    return (q + q.conj().T) / 2


def hyponormal_falsify(c: LocalOperator, probes: ProbeConfig = DEFAULT_PROBES,
                       tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    """Search for f with <(C^*C - CC^*)f, f> < 0.

    Finite matrices: decided by the least eigenvalue of C^*C - CC^*.  Local
    operators: exact form evaluation on basis vectors and random probes, and
    least eigenvectors of the form restricted to the window and to the local
    neighbourhood supp(C^*C e) u supp(CC^* e) of each window label.
    """
    if isinstance(c, FiniteMatrixOp):
        m = c.matrix
        q = m.conj().T @ m - m @ m.conj().T
        eig = herm_eig((q + q.conj().T) / 2, tol=1e-8)
        w = window_norm(m)
        bound = tol.bound(w * w)
        lam = float(eig.eigenvalues[0])
        ctx = dict(form=lam, bound=bound, tol=tol, decisive=True)
        if lam >= -bound:
            return Holds(max(-lam, 0.0), **ctx)
        f = dense_to_sparse(eig.eigenvectors[:, 0], c.labels())
        f = f / norm(f)
        return Fails(-hyponormal_form(c, f), f, **ctx)
    window = resolve_window(c, probes, 1)
    w = local_window_norm(c, window)
    bound = tol.bound(w * w)
    best_val, best_f = math.inf, None

    def consider(f: SparseVec):
        nonlocal best_val, best_f
        val = hyponormal_form(c, f)
        if val < best_val:
            best_val, best_f = val, f

    for lab in window:
        consider(SparseVec.basis(lab))
    used = 0
    for f in probes.probes(window):
        used += 1
        consider(f)
    supports = [list(window)]
    for lab in window:
        nb = {lab}
        nb.update(c.adjoint_apply(c.image(lab)))
        nb.update(c.apply(c.coimage(lab)))
        supports.append(sorted(nb, key=lambda x: x.sort_key()))
    for support in supports:
        q = _form_matrix(c, support)
        eig = herm_eig(q, tol=1e-8)
        consider(sparse_vec_from(eig.eigenvectors[:, 0], support))
    ctx = dict(window=window, seed=probes.seed, probes_used=used, bound=bound, tol=tol, form=best_val)
    if best_val < -bound:
        f = best_f / norm(best_f)
        return Fails(-hyponormal_form(c, f), f, **ctx)
    return Inconclusive("no counterexample in budget", max(-best_val, 0.0), **ctx)


def sparse_vec_from(x: np.ndarray, labels: Sequence[Label]) -> SparseVec:
    return dense_to_sparse(x, labels)


# ---------------------------------------------------------------------------
# finite-dimensional corollaries


def power2_normality_check(c, tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    """Finite dimension: (C^*C)^2 = C^{*2}C^2 iff C is normal."""
    op = c if isinstance(c, FiniteMatrixOp) else FiniteMatrixOp(as_matrix(c))
    p2 = power_identity_test(op, 2, tol=tol)
    nt = normality_test(op, tol=tol)
    ctx = dict(power_identity_2=p2.status, normality=nt.status,
               residuals=[p2.discrepancy, nt.discrepancy], tol=tol)
    if p2.holds == nt.holds:
        return Holds(0.0, **ctx)
    return Fails(abs(p2.discrepancy - nt.discrepancy), "biconditional", **ctx)


def quasinormal_power_check(c, n: int, k: int, tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    """For quasinormal C: (C^n)^{*k}(C^n)^k = (C^*C)^{nk} and C^n is quasinormal."""
    op = c if isinstance(c, FiniteMatrixOp) else FiniteMatrixOp(as_matrix(c))
    pre = quasinormal_test(op, tol=tol)
    if not pre.holds:
        return Inconclusive("precondition: C is not quasinormal", pre.discrepancy)
    m = op.matrix
    p = np.linalg.matrix_power(m, n)
    lhs = matrix_word(p, "A" * k + "C" * k)
    rhs = np.linalg.matrix_power(m.conj().T @ m, n * k)
    res = float(np.linalg.norm(lhs - rhs, 2))
    bound = tol.bound(window_norm(m) ** (2 * n * k))
    qn = quasinormal_test(FiniteMatrixOp(p), tol=tol)
    ctx = dict(n=n, k=k, bound=bound, power_quasinormal=qn.status, tol=tol)
    if res > bound:
        return Fails(res, "power_identity", **ctx)
    if not qn.holds:
        return Fails(qn.discrepancy, "power_quasinormal", **ctx)
    return Holds(res, **ctx)


PREDICATES = {
    "quasinormal": quasinormal_test,
    "normality": normality_test,
    "paranormal": paranormal_falsify,
    "hyponormal": hyponormal_falsify,
}

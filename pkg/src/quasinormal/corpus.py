"""Seeded random-matrix corpus and the structural invariant suite run over it."""
from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np

from .hilbert import TolerancePolicy
from .operators import FiniteMatrixOp
from .results import Fails, Holds, Report, Status
from .spectral import random_unitary
from .verdicts import (
    ANCHORS,
    commutation_agreement,
    embry_suite,
    moment_matrices,
    moment_solvability_test,
    power2_normality_check,
)

KINDS = ("gaussian", "normal", "unitary", "hermitian", "nilpotent", "normal_jordan", "rank_one", "zero")
# generic matrices dominate; structured kinds exercise the Holds branches
WEIGHTS = (0.5, 0.15, 0.07, 0.08, 0.06, 0.06, 0.05, 0.03)
CORPUS_TOL = TolerancePolicy(1e-8, 1e-8)


def _cgauss(rng, *shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def make_matrix(rng: np.random.Generator, kind: str, n: int) -> np.ndarray:
    if kind == "gaussian":
        return _cgauss(rng, n, n)
    if kind == "normal":
        v = random_unitary(rng, n)
        return (v * _cgauss(rng, n)) @ v.conj().T
    if kind == "unitary":
        return random_unitary(rng, n)
    if kind == "hermitian":
        a = _cgauss(rng, n, n)
        return (a + a.conj().T) / 2
    if kind == "nilpotent":
        v = random_unitary(rng, n)
        return v @ np.triu(_cgauss(rng, n, n), 1) @ v.conj().T
    if kind == "normal_jordan":
        out = np.zeros((n, n), dtype=complex)
        k = max(n - 2, 0)
        if k:
            v = random_unitary(rng, k)
            out[:k, :k] = (v * _cgauss(rng, k)) @ v.conj().T
        lam = _cgauss(rng, 1)[0]
        out[k:, k:] = np.array([[lam, 1.0], [0.0, lam]])[: n - k, : n - k]
        return out
    if kind == "rank_one":
        return np.outer(_cgauss(rng, n), _cgauss(rng, n).conj())
    if kind == "zero":
        return np.zeros((n, n), dtype=complex)
    raise ValueError(f"unknown corpus kind {kind!r}")


def parse_dims(text: str | Sequence[int]) -> list[int]:
    """``'2..6'`` -> [2, 3, 4, 5, 6]; ``'2,4'`` -> [2, 4]."""
    if not isinstance(text, str):
        dims = [int(d) for d in text]
    elif ".." in text:
        lo, hi = text.split("..")
        dims = list(range(int(lo), int(hi) + 1))
    else:
        dims = [int(d) for d in text.split(",") if d.strip()]
    if not dims or min(dims) < 1:
        raise ValueError(f"bad dimension range {text!r}")
    return dims


def corpus(seed: int, count: int, dims: Sequence[int] = range(2, 7),
           kinds: Sequence[str] | None = None) -> Iterator[tuple[str, np.ndarray]]:
    """``count`` (kind, matrix) pairs from one PCG64 stream seeded with ``seed``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    dims = list(dims)
    if kinds is None:
        kinds, weights = KINDS, np.array(WEIGHTS)
    else:
        weights = np.full(len(kinds), 1.0)
    weights = weights / weights.sum()
    for _ in range(count):
        kind = kinds[int(rng.choice(len(kinds), p=weights))]
        n = dims[int(rng.integers(0, len(dims)))]
        yield kind, make_matrix(rng, kind, n)


def corpus_suite(seed: int, count: int, dims: Sequence[int] = range(2, 7),
                 tol: TolerancePolicy = CORPUS_TOL, n_max: int = 6) -> Report:
    """Structural invariants over the corpus, one aggregate entry per invariant.

    Invariants: the three commutation conditions agree; quasinormal iff the
    power identities hold at n = 2 and 3; quasinormal implies every power
    identity up to ``n_max``; (C^*C)^2 = C^{*2}C^2 iff normal; the moment
    problem for (C^*C, C^{*2}C^2, C^{*3}C^3) is solvable iff C is quasinormal.
    """
    dims = list(dims)
    rep = Report(f"corpus(seed={seed}, count={count})",
                 {"seed": seed, "count": count, "dims": dims, "n_max": n_max, "tol": tol.to_json()}, seed=seed)
    counters = {k: [] for k in ("agreement", "biconditional", "all_n", "power2_normal", "moment")}
    kinds_seen: dict[str, int] = {}
    quasinormal_count = 0
    for i, (kind, m) in enumerate(corpus(seed, count, dims)):
        kinds_seen[kind] = kinds_seen.get(kind, 0) + 1
        op = FiniteMatrixOp(m, f"corpus[{i}]:{kind}")
        agree = commutation_agreement(op, tol)
        if not agree.get("commute.agreement").holds:
            counters["agreement"].append(i)
        suite = embry_suite(op, n_max, tol=tol)
        if not suite.get("power.biconditional").holds:
            counters["biconditional"].append(i)
        q = suite.get("quasinormal")
        if q.holds:
            quasinormal_count += 1
            if not suite.get("power.all_n").holds:
                counters["all_n"].append(i)
        if not power2_normality_check(op, tol).holds:
            counters["power2_normal"].append(i)
        mom = moment_solvability_test(*moment_matrices(m), tol=tol)
        if mom.holds != q.holds:
            counters["moment"].append(i)
    anchors = {
        "agreement": ANCHORS["commute.agreement"],
        "biconditional": ANCHORS["power.biconditional"],
        "all_n": ANCHORS["power.all_n"],
        "power2_normal": ANCHORS["finite.power2_normal"],
        "moment": ANCHORS["moment"],
    }
    if count == 0:
        return rep
    for key, bad in counters.items():
        verdict = Holds(0.0, instances=count) if not bad else Fails(float(len(bad)), f"corpus[{bad[0]}]",
                                                                    instances=count, violations=bad)
        rep.add(f"corpus.{key}", anchors[key], verdict, Status.HOLDS)
    rep.notes["kinds"] = dict(sorted(kinds_seen.items()))
    rep.notes["quasinormal_instances"] = quasinormal_count
    return rep

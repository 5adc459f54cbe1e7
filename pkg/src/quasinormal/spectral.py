"""Finite-dimensional spectral machinery.

Hermitian eigendecomposition, the modulus ``|C| = (C^*C)^{1/2}``, polar
decomposition, spectral projectors of Hermitian matrices, and the
commutation checks that characterise quasinormality of a matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .hilbert import DEFAULT_TOL, TolerancePolicy
from .kernels import jacobi_eigh
from .operators import FiniteMatrixOp
from .results import Fails, Holds, Verdict, decide

DEFAULT_CLUSTER_TOL = 1e-8
PINV_CUTOFF = 1e-12


class NotHermitianError(ValueError):
    def __init__(self, asymmetry: float):
        super().__init__(f"matrix is not Hermitian: ||H - H^*|| = {asymmetry:.3e}")
        self.asymmetry = asymmetry


class NotPositiveError(ValueError):
    pass


def as_matrix(c) -> np.ndarray:
    if isinstance(c, FiniteMatrixOp):
        return c.matrix
    m = np.asarray(c, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def opnorm(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def window_norm(m: np.ndarray) -> float:
    """Largest column or row norm, the scale reference for tolerance bounds."""
    if m.size == 0:
        return 0.0
    return float(max(np.linalg.norm(m, axis=0).max(), np.linalg.norm(m, axis=1).max()))


@dataclass(frozen=True)
class HermEigen:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def apply_function(self, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        v = self.eigenvectors
        return (v * fn(self.eigenvalues)) @ v.conj().T


def herm_eig(h, tol: float = 1e-10) -> HermEigen:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations."""
    h = as_matrix(h)
    scale = max(1.0, float(np.linalg.norm(h)))
    asym = float(np.linalg.norm(h - h.conj().T))
    if asym > tol * scale:
        raise NotHermitianError(asym)
    w, v, sweeps = jacobi_eigh((h + h.conj().T) / 2)
    return HermEigen(w, v, sweeps)


def gram(c: np.ndarray) -> np.ndarray:
    g = c.conj().T @ c
    return (g + g.conj().T) / 2


def modulus(c) -> np.ndarray:
    c = as_matrix(c)
    eig = herm_eig(gram(c))
    return eig.apply_function(lambda lam: np.sqrt(np.clip(lam, 0.0, None)))


@dataclass(frozen=True)
class PolarDecomp:
    U: np.ndarray
    modulus: np.ndarray


def polar(c) -> PolarDecomp:
    """``C = U|C|`` with U a partial isometry and ker U = ker C."""
    c = as_matrix(c)
    eig = herm_eig(gram(c))
    sig = np.sqrt(np.clip(eig.eigenvalues, 0.0, None))
    v = eig.eigenvectors
    mod = (v * sig) @ v.conj().T
    smax = sig.max() if sig.size else 0.0
    keep = sig > PINV_CUTOFF * smax if smax > 0 else np.zeros_like(sig, dtype=bool)
    inv = np.zeros_like(sig)
    inv[keep] = 1.0 / sig[keep]
    u = c @ ((v * inv) @ v.conj().T)
    return PolarDecomp(u, mod)


@dataclass(frozen=True)
class SpectralProjector:
    cluster_value: float
    projector: np.ndarray
    rank: int
    indices: tuple = ()


def cluster_indices(values: np.ndarray, gap: float) -> list[list[int]]:
    """Group sorted values into runs whose consecutive gaps are <= ``gap``."""
    order = np.argsort(values, kind="stable")
    groups: list[list[int]] = []
    for i in order:
        if groups and values[i] - values[groups[-1][-1]] <= gap:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    return groups


def projectors_from_eigen(eig: HermEigen, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> list[SpectralProjector]:
    lam = eig.eigenvalues
    hnorm = float(np.abs(lam).max()) if lam.size else 0.0
    out = []
    for idx in cluster_indices(lam, cluster_tol * max(1.0, hnorm)):
        vs = eig.eigenvectors[:, idx]
        out.append(SpectralProjector(float(lam[idx].mean()), vs @ vs.conj().T, len(idx), tuple(idx)))
    return out


def spectral_projectors(h, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> list[SpectralProjector]:
    return projectors_from_eigen(herm_eig(h), cluster_tol)


def _commutator_norm(p: np.ndarray, c: np.ndarray) -> float:
    return opnorm(p @ c - c @ p)


def spectral_commutation_check(c, tol: TolerancePolicy = DEFAULT_TOL,
                               cluster_tol: float = DEFAULT_CLUSTER_TOL) -> Verdict:
    """Does C commute with every spectral projector of |C|?

    The projectors of |C| are those of C^*C (the square root is monotone), so
    clusters are formed on the eigenvalues of C^*C; this avoids the loss of
    accuracy of square roots of rounding-level eigenvalues near zero.
    """
    c = as_matrix(c)
    projs = projectors_from_eigen(herm_eig(gram(c)), cluster_tol)
    bound = tol.bound(window_norm(c))
    worst, worst_i = 0.0, None
    residuals = []
    for i, p in enumerate(projs):
        r = _commutator_norm(p.projector, c)
        residuals.append(r)
        if worst_i is None or r > worst:
            worst, worst_i = r, i
    if worst_i is None:
        return Holds(0.0, bound=bound)
    return decide(worst, bound, f"projector[{worst_i}]",
                  cluster_values=[float(np.sqrt(max(p.cluster_value, 0.0))) for p in projs],
                  residuals=residuals)


def resolvent(h) -> np.ndarray:
    """(I + H)^{-1} for positive semidefinite H through its eigendecomposition."""
    return herm_eig(h).apply_function(lambda lam: 1.0 / (1.0 + lam))


def resolvent_commutation_check(c, tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    c = as_matrix(c)
    r = resolvent(gram(c))
    res = _commutator_norm(r, c)
    return decide(res, tol.bound(window_norm(c)), "resolvent")


def function_calculus_commutation(a, r, tol: TolerancePolicy = DEFAULT_TOL,
                                  cluster_tol: float = DEFAULT_CLUSTER_TOL) -> Verdict:
    """Commutation of A with phi(R) over a fixed family of test functions.

    The family is: indicators of the eigenvalue clusters of R, x -> 1/(1+x),
    x -> x, x -> x^2, and x -> chi_D(sqrt x) for clusters D of sqrt(R).
    """
    a = as_matrix(a)
    eig = herm_eig(r)
    scale_r = max(1.0, float(np.abs(eig.eigenvalues).max()) if eig.eigenvalues.size else 0.0)
    if eig.eigenvalues.size and eig.eigenvalues.min() < -tol.bound(scale_r):
        raise NotPositiveError(f"R has eigenvalue {eig.eigenvalues.min():.3e} < 0")
    lam = np.clip(eig.eigenvalues, 0.0, None)
    v = eig.eigenvectors
    anorm = window_norm(a)
    family: list[tuple[str, np.ndarray, float]] = []
    for i, p in enumerate(projectors_from_eigen(eig, cluster_tol)):
        family.append((f"indicator[{i}]", p.projector, 1.0))
    family.append(("resolvent", (v * (1.0 / (1.0 + lam))) @ v.conj().T, 1.0))
    rmax = float(lam.max()) if lam.size else 0.0
    family.append(("identity_fn", (v * lam) @ v.conj().T, rmax))
    family.append(("square", (v * lam**2) @ v.conj().T, rmax**2))
    sq = np.sqrt(lam)
    sqmax = max(1.0, float(sq.max()) if sq.size else 0.0)
    for i, idx in enumerate(cluster_indices(sq, cluster_tol * sqmax)):
        vs = v[:, idx]
        family.append((f"sqrt_indicator[{i}]", vs @ vs.conj().T, 1.0))
    residuals = {}
    worst_name, worst_ratio, worst_res = None, -1.0, 0.0
    failed = False
    for name, phi, fscale in family:
        res = _commutator_norm(phi, a)
        bound = tol.bound(anorm * max(fscale, 1.0))
        residuals[name] = res
        ratio = res / bound if bound > 0 else (np.inf if res > 0 else 0.0)
        if res > bound:
            failed = True
        if ratio > worst_ratio:
            worst_name, worst_ratio, worst_res = name, ratio, res
    if failed:
        return Fails(worst_res, worst_name, residuals=residuals)
    return Holds(worst_res, residuals=residuals)


def projector_commutation(a, projectors: Sequence[np.ndarray], tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    a = as_matrix(a)
    bound = tol.bound(window_norm(a))
    res = [_commutator_norm(p, a) for p in projectors]
    if not res:
        return Holds(0.0)
    i = int(np.argmax(res))
    return decide(res[i], bound, f"projector[{i}]", residuals=res)


# ---------------------------------------------------------------------------
# normal matrices with a known eigenbasis


@dataclass(frozen=True)
class NormalMatrix:
    """N = V diag(z) V^* with V unitary, eigenbasis known by construction."""

    V: np.ndarray
    z: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return (self.V * self.z) @ self.V.conj().T

    def projectors(self, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> list[np.ndarray]:
        """Spectral projectors, clustering eigenvalues in the complex plane."""
        z = self.z
        gap = cluster_tol * max(1.0, float(np.abs(z).max()))
        labels = list(range(len(z)))

        def find(i):
            while labels[i] != i:
                labels[i] = labels[labels[i]]
                i = labels[i]
            return i

        for i in range(len(z)):
            for j in range(i + 1, len(z)):
                if abs(z[i] - z[j]) <= gap:
                    labels[find(j)] = find(i)
        groups: dict[int, list[int]] = {}
        for i in range(len(z)):
            groups.setdefault(find(i), []).append(i)
        out = []
        for idx in sorted(groups.values()):
            vs = self.V[:, idx]
            out.append(vs @ vs.conj().T)
        return out

    def poly(self, coeffs: dict) -> np.ndarray:
        """p(N, N^*) for ``coeffs[(a, b)]`` multiplying N^a N^{*b}."""
        vals = np.zeros_like(self.z)
        for (pa, pb), c in coeffs.items():
            vals = vals + c * self.z**pa * np.conj(self.z) ** pb
        return (self.V * vals) @ self.V.conj().T


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    x = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(x)
    d = np.diag(r)
    return q * (d / np.abs(d))


def fuglede_counterexample_search(seed: int = 0, trials: int = 100, dim: int = 4) -> dict:
    """Random search for N normal, NA = AN, N^*A != AN^* among matrices.

    Falsification aid only: in finite dimension the Fuglede theorem rules out
    such pairs, so the search is expected to report rounding-level residuals.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    worst = 0.0
    for _ in range(trials):
        v = random_unitary(rng, dim)
        k = int(rng.integers(1, dim + 1))
        base = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        z = base[rng.integers(0, k, size=dim)]
        nm = NormalMatrix(v, z)
        blocks = np.zeros((dim, dim), dtype=complex)
        for i in range(dim):
            for j in range(dim):
                if z[i] == z[j]:
                    blocks[i, j] = rng.standard_normal() + 1j * rng.standard_normal()
        a = v @ blocks @ v.conj().T
        n = nm.matrix
        left = opnorm(n @ a - a @ n)
        right = opnorm(n.conj().T @ a - a @ n.conj().T)
        scale = max(1.0, opnorm(n) * opnorm(a))
        if left <= 1e-9 * scale:
            worst = max(worst, right / scale)
    return {"trials": trials, "dim": dim, "max_relative_residual": worst}

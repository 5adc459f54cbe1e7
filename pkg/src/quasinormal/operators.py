"""Operators given by exact actions on finitely supported vectors.

Every operator here maps finite support to finite support, for both the
forward and the adjoint action, so identities between products of operators
and their adjoints can be checked exactly (up to rounding) on the dense core
of finitely supported vectors without truncating any index set.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .hilbert import Block, Label, Nat, SparseVec, inner, label_key, lincomb, norm


class LocalOperator:
    """Linear operator with exact forward and adjoint actions on sparse vectors.

    Subclasses either override :meth:`apply`/:meth:`adjoint_apply` directly or
    provide the basis actions :meth:`image` and :meth:`coimage`.
    """

    descriptor: str = "op"

    def image(self, label: Label) -> SparseVec:
        return self.apply(SparseVec.basis(label))

    def coimage(self, label: Label) -> SparseVec:
        return self.adjoint_apply(SparseVec.basis(label))

    def apply(self, v: SparseVec) -> SparseVec:
        return lincomb((c, self.image(lab)) for lab, c in v.items())

    def adjoint_apply(self, v: SparseVec) -> SparseVec:
        return lincomb((c, self.coimage(lab)) for lab, c in v.items())

    def __call__(self, v: SparseVec) -> SparseVec:
        return self.apply(v)

    # combinators
    def __matmul__(self, other: "LocalOperator") -> "LocalOperator":
        return compose(self, other)

    def __add__(self, other: "LocalOperator") -> "LocalOperator":
        return add(self, other)

    def __sub__(self, other: "LocalOperator") -> "LocalOperator":
        return add(self, scale(other, -1))

    def __mul__(self, c) -> "LocalOperator":
        return scale(self, c)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LocalOperator":
        return power(self, n)

    @property
    def H(self) -> "LocalOperator":
        return adjoint(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.descriptor}>"


class FunctionalOperator(LocalOperator):
    """Operator assembled from two callables; the output of every combinator."""

    def __init__(self, apply: Callable, adjoint_apply: Callable, descriptor: str):
        self._apply = apply
        self._adjoint_apply = adjoint_apply
        self.descriptor = descriptor

    def apply(self, v):
        return self._apply(v)

    def adjoint_apply(self, v):
        return self._adjoint_apply(v)


def identity() -> LocalOperator:
    return FunctionalOperator(lambda v: v, lambda v: v, "I")


class ShiftOp(LocalOperator):
    """Unilateral shift on l^2(Z_+): e_n -> e_{n+1}."""

    descriptor = "S"

    def image(self, label):
        return SparseVec.basis(Nat(label.k + 1))

    def coimage(self, label):
        if label.k == 0:
            return SparseVec()
        return SparseVec.basis(Nat(label.k - 1))

    def apply(self, v):
        return SparseVec._wrap({Nat(lab.k + 1): c for lab, c in v.items()})

    def adjoint_apply(self, v):
        return SparseVec._wrap({Nat(lab.k - 1): c for lab, c in v.items() if lab.k > 0})

    def default_window(self, n: int = 1) -> list:
        return [Nat(k) for k in range(n + 3)]


def shift_isometry() -> ShiftOp:
    return ShiftOp()


class FiniteMatrixOp(LocalOperator):
    """An n x n complex matrix acting on span{e_0, ..., e_{n-1}}.

    ``source_labels`` remembers where the basis came from when the matrix is a
    compression produced by :func:`matrix_of`.
    """

    def __init__(self, entries, descriptor: str | None = None, source_labels=None):
        m = np.array(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        m.setflags(write=False)
        self.matrix = m
        self.n = m.shape[0]
        self.source_labels = source_labels
        self.descriptor = descriptor or f"matrix[{self.n}]"

    def _dense(self, v: SparseVec) -> np.ndarray:
        x = np.zeros(self.n, dtype=complex)
        for lab, c in v.items():
            if not isinstance(lab, Nat) or not 0 <= lab.k < self.n:
                raise ValueError(f"label {lab} outside the {self.n}-dimensional basis")
            x[lab.k] = c
        return x

    def _sparse(self, x: np.ndarray) -> SparseVec:
        return SparseVec._wrap({Nat(int(i)): complex(x[i]) for i in np.flatnonzero(x)})

    def apply(self, v):
        return self._sparse(self.matrix @ self._dense(v))

    def adjoint_apply(self, v):
        return self._sparse(self.matrix.conj().T @ self._dense(v))

    def labels(self) -> list:
        return [Nat(i) for i in range(self.n)]

    def default_window(self, n: int = 1) -> list:
        return self.labels()

    @property
    def adjoint_matrix(self) -> np.ndarray:
        return self.matrix.conj().T


@dataclass(frozen=True)
class ScaleRule:
    """Closed-form block scale rule ``j -> r_j`` for infinite direct sums.

    ``monotone_unbounded`` certifies ``r_j`` nondecreasing with ``sup r_j = inf``.
    """

    name: str
    fn: Callable[[int], float]
    monotone_unbounded: bool = False

    def __call__(self, j: int) -> float:
        r = float(self.fn(j))
        if r < 0:
            raise ValueError(f"negative block scale r_{j} = {r}")
        return r


SCALE_RULES = {
    "const1": ScaleRule("const1", lambda j: 1.0),
    "linear": ScaleRule("linear", lambda j: float(j)),
    "poly1": ScaleRule("poly1", lambda j: float(j + 1), True),
    "poly2": ScaleRule("poly2", lambda j: float((j + 1) ** 2), True),
    "exp2": ScaleRule("exp2", lambda j: 2.0 ** j, True),
}


class DirectSumOp(LocalOperator):
    """Orthogonal sum acting on ``Block(j, inner)`` labels.

    Either a finite list of block operators (``blocks``) or one template
    operator repeated over all ``j >= 0`` with scales ``r_j``.
    """

    def __init__(self, blocks: Sequence[LocalOperator] | LocalOperator, scales=None):
        if isinstance(blocks, LocalOperator):
            self.template = blocks
            self.blocks = None
        else:
            self.template = None
            self.blocks = list(blocks)
            if not self.blocks:
                raise ValueError("direct sum needs at least one block")
        if scales is None:
            scales = SCALE_RULES["const1"]
        if isinstance(scales, str):
            scales = SCALE_RULES[scales]
        if isinstance(scales, ScaleRule):
            for j in range(8):
                scales(j)
        elif callable(scales):
            scales = ScaleRule(getattr(scales, "__name__", "rule"), scales)
            for j in range(8):
                scales(j)
        else:
            scales = [float(r) for r in scales]
            if any(r < 0 for r in scales):
                raise ValueError("block scales must be nonnegative")
            if self.blocks is not None and len(scales) != len(self.blocks):
                raise ValueError("one scale per block required")
            if self.template is not None:
                self.blocks = [self.template] * len(scales)
        self.scales = scales
        if self.template is not None:
            rule = scales.name if isinstance(scales, ScaleRule) else "list"
            self.descriptor = f"sum_j r_j*({self.template.descriptor}), r={rule}"
        else:
            self.descriptor = "sum(" + ", ".join(b.descriptor for b in self.blocks) + ")"

    @property
    def num_blocks(self) -> int | None:
        return None if self.blocks is None else len(self.blocks)

    def scale_of(self, j: int) -> float:
        if isinstance(self.scales, ScaleRule):
            return self.scales(j)
        return self.scales[j] if isinstance(self.scales, list) else 1.0

    def block(self, j: int) -> tuple[LocalOperator, float]:
        if j < 0:
            raise ValueError("block index must be nonnegative")
        if self.blocks is not None:
            if j >= len(self.blocks):
                raise ValueError(f"block {j} does not exist")
            op = self.blocks[j]
        else:
            op = self.template
        return op, self.scale_of(j)

    def _blockwise(self, v: SparseVec, adjoint: bool) -> SparseVec:
        groups: dict[int, dict] = {}
        for lab, c in v.items():
            if not isinstance(lab, Block):
                raise ValueError(f"direct sum expects Block labels, got {lab}")
            groups.setdefault(lab.j, {})[lab.inner] = c
        out = {}
        for j in sorted(groups):
            op, r = self.block(j)
            if r == 0:
                continue
            part = SparseVec._wrap(groups[j])
            w = op.adjoint_apply(part) if adjoint else op.apply(part)
            for lab, c in w.items():
                out[Block(j, lab)] = r * c
        return SparseVec._wrap({k: c for k, c in out.items() if c != 0})

    def default_window(self, n: int = 1, max_blocks: int = 4) -> list:
        count = max_blocks if self.blocks is None else len(self.blocks)
        out = []
        for j in range(count):
            op, _ = self.block(j)
            inner_window = op.default_window(n) if hasattr(op, "default_window") else [Nat(k) for k in range(n + 3)]
            out.extend(Block(j, lab) for lab in inner_window)
        return out

    def apply(self, v):
        return self._blockwise(v, adjoint=False)

    def adjoint_apply(self, v):
        return self._blockwise(v, adjoint=True)


def direct_sum(block_op, scales=None) -> DirectSumOp:
    return DirectSumOp(block_op, scales)


def compose(a: LocalOperator, b: LocalOperator) -> LocalOperator:
    return FunctionalOperator(
        lambda v: a.apply(b.apply(v)),
        lambda v: b.adjoint_apply(a.adjoint_apply(v)),
        f"({a.descriptor})({b.descriptor})",
    )


def power(a: LocalOperator, n: int) -> LocalOperator:
    if n < 0:
        raise ValueError("power must be nonnegative")
    if n == 0:
        return identity()
    if n == 1:
        return a

    def fwd(v):
        for _ in range(n):
            v = a.apply(v)
        return v

    def bwd(v):
        for _ in range(n):
            v = a.adjoint_apply(v)
        return v

    return FunctionalOperator(fwd, bwd, f"({a.descriptor})^{n}")


def scale(a: LocalOperator, c) -> LocalOperator:
    c = complex(c)
    cc = c.conjugate()
    return FunctionalOperator(lambda v: a.apply(v) * c, lambda v: a.adjoint_apply(v) * cc,
                              f"{c:g}*({a.descriptor})")


def add(a: LocalOperator, b: LocalOperator) -> LocalOperator:
    return FunctionalOperator(
        lambda v: a.apply(v) + b.apply(v),
        lambda v: a.adjoint_apply(v) + b.adjoint_apply(v),
        f"({a.descriptor} + {b.descriptor})",
    )


def adjoint(a: LocalOperator) -> LocalOperator:
    if isinstance(a, FunctionalOperator) and getattr(a, "_adjoint_of", None) is not None:
        return a._adjoint_of
    out = FunctionalOperator(a.adjoint_apply, a.apply, f"({a.descriptor})*")
    out._adjoint_of = a
    return out


def matrix_of(a: LocalOperator, labels: Sequence[Label]) -> FiniteMatrixOp:
    """Compression of ``a`` to span(labels); entry (i, j) = <a e_j, e_i>."""
    labels = list(labels)
    index = {lab: i for i, lab in enumerate(labels)}
    if len(index) != len(labels):
        raise ValueError("labels must be distinct")
    m = np.zeros((len(labels), len(labels)), dtype=complex)
    for j, lab in enumerate(labels):
        for out_lab, c in a.image(lab).items():
            i = index.get(out_lab)
            if i is not None:
                m[i, j] = c
    return FiniteMatrixOp(m, descriptor=f"P{a.descriptor}P", source_labels=labels)


def local_columns(a: LocalOperator, window: Sequence[Label], adjoint: bool = False):
    """Exact matrix of ``a`` restricted to span(window).

    Rows run over the union of output supports, so ``M @ x`` reproduces
    ``a.apply`` exactly for every ``x`` supported in ``window`` (no compression).
    Returns ``(row_labels, M)``.
    """
    cols = [a.coimage(lab) if adjoint else a.image(lab) for lab in window]
    rows = sorted({lab for c in cols for lab in c}, key=label_key)
    index = {lab: i for i, lab in enumerate(rows)}
    m = np.zeros((len(rows), len(cols)), dtype=complex)
    for j, c in enumerate(cols):
        for lab, val in c.items():
            m[index[lab], j] = val
    return rows, m


def dense_to_sparse(x: np.ndarray, labels: Sequence[Label]) -> SparseVec:
    return SparseVec((labels[i], x[i]) for i in np.flatnonzero(x))


def sparse_to_dense(v: SparseVec, labels: Sequence[Label]) -> np.ndarray:
    return np.array([v[lab] for lab in labels], dtype=complex)


def adjoint_residual(a: LocalOperator, u: SparseVec, v: SparseVec) -> float:
    """|<a u, v> - <u, a* v>| relative to ||u|| ||v|| max(||a u||, ||a* v||, 1)."""
    lhs = inner(a.apply(u), v)
    rhs = inner(u, a.adjoint_apply(v))
    s = norm(u) * norm(v) * max(norm(a.apply(u)) / max(norm(u), 1e-300),
                                norm(a.adjoint_apply(v)) / max(norm(v), 1e-300), 1.0)
    return abs(lhs - rhs) / s if s > 0 else abs(lhs - rhs)


def adjoint_duality_check(a: LocalOperator, probes: Iterable) -> float:
    """Largest relative duality residual over pairs of probe vectors."""
    worst = 0.0
    for u, v in probes:
        worst = max(worst, adjoint_residual(a, u, v))
    return worst

"""Finitely supported complex vectors over countable label sets.

Labels come in three flavours: :class:`Nat` indexes the standard basis of
``l^2(Z_+)``, :class:`TreeVertex` indexes ``l^2(V)`` for a directed tree, and
:class:`Block` tags a label with the index of a direct-sum summand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union

Scalar = Union[complex, float, int]


def vertex_key(v) -> tuple:
    """Canonical ordering key for tree vertex ids.

    Integers (trunk and root vertices) sort before tuples (branch vertices),
    which sort lexicographically; strings come last.
    """
    if isinstance(v, bool):
        raise TypeError("bool is not a vertex id")
    if isinstance(v, int):
        return (0, v)
    if isinstance(v, tuple):
        return (1, v)
    return (2, str(v))


@dataclass(frozen=True, slots=True)
class Nat:
    k: int

    def sort_key(self) -> tuple:
        return (0, self.k)

    def __str__(self) -> str:
        return f"n:{self.k}"


@dataclass(frozen=True, slots=True)
class TreeVertex:
    id: object

    def sort_key(self) -> tuple:
        return (1, vertex_key(self.id))

    def __str__(self) -> str:
        if isinstance(self.id, tuple):
            return "v:(" + ",".join(str(x) for x in self.id) + ")"
        return f"v:{self.id}"


@dataclass(frozen=True, slots=True)
class Block:
    j: int
    inner: "Label"

    def __post_init__(self):
        if isinstance(self.inner, Block):
            raise ValueError("Block labels nest at most one level")

    def sort_key(self) -> tuple:
        return (2, self.j, self.inner.sort_key())

    def __str__(self) -> str:
        return f"b:{self.j}/{self.inner}"


Label = Union[Nat, TreeVertex, Block]


def label_key(label: Label) -> tuple:
    return label.sort_key()


def parse_label(text: str) -> Label:
    """Inverse of ``str(label)``."""
    if text.startswith("b:"):
        j, _, rest = text[2:].partition("/")
        return Block(int(j), parse_label(rest))
    if text.startswith("n:"):
        return Nat(int(text[2:]))
    if text.startswith("v:"):
        body = text[2:]
        if body.startswith("("):
            return TreeVertex(tuple(int(x) for x in body[1:-1].split(",")))
        try:
            return TreeVertex(int(body))
        except ValueError:
            return TreeVertex(body)
    raise ValueError(f"unrecognised label {text!r}")


class SparseVec:
    """Immutable finitely supported vector; explicit zeros are never stored."""

    __slots__ = ("_d",)

    def __init__(self, entries: Mapping[Label, Scalar] | Iterable = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        d = {}
        for lab, val in items:
            val = complex(val)
            if val != 0:
                d[lab] = val
        self._d = d

    @classmethod
    def _wrap(cls, d: dict) -> "SparseVec":
        out = cls.__new__(cls)
        out._d = d
        return out

    @classmethod
    def basis(cls, label: Label, coeff: Scalar = 1.0) -> "SparseVec":
        return cls({label: coeff})

    # mapping-like access
    def __getitem__(self, label: Label) -> complex:
        return self._d.get(label, 0j)

    def __iter__(self) -> Iterator[Label]:
        return iter(self._d)

    def __len__(self) -> int:
        return len(self._d)

    def __bool__(self) -> bool:
        return bool(self._d)

    def items(self):
        return self._d.items()

    def support(self) -> list:
        return sorted(self._d, key=label_key)

    def sorted_items(self) -> list:
        return [(lab, self._d[lab]) for lab in self.support()]

    # linear structure
    def __add__(self, other: "SparseVec") -> "SparseVec":
        d = dict(self._d)
        for lab, val in other._d.items():
            s = d.get(lab, 0j) + val
            if s == 0:
                d.pop(lab, None)
            else:
                d[lab] = s
        return SparseVec._wrap(d)

    def __neg__(self) -> "SparseVec":
        return SparseVec._wrap({lab: -v for lab, v in self._d.items()})

    def __sub__(self, other: "SparseVec") -> "SparseVec":
        return self + (-other)

    def __mul__(self, c: Scalar) -> "SparseVec":
        c = complex(c)
        if c == 0:
            return SparseVec()
        d = {}
        for lab, v in self._d.items():
            p = c * v
            if p != 0:
                d[lab] = p
        return SparseVec._wrap(d)

    __rmul__ = __mul__

    def __truediv__(self, c: Scalar) -> "SparseVec":
        return self * (1.0 / complex(c))

    def conj(self) -> "SparseVec":
        return SparseVec._wrap({lab: v.conjugate() for lab, v in self._d.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVec):
            return NotImplemented
        return self._d == other._d

    __hash__ = None

    def __repr__(self) -> str:
        body = ", ".join(f"{lab}: {v:.6g}" for lab, v in self.sorted_items())
        return f"SparseVec({{{body}}})"

    def to_json(self) -> dict:
        return {str(lab): [v.real, v.imag] for lab, v in self.sorted_items()}

    @classmethod
    def from_json(cls, data: Mapping[str, list]) -> "SparseVec":
        return cls({parse_label(k): complex(re, im) for k, (re, im) in data.items()})


def lincomb(terms: Iterable[tuple[Scalar, SparseVec]]) -> SparseVec:
    """Sum of ``c * v`` over ``terms`` without intermediate vectors."""
    d: dict = {}
    for c, v in terms:
        c = complex(c)
        if c == 0:
            continue
        for lab, val in v.items():
            d[lab] = d.get(lab, 0j) + c * val
    return SparseVec._wrap({lab: val for lab, val in d.items() if val != 0})


def inner(u: SparseVec, v: SparseVec) -> complex:
    """Inner product, linear in ``u`` and conjugate-linear in ``v``."""
    if len(u) > len(v):
        return sum((u[lab] * val.conjugate() for lab, val in v.items()), 0j)
    return sum((val * v[lab].conjugate() for lab, val in u.items()), 0j)


def norm(v: SparseVec) -> float:
    return math.sqrt(sum(val.real * val.real + val.imag * val.imag for _, val in v.items()))


@dataclass(frozen=True)
class TolerancePolicy:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be nonnegative")

    def bound(self, scale: float) -> float:
        return self.abs_tol + self.rel_tol * scale

    def to_json(self) -> dict:
        return {"abs_tol": self.abs_tol, "rel_tol": self.rel_tol}


DEFAULT_TOL = TolerancePolicy()


def approx_eq(u: SparseVec, v: SparseVec, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    return norm(u - v) <= tol.bound(max(norm(u), norm(v)))

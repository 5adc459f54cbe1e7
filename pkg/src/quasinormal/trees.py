"""Directed trees and weighted shifts on them.

A weighted shift ``S`` on a directed tree with weights ``lam`` acts on basis
vectors by ``S e_u = sum_{v child of u} lam_v e_v``; its adjoint is
``S^* e_u = conj(lam_u) e_parent(u)`` (zero at the root).  ``S^*S`` is
diagonal with entries ``d(u) = sum_{v child of u} |lam_v|^2``.
"""
from __future__ import annotations

import math
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .hilbert import DEFAULT_TOL, SparseVec, TolerancePolicy, TreeVertex, vertex_key
from .operators import LocalOperator, adjoint_residual
from .results import Fails, Holds, ProbeConfig, Verdict

Vertex = Hashable


class DirectedTree:
    """Common interface; subclasses provide children/parent and a vertex listing."""

    root: Vertex | None = None

    def children(self, u: Vertex) -> list:
        raise NotImplementedError

    def parent(self, u: Vertex) -> Vertex | None:
        raise NotImplementedError

    def __contains__(self, u: Vertex) -> bool:
        raise NotImplementedError

    def vertices(self) -> list:
        """All vertices of a finite tree, or the materialized window of a family."""
        raise NotImplementedError

    def orbit_window(self, depth: int) -> list:
        return self.vertices()

    @property
    def is_finite(self) -> bool:
        return True

    def descriptor(self) -> str:
        return type(self).__name__


class FiniteTree(DirectedTree):
    """Finite directed tree given by a child -> parent map."""

    def __init__(self, parent: Mapping[Vertex, Vertex], vertices: Iterable[Vertex] = ()):
        verts = set(vertices) | set(parent) | set(parent.values())
        if not verts:
            raise ValueError("tree needs at least one vertex")
        roots = [v for v in verts if v not in parent]
        if len(roots) != 1:
            raise ValueError(f"a finite directed tree has exactly one root, found {len(roots)}")
        self.root = roots[0]
        self._parent = dict(parent)
        self._children: dict = {v: [] for v in verts}
        for c, p in self._parent.items():
            self._children[p].append(c)
        for v in self._children:
            self._children[v].sort(key=vertex_key)
        seen, stack = set(), [self.root]
        while stack:
            u = stack.pop()
            seen.add(u)
            stack.extend(self._children[u])
        if len(seen) != len(verts):
            raise ValueError("parent map contains a cycle or a disconnected part")
        self._order = sorted(verts, key=vertex_key)

    def children(self, u):
        return list(self._children[u])

    def parent(self, u):
        return self._parent.get(u)

    def __contains__(self, u):
        return u in self._children

    def vertices(self):
        return list(self._order)

    def descriptor(self) -> str:
        return f"tree[{len(self._order)}]"


class T2Kappa(DirectedTree):
    """Leafless tree with trunk -kappa..-1 -> 0 and two rays (i, 1), (i, 2), ... from 0.

    ``kappa = math.inf`` gives a rootless tree with an infinite trunk.  The
    caps only bound :meth:`vertices`; ``children``/``parent`` answer in closed
    form for every vertex, so deeper requests extend the tree transparently.
    """

    def __init__(self, kappa=0, branch_depth_cap: int = 8, trunk_depth_cap: int | None = None):
        if branch_depth_cap <= 0:
            raise ValueError("branch_depth_cap must be positive")
        infinite = kappa == math.inf
        if not infinite and (int(kappa) != kappa or kappa < 0):
            raise ValueError("kappa must be a nonnegative integer or math.inf")
        if infinite:
            if trunk_depth_cap is None or trunk_depth_cap <= 0:
                raise ValueError("infinite trunk needs a positive trunk_depth_cap")
        elif trunk_depth_cap is not None and trunk_depth_cap <= 0:
            raise ValueError("trunk_depth_cap must be positive")
        self.kappa = math.inf if infinite else int(kappa)
        self.branch_depth_cap = int(branch_depth_cap)
        self.trunk_depth_cap = trunk_depth_cap if infinite else self.kappa
        self.root = None if infinite else -self.kappa

    @property
    def is_finite(self) -> bool:
        return False

    def __contains__(self, u):
        if isinstance(u, tuple):
            return len(u) == 2 and u[0] in (1, 2) and isinstance(u[1], int) and u[1] >= 1
        if isinstance(u, int) and not isinstance(u, bool):
            return u <= 0 and -u <= self.kappa
        return False

    def _check(self, u):
        if u not in self:
            raise KeyError(f"{u!r} is not a vertex of T_(2,{self.kappa})")

    def children(self, u):
        self._check(u)
        if isinstance(u, tuple):
            return [(u[0], u[1] + 1)]
        if u == 0:
            return [(1, 1), (2, 1)]
        return [u + 1]

    def parent(self, u):
        self._check(u)
        if isinstance(u, tuple):
            return 0 if u[1] == 1 else (u[0], u[1] - 1)
        if -u == self.kappa:
            return None
        return u - 1

    def vertices(self):
        trunk = self.kappa if self.kappa != math.inf else self.trunk_depth_cap
        out = [-k for k in range(int(trunk), 0, -1)] + [0]
        out += [(i, j) for i in (1, 2) for j in range(1, self.branch_depth_cap + 1)]
        return out

    def orbit_window(self, depth: int) -> list:
        """Trunk vertices within ``depth`` of 0 (and the root), 0, and ray depths 1..depth."""
        depth = max(1, int(depth))
        trunk = min(depth, self.kappa) if self.kappa != math.inf else depth
        out = [-k for k in range(int(trunk), 0, -1)] + [0]
        out += [(i, j) for i in (1, 2) for j in range(1, depth + 1)]
        return out

    def descriptor(self) -> str:
        k = "inf" if self.kappa == math.inf else str(self.kappa)
        return f"T_(2,{k})"


def t2kappa(kappa=0, branch_depth_cap: int = 8, trunk_depth_cap: int | None = None) -> T2Kappa:
    return T2Kappa(kappa, branch_depth_cap, trunk_depth_cap)


class WeightSystem:
    """Weights on the non-root vertices; a finite map or a closed-form rule."""

    def __init__(self, weights: Mapping[Vertex, complex] | Callable[[Vertex], complex], descriptor: str = ""):
        if callable(weights):
            self._rule = weights
            self._map = None
        else:
            self._rule = None
            self._map = {k: complex(v) for k, v in weights.items()}
        self.descriptor = descriptor or ("explicit" if self._map is not None else "rule")

    def __call__(self, v: Vertex) -> complex:
        if self._map is not None:
            try:
                return self._map[v]
            except KeyError:
                raise KeyError(f"no weight at vertex {v!r}") from None
        return complex(self._rule(v))

    def defined_at(self, v) -> bool:
        return self._map is None or v in self._map


def t2kappa_weights(alpha: Sequence[complex], beta: Sequence[complex], trunk: complex = 1.0) -> WeightSystem:
    """alpha_i at (i, 1), beta_i at (i, j) for j >= 2, ``trunk`` elsewhere."""
    a1, a2 = (complex(x) for x in alpha)
    b1, b2 = (complex(x) for x in beta)
    trunk = complex(trunk)

    def rule(v):
        if isinstance(v, tuple):
            if v[1] == 1:
                return a1 if v[0] == 1 else a2
            return b1 if v[0] == 1 else b2
        return trunk

    return WeightSystem(rule, f"alpha=({a1:g},{a2:g}), beta=({b1:g},{b2:g})")


class TreeShiftOp(LocalOperator):
    """Weighted shift on a directed tree, acting on TreeVertex labels."""

    def __init__(self, tree: DirectedTree, weights: WeightSystem | Mapping | Callable,
                 verify: bool = True, seed: int = 0):
        if not isinstance(weights, WeightSystem):
            weights = WeightSystem(weights)
        self.tree = tree
        self.weights = weights
        self.descriptor = f"S[{tree.descriptor()}; {weights.descriptor}]"
        if tree.is_finite:
            missing = [v for v in tree.vertices() if v != tree.root and not weights.defined_at(v)]
            if missing:
                raise ValueError(f"missing weight at vertex {missing[0]!r}")
        if verify:
            self._verify_duality(seed)

    def weight(self, v) -> complex:
        return self.weights(v)

    def image(self, label):
        return SparseVec((TreeVertex(v), self.weights(v)) for v in self.tree.children(label.id))

    def coimage(self, label):
        p = self.tree.parent(label.id)
        if p is None:
            return SparseVec()
        return SparseVec.basis(TreeVertex(p), self.weights(label.id).conjugate())

    def apply(self, v):
        out: dict = {}
        for lab, c in v.items():
            for ch in self.tree.children(lab.id):
                w = self.weights(ch)
                if w != 0:
                    # each child has a unique parent, so no accumulation needed
                    out[TreeVertex(ch)] = c * w
        return SparseVec._wrap(out)

    def adjoint_apply(self, v):
        out: dict = {}
        for lab, c in v.items():
            p = self.tree.parent(lab.id)
            if p is None:
                continue
            key = TreeVertex(p)
            out[key] = out.get(key, 0j) + c * self.weights(lab.id).conjugate()
        return SparseVec._wrap({k: c for k, c in out.items() if c != 0})

    def vertex_window(self, n: int = 1) -> list:
        """Orbit representatives to depth n + 2 (all vertices for finite trees)."""
        if self.tree.is_finite:
            return self.tree.vertices()
        return self.tree.orbit_window(n + 2)

    def default_window(self, n: int = 1) -> list:
        return self.labels(self.vertex_window(n))

    def labels(self, vertices: Iterable | None = None) -> list:
        vs = self.tree.vertices() if vertices is None else vertices
        return [TreeVertex(v) for v in vs]

    def _verify_duality(self, seed: int, count: int = 16):
        window = self.default_window(2)
        cfg = ProbeConfig(seed=seed, num_probes=2 * count, support_size=4)
        probes = list(cfg.probes(window))
        worst = 0.0
        for u, v in zip(probes[::2], probes[1::2]):
            worst = max(worst, adjoint_residual(self, u, v))
        if worst > 1e-10:
            raise ValueError(f"adjoint duality violated on construction (residual {worst:.3e})")


def tree_shift(tree: DirectedTree, weights) -> TreeShiftOp:
    return TreeShiftOp(tree, weights)


def branch_weight_sum(s: TreeShiftOp, u) -> float:
    """d(u) = ||S e_u||^2."""
    return float(sum(abs(s.weight(v)) ** 2 for v in s.tree.children(u)))


def norm_power_on_basis(s: TreeShiftOp, u, n: int) -> float:
    """||S^n e_u||, summing |path weight|^2 over descendants at distance n."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    frontier = {u: 1.0}
    for _ in range(n):
        nxt = {}
        for x, m in frontier.items():
            for v in s.tree.children(x):
                w2 = abs(s.weight(v)) ** 2
                if w2:
                    nxt[v] = m * w2
        frontier = nxt
    return math.sqrt(sum(frontier.values()))


def sup_branch_weight(s: TreeShiftOp, window=None) -> float:
    """max d(u) over the window; equals ||S||^2 for the eventually constant families."""
    window = s.vertex_window(1) if window is None else window
    return max(branch_weight_sum(s, u) for u in window)


def basis_power_norms_test(s: TreeShiftOp, n: int, vertex_window=None, tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    """Compare d(u)^{n/2} with ||S^n e_u|| on every vertex of the window.

    For the T_(2,kappa) families the default window holds one vertex per
    orbit of the weight pattern up to depth n + 2, which suffices because
    weights are constant along each ray beyond depth 1.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    window = s.vertex_window(n) if vertex_window is None else list(vertex_window)
    if not window:
        raise ValueError("vertex window must be nonempty")
    worst = None
    failed = False
    for u in window:
        lhs = branch_weight_sum(s, u) ** (n / 2)
        rhs = norm_power_on_basis(s, u, n)
        diff = abs(lhs - rhs)
        bound = tol.bound(max(lhs, rhs))
        ratio = diff / bound if bound > 0 else (math.inf if diff > 0 else 0.0)
        if diff > bound:
            failed = True
        if worst is None or ratio > worst[0]:
            worst = (ratio, u, diff, lhs, rhs)
    _, u, diff, lhs, rhs = worst
    ctx = dict(window=[TreeVertex(x) for x in window], n=n, tol=tol,
               vertex=TreeVertex(u), norm_power=lhs, power_norm=rhs)
    if failed:
        return Fails(diff, TreeVertex(u), **ctx)
    return Holds(diff, **ctx)


def quasinormal_tree_test(s: TreeShiftOp, vertex_window=None, tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    """CC^*C = C^*CC on basis vectors: d(v) = d(u) for each child v with nonzero weight."""
    window = s.vertex_window(1) if vertex_window is None else list(vertex_window)
    worst = None
    failed = False
    for u in window:
        du = branch_weight_sum(s, u)
        for v in s.tree.children(u):
            if s.weight(v) == 0:
                continue
            dv = branch_weight_sum(s, v)
            diff = abs(du - dv)
            bound = tol.bound(max(du, dv))
            ratio = diff / bound if bound > 0 else (math.inf if diff > 0 else 0.0)
            if diff > bound:
                failed = True
            if worst is None or ratio > worst[0]:
                worst = (ratio, u, v, diff, du, dv)
    ctx = dict(window=[TreeVertex(x) for x in window], tol=tol)
    if worst is None:
        return Holds(0.0, **ctx)
    _, u, v, diff, du, dv = worst
    ctx.update(edge=[TreeVertex(u), TreeVertex(v)], d_parent=du, d_child=dv)
    if failed:
        return Fails(diff, (TreeVertex(u), TreeVertex(v)), **ctx)
    return Holds(diff, **ctx)


def random_tree(rng: np.random.Generator, num_vertices: int, zero_prob: float = 0.2,
                weight_range=(0.3, 1.7), complex_weights: bool = True) -> TreeShiftOp:
    """Random recursive tree on 0..n-1 (root 0) with random weights, some zero."""
    parent = {i: int(rng.integers(0, i)) for i in range(1, num_vertices)}
    tree = FiniteTree(parent, vertices=range(num_vertices))
    weights = {}
    for v in range(1, num_vertices):
        mag = rng.uniform(*weight_range)
        phase = np.exp(2j * np.pi * rng.uniform()) if complex_weights else 1.0
        weights[v] = 0.0 if rng.uniform() < zero_prob else mag * phase
    return TreeShiftOp(tree, weights, verify=False)

"""Diagram census, tree-type counts and diagram weights.

A diagram is a labelling of the vertex slots of ``k`` elements up to
relabelling.  A walk element (``"lambda"``) has ``q + 1`` slots joined by
``q`` consecutive edges; a triangle element (``"mu"``) has 3 slots joined
cyclically.  Adjacent slots carry different labels.  The canonical
representative is the restricted growth string (first occurrences appear
as 0, 1, 2, ...).
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import factorial
from typing import Iterator, Sequence

import numpy as np
from scipy import signal

from . import kernels
from ._fallback import _is_tree_mu
from .combinatorics import (
    check_profile,
    integer_partitions,
    partition_count,
    profile_norm,
    profile_size,
)
from .errors import GridTooCoarse, InvalidParams, InvalidProfile, NotTreeType, TooLarge
from .weights import _as_kernel, _direct_ft, compute_V, eval_h, kernel_width, moments_for

LAMBDA = "lambda"
MU = "mu"
MAX_SLOTS = 14

_KIND_ALIASES = {
    "lambda": LAMBDA, "λ": LAMBDA, "walk": LAMBDA, "path": LAMBDA,
    "mu": MU, "μ": MU, "triangle": MU, "cycle": MU,
}


def normalize_kind(kind: str) -> str:
    try:
        return _KIND_ALIASES[str(kind).lower()]
    except KeyError:
        raise InvalidParams(f"unknown element kind {kind!r}") from None


@dataclass(frozen=True)
class Shape:
    """Slot layout shared by all diagrams with the same (k, q, kind)."""

    k: int
    q: int
    kind: str
    width: int  # slots per element
    edges: tuple  # per element, tuple of (slot_a, slot_b) in traversal order

    @property
    def n_slots(self) -> int:
        return self.k * self.width

    @property
    def n_element_edges(self) -> int:
        return len(self.edges[0])

    def arrays(self):
        """CSR constraint lists and flat edge arrays for the census kernels."""
        forbid: list[list[int]] = [[] for _ in range(self.n_slots)]
        ea, eb = [], []
        for elem in self.edges:
            for a, b in elem:
                ea.append(a)
                eb.append(b)
                lo, hi = min(a, b), max(a, b)
                forbid[hi].append(lo)
        ptr = [0]
        idx: list[int] = []
        for f in forbid:
            idx.extend(sorted(set(f)))
            ptr.append(len(idx))
        return (np.array(ptr, dtype=np.intc), np.array(idx, dtype=np.intc),
                np.array(ea, dtype=np.intc), np.array(eb, dtype=np.intc))


@lru_cache(maxsize=None)
def shape(k: int, q: int, kind: str) -> Shape:
    kind = normalize_kind(kind)
    if k < 1:
        raise InvalidParams("k must be >= 1")
    if kind == LAMBDA:
        if q < 1:
            raise InvalidParams("walk length q must be >= 1")
        width = q + 1
        edges = tuple(tuple((e * width + j, e * width + j + 1) for j in range(q)) for e in range(k))
    else:
        if q != 3:
            raise InvalidParams("triangle elements have q = 3")
        width = 3
        edges = tuple(((3 * e, 3 * e + 1), (3 * e + 1, 3 * e + 2), (3 * e + 2, 3 * e)) for e in range(k))
    return Shape(k, q, kind, width, edges)


def canonical(labels: Sequence[int]) -> tuple[int, ...]:
    """Relabel so that labels first appear in the order 0, 1, 2, ..."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(x, len(seen)) for x in labels)


@dataclass(frozen=True)
class Diagram:
    """One canonical diagram.

    ``labels`` is the restricted growth string over all slots in element order.
    """

    kind: str
    k: int
    q: int
    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        labs = tuple(int(x) for x in self.labels)
        shp = shape(self.k, self.q, self.kind)
        if len(labs) != shp.n_slots:
            raise InvalidParams(f"expected {shp.n_slots} labels, got {len(labs)}")
        if canonical(labs) != labs:
            raise InvalidParams("labels are not a restricted growth string")
        for elem in shp.edges:
            for a, b in elem:
                if labs[a] == labs[b]:
                    raise InvalidParams("adjacent slots share a label")
        object.__setattr__(self, "labels", labs)

    @property
    def shape(self) -> Shape:
        return shape(self.k, self.q, self.kind)

    def element_edges(self, e: int) -> list[tuple[int, int]]:
        """Directed edges of element ``e`` in traversal order (as labels)."""
        lab = self.labels
        return [(lab[a], lab[b]) for a, b in self.shape.edges[e]]

    def element_vertices(self, e: int) -> tuple[int, ...]:
        w = self.shape.width
        return self.labels[e * w:(e + 1) * w]

    @cached_property
    def multiplicity(self) -> Counter:
        """Map undirected edge ``(u, v)``, ``u < v``, to its total multiplicity."""
        c: Counter = Counter()
        for e in range(self.k):
            for u, v in self.element_edges(e):
                c[(min(u, v), max(u, v))] += 1
        return c

    @property
    def E(self) -> int:
        return len(self.multiplicity)

    @property
    def V(self) -> int:
        return max(self.labels) + 1

    @cached_property
    def _codes(self) -> list[int]:
        n = len(self.labels)
        return [min(u, v) * n + max(u, v) for e in range(self.k) for u, v in self.element_edges(e)]

    @cached_property
    def is_connected(self) -> bool:
        """Element-share graph connected (elements adjacent iff they share an edge)."""
        sets = [set(self._codes[e * self.q:(e + 1) * self.q]) for e in range(self.k)]
        reached = {0}
        frontier = [0]
        while frontier:
            e = frontier.pop()
            for f in range(self.k):
                if f not in reached and sets[e] & sets[f]:
                    reached.add(f)
                    frontier.append(f)
        return len(reached) == self.k

    @cached_property
    def is_tree(self) -> bool:
        if not self.is_connected:
            return False
        if self.kind == LAMBDA:
            return self.V == self.E + 1
        return _is_tree_mu(self._codes, self.k, 3)

    @property
    def is_maximal(self) -> bool:
        if self.kind == LAMBDA:
            return self.is_tree and self.E == self.k * (self.q - 1) + 1
        return self.is_tree and self.E == 2 * self.k + 1

    @property
    def is_minimal(self) -> bool:
        if self.kind == LAMBDA:
            return self.E == 1
        return self.E == 3

    def above_diagonal(self) -> bool:
        if self.kind == LAMBDA:
            return self.V > self.E + 1
        return 2 * self.V > self.E + 3


def iter_labelings(k: int, q: int, kind: str, prefix: Sequence[int] = ()) -> Iterator[tuple[int, ...]]:
    """All canonical labelings (connected or not) extending ``prefix``."""
    shp = shape(k, q, kind)
    ptr, idx, _, _ = shp.arrays()
    n = shp.n_slots
    lab = list(prefix) + [0] * (n - len(prefix))

    def rec(t: int, mx: int):
        if t == n:
            yield tuple(lab)
            return
        for v in range(mx + 2):
            if any(lab[idx[j]] == v for j in range(ptr[t], ptr[t + 1])):
                continue
            lab[t] = v
            yield from rec(t + 1, max(mx, v))

    for t in range(len(prefix)):
        if prefix[t] > (max(prefix[:t]) + 1 if t else 0):
            return
        if any(prefix[idx[j]] == prefix[t] for j in range(ptr[t], ptr[t + 1])):
            return
    yield from rec(len(prefix), max(prefix) if len(prefix) else -1)


def iter_diagrams(k: int, q: int, kind: str, connected_only: bool = True) -> Iterator[Diagram]:
    for labs in iter_labelings(k, q, kind):
        d = Diagram(kind, k, q, labs)
        if connected_only and not d.is_connected:
            continue
        yield d


@dataclass
class Census:
    """Counts of e-connected diagrams bucketed by ``(E, V)``."""

    k: int
    q: int
    kind: str
    counts: dict = field(default_factory=dict)
    tree: dict = field(default_factory=dict)

    def count(self, E: int, V: int) -> int:
        return self.counts.get((E, V), 0)

    def tree_count(self, E: int, V: int) -> int:
        return self.tree.get((E, V), 0)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def maximal_cell(self) -> tuple[int, int]:
        if self.kind == LAMBDA:
            K = self.k * (self.q - 1) + 1
            return K, K + 1
        return 2 * self.k + 1, self.k + 2

    @property
    def minimal_cell(self) -> tuple[int, int]:
        return (1, 2) if self.kind == LAMBDA else (3, 3)

    def above_diagonal(self) -> dict:
        """Non-empty cells strictly above the main diagonal (should be empty)."""
        if self.kind == LAMBDA:
            bad = lambda E, V: V > E + 1  # noqa: E731
        else:
            bad = lambda E, V: 2 * V > E + 3  # noqa: E731
        return {c: n for c, n in self.counts.items() if bad(*c) and n}

    def rows(self) -> list[dict]:
        return [
            {"k": self.k, "q": self.q, "kind": self.kind, "E": E, "V": V, "count": n, "tree": self.tree.get((E, V), 0)}
            for (E, V), n in sorted(self.counts.items())
        ]


def _census_task(args):
    n_slots, arrays, k, kind_code, prefix = args
    ptr, idx, ea, eb = arrays
    return kernels.census_counts(n_slots, ptr, idx, ea, eb, k, kind_code, prefix)


def first_element_prefixes(k: int, q: int, kind: str) -> list[tuple[int, ...]]:
    """Canonical labelings of the first element; the census splits over these."""
    shp = shape(k, q, kind)
    first = shape(1, q, kind)
    return [labs for labs in iter_labelings(1, q, kind)] if shp.n_slots > first.n_slots else [()]


def census(k: int, q: int, kind: str, *, max_slots: int = MAX_SLOTS, workers: int = 1) -> Census:
    """Exhaustive census of e-connected diagrams.

    Parameters
    ----------
    workers : int
        Processes used; the work is split over first-element prefixes and
        the partial histograms are summed.

    Raises
    ------
    TooLarge
        If the diagram has more than ``max_slots`` vertex slots.
    """
    shp = shape(k, q, kind)
    if shp.n_slots > max_slots:
        raise TooLarge(f"{shp.n_slots} slots exceed the exhaustive limit {max_slots}")
    arrays = shp.arrays()
    code = 0 if shp.kind == LAMBDA else 1
    if workers > 1:
        tasks = [(shp.n_slots, arrays, k, code, pre) for pre in first_element_prefixes(k, q, kind)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_census_task, tasks))
        counts = sum(p[0] for p in parts)
        tree = sum(p[1] for p in parts)
    else:
        counts, tree = _census_task((shp.n_slots, arrays, k, code, ()))
    out = Census(k, q, shp.kind)
    for E, V in zip(*np.nonzero(counts)):
        out.counts[(int(E), int(V))] = int(counts[E, V])
    for E, V in zip(*np.nonzero(tree)):
        out.tree[(int(E), int(V))] = int(tree[E, V])
    return out


def enumerate_diagrams_bruteforce(k: int, q: int, element_kind: str, *, list_limit: int = 9):
    """Census map plus, for at most ``list_limit`` slots, the diagrams per cell."""
    cen = census(k, q, element_kind)
    per_class: dict | None = None
    if shape(k, q, element_kind).n_slots <= list_limit:
        per_class = {}
        for d in iter_diagrams(k, q, element_kind):
            per_class.setdefault((d.E, d.V), []).append(d)
    return cen, per_class


# --- closed-form counts ----------------------------------------------------


def _exact_int(x: Fraction) -> int:
    if x.denominator != 1:
        raise ArithmeticError(f"expected an integer, got {x}")
    return x.numerator


def count_max_tree_diagrams(k: int, q: int) -> int:
    """``2^(k-1) q^k K^(k-2)`` with ``K = k(q-1)+1``."""
    if k < 1 or q < 1:
        raise InvalidParams("k, q must be >= 1")
    K = k * (q - 1) + 1
    return _exact_int(Fraction(2 ** (k - 1) * q**k) * Fraction(K) ** (k - 2))


def count_tree_diagrams_mixed(rs: Sequence[int]) -> int:
    """``2^(k-1) (sum r - k + 1)^(k-2) prod r`` for elements with ``r_i`` edges each."""
    rs = [int(r) for r in rs]
    if not rs or any(r < 1 for r in rs):
        raise InvalidParams("need k >= 1 element sizes r_i >= 1")
    k = len(rs)
    E = sum(rs) - k + 1
    return _exact_int(Fraction(2 ** (k - 1) * math.prod(rs)) * Fraction(E) ** (k - 2))


def count_min_tree_diagrams(k: int, kind: str = LAMBDA) -> int:
    return 2 ** (k - 1) if normalize_kind(kind) == LAMBDA else 6 ** (k - 1)


def sigma_profiles(k: int) -> list[tuple[int, ...]]:
    """Admissible profiles ``(s_1..s_{k-1})`` with ``sum i*s_i = k-1``."""
    return list(integer_partitions(k - 1))


def count_sigma_prufer(k: int, q: int, sigma: Sequence[int]) -> int:
    """Number of Prüfer codes whose repeated symbols have profile ``sigma``.

    ``(k-1)! K!/(K-u)! prod 1/((i!)^s_i s_i!)`` with ``u = |sigma|``.
    """
    sigma = check_profile(sigma)
    if profile_norm(sigma) != k - 1:
        raise InvalidProfile(f"profile {sigma} must have weight {k - 1}")
    K = k * (q - 1) + 1
    u = profile_size(sigma)
    if u > K:
        return 0
    num = factorial(k - 1) * (factorial(K) // factorial(K - u))
    den = math.prod(factorial(i + 1) ** s * factorial(s) for i, s in enumerate(sigma))
    return _exact_int(Fraction(num, den))


def sigma_of_cells(cells: Sequence[int], k: int) -> tuple[int, ...]:
    """Profile of a code: ``s_i`` = number of symbols used exactly ``i`` times."""
    prof = [0] * max(k - 1, 0)
    for n in Counter(cells).values():
        prof[n - 1] += 1
    return tuple(prof)


def N_sigma(sigma: Sequence[int]) -> int:
    """Number of set partitions of ``{1..||sigma||}`` with block profile ``sigma``."""
    return partition_count(sigma)


def Q_sigma(sigma: Sequence[int]) -> int:
    """Orientation factor ``6^(||sigma|| - |sigma|)`` of repeated triangles."""
    sigma = check_profile(sigma)
    return 6 ** (profile_norm(sigma) - profile_size(sigma))


@lru_cache(maxsize=None)
def _T_row(q: int) -> dict[int, int]:
    cen = census(1, q, LAMBDA, max_slots=max(MAX_SLOTS, q + 1))
    return {E: n for (E, V), n in cen.tree.items()}


def T_table(q: int, r: int) -> int:
    """Number of canonical q-step walks whose trace is a tree with ``r`` edges."""
    if not 1 <= r <= q:
        raise InvalidParams("need 1 <= r <= q")
    return _T_row(q).get(r, 0)


# --- weights ---------------------------------------------------------------


def lambda_diagram_weight(d: Diagram, alpha: int, kernel=None) -> float:
    """Product over distinct edges of ``V_m`` (``V_0`` for alpha = 0)."""
    if d.kind != LAMBDA or not d.is_tree:
        raise NotTreeType("weight is defined for tree-type walk diagrams")
    mom = moments_for(alpha, kernel)
    return math.prod(mom[m] for m in d.multiplicity.values())


def mu_diagram_weight(d: Diagram, alpha: int, kernel=None, dx: float = 0.04, rel: float = 1e-16) -> float:
    """Integral of ``prod h_{m(e)}(x_i - x_j)`` over all vertices but one.

    Leaf triangles are eliminated one at a time: the apex integral becomes
    the convolution of its two edge functions, which multiplies into the
    shared edge.  Edge functions live on a symmetric grid of spacing ``dx``.

    Raises
    ------
    NotTreeType
        If the dual graph of ``d`` is not a tree.
    GridTooCoarse
        If ``dx`` under-resolves the highest-multiplicity kernel.
    """
    if d.kind != MU or not d.is_tree:
        raise NotTreeType("weight is defined for tree-type triangle diagrams")
    kernel = _as_kernel(kernel)
    mult = d.multiplicity
    mmax = max(mult.values())
    W = max(kernel_width(m, alpha, kernel, rel) for m in set(mult.values()))
    # the trapezoid rule aliases at frequency 2*pi/dx
    p_alias = 2 * math.pi / dx
    tail = abs(_direct_ft(mmax, alpha, kernel, np.array([p_alias]), p_alias)[0])
    if tail > 1e-12 * compute_V(mmax if alpha else 0, alpha, kernel):
        raise GridTooCoarse(f"dx={dx} under-resolves h_{mmax}")
    n = int(math.ceil(W / dx))
    x = dx * np.arange(-n, n + 1)
    f = {e: eval_h(x, m, alpha, kernel) for e, m in mult.items()}
    adj: dict[int, set] = {}
    for u, v in mult:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)

    def key(a, b):
        return (a, b) if a < b else (b, a)

    while len(adj) > 3:
        for v, nb in adj.items():
            if len(nb) == 2:
                a, b = sorted(nb)
                if b in adj[a]:
                    break
        else:
            raise NotTreeType("no removable apex found")
        conv = signal.fftconvolve(f.pop(key(a, v)), f.pop(key(v, b)), mode="same") * dx
        f[key(a, b)] = f[key(a, b)] * conv
        adj[a].discard(v)
        adj[b].discard(v)
        del adj[v]
    a, b, c = sorted(adj)
    g = signal.fftconvolve(f[key(b, c)], f[key(c, a)], mode="same") * dx
    return float(np.sum(f[key(a, b)] * g) * dx)

"""Colour Prüfer codes for maximal tree-type diagrams.

A maximal tree-type diagram together with a distinguished root edge is
encoded by three pieces:

``cells``
    ``k - 1`` symbols from an alphabet of size ``K = k(q-1) + 1``.  Symbol 0
    is the root edge; symbol ``1 + P*(q-1) + (j-1)`` is port ``j`` of element
    ``P``, i.e. its ``j``-th edge other than the one it is glued by.  The
    cells are the Prüfer sequence (largest leaf removed first, node 0 kept)
    of the tree whose nodes are the elements plus the root, each element
    hanging from the port it is glued to.
``attach``
    For each element, the index (in traversal order) of its glued edge.
``orient``
    One bit per element except the reference one (the first element glued
    to the root): whether it crosses its glued edge in the same direction
    as its parent element, or as the reference element for root gluings.

Together these number ``K**(k-1) * q**k * 2**(k-1)`` codes, which is the
number of maximal diagrams times the ``K`` choices of root edge.
"""
from __future__ import annotations

import json
import random
import string
from collections import deque
from dataclasses import dataclass
from itertools import count, product
from typing import Sequence

from .diagrams import LAMBDA, Diagram, normalize_kind, shape
from .errors import InvalidParams, NotTreeType


def _letter(P: int) -> str:
    return string.ascii_lowercase[P] if P < 26 else f"c{P}_"


def alphabet(k: int, q: int) -> list[str]:
    """Symbols ``["0", "a1", .., "a{q-1}", "b1", ...]`` of size ``k(q-1)+1``."""
    return ["0"] + [f"{_letter(P)}{j}" for P in range(k) for j in range(1, q)]


@dataclass(frozen=True)
class PruferCode:
    k: int
    q: int
    kind: str
    cells: tuple
    attach: tuple
    orient: tuple

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        K = self.k * (self.q - 1) + 1
        if len(self.cells) != self.k - 1 or any(not 0 <= c < K for c in self.cells):
            raise InvalidParams("cells must be k-1 symbols below k(q-1)+1")
        if len(self.attach) != self.k or any(not 0 <= a < self.q for a in self.attach):
            raise InvalidParams("attach must hold k indices below q")
        if len(self.orient) != self.k - 1 or any(b not in (0, 1) for b in self.orient):
            raise InvalidParams("orient must hold k-1 bits")

    @property
    def symbols(self) -> list[str]:
        abc = alphabet(self.k, self.q)
        return [abc[c] for c in self.cells]

    def to_dict(self) -> dict:
        return {
            "k": self.k, "q": self.q, "kind": self.kind, "cells": self.symbols,
            "attach": list(self.attach), "orient": list(self.orient),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "PruferCode":
        abc = {s: i for i, s in enumerate(alphabet(d["k"], d["q"]))}
        cells = tuple(abc[c] if isinstance(c, str) else int(c) for c in d["cells"])
        return cls(d["k"], d["q"], d.get("kind", LAMBDA), cells, tuple(d["attach"]), tuple(d["orient"]))


def _step_slots(kind: str, q: int, t: int) -> tuple[int, int]:
    """Local slot pair of step ``t`` within one element."""
    if kind == LAMBDA:
        return t, t + 1
    return t, (t + 1) % 3


def _ports(kind: str, q: int, a: int) -> list[int]:
    """Steps of an element, other than its glued step ``a``, in port order 1..q-1."""
    if kind == LAMBDA:
        return [t for t in range(q) if t != a]
    return [(a + 1) % 3, (a + 2) % 3]


def _check_maximal(d: Diagram) -> None:
    if d.kind == LAMBDA and d.q < 2 and d.k > 1:
        raise NotTreeType("walks of length 1 cannot form a multi-element tree diagram")
    if not d.is_maximal:
        raise NotTreeType("Prüfer codes are defined for maximal tree-type diagrams")


def prufer_encode(d: Diagram, root_edge: Sequence[int]) -> PruferCode:
    """Encode ``d`` rooted at the undirected edge ``root_edge``.

    Raises
    ------
    NotTreeType
        If ``d`` is not a maximal tree-type diagram.
    """
    _check_maximal(d)
    k, q, kind = d.k, d.q, d.kind
    r = tuple(sorted(int(x) for x in root_edge))
    if r not in d.multiplicity:
        raise InvalidParams(f"{root_edge} is not an edge of the diagram")
    steps = [d.element_edges(e) for e in range(k)]
    und = [[tuple(sorted(s)) for s in st] for st in steps]

    attach = [-1] * k
    parent = [-1] * k  # element index, or -1 for the root edge
    owner: dict[tuple, tuple[int, int]] = {}  # edge -> (element, port number)
    seen_edges = {r}
    queue: deque = deque()
    for e in range(k):
        if r in und[e]:
            attach[e] = und[e].index(r)
            queue.append(e)
    while queue:
        e = queue.popleft()
        for j, t in enumerate(_ports(kind, q, attach[e]), start=1):
            edge = und[e][t]
            if edge in seen_edges:
                raise NotTreeType("edge reached twice; diagram is not tree-type")
            seen_edges.add(edge)
            owner[edge] = (e, j)
            for f in range(k):
                if f != e and attach[f] < 0 and edge in und[f]:
                    attach[f] = und[f].index(edge)
                    parent[f] = e
                    queue.append(f)
    if min(attach) < 0:
        raise NotTreeType("diagram is not connected through shared edges")

    def symbol(e: int) -> int:
        if parent[e] < 0:
            return 0
        P, j = owner[und[e][attach[e]]]
        return 1 + P * (q - 1) + (j - 1)

    roots = [e for e in range(k) if parent[e] < 0]
    ref = roots[0]
    ref_dir = steps[ref][attach[ref]]
    orient = []
    for e in range(k):
        if e == ref:
            continue
        mine = steps[e][attach[e]]
        if parent[e] < 0:
            theirs = ref_dir
        else:
            P = parent[e]
            theirs = steps[P][und[P].index(und[e][attach[e]])]
        orient.append(1 if mine == theirs else 0)

    # Prüfer sequence on nodes 0 (root) and 1..k (elements)
    children = [0] * (k + 1)
    for e in range(k):
        children[parent[e] + 1] += 1
    removed = [False] * (k + 1)
    cells = []
    for _ in range(k - 1):
        leaf = max(v for v in range(1, k + 1) if not removed[v] and children[v] == 0)
        e = leaf - 1
        cells.append(symbol(e))
        removed[leaf] = True
        children[parent[e] + 1] -= 1
    return PruferCode(k, q, kind, tuple(cells), tuple(attach), tuple(orient))


def prufer_decode_rooted(code: PruferCode) -> tuple[Diagram, tuple[int, int]]:
    """Inverse of ``prufer_encode``: the diagram and its root edge."""
    k, q, kind = code.k, code.q, code.kind
    shp = shape(k, q, kind)
    w = shp.width

    def node_of(sym: int) -> int:
        return 0 if sym == 0 else (sym - 1) // (q - 1) + 1

    occ = [0] * (k + 1)
    for c in code.cells:
        occ[node_of(c)] += 1
    used = [False] * (k + 1)
    parent_sym = [0] * k
    for c in code.cells:
        leaf = max(v for v in range(1, k + 1) if not used[v] and occ[v] == 0)
        parent_sym[leaf - 1] = c
        used[leaf] = True
        occ[node_of(c)] -= 1
    # the remaining element hangs from the root, as do those assigned symbol 0

    parent = [node_of(s) - 1 for s in parent_sym]
    roots = [e for e in range(k) if parent[e] < 0]
    ref = roots[0]
    bits = {}
    it = iter(code.orient)
    for e in range(k):
        if e != ref:
            bits[e] = next(it)

    fresh = count()
    lab: list[int | None] = [None] * shp.n_slots

    def place(e: int, tail: int, head: int) -> None:
        a = code.attach[e]
        s0, s1 = _step_slots(kind, q, a)
        lab[e * w + s0], lab[e * w + s1] = tail, head
        for s in range(w):
            if lab[e * w + s] is None:
                lab[e * w + s] = next(fresh)

    def directed(e: int, t: int) -> tuple[int, int]:
        s0, s1 = _step_slots(kind, q, t)
        return lab[e * w + s0], lab[e * w + s1]

    A, B = next(fresh), next(fresh)
    place(ref, A, B)
    order = [ref]
    for e in roots:
        if e != ref:
            place(e, A, B) if bits[e] else place(e, B, A)
            order.append(e)
    kids: dict[int, list[int]] = {}
    for e in range(k):
        if parent[e] >= 0:
            kids.setdefault(parent[e], []).append(e)
    i = 0
    while i < len(order):
        P = order[i]
        i += 1
        ports = _ports(kind, q, code.attach[P])
        for e in kids.get(P, []):
            j = (parent_sym[e] - 1) % (q - 1) + 1
            tail, head = directed(P, ports[j - 1])
            place(e, tail, head) if bits[e] else place(e, head, tail)
            order.append(e)
    if len(order) != k:
        raise NotTreeType("code does not describe a tree")
    relabel: dict[int, int] = {}
    labs = tuple(relabel.setdefault(x, len(relabel)) for x in lab)
    d = Diagram(kind, k, q, labs)
    root = tuple(sorted((relabel[A], relabel[B])))
    _check_maximal(d)
    return d, root


def prufer_decode(code: PruferCode) -> Diagram:
    return prufer_decode_rooted(code)[0]


def random_code(k: int, q: int, kind: str = LAMBDA, rng: random.Random | None = None) -> PruferCode:
    rng = rng or random.Random()
    K = k * (q - 1) + 1
    return PruferCode(
        k, q, kind,
        tuple(rng.randrange(K) for _ in range(k - 1)),
        tuple(rng.randrange(q) for _ in range(k)),
        tuple(rng.randrange(2) for _ in range(k - 1)),
    )


def all_codes(k: int, q: int, kind: str = LAMBDA):
    K = k * (q - 1) + 1
    for cells in product(range(K), repeat=k - 1):
        for attach in product(range(q), repeat=k):
            for orient in product((0, 1), repeat=k - 1):
                yield PruferCode(k, q, kind, cells, attach, orient)

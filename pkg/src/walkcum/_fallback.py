"""Pure-Python implementations of the hot kernels.

These mirror ``walkcum._core`` exactly and are used when the compiled
extension is unavailable or ``WALKCUM_PURE_PYTHON=1`` is set.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def _is_tree_mu(codes, n_elem, width):
    # incidence graph between distinct elements and the edges they share
    groups = {frozenset(codes[e * width:(e + 1) * width]) for e in range(n_elem)}
    holders: dict[int, int] = {}
    for key in groups:
        for c in key:
            holders[c] = holders.get(c, 0) + 1
    shared = [h for h in holders.values() if h >= 2]
    return sum(shared) == len(groups) + len(shared) - 1


def _evaluate(lab, n_slots, ea, eb, n_elem, width, kind, counts, tree):
    stride = n_slots
    codes = []
    for a, b in zip(ea, eb):
        x, y = lab[a], lab[b]
        codes.append(x * stride + y if x < y else y * stride + x)
    parent = list(range(n_elem))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[int, int] = {}
    for idx, c in enumerate(codes):
        e = idx // width
        o = owner.get(c)
        if o is None:
            owner[c] = e
        else:
            ra, rb = find(e), find(o)
            if ra != rb:
                parent[ra] = rb
    root = find(0)
    for e in range(1, n_elem):
        if find(e) != root:
            return
    n_edges = len(owner)
    n_vert = max(lab) + 1
    counts[n_edges, n_vert] += 1
    if kind == 0:
        if n_vert == n_edges + 1:
            tree[n_edges, n_vert] += 1
    elif _is_tree_mu(codes, n_elem, width):
        tree[n_edges, n_vert] += 1


def census_counts(n_slots, nb_ptr, nb_idx, ea, eb, n_elem, kind, prefix=()):
    """Histogram e-connected diagrams by (edge count, vertex count).

    Parameters
    ----------
    n_slots : int
        Number of vertex slots in the diagram.
    nb_ptr, nb_idx : array of int
        CSR list of earlier slots whose label must differ from each slot.
    ea, eb : array of int
        Slot pair of each element edge, element-major, ``width`` edges per element.
    n_elem : int
        Number of elements.
    kind : int
        0 for walk elements (tree iff V == E + 1), 1 for cycle elements
        (tree iff the dual share graph is a tree).
    prefix : sequence of int
        Fixed leading labels; the census covers only completions of it.

    Returns
    -------
    counts, tree : ndarray of int64
        Arrays of shape ``(len(ea) + 1, n_slots + 1)`` indexed by ``[E, V]``.
    """
    nb_ptr = [int(x) for x in nb_ptr]
    nb_idx = [int(x) for x in nb_idx]
    ea = [int(x) for x in ea]
    eb = [int(x) for x in eb]
    width = len(ea) // n_elem
    counts = np.zeros((len(ea) + 1, n_slots + 1), dtype=np.int64)
    tree = np.zeros_like(counts)
    lab = [0] * n_slots
    mx = [0] * n_slots

    def ok(t, v):
        for j in range(nb_ptr[t], nb_ptr[t + 1]):
            if lab[nb_idx[j]] == v:
                return False
        return True

    npre = len(prefix)
    for t, v in enumerate(prefix):
        limit = mx[t - 1] + 1 if t > 0 else 0
        if v < 0 or v > limit or not ok(t, v):
            return counts, tree
        lab[t] = v
        mx[t] = max(mx[t - 1], v) if t > 0 else v
    if npre == n_slots:
        _evaluate(lab, n_slots, ea, eb, n_elem, width, kind, counts, tree)
        return counts, tree

    t = npre
    lab[t] = -1
    while t >= npre:
        lab[t] += 1
        limit = mx[t - 1] + 1 if t > 0 else 0
        if lab[t] > limit:
            t -= 1
            continue
        if not ok(t, lab[t]):
            continue
        mx[t] = max(mx[t - 1], lab[t]) if t > 0 else lab[t]
        if t == n_slots - 1:
            _evaluate(lab, n_slots, ea, eb, n_elem, width, kind, counts, tree)
            continue
        t += 1
        lab[t] = -1
    return counts, tree


def triangle_weight_sum(n, rows, cols, weights):
    """Sum over triangles of the product of their three edge weights.

    ``rows``/``cols`` list each undirected edge once; returns ``(sum, count)``.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    w = np.asarray(weights, dtype=float)
    lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
    up = sp.csr_matrix((w, (lo, hi)), shape=(n, n))
    ones = sp.csr_matrix((np.ones_like(w), (lo, hi)), shape=(n, n))
    total = float((up @ up).multiply(up).sum())
    count = int(round((ones @ ones).multiply(ones).sum()))
    return total, count

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: diagram census and triangle weight sums."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef enum:
    MAXSLOT = 64
    MAXEDGE = 256
    MAXELEM = 64


cdef inline int _find(int* parent, int i) noexcept nogil:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


cdef int _tree_mu(int* codes, int n_elem, int width) noexcept nogil:
    # group identical elements first
    cdef int gid[MAXELEM]
    cdef int sorted_codes[MAXELEM * 8]
    cdef int ng = 0, e, f, i, j, same, a, b, tmp, c, seen, holders
    cdef int n_shared = 0, incid = 0
    cdef int rep[MAXELEM]
    for e in range(n_elem):
        for i in range(width):
            sorted_codes[e * width + i] = codes[e * width + i]
        for i in range(1, width):
            j = i
            while j > 0 and sorted_codes[e * width + j - 1] > sorted_codes[e * width + j]:
                tmp = sorted_codes[e * width + j]
                sorted_codes[e * width + j] = sorted_codes[e * width + j - 1]
                sorted_codes[e * width + j - 1] = tmp
                j -= 1
    for e in range(n_elem):
        gid[e] = -1
        for f in range(ng):
            a = rep[f]
            same = 1
            for i in range(width):
                if sorted_codes[a * width + i] != sorted_codes[e * width + i]:
                    same = 0
                    break
            if same:
                gid[e] = f
                break
        if gid[e] < 0:
            rep[ng] = e
            gid[e] = ng
            ng += 1
    # incidence graph between distinct elements and shared edges must be a tree
    for a in range(ng):
        for i in range(width):
            c = sorted_codes[rep[a] * width + i]
            seen = 0
            for b in range(a):
                for j in range(width):
                    if sorted_codes[rep[b] * width + j] == c:
                        seen = 1
            if seen:
                continue
            holders = 1
            for b in range(a + 1, ng):
                for j in range(width):
                    if sorted_codes[rep[b] * width + j] == c:
                        holders += 1
            if holders >= 2:
                n_shared += 1
                incid += holders
    return 1 if incid == ng + n_shared - 1 else 0


cdef void _evaluate(int* lab, int n_slots, const int* ea, const int* eb, int n_ee,
                    int n_elem, int kind, cnp.int64_t* counts, cnp.int64_t* tree,
                    int ncol) noexcept nogil:
    cdef int codes[MAXEDGE]
    cdef int parent[MAXELEM]
    cdef int width = n_ee // n_elem
    cdef int i, j, x, y, e, o, ra, rb, root, n_edges = 0, n_vert = 0
    cdef int first_owner
    for i in range(n_ee):
        x = lab[ea[i]]
        y = lab[eb[i]]
        codes[i] = x * n_slots + y if x < y else y * n_slots + x
    for e in range(n_elem):
        parent[e] = e
    for i in range(n_ee):
        first_owner = -1
        for j in range(i):
            if codes[j] == codes[i]:
                first_owner = j
                break
        if first_owner < 0:
            n_edges += 1
        else:
            ra = _find(parent, i // width)
            rb = _find(parent, first_owner // width)
            if ra != rb:
                parent[ra] = rb
    root = _find(parent, 0)
    for e in range(1, n_elem):
        if _find(parent, e) != root:
            return
    for i in range(n_slots):
        if lab[i] + 1 > n_vert:
            n_vert = lab[i] + 1
    counts[n_edges * ncol + n_vert] += 1
    if kind == 0:
        if n_vert == n_edges + 1:
            tree[n_edges * ncol + n_vert] += 1
    elif _tree_mu(codes, n_elem, width):
        tree[n_edges * ncol + n_vert] += 1


def census_counts(int n_slots, nb_ptr, nb_idx, ea, eb, int n_elem, int kind, prefix=()):
    """Histogram e-connected diagrams by (edge count, vertex count).

    Same contract as the pure-Python ``census_counts``.
    """
    cdef int[::1] p = np.ascontiguousarray(nb_ptr, dtype=np.intc)
    cdef int[::1] nbi = np.ascontiguousarray(nb_idx, dtype=np.intc) if len(nb_idx) else np.zeros(1, dtype=np.intc)
    cdef int[::1] a = np.ascontiguousarray(ea, dtype=np.intc)
    cdef int[::1] b = np.ascontiguousarray(eb, dtype=np.intc)
    cdef int n_ee = a.shape[0]
    if n_slots > MAXSLOT or n_ee > MAXEDGE or n_elem > MAXELEM or n_ee // n_elem > 8:
        raise ValueError("diagram too large for the compiled census")
    counts_arr = np.zeros((n_ee + 1, n_slots + 1), dtype=np.int64)
    tree_arr = np.zeros_like(counts_arr)
    cdef cnp.int64_t[:, ::1] counts = counts_arr
    cdef cnp.int64_t[:, ::1] tree = tree_arr
    cdef int ncol = n_slots + 1
    cdef int lab[MAXSLOT]
    cdef int mx[MAXSLOT]
    cdef int npre = len(prefix)
    cdef int t, v, j, limit, bad
    for t in range(npre):
        v = prefix[t]
        limit = mx[t - 1] + 1 if t > 0 else 0
        bad = v < 0 or v > limit
        if not bad:
            for j in range(p[t], p[t + 1]):
                if lab[nbi[j]] == v:
                    bad = 1
        if bad:
            return counts_arr, tree_arr
        lab[t] = v
        mx[t] = (mx[t - 1] if mx[t - 1] > v else v) if t > 0 else v
    if npre == n_slots:
        _evaluate(lab, n_slots, &a[0], &b[0], n_ee, n_elem, kind, &counts[0, 0], &tree[0, 0], ncol)
        return counts_arr, tree_arr
    with nogil:
        t = npre
        lab[t] = -1
        while t >= npre:
            lab[t] += 1
            limit = mx[t - 1] + 1 if t > 0 else 0
            if lab[t] > limit:
                t -= 1
                continue
            bad = 0
            for j in range(p[t], p[t + 1]):
                if lab[nbi[j]] == lab[t]:
                    bad = 1
                    break
            if bad:
                continue
            if t > 0:
                mx[t] = mx[t - 1] if mx[t - 1] > lab[t] else lab[t]
            else:
                mx[t] = lab[t]
            if t == n_slots - 1:
                _evaluate(lab, n_slots, &a[0], &b[0], n_ee, n_elem, kind, &counts[0, 0], &tree[0, 0], ncol)
                continue
            t += 1
            lab[t] = -1
    return counts_arr, tree_arr


def triangle_weight_sum(cnp.int64_t n, rows, cols, weights):
    """Sum over triangles of the product of their three edge weights.

    ``rows``/``cols`` list each undirected edge once; returns ``(sum, count)``.
    """
    r = np.asarray(rows, dtype=np.int64)
    c = np.asarray(cols, dtype=np.int64)
    lo = np.minimum(r, c)
    hi = np.maximum(r, c)
    order = np.lexsort((hi, lo))
    cdef cnp.int64_t[::1] src = np.ascontiguousarray(lo[order])
    cdef cnp.int64_t[::1] dst = np.ascontiguousarray(hi[order])
    cdef double[::1] w = np.ascontiguousarray(np.asarray(weights, dtype=float)[order])
    cdef cnp.int64_t[::1] ptr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t m = src.shape[0], i, u, v, x, y, xe, ye
    cdef double total = 0.0, wuv
    cdef cnp.int64_t count = 0
    for i in range(m):
        ptr[src[i] + 1] += 1
    for i in range(n):
        ptr[i + 1] += ptr[i]
    with nogil:
        # forward adjacency: neighbours larger than the node, sorted
        for u in range(n):
            for i in range(ptr[u], ptr[u + 1]):
                v = dst[i]
                wuv = w[i]
                x = i + 1
                xe = ptr[u + 1]
                y = ptr[v]
                ye = ptr[v + 1]
                while x < xe and y < ye:
                    if dst[x] < dst[y]:
                        x += 1
                    elif dst[x] > dst[y]:
                        y += 1
                    else:
                        total += wuv * w[x] * w[y]
                        count += 1
                        x += 1
                        y += 1
    return total, count

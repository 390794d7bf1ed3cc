"""Walk statistics on sampled graphs.

``Y^(alpha,q) = 1^T M^q 1`` sums the (weighted) adjacency operator over all
walks of length ``q``; ``X^(alpha,3) = Tr M^3`` sums over closed walks of
length 3, i.e. six times the triangle weight sum.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np
import scipy.sparse as sp
from scipy import signal

from . import kernels
from .ensemble import EnsembleParams, RegimeSpec, SparseGraph
from .errors import InvalidParams, RegimeMismatch, UnsupportedOrder

EXACT_LIMIT = 2.0**53


def _matvec(graph: SparseGraph, w: np.ndarray, v: np.ndarray) -> np.ndarray:
    N = graph.N
    return (np.bincount(graph.rows, weights=w * v[graph.cols], minlength=N)
            + np.bincount(graph.cols, weights=w * v[graph.rows], minlength=N))


def count_walks_Y(graph: SparseGraph, q: int, alpha: int) -> float | int:
    """``1^T M^q 1`` by ``q`` sparse operator-vector products.

    For ``alpha = 0`` the count is integral; at or beyond ``2**53`` it is
    recomputed in exact integer arithmetic and returned as a Python ``int``.
    """
    if q < 1:
        raise UnsupportedOrder("q must be >= 1")
    if alpha not in (0, 1):
        raise InvalidParams("alpha must be 0 or 1")
    if alpha == 1 and graph.weights is None:
        raise InvalidParams("alpha=1 needs a weighted graph")
    w = graph.edge_weights() if alpha else np.ones(graph.n_edges)
    v = np.ones(graph.N)
    for _ in range(q):
        v = _matvec(graph, w, v)
    total = math.fsum(v)
    if alpha == 0:
        if total < EXACT_LIMIT:
            r = round(total)
            if abs(total - r) > 1e-6:
                raise ArithmeticError(f"integer walk count lost precision: {total}")
            return float(r)
        return _exact_walks(graph, q)
    return total


def _exact_walks(graph: SparseGraph, q: int) -> int:
    adj: list[list[int]] = [[] for _ in range(graph.N)]
    for a, b in zip(graph.rows.tolist(), graph.cols.tolist()):
        adj[a].append(b)
        adj[b].append(a)
    v = [1] * graph.N
    for _ in range(q):
        v = [sum(v[j] for j in nb) for nb in adj]
    return sum(v)


def count_closed_X3(graph: SparseGraph, alpha: int) -> float:
    """``Tr M^3``: six times the sum over triangles of the weight product."""
    if alpha not in (0, 1):
        raise InvalidParams("alpha must be 0 or 1")
    if alpha == 1 and graph.weights is None:
        raise InvalidParams("alpha=1 needs a weighted graph")
    w = graph.edge_weights() if alpha else np.ones(graph.n_edges)
    total, count = kernels.triangle_weight_sum(graph.N, graph.rows, graph.cols, w)
    return 6.0 * (float(count) if alpha == 0 else total)


def triangle_count(graph: SparseGraph) -> int:
    return int(kernels.triangle_weight_sum(graph.N, graph.rows, graph.cols, np.ones(graph.n_edges))[1])


def dense_matrix(graph: SparseGraph, alpha: int) -> np.ndarray:
    w = graph.edge_weights() if alpha else np.ones(graph.n_edges)
    M = sp.coo_matrix((w, (graph.rows, graph.cols)), shape=(graph.N, graph.N)).toarray()
    return M + M.T


@dataclass(frozen=True)
class WalkStat:
    family: str  # "Y" or "X"
    q: int
    alpha: int
    raw: float
    normalized: float | None = None
    regime: RegimeSpec | None = None

    def __post_init__(self):
        if self.family not in ("Y", "X"):
            raise InvalidParams("family must be 'Y' or 'X'")
        if self.family == "X" and self.q != 3:
            raise UnsupportedOrder("closed-walk statistic is defined for q = 3 only")
        if self.raw < 0:
            raise InvalidParams("raw statistic is non-negative")


def family_of(regime_family: str) -> str:
    return "Y" if regime_family.startswith("Y") else "X"


def normalize_statistic(stat: WalkStat, params, regime: RegimeSpec | None = None) -> float:
    """Multiply ``stat.raw`` by the normalization of its regime.

    ``Y1``: ``(N/cR)**(q-1)``; ``Xi``: ``N**2/(c**2 R)``; ``Xiv``: ``1/6``
    (the triangle count); identity otherwise.  ``params`` supplies ``N``,
    ``c`` and ``R``.
    """
    regime = regime or stat.regime
    if regime is None:
        raise RegimeMismatch("no regime attached to the statistic")
    fam = regime.family
    if family_of(fam) != stat.family:
        raise RegimeMismatch(f"regime {fam} does not apply to {stat.family} statistics")
    N, c, R = params.N, params.c, params.R
    if fam == "Y1":
        return stat.raw * (N / (c * R)) ** (stat.q - 1)
    if fam == "Xi":
        return stat.raw * N * N / (c * c * R)
    if fam == "Xiv":
        return stat.raw / 6.0
    return stat.raw


REPLICA_FIELDS = ["replica", "family", "q", "alpha", "raw", "normalized"]


def write_replicas(rows: Iterable[dict], fh: TextIO, header: bool = True) -> None:
    """Append per-replica records ``(replica, family, q, alpha, raw, normalized)``."""
    w = csv.DictWriter(fh, fieldnames=REPLICA_FIELDS, extrasaction="ignore")
    if header:
        w.writeheader()
    for r in rows:
        w.writerow(r)


def read_replicas(fh: TextIO) -> list[dict]:
    out = []
    for r in csv.DictReader(fh):
        out.append({
            "replica": int(r["replica"]), "family": r["family"], "q": int(r["q"]),
            "alpha": int(r["alpha"]), "raw": float(r["raw"]), "normalized": float(r["normalized"]),
        })
    return out


# --- exact finite-lattice expectations ------------------------------------


def _moment_profile(params: EnsembleParams, power: int) -> np.ndarray:
    """``E[a_d**power]`` for distances ``d = 0..D`` (zero at ``d = 0``)."""
    D = params.max_distance()
    d = np.arange(D + 1)
    out = params.distance_probability(d)
    if params.alpha:
        out = out * params.distance_weight(d) ** power
    out[0] = 0.0
    return out


def _apply(prof: np.ndarray, v: np.ndarray) -> np.ndarray:
    full = np.concatenate([prof[:0:-1], prof])
    if prof.size * v.size < 5e7:
        return np.convolve(v, full, mode="same") if v.size >= full.size else _apply_small(prof, v)
    return signal.fftconvolve(v, full, mode="same") if v.size >= full.size else _apply_small(prof, v)


def _apply_small(prof: np.ndarray, v: np.ndarray) -> np.ndarray:
    N = v.size
    out = np.zeros(N)
    for dd in range(1, min(prof.size, N)):
        out[dd:] += prof[dd] * v[:-dd]
        out[:-dd] += prof[dd] * v[dd:]
    return out


def _pair_sum(prof: np.ndarray, N: int) -> float:
    d = np.arange(prof.size)
    return float(np.sum(2.0 * np.clip(N - d, 0, None) * prof))


def exact_mean_Y(params: EnsembleParams, q: int) -> float:
    """``E[Y^(alpha,q)]`` on the finite lattice, for ``q`` in 1..3.

    Sums over walk shapes with repeated edges handled through
    ``E[a**m] = p * w**m``; no asymptotic approximation.
    """
    N = params.N
    A1 = _moment_profile(params, 1)
    one = np.ones(N)
    r1 = _apply(A1, one)
    if q == 1:
        return float(np.sum(r1))
    A2 = _moment_profile(params, 2)
    if q == 2:
        return float(r1 @ r1) - _pair_sum(A1**2, N) + _pair_sum(A2, N)
    if q == 3:
        A3 = _moment_profile(params, 3)
        r11 = _apply(A1**2, one)
        r2 = _apply(A2, one)
        generic = float(r1 @ _apply(A1, r1)) - 2.0 * float(r11 @ r1) + _pair_sum(A1**3, N)
        repeated = 2.0 * (float(r2 @ r1) - _pair_sum(A2 * A1, N)) + _pair_sum(A3, N)
        return generic + repeated
    raise UnsupportedOrder("exact lattice mean implemented for q <= 3")


def exact_mean_X3(params: EnsembleParams) -> float:
    """``E[Tr M^3]`` on the finite lattice (all three edges distinct)."""
    N = params.N
    A1 = _moment_profile(params, 1)
    D = A1.size - 1
    if D < 2:
        return 0.0
    off = np.arange(-D, D + 1)
    a, b = np.meshgrid(off, off, indexing="ij")
    mask = (a != 0) & (b != 0) & (a != b) & (np.abs(b - a) <= D)
    a, b = a[mask], b[mask]
    span = np.maximum(0, np.maximum(a, b)) - np.minimum(0, np.minimum(a, b))
    mult = np.clip(N - span, 0, None)
    return float(np.sum(A1[np.abs(a)] * A1[np.abs(b - a)] * A1[np.abs(b)] * mult))

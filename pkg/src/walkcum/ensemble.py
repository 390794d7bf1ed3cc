"""Long-range percolation graphs on ``N = 2n + 1`` vertices ``-n..n``.

Each pair ``{i, j}`` is an edge independently with probability
``(c/N) * exp(-psi((i-j)/R)**2)``.  In the weighted variant (``alpha = 1``)
an edge carries weight ``1 + psi((i-j)/R)**2``.
"""
from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

from .errors import (
    InfeasibleRegime,
    InvalidParams,
    InvalidVertex,
    RegimeMismatch,
    SelfLoop,
)
from .weights import GAUSSIAN, WeightFunction, _as_kernel

TAIL_EPS = 1e-12
DENSE_P = 0.1


@dataclass(frozen=True)
class EnsembleParams:
    """Parameters of one graph ensemble.

    Parameters
    ----------
    n : int
        Half-width; the graph has ``N = 2n + 1`` vertices.
    c : float
        Concentration; ``c / N`` is the edge probability at distance 0.
    R : float
        Interaction radius.
    kernel : WeightFunction
    alpha : {0, 1}
        1 attaches the weights ``1 + psi**2`` to edges.
    seed : int
        64-bit master seed.
    """

    n: int
    c: float
    R: float
    kernel: WeightFunction = GAUSSIAN
    alpha: int = 0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kernel", _as_kernel(self.kernel))
        if self.n < 0:
            raise InvalidParams("n must be non-negative")
        if self.alpha not in (0, 1):
            raise InvalidParams("alpha must be 0 or 1")
        if not self.c >= 0:
            raise InvalidParams("c must be non-negative")
        if self.c > self.N:
            raise InvalidParams(f"c={self.c} exceeds N={self.N}; edge probability above 1")
        if not 0 < self.R <= self.N:
            raise InvalidParams(f"R={self.R} must lie in (0, N]")
        if self.R > self.N / 2 and not self.kernel.is_flat:
            warnings.warn(f"R={self.R} above N/2: far from the R = o(N) regime", stacklevel=3)
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParams("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_N(cls, N: int, c: float, R: float, kernel=None, alpha: int = 0, seed: int = 0) -> "EnsembleParams":
        if N < 1 or N % 2 == 0:
            raise InvalidParams(f"N={N} must be odd (vertices -n..n)")
        return cls((N - 1) // 2, c, R, _as_kernel(kernel), alpha, seed)

    @property
    def N(self) -> int:
        return 2 * self.n + 1

    @property
    def p0(self) -> float:
        return self.c / self.N

    def distance_probability(self, d) -> np.ndarray:
        """Edge probability at integer distance ``d >= 1``."""
        d = np.asarray(d, dtype=float)
        return self.p0 * np.exp(-self.kernel.psi2(d / self.R))

    def distance_weight(self, d) -> np.ndarray:
        d = np.asarray(d, dtype=float)
        return 1.0 + self.kernel.psi2(d / self.R)

    def max_distance(self) -> int:
        """Largest distance whose total expected edge count exceeds ``TAIL_EPS``."""
        N = self.N
        if N < 2 or self.c == 0:
            return 0
        if self.kernel.is_flat:
            return N - 1

        def negligible(d):
            return float(self.distance_probability(d)) * (N - d) < TAIL_EPS

        if not negligible(N - 1):
            return N - 1
        lo, hi = 1, N - 1
        if negligible(lo):
            return 0
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if negligible(mid):
                hi = mid
            else:
                lo = mid
        return lo

    def expected_edges(self) -> float:
        d = np.arange(1, self.max_distance() + 1)
        return float(np.sum((self.N - d) * self.distance_probability(d)))


def edge_probability(i: int, j: int, params: EnsembleParams) -> float:
    """``(c/N) exp(-psi((i-j)/R)**2)`` for vertices ``i != j`` in ``[-n, n]``."""
    n = params.n
    for v in (i, j):
        if not (-n <= v <= n) or int(v) != v:
            raise InvalidVertex(f"vertex {v} outside [-{n}, {n}]")
    if i == j:
        raise SelfLoop(f"no self-loop at {i}")
    return float(params.distance_probability(abs(i - j)))


@dataclass(frozen=True)
class SparseGraph:
    """Undirected simple graph stored as canonical edge arrays.

    ``rows < cols`` are vertex indices ``0..N-1`` (label ``i`` maps to ``i + n``),
    sorted lexicographically.  ``weights`` is present iff the ensemble is weighted.
    """

    N: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        r = np.asarray(self.rows, dtype=np.int64)
        c = np.asarray(self.cols, dtype=np.int64)
        if r.shape != c.shape:
            raise InvalidParams("rows and cols differ in length")
        if np.any(r == c):
            raise SelfLoop("graph contains a self-loop")
        if r.size and (min(r.min(), c.min()) < 0 or max(r.max(), c.max()) >= self.N):
            raise InvalidVertex("vertex index out of range")
        lo, hi = np.minimum(r, c), np.maximum(r, c)
        order = np.lexsort((hi, lo))
        lo, hi = lo[order], hi[order]
        if lo.size > 1 and np.any((np.diff(lo) == 0) & (np.diff(hi) == 0)):
            raise InvalidParams("duplicate edge")
        w = None
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)[order]
            if w.shape != lo.shape:
                raise InvalidParams("weights length differs from edge count")
        for a in (lo, hi):
            a.setflags(write=False)
        if w is not None:
            w.setflags(write=False)
        object.__setattr__(self, "rows", lo)
        object.__setattr__(self, "cols", hi)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return (self.N - 1) // 2

    @property
    def n_edges(self) -> int:
        return int(self.rows.size)

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Edges as vertex-label pairs ``(i, j)``, ``-n <= i < j <= n``."""
        n = self.n
        return [(int(a) - n, int(b) - n) for a, b in zip(self.rows, self.cols)]

    def edge_weights(self) -> np.ndarray:
        return self.weights if self.weights is not None else np.ones(self.n_edges)

    def write(self, fh: TextIO) -> None:
        """Edge-list text: header ``# N=...`` then ``i j [weight]`` per line."""
        fh.write(f"# N={self.N}\n")
        n = self.n
        if self.weights is None:
            for a, b in zip(self.rows, self.cols):
                fh.write(f"{a - n} {b - n}\n")
        else:
            for a, b, w in zip(self.rows, self.cols, self.weights):
                fh.write(f"{a - n} {b - n} {float(w)!r}\n")

    def to_text(self) -> str:
        buf = io.StringIO()
        self.write(buf)
        return buf.getvalue()

    @classmethod
    def read(cls, fh: Iterable[str]) -> "SparseGraph":
        N = None
        rows, cols, ws = [], [], []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if tok.startswith("N="):
                        N = int(tok[2:])
                continue
            parts = line.split()
            rows.append(int(parts[0]))
            cols.append(int(parts[1]))
            if len(parts) > 2:
                ws.append(float(parts[2]))
        if N is None:
            raise InvalidParams("edge list lacks '# N=' header")
        if ws and len(ws) != len(rows):
            raise InvalidParams("weights given for only some edges")
        n = (N - 1) // 2
        return cls(N, np.array(rows, dtype=np.int64) + n, np.array(cols, dtype=np.int64) + n,
                   np.array(ws) if ws else None)

    @classmethod
    def from_text(cls, text: str) -> "SparseGraph":
        return cls.read(io.StringIO(text))


def stream_rng(seed: int, stream_id: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, stream_id)``."""
    if not 0 <= stream_id < 2**64:
        raise InvalidParams("stream_id must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.Philox(key=int(seed) | (int(stream_id) << 64)))


def sample_graph(params: EnsembleParams, stream_id: int = 0) -> SparseGraph:
    """Draw one graph; a deterministic function of ``(params.seed, stream_id)``.

    Only distances up to ``params.max_distance()`` are visited.  Distances
    with probability above ``DENSE_P`` get one uniform per pair; sparser
    distances draw a binomial count and then distinct uniform positions.
    """
    rng = stream_rng(params.seed, stream_id)
    N = params.N
    D = params.max_distance()
    if D == 0:
        return SparseGraph(N, np.zeros(0, np.int64), np.zeros(0, np.int64),
                           np.zeros(0) if params.alpha else None)
    d = np.arange(1, D + 1)
    p = params.distance_probability(d)
    pairs = N - d
    dense = p > DENSE_P
    rows_parts, dist_parts = [], []
    for dd, pp, m in zip(d[dense], p[dense], pairs[dense]):
        pos = np.flatnonzero(rng.random(m) < pp)
        rows_parts.append(pos)
        dist_parts.append(np.full(pos.size, dd))
    sd, sp_, sm = d[~dense], p[~dense], pairs[~dense]
    if sd.size:
        counts = rng.binomial(sm, sp_)
        dist = np.repeat(sd, counts)
        span = np.repeat(sm, counts)
        pos = (rng.random(dist.size) * span).astype(np.int64)
        # redraw collisions until positions are distinct within each distance
        while True:
            key = dist * N + pos
            order = np.argsort(key, kind="stable")
            dup = np.zeros(key.size, dtype=bool)
            dup[order[1:]] = key[order[1:]] == key[order[:-1]]
            if not dup.any():
                break
            pos[dup] = (rng.random(int(dup.sum())) * span[dup]).astype(np.int64)
        rows_parts.append(pos)
        dist_parts.append(dist)
    rows = np.concatenate(rows_parts) if rows_parts else np.zeros(0, np.int64)
    dist = np.concatenate(dist_parts) if dist_parts else np.zeros(0, np.int64)
    weights = params.distance_weight(dist) if params.alpha else None
    return SparseGraph(N, rows, rows + dist, weights)


# --- regimes ---------------------------------------------------------------

FAMILIES = ("Y1", "Y2", "Y3", "Xi", "Xii", "Xiii", "Xiv")


@dataclass(frozen=True)
class RegimeSpec:
    """Asymptotic regime and the finite-N value of its defining ratio.

    ``s`` is ``cR/N`` for the Y families and ``sqrt(c**2 R / N**2)`` for
    ``Xi``-``Xiii``; ``Lambda`` is ``c**3 R**2 / N**2`` for ``Xiv``.  ``R``
    fixes the radius explicitly; otherwise ``R = N**(1 - delta)`` with
    ``delta = 0.5`` by default.  ``side_tol`` bounds ``c**2 R / N**2`` for
    ``Xiv``.
    """

    family: str
    s: float | None = None
    Lambda: float | None = None
    delta: float | None = None
    R: float | None = None
    side_tol: float = 0.05

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParams(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "Xiv":
            if self.Lambda is None or self.s is not None:
                raise InvalidParams("Xiv takes Lambda and no s")
            if not self.Lambda > 0:
                raise InvalidParams("Lambda must be positive")
        else:
            if self.s is None or self.Lambda is not None:
                raise InvalidParams(f"{self.family} takes s and no Lambda")
            if not self.s > 0:
                raise InvalidParams("s must be positive")
        if self.delta is not None and not 0 < self.delta < 1:
            raise InvalidParams("delta must lie in (0, 1)")
        if self.delta is not None and self.R is not None:
            raise InvalidParams("give either delta or R, not both")


@dataclass(frozen=True)
class ResolvedRegime:
    N: int
    c: float
    R: float
    cR_over_N: float
    c2R_over_N2: float
    c3R2_over_N2: float

    def params(self, kernel=None, alpha: int = 0, seed: int = 0) -> EnsembleParams:
        return EnsembleParams.from_N(self.N, self.c, self.R, kernel, alpha, seed)


def _ratios(N, c, R) -> ResolvedRegime:
    return ResolvedRegime(N, c, R, c * R / N, c * c * R / N**2, c**3 * R**2 / N**2)


def resolve_regime(spec: RegimeSpec, N: int) -> ResolvedRegime:
    """Concrete ``(c, R)`` realizing ``spec`` at size ``N``.

    ``R`` is rounded to an integer ``>= 2`` first and ``c`` is then solved
    from the defining ratio, so the ratio holds exactly.

    Raises
    ------
    InfeasibleRegime
        If the solution needs ``c > N`` or ``R >= N``.
    RegimeMismatch
        If ``Xiv`` violates its side condition ``c**2 R / N**2 <= side_tol``.
    """
    if spec.R is not None:
        R = float(spec.R)
    else:
        delta = 0.5 if spec.delta is None else spec.delta
        R = float(max(2, round(N ** (1.0 - delta))))
    if R >= N:
        raise InfeasibleRegime(f"R={R} >= N={N}")
    fam = spec.family
    if fam in ("Y1", "Y2", "Y3"):
        c = spec.s * N / R
    elif fam in ("Xi", "Xii", "Xiii"):
        c = spec.s * N / math.sqrt(R)
    else:
        c = (spec.Lambda * N * N / (R * R)) ** (1.0 / 3.0)
    if c > N:
        raise InfeasibleRegime(f"c={c:.4g} exceeds N={N}")
    out = _ratios(N, c, R)
    if fam == "Xiv" and out.c2R_over_N2 > spec.side_tol:
        raise RegimeMismatch(
            f"c^2 R/N^2 = {out.c2R_over_N2:.4g} above {spec.side_tol}; not in the Poisson regime"
        )
    return out


def ratios(N: int, c: float, R: float) -> ResolvedRegime:
    """Achieved scaling ratios of a concrete ``(N, c, R)``."""
    return _ratios(N, c, R)

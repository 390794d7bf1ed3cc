"""Moment/cumulant conversion and cumulant estimation from replicas."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats

from .combinatorics import integer_partitions, rgs_blocks, set_partitions
from .errors import InvalidParams, OrderTooLarge, TooFewReplicas

MAX_ORDER = 20
METHODS = ("k-statistic", "moment-partition", "bootstrap")


def _scalar(x):
    return x if isinstance(x, (int, Fraction)) else float(x)


def _partition_weight(sigma: tuple[int, ...]) -> int:
    """Number of set partitions of ``sum i*s_i`` points with block profile ``sigma``."""
    n = sum(i * s for i, s in enumerate(sigma, start=1))
    w = math.factorial(n)
    for i, s in enumerate(sigma, start=1):
        w //= math.factorial(i) ** s * math.factorial(s)
    return w


def _convert(seq: Sequence, sign: bool) -> list:
    K = len(seq)
    if K > MAX_ORDER:
        raise OrderTooLarge(f"order {K} exceeds {MAX_ORDER}")
    x = [_scalar(v) for v in seq]
    out = []
    for k in range(1, K + 1):
        total = 0
        for sigma in integer_partitions(k):
            nb = sum(sigma)
            coef = _partition_weight(sigma)
            if sign:
                coef *= (-1) ** (nb - 1) * math.factorial(nb - 1)
            term = coef
            for i, s in enumerate(sigma, start=1):
                if s:
                    term = term * x[i - 1] ** s
            total = total + term
        out.append(total)
    return out


def moments_to_cumulants(moments: Sequence) -> list:
    """Cumulants ``c_1..c_K`` from raw moments ``m_1..m_K``.

    ``c_k = sum over set partitions of {1..k} into s blocks of
    (-1)^(s-1) (s-1)! prod m_|block|``, grouped by block-size profile.
    Exact for int/Fraction input.

    Raises
    ------
    OrderTooLarge
        For more than 20 moments.
    """
    return _convert(moments, sign=True)


def cumulants_to_moments(cumulants: Sequence) -> list:
    """Inverse map: ``m_k = sum over set partitions of prod c_|block|``."""
    return _convert(cumulants, sign=False)


def moments_to_cumulants_setpartitions(moments: Sequence) -> list:
    """Reference implementation summing over every set partition (small ``K``)."""
    K = len(moments)
    if K > 12:
        raise OrderTooLarge("set-partition enumeration limited to order 12")
    x = [_scalar(v) for v in moments]
    out = []
    for k in range(1, K + 1):
        total = 0
        for rgs in set_partitions(k):
            blocks = rgs_blocks(rgs)
            s = len(blocks)
            term = (-1) ** (s - 1) * math.factorial(s - 1)
            for b in blocks:
                term = term * x[len(b) - 1]
            total = total + term
        out.append(total)
    return out


@dataclass
class SampleSet:
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(self.values)):
            raise InvalidParams("samples must be finite")

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class CumulantEstimate:
    order: int
    value: float
    stderr: float
    replicas: int
    method: str = "k-statistic"
    biased: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidParams(f"method must be one of {METHODS}")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CumulantEstimate":
        return cls(**json.loads(text))


def _kstat_from_sums(order: int, n, S1, S2, S3, S4):
    """Unbiased k-statistic from power sums (arrays broadcast)."""
    if order == 1:
        return S1 / n
    if order == 2:
        return (n * S2 - S1**2) / (n * (n - 1))
    if order == 3:
        return (2 * S1**3 - 3 * n * S1 * S2 + n**2 * S3) / (n * (n - 1) * (n - 2))
    num = (-6 * S1**4 + 12 * n * S1**2 * S2 - 3 * n * (n - 1) * S2**2
           - 4 * n * (n + 1) * S1 * S3 + n**2 * (n + 1) * S4)
    return num / (n * (n - 1) * (n - 2) * (n - 3))


def _as_array(samples) -> np.ndarray:
    return samples.values if isinstance(samples, SampleSet) else SampleSet(samples).values


def _kstat_value(x: np.ndarray, order: int) -> float:
    mu = x.mean()
    if order == 1:
        return float(mu)
    y = x - mu  # shift invariance; keeps power sums well conditioned
    S = [float(np.sum(y**p)) for p in range(1, 5)]
    return float(_kstat_from_sums(order, x.size, *S))


def _jackknife(x: np.ndarray, order: int) -> float:
    n = x.size
    y = x - x.mean()
    pw = [y**p for p in range(1, 5)]
    S = [p.sum() for p in pw]
    loo = _kstat_from_sums(order, n - 1, *(S[j] - pw[j] for j in range(4)))
    return float(math.sqrt(max(0.0, (n - 1) / n * np.sum((loo - loo.mean()) ** 2))))


def k_statistics(samples, order: int) -> CumulantEstimate:
    """Unbiased k-statistic of order 1..4 with a jackknife standard error.

    Raises
    ------
    TooFewReplicas
        With fewer than ``order + 1`` replicas (at least 2).
    """
    if order not in (1, 2, 3, 4):
        raise InvalidParams("k-statistics are available for orders 1..4")
    x = _as_array(samples)
    need = max(2, order + 1)
    if x.size < need:
        raise TooFewReplicas(f"order {order} needs at least {need} replicas, got {x.size}")
    return CumulantEstimate(order, _kstat_value(x, order), _jackknife(x, order), int(x.size))


def plugin_cumulant(samples, order: int) -> CumulantEstimate:
    """Biased estimate from central sample moments; any order up to 20."""
    x = _as_array(samples)
    if x.size < 2:
        raise TooFewReplicas("need at least 2 replicas")
    mu = x.mean()
    y = x - mu
    central = [0.0] + [float(np.mean(y**p)) for p in range(2, order + 1)]
    val = moments_to_cumulants(central)[order - 1] if order > 1 else mu
    return CumulantEstimate(order, float(val), float("nan"), int(x.size), "moment-partition", True)


def estimate_cumulant(samples, order: int) -> CumulantEstimate:
    """k-statistic up to order 4, plug-in estimate (flagged biased) beyond."""
    return k_statistics(samples, order) if order <= 4 else plugin_cumulant(samples, order)


def bootstrap_ci(samples, order: int, B: int = 1000, level: float = 0.95,
                 seed: int = 0) -> tuple[float, float]:
    """Percentile bootstrap interval for the order-``order`` k-statistic.

    Deterministic for a given ``seed``.  A constant sample gives a
    zero-width interval.
    """
    if B < 100:
        raise InvalidParams("B must be at least 100")
    if not 0 < level < 1:
        raise InvalidParams("level must be in (0, 1)")
    if not 1 <= order <= 4:
        raise InvalidParams("bootstrap intervals are available for orders 1..4")
    x = _as_array(samples)
    if x.size < max(2, order + 1):
        raise TooFewReplicas(f"order {order} needs at least {max(2, order + 1)} replicas")
    if np.all(x == x[0]):
        v = float(x[0]) if order == 1 else 0.0
        return v, v

    def stat(sample, axis=-1):
        n = sample.shape[axis]
        y = sample - sample.mean(axis=axis, keepdims=True)
        if order == 1:
            return sample.mean(axis=axis)
        S = [np.sum(y**p, axis=axis) for p in range(1, 5)]
        return _kstat_from_sums(order, n, *S)

    res = stats.bootstrap((x,), stat, n_resamples=B, confidence_level=level, method="percentile",
                          vectorized=True, random_state=np.random.default_rng(seed))
    return float(res.confidence_interval.low), float(res.confidence_interval.high)

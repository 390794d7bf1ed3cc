"""Limiting cumulants, Poisson limits and moment bounds.

All cumulant limits are normalized by ``cR``.  The finite ratio ``s`` is
``cR/N`` for walk counts and ``sqrt(c**2 R / N**2)`` for closed walks.
Functions accepting ``convention`` default to ``"calibrated"``, the form
whose ``k = 1`` term equals the normalized mean; ``"printed"`` gives the
alternative power of ``s`` (one extra factor of ``s``) kept for comparison.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import product
from math import comb, factorial
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import optimize

from .combinatorics import integer_partitions, partition_count, profile_size
from .diagrams import T_table, count_max_tree_diagrams
from .errors import InvalidParams, NoJumpLaw, RootNotBracketed
from .weights import _as_kernel, compute_V, moments_for, theta2_convolution, triple_product_H

CONVENTIONS = ("calibrated", "printed")


def _check_convention(convention: str) -> None:
    if convention not in CONVENTIONS:
        raise InvalidParams(f"convention must be one of {CONVENTIONS}")


def _exact(x):
    """Keep ints and Fractions exact; everything else becomes float."""
    return x if isinstance(x, (int, Fraction)) else float(x)


def _V(V, m: int):
    if isinstance(V, Mapping):
        return _exact(V[m])
    if hasattr(V, "__getitem__") and not isinstance(V, (int, float, Fraction)):
        return _exact(V[m])
    return _exact(V)  # a scalar stands for every V_m


@dataclass(frozen=True)
class LimitValue:
    family: str
    regime: str
    k: int
    q: int
    value: float
    s: float | None = None
    Lambda: float | None = None
    kernel: str = "gaussian"
    alpha: int = 0
    provenance: str = "closed-form"

    def as_row(self) -> dict:
        return asdict(self)


# --- walk counts, unweighted -------------------------------------------------


def phi_1(k: int, q: int, V0=1):
    """Maximal-diagram limit ``t_k^(q) V0^(k(q-1)+1)``."""
    return count_max_tree_diagrams(k, q) * _exact(V0) ** (k * (q - 1) + 1)


def phi_3(k: int, V0=1):
    """Minimal-diagram limit ``2^(k-1) V0``."""
    if k < 1:
        raise InvalidParams("k must be >= 1")
    return 2 ** (k - 1) * _exact(V0)


def phi_2_coefficients(k: int, q: int, V0=1) -> dict[int, object]:
    """Coefficient of each edge count ``E`` in the intermediate-regime limit.

    Sums over element sizes ``1 <= r_i <= q`` with ``E = sum r - k + 1`` of
    ``2^(k-1) V0^E E^(k-2) prod r_i T(q, r_i)``.
    """
    if k < 1 or q < 1:
        raise InvalidParams("k, q must be >= 1")
    V0 = _exact(V0)
    T = [0] + [T_table(q, r) for r in range(1, q + 1)]
    out: dict[int, object] = {}
    for rs in product(range(1, q + 1), repeat=k):
        E = sum(rs) - k + 1
        w = Fraction(2 ** (k - 1) * math.prod(r * T[r] for r in rs)) * Fraction(E) ** (k - 2)
        out[E] = out.get(E, 0) + w
    return {E: (int(c) if c.denominator == 1 else c) * V0**E for E, c in sorted(out.items())}


def phi_2(k: int, q: int, s, V0=1, convention: str = "calibrated"):
    """Intermediate-regime limit ``sum_E s^(E-1) phi_E`` (``s^E`` when printed)."""
    _check_convention(convention)
    if not s > 0:
        raise InvalidParams("s must be positive")
    shift = 1 if convention == "calibrated" else 0
    s = _exact(s)
    return sum(c * s ** (E - shift) for E, c in phi_2_coefficients(k, q, V0).items())


# --- walk counts, weighted ---------------------------------------------------


def xi_1(k: int, q: int, V):
    """Maximal-diagram limit of the weighted walk count.

    Sum over Prüfer profiles ``sigma`` of weight ``k - 1`` with ``u = |sigma|``
    repeated symbols; a symbol used ``i`` times marks an edge of
    multiplicity ``i + 1``.  ``V`` maps ``m`` to ``V_m`` (or is a scalar).
    """
    if k < 1 or q < 1:
        raise InvalidParams("k, q must be >= 1")
    K = k * (q - 1) + 1
    V1 = _V(V, 1)
    total = 0
    for sigma in integer_partitions(k - 1):
        u = profile_size(sigma)
        if u > K:
            continue
        term = Fraction(factorial(u) * comb(K, u))
        for i, si in enumerate(sigma, start=1):
            term /= factorial(si) * factorial(i) ** si
        w = V1 ** (K - u)
        for i, si in enumerate(sigma, start=1):
            w = w * _V(V, i + 1) ** si
        total = total + term * w
    pre = Fraction(2 ** (k - 1) * q**k * factorial(k - 1), K)
    res = pre * total
    if isinstance(res, Fraction) and res.denominator == 1:
        return int(res)
    return res


def xi_3(k: int, q: int, V):
    """Minimal-diagram limit ``2^(k-1) V_{kq}``."""
    return 2 ** (k - 1) * _V(V, k * q)


def xi_2_twostar(s, V, convention: str = "calibrated"):
    """Second cumulant of the weighted two-star count at ``cR/N = s``.

    Calibrated: ``8 s^2 V1^2 V2 + 8 s V1 V3 + 2 V4``; printed carries one more
    power of ``s`` in every term.
    """
    _check_convention(convention)
    s = _exact(s)
    V1, V2, V3, V4 = (_V(V, m) for m in (1, 2, 3, 4))
    val = 8 * s**2 * V1**2 * V2 + 8 * s * V1 * V3 + 2 * V4
    return val * s if convention == "printed" else val


# --- closed walks ------------------------------------------------------------


def theta_i_unweighted(k: int) -> int:
    return count_max_tree_diagrams(k, 3)


def theta_ii_coefficients(k: int) -> dict[int, int]:
    """Number of tree-type triangle diagrams with ``u`` distinct triangles.

    ``t_u^(3) * sum N(sigma) Q_sigma`` over block profiles of ``k`` elements
    into ``u`` groups; ``Q_sigma = 6^(k-u)`` counts the relabellings of the
    repeated triangles.
    """
    if k < 1:
        raise InvalidParams("k must be >= 1")
    out: dict[int, int] = {}
    for sigma in integer_partitions(k):
        u = profile_size(sigma)
        out[u] = out.get(u, 0) + partition_count(sigma) * 6 ** (k - u)
    return {u: n * count_max_tree_diagrams(u, 3) for u, n in sorted(out.items())}


def theta_ii_literal_coefficients(k: int) -> dict[int, Fraction]:
    """Coefficient of ``s^(2u+1)`` in the printed closed form."""
    out: dict[int, Fraction] = {}
    for sigma in integer_partitions(k):
        u = profile_size(sigma)
        c = Fraction(factorial(k), 2) * 6 ** (u - 1) * Fraction(2 * u + 1) ** (u - 2)
        for i, si in enumerate(sigma, start=1):
            c /= factorial(i) ** si * factorial(si)
        out[u] = out.get(u, 0) + c
    return dict(sorted(out.items()))


def theta_ii_unweighted(k: int, s, convention: str = "calibrated"):
    """Intermediate-regime closed-walk limit with unit weights.

    Calibrated: ``sum_u s^(2u) theta_ii_coefficients(k)[u]``.  Printed: the
    literal closed form ``sum_u s^(2u+1) theta_ii_literal_coefficients(k)[u]``,
    which differs by ``s / 6^(k-u+1)`` per term.
    """
    _check_convention(convention)
    s = _exact(s)
    if convention == "calibrated":
        return sum(n * s ** (2 * u) for u, n in theta_ii_coefficients(k).items())
    val = sum(c * s ** (2 * u + 1) for u, c in theta_ii_literal_coefficients(k).items())
    return val


def theta_iii(k: int, alpha: int, kernel=None) -> float:
    """``6^(k-1) H_k``, the minimal-diagram limit."""
    return 6 ** (k - 1) * triple_product_H(k, alpha, kernel)


def theta_2_i(alpha: int, kernel=None) -> float:
    return theta2_convolution(alpha, kernel)


def theta_2_ii(alpha: int, s: float, kernel=None, convention: str = "calibrated") -> float:
    """``s^4 Theta_2^(i) + 6 s^2 H_2`` (calibrated) or ``s^5 ... + 6 s^3 H_2`` (printed)."""
    _check_convention(convention)
    six_H2 = 6.0 * triple_product_H(2, alpha, kernel)  # = (3/pi) * int h~_2^3
    val = s**4 * theta_2_i(alpha, kernel) + s**2 * six_H2
    return val * s if convention == "printed" else val


# --- Poisson limits ----------------------------------------------------------


@dataclass(frozen=True)
class LimitLaw:
    """Poisson or compound Poisson law of the triangle count ``X / 6``.

    ``jump_moments[j]`` is ``E J^j`` for ``j = 0..kmax`` (all ones for Poisson).
    """

    kind: str
    rate: float
    jump_moments: tuple
    cumulants: tuple

    def moments(self, n: int) -> list:
        return compound_poisson_moments(self.rate, self.jump_moments, n)


def hankel_ok(moments: Sequence[float], tol: float = 1e-10) -> bool:
    """Positive semidefiniteness of all available Hankel matrices ``[m_{i+j}]``."""
    m = [float(x) for x in moments]
    n = (len(m) - 1) // 2
    for size in range(1, n + 2):
        H = np.array([[m[i + j] for j in range(size)] for i in range(size)])
        if np.linalg.eigvalsh(H).min() < -tol * max(1.0, abs(H).max()):
            return False
    return True


def poisson_limit_params(Lambda: float, alpha: int, kernel=None, kmax: int = 4,
                         H: Sequence[float] | None = None) -> LimitLaw:
    """Limit law of the triangle count when ``c**3 R**2 / N**2 = Lambda``.

    ``alpha = 0``: Poisson with rate ``Lambda H_0 / 6``.  ``alpha = 1``:
    compound Poisson with rate ``Lambda H_0 / 6`` and jump moments
    ``H_j / H_0``, so that the ``j``-th cumulant is ``Lambda H_j / 6``.
    ``kernel="unit"`` (or ``H`` given) replaces the triple products by
    constants, e.g. all ones for the flat kernel with ``R = N``.

    Raises
    ------
    NoJumpLaw
        If ``H_j / H_0`` fails the Hankel positivity test.
    """
    if alpha not in (0, 1):
        raise InvalidParams("alpha must be 0 or 1")
    if not Lambda > 0:
        raise InvalidParams("Lambda must be positive")
    if H is None:
        if kernel == "unit":
            H = [1.0] * (2 * kmax + 1)
        else:
            H = [triple_product_H(j if alpha else 0, alpha, kernel) for j in range(2 * kmax + 1)]
    H = [float(h) for h in H]
    if alpha == 0:
        H = [H[0]] * len(H)
    rate = Lambda * H[0] / 6.0
    jumps = tuple(h / H[0] for h in H)
    if alpha and not hankel_ok(jumps):
        raise NoJumpLaw("triple products are not the moments of a probability law")
    cum = tuple(Lambda * H[j] / 6.0 for j in range(1, kmax + 1))
    kind = "poisson" if alpha == 0 else "compound_poisson"
    return LimitLaw(kind, rate, jumps[: kmax + 1], cum)


def compound_poisson_moments(rate, jump_moments: Sequence, n: int) -> list:
    """Raw moments ``M_0..M_n`` of a compound Poisson law.

    ``M_m = rate * sum_j C(m-1, j) E[J^(j+1)] M_(m-1-j)``; exact for
    rational inputs.
    """
    if len(jump_moments) < n + 1:
        raise InvalidParams(f"need jump moments up to order {n}")
    rate = _exact(rate)
    jm = [_exact(x) for x in jump_moments]
    M = [1]
    for m in range(1, n + 1):
        M.append(rate * sum(comb(m - 1, j) * jm[j + 1] * M[m - 1 - j] for j in range(m)))
    return M


def mean_Y(N: int, c: float, R: float, q: int, alpha: int = 0, kernel=None) -> float:
    """Leading-order mean ``N (cR/N)^q V^q`` (``V_0`` or ``V_1``)."""
    if c == 0:
        return 0.0
    V = 1.0 if kernel == "unit" else compute_V(1 if alpha else 0, alpha, kernel)
    return N * (c * R / N) ** q * V**q


def mean_X3(N: int, c: float, R: float, alpha: int = 0, kernel=None) -> float:
    """Leading-order mean ``(c^3 R^2 / N^2) H_1`` of ``Tr M^3``.

    ``H_1`` is the triple product of the single-multiplicity kernel
    (it coincides with ``H_2`` when ``alpha = 0``).
    """
    if c == 0:
        return 0.0
    H = 1.0 if kernel == "unit" else triple_product_H(1 if alpha else 0, alpha, kernel)
    return c**3 * R**2 / N**2 * H


# --- moment bounds -----------------------------------------------------------


def rho_q(q: int) -> float:
    """Radius ``q / ((q-1) e^(1/(q-1)))`` of the normalized cumulant series."""
    if q < 2:
        raise InvalidParams("q must be >= 2")
    return q / ((q - 1) * math.exp(1.0 / (q - 1)))


def binomial_moment(n_trials: int, p: Fraction, order: int) -> Fraction:
    """Exact ``E[B^order]`` for ``B ~ Binomial(n_trials, p)``."""
    p = Fraction(p)
    dist = [Fraction(1)]
    for _ in range(n_trials):
        nxt = [Fraction(0)] * (len(dist) + 1)
        for j, w in enumerate(dist):
            nxt[j] += w * (1 - p)
            nxt[j + 1] += w * p
        dist = nxt
    return sum(w * Fraction(j) ** order for j, w in enumerate(dist))


@dataclass(frozen=True)
class BoundReport:
    """Moment bound for the maximal-diagram cumulant with ``V_0 = 1``.

    ``lhs`` is ``t_k^(q)``; ``lhs_unoriented`` drops the orientation factor
    ``2^(k-1)``, the quantity the Bernoulli-moment argument actually bounds.
    """

    k: int
    q: int
    lhs: Fraction
    rhs: Fraction
    slack: Fraction
    lhs_unoriented: Fraction
    slack_unoriented: Fraction
    rho: float


def bound_report(k: int, q: int) -> BoundReport:
    """``q^(2k-1)/K * E[Binomial(K, 1/(q-1))^(k-1)]`` against the cumulant."""
    if q < 2:
        raise InvalidParams("the bound needs q >= 2 so that 1/(q-1) <= 1")
    if k < 1:
        raise InvalidParams("k must be >= 1")
    K = k * (q - 1) + 1
    rhs = Fraction(q ** (2 * k - 1), K) * binomial_moment(K, Fraction(1, q - 1), k - 1)
    lhs = Fraction(count_max_tree_diagrams(k, q))
    lhs_u = lhs / 2 ** (k - 1)
    return BoundReport(k, q, lhs, rhs, rhs - lhs, lhs_u, rhs - lhs_u, rho_q(q))


@dataclass(frozen=True)
class JumpLaw:
    """Jump distribution given through ``S(x) = E exp(x J)`` and ``S'``.

    ``x_max`` bounds the domain where the series converges.
    """

    S: Callable[[float], float]
    dS: Callable[[float], float]
    x_max: float = math.inf
    mean: float = 1.0

    @classmethod
    def degenerate(cls) -> "JumpLaw":
        return cls(math.exp, math.exp, math.inf, 1.0)

    @classmethod
    def from_moments(cls, moments: Sequence[float], tail_tol: float = 1e-12) -> "JumpLaw":
        """Truncated series ``sum_l m_l x^l / l!``; ``moments[0]`` must be 1."""
        m = [float(x) for x in moments]
        if abs(m[0] - 1.0) > 1e-12:
            raise InvalidParams("zeroth jump moment must be 1")
        L = len(m)
        # radius where the last retained term is still negligible
        lg = [math.log(x) - math.lgamma(l + 1) for l, x in enumerate(m) if x > 0]
        x_max = math.exp((math.log(tail_tol) - lg[-1]) / (L - 1)) if L > 1 else math.inf

        def S(x):
            return sum(mm * x**l / math.factorial(l) for l, mm in enumerate(m))

        def dS(x):
            return sum(m[l + 1] * x**l / math.factorial(l) for l in range(L - 1))

        return cls(S, dS, x_max, m[1])

    @classmethod
    def kappa_gaussian(cls) -> "JumpLaw":
        """``J = 1 + Z**2`` with ``Z`` of density ``(1+x^2) e^(-x^2) / V_1``."""
        V1 = 1.5 * math.sqrt(math.pi)
        c = math.sqrt(math.pi) / V1

        def S(x):
            a = 1.0 - x
            return math.exp(x) * c * (a**-0.5 + 0.5 * a**-1.5)

        def dS(x):
            a = 1.0 - x
            return math.exp(x) * c * (a**-0.5 + 0.5 * a**-1.5 + 0.5 * a**-1.5 + 0.75 * a**-2.5)

        return cls(S, dS, 1.0, 5.0 / 3.0)


@dataclass(frozen=True)
class Asymptote:
    k: int
    delta: float
    omega: float
    upsilon: float
    log_estimate: float

    @property
    def estimate(self) -> float:
        return math.exp(self.log_estimate)


def _upsilon(jump: JumpLaw, s: float) -> tuple[float, float]:
    target = 1.0 / s
    f = lambda w: w * jump.dS(w) - target  # noqa: E731
    hi = min(1.0, 0.5 * jump.x_max)
    while f(hi) < 0:
        if hi >= jump.x_max * (1 - 1e-12):
            raise RootNotBracketed(f"omega S'(omega) = {target:g} has no root below {jump.x_max:g}")
        hi = min(2.0 * hi, jump.x_max * (1 - 1e-12)) if math.isfinite(jump.x_max) else 2.0 * hi
        if hi > 1e6:
            raise RootNotBracketed("root search diverged")
    if f(0.0) >= 0:
        raise RootNotBracketed("no positive root")
    w = optimize.brentq(f, 0.0, hi, xtol=1e-15, rtol=1e-15)
    ups = (jump.S(w) - 1.0) / (w * jump.dS(w)) - 1.0 + math.log(jump.dS(w))
    return w, ups


def compound_moment_asymptote(k: int, delta: float, jump: JumpLaw | None = None) -> Asymptote:
    """Saddle-point estimate ``(k delta e^upsilon)^k`` of ``M_{k-1}``.

    ``M_{k-1}`` is the ``(k-1)``-th moment of a compound Poisson law with
    rate ``k delta`` and jumps ``jump``; ``omega`` solves
    ``omega S'(omega) = 1/delta``.
    """
    jump = jump or JumpLaw.degenerate()
    if not delta > 0:
        raise InvalidParams("delta must be positive")
    w, ups = _upsilon(jump, delta)
    return Asymptote(k, delta, w, ups, k * (math.log(k * delta) + ups))


def min_upsilon_factor(jump: JumpLaw, s_lo: float = 1e-3, s_hi: float = 1e3) -> tuple[float, float]:
    """``inf_s exp(upsilon(s) - 1)``; returns ``(s*, value)``.

    As ``s`` grows, ``upsilon(s)`` tends to ``ln E J``, so the search over
    ``[s_lo, s_hi]`` is compared with that limit (reported as ``s* = inf``).
    """
    def g(ls):
        try:
            return _upsilon(jump, math.exp(ls))[1]
        except RootNotBracketed:
            return math.inf

    res = optimize.minimize_scalar(g, bounds=(math.log(s_lo), math.log(s_hi)), method="bounded",
                                   options={"xatol": 1e-10})
    best = (math.exp(res.x), math.exp(res.fun - 1.0))
    limit = jump.mean / math.e
    return (math.inf, limit) if limit < best[1] else best


def cumulant_growth_bound(k: int, q: int, V: Mapping | Sequence, jump: JumpLaw) -> float:
    """Right side of the large-``k``, large-``q`` growth bound for the weighted cumulant.

    ``(V_1 / K)^(1/k) (V_2 / V_1) min_s exp(upsilon(s) - 1)``.
    """
    K = k * (q - 1) + 1
    V1, V2 = float(_V(V, 1)), float(_V(V, 2))
    return (V1 / K) ** (1.0 / k) * (V2 / V1) * min_upsilon_factor(jump)[1]


def limit_table(family: str, k_max: int, q: int, alpha: int = 0, s: float | None = None,
                Lambda: float | None = None, kernel=None) -> list[LimitValue]:
    """Rows of limiting values for the ``theory`` command."""
    kern = _as_kernel(kernel)
    kname = kern.kind
    rows: list[LimitValue] = []
    if family.startswith("Y"):
        mom = moments_for(alpha, kern)
        V0 = mom[0]
        for k in range(1, k_max + 1):
            if family == "Y1":
                val = float(xi_1(k, q, mom) if alpha else phi_1(k, q, V0))
            elif family == "Y2":
                if s is None:
                    raise InvalidParams("Y2 needs s")
                if alpha:
                    if (k, q) != (2, 2):
                        continue
                    val = float(xi_2_twostar(s, mom))
                else:
                    val = float(phi_2(k, q, s, V0))
            elif family == "Y3":
                val = float(xi_3(k, q, mom) if alpha else phi_3(k, V0))
            else:
                raise InvalidParams(f"unknown family {family}")
            fam = "Xi" if alpha else "Phi"
            rows.append(LimitValue(fam, family, k, q, val, s, None, kname, alpha))
    elif family in ("Xi", "Xii", "Xiii", "Xiv"):
        for k in range(1, k_max + 1):
            prov = "quadrature"
            if family == "Xi":
                if k == 1:
                    val = mean_X3(1, 1, 1, alpha, kern)
                elif k == 2:
                    val = theta_2_i(alpha, kern)
                else:
                    continue
            elif family == "Xii":
                if s is None:
                    raise InvalidParams("Xii needs s")
                if k == 1:
                    val = s**2 * mean_X3(1, 1, 1, alpha, kern)
                elif k == 2:
                    val = theta_2_ii(alpha, s, kern)
                else:
                    continue
            elif family == "Xiii":
                val = theta_iii(k, alpha, kern)
            else:
                if Lambda is None:
                    raise InvalidParams("Xiv needs Lambda")
                law = poisson_limit_params(Lambda, alpha, kern, kmax=k_max)
                val = law.cumulants[k - 1]  # cumulants of the triangle count X / 6
            rows.append(LimitValue("Theta", family, k, 3, float(val), s, Lambda, kname, alpha, prov))
    else:
        raise InvalidParams(f"unknown family {family}")
    return rows

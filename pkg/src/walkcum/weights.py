"""Edge-weight kernels, their integrals and Fourier transforms.

The kernel family is ``h_m^(alpha)(x) = (1 + alpha*psi(x)**2)**m * exp(-psi(x)**2)``
for an even, non-decreasing (on ``[0, inf)``) profile ``psi``.  ``V_m`` is the
integral of ``h_m^(1)`` over the real line; for ``alpha = 0`` every ``h_m`` is
``exp(-psi**2)`` and its integral is written ``V_0``.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate, signal

from .errors import GridTooCoarse, InvalidKernel, NonConvergent

MAX_TRUNCATION = 1.0e4
DEFAULT_TOL = 1e-10
DEFAULT_POINTS = 2**14 + 1
DECAY_TOL = 1e-13


@dataclass(frozen=True)
class WeightFunction:
    """Profile ``psi`` defining the edge kernel.

    Parameters
    ----------
    kind : {"gaussian", "power", "table", "zero"}
        ``gaussian`` is ``psi(x) = |x|``; ``power`` is ``|x|**p`` with
        ``params = (p,)``, ``p >= 1``; ``table`` samples ``psi`` on
        ``[0, inf)`` with ``params = (step, psi_0, psi_1, ...)``, linearly
        interpolated and extended with the last slope; ``zero`` is
        ``psi = 0`` (flat kernel, only meaningful for sampling graphs).
    params : tuple of float
    """

    kind: str = "gaussian"
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        kind = self.kind
        if kind == "gaussian":
            if self.params:
                raise InvalidKernel("gaussian kernel takes no parameters")
        elif kind == "power":
            if len(self.params) != 1 or not self.params[0] >= 1.0:
                raise InvalidKernel("power kernel needs a single exponent p >= 1")
        elif kind == "table":
            if len(self.params) < 3 or not self.params[0] > 0:
                raise InvalidKernel("table kernel needs (step, psi_0, psi_1, ...)")
            vals = np.asarray(self.params[1:])
            if not np.all(np.isfinite(vals)):
                raise InvalidKernel("table values must be finite")
            if np.any(np.diff(vals) < 0):
                raise InvalidKernel("psi must be non-decreasing on [0, inf)")
        elif kind == "zero":
            if self.params:
                raise InvalidKernel("zero kernel takes no parameters")
        else:
            raise InvalidKernel(f"unknown kernel kind {kind!r}")

    @property
    def is_flat(self) -> bool:
        return self.kind == "zero"

    def psi(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        if self.kind == "gaussian":
            return ax
        if self.kind == "power":
            return ax ** self.params[0]
        if self.kind == "zero":
            return np.zeros_like(ax)
        step, vals = self.params[0], np.asarray(self.params[1:])
        xs = step * np.arange(len(vals))
        slope = (vals[-1] - vals[-2]) / step
        inside = np.interp(ax, xs, vals)
        return np.where(ax <= xs[-1], inside, vals[-1] + slope * (ax - xs[-1]))

    def psi2(self, x):
        if self.kind == "gaussian":
            x = np.asarray(x, dtype=float)
            return x * x
        p = self.psi(x)
        return p * p

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}

    @classmethod
    def from_dict(cls, d) -> "WeightFunction":
        if isinstance(d, str):
            return cls(d)
        return cls(d.get("kind", "gaussian"), tuple(d.get("params", ())))

    def check(self, L: float = 50.0, n: int = 2001) -> None:
        """Raise ``InvalidKernel`` if evenness or monotonicity fails on a grid."""
        x = np.linspace(0.0, L, n)
        p = self.psi(x)
        if not np.allclose(p, self.psi(-x)):
            raise InvalidKernel("psi is not even")
        if np.any(np.diff(p) < -1e-12):
            raise InvalidKernel("psi is not non-decreasing on [0, inf)")


GAUSSIAN = WeightFunction("gaussian")


def _as_kernel(kernel) -> WeightFunction:
    if kernel is None:
        return GAUSSIAN
    if isinstance(kernel, WeightFunction):
        return kernel
    if isinstance(kernel, (str, dict)):
        return WeightFunction.from_dict(kernel)
    raise InvalidKernel(f"cannot interpret {kernel!r} as a kernel")


def eval_h(x, m: int, alpha: int, kernel=None):
    """``(1 + alpha*psi(x)**2)**m * exp(-psi(x)**2)``, vectorized over ``x``."""
    kernel = _as_kernel(kernel)
    if alpha not in (0, 1):
        raise InvalidKernel("alpha must be 0 or 1")
    if m < 0:
        raise InvalidKernel("m must be non-negative")
    s = kernel.psi2(x)
    out = np.exp(-s)
    if alpha and m:
        out = out * (1.0 + s) ** m
    return out if np.ndim(out) else float(out)


def _hmax(m: int, alpha: int) -> float:
    # sup over psi^2 = u >= 0 of (1+u)^m e^{-u} is attained at u = m - 1
    if alpha == 0 or m <= 1:
        return 1.0
    return m**m * math.exp(-(m - 1))


def kernel_width(m: int, alpha: int, kernel=None, rel: float = 1e-17) -> float:
    """Smallest ``L`` with ``h_m(x) < rel * max h_m`` for all ``|x| >= L``."""
    kernel = _as_kernel(kernel)
    if kernel.is_flat:
        raise NonConvergent("flat kernel has no finite width")
    thresh = rel * _hmax(m, alpha)
    hi = 1.0
    while eval_h(hi, m, alpha, kernel) >= thresh or not _decreasing_after(hi, m, alpha, kernel):
        hi *= 2.0
        if hi > MAX_TRUNCATION:
            raise NonConvergent(f"h_{m} does not decay below {thresh:g} before x={MAX_TRUNCATION:g}")
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if eval_h(mid, m, alpha, kernel) < thresh and _decreasing_after(mid, m, alpha, kernel):
            hi = mid
        else:
            lo = mid
    return hi


def _decreasing_after(x: float, m: int, alpha: int, kernel) -> bool:
    xs = x * np.array([1.0, 1.25, 1.5, 2.0])
    v = eval_h(xs, m, alpha, kernel)
    return bool(np.all(np.diff(v) <= 0))


def compute_V(m: int, alpha: int, kernel=None, tol: float = DEFAULT_TOL, moments=None) -> float:
    """Integral of ``h_m^(alpha)`` over the real line.

    ``tol`` is an absolute error bound for values up to 1 and a relative one
    beyond.

    The integrand is truncated at ``L`` where it has fallen below
    ``tol / 100`` of its maximum and is decreasing; the remaining tail is
    bounded by an extra panel ``[L, 2L]``.

    Raises
    ------
    NonConvergent
        If no truncation up to ``MAX_TRUNCATION`` leaves a tail below ``tol``.
    """
    kernel = _as_kernel(kernel)
    if kernel.is_flat:
        raise NonConvergent("flat kernel: integral diverges")
    L = kernel_width(m, alpha, kernel, rel=min(tol, 1e-12) * 1e-4)
    f = lambda t: eval_h(t, m, alpha, kernel)  # noqa: E731
    points = None
    if kernel.kind == "table":
        step = kernel.params[0]
        knots = step * np.arange(1, len(kernel.params) - 1)
        knots = knots[knots < L]
        points = list(knots[:40]) if len(knots) else None
    # quad warns when epsrel=1e-14 is out of reach; the returned error is checked below
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        body, err = integrate.quad(f, 0.0, L, epsabs=tol / 8, epsrel=1e-14, limit=500, points=points)
    # absolute below 1, relative above: doubles cannot resolve 1e-10 on V_8 ~ 1e4
    atol = tol * max(1.0, 2.0 * abs(body))
    tail, _ = integrate.quad(f, L, 2 * L, epsabs=atol / 8, limit=200)
    if 2 * tail > atol or 2 * err > atol:
        raise NonConvergent(f"V_{m}: tail {2 * tail:.3g} or error {2 * err:.3g} above tol {tol:g}")
    value = 2.0 * body
    if moments is not None:
        moments._store(m, value, L)
    return value


class KernelMoments:
    """Write-once cache of ``V_m`` for one kernel and one ``alpha``.

    For ``alpha = 0`` every ``V_m`` equals ``V_0``.
    """

    def __init__(self, alpha: int = 1, kernel=None, tol: float = DEFAULT_TOL):
        if alpha not in (0, 1):
            raise InvalidKernel("alpha must be 0 or 1")
        self.alpha = alpha
        self.kernel = _as_kernel(kernel)
        self.quad_tol = tol
        self.V: dict[int, float] = {}
        self.truncation_L: dict[int, float] = {}

    def _store(self, m, value, L):
        self.V.setdefault(m, value)
        self.truncation_L.setdefault(m, L)

    def __getitem__(self, m: int) -> float:
        mm = m if self.alpha else 0
        if mm not in self.V:
            compute_V(mm, self.alpha, self.kernel, self.quad_tol, moments=self)
        return self.V[mm]

    def table(self, ms: Iterable[int]) -> list[dict]:
        return [{"m": m, "alpha": self.alpha, "value": self[m], "tol": self.quad_tol} for m in ms]

    def to_csv(self, ms: Iterable[int], fh=None) -> str:
        buf = fh if fh is not None else io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["m", "alpha", "value", "tol"])
        w.writeheader()
        for row in self.table(ms):
            w.writerow({**row, "value": repr(row["value"])})
        return buf.getvalue() if fh is None else ""


def moments_for(alpha: int, kernel=None, tol: float = DEFAULT_TOL) -> KernelMoments:
    """Shared ``KernelMoments`` instance per (alpha, kernel, tol)."""
    key = (alpha, _as_kernel(kernel), tol)
    inst = _MOMENTS.get(key)
    if inst is None:
        inst = _MOMENTS[key] = KernelMoments(alpha, kernel, tol)
    return inst


_MOMENTS: dict = {}


# --- Fourier side --------------------------------------------------------


@dataclass(frozen=True)
class FourierGrid:
    """Uniform symmetric frequency grid with an odd number of points."""

    p_max: float
    n: int = DEFAULT_POINTS

    def __post_init__(self):
        if self.n < 3 or self.n % 2 == 0:
            raise GridTooCoarse("frequency grid needs an odd number of points >= 3")
        if not self.p_max > 0:
            raise GridTooCoarse("frequency extent must be positive")

    @property
    def p(self) -> np.ndarray:
        return np.linspace(-self.p_max, self.p_max, self.n)

    @property
    def dp(self) -> float:
        return 2.0 * self.p_max / (self.n - 1)


def _direct_ft(k: int, alpha: int, kernel: WeightFunction, p: np.ndarray, p_top: float) -> np.ndarray:
    # trapezoid on a symmetric x grid, spectrally accurate for smooth even h
    W = kernel_width(k, alpha, kernel)
    dx = min(math.pi / (4.0 * p_top), W / 200.0)
    nx = int(math.ceil(W / dx))
    x = dx * np.arange(nx + 1)
    wts = np.full(nx + 1, 2.0 * dx)
    wts[0] = dx
    hx = eval_h(x, k, alpha, kernel) * wts
    p = np.asarray(p, dtype=float)
    out = np.empty(p.shape)
    flat = p.ravel()
    res = out.ravel()
    chunk = max(1, 4_000_000 // (nx + 1))
    for s in range(0, flat.size, chunk):
        res[s:s + chunk] = np.cos(np.outer(flat[s:s + chunk], x)) @ hx
    return out


def default_grid(kernel=None, ks: Sequence[int] = (0, 1, 2), alpha: int = 1,
                 n: int = DEFAULT_POINTS, decay_tol: float = DECAY_TOL,
                 p_cap: float = 1.0e4) -> FourierGrid:
    """Grid whose extent reaches the decay of every requested ``h~_k``."""
    kernel = _as_kernel(kernel)
    P = 1.0
    while True:
        probe = np.linspace(P, 2 * P, 65)
        ok = True
        for k in ks:
            v0 = compute_V(k, alpha, kernel) if alpha else compute_V(0, 0, kernel)
            if np.max(np.abs(_direct_ft(k, alpha, kernel, probe, 2 * P))) > decay_tol * v0:
                ok = False
                break
        if ok:
            return FourierGrid(p_max=2 * P, n=n)
        P *= 2.0
        if P > p_cap:
            raise GridTooCoarse("Fourier transform does not decay within the frequency cap")


def check_grid(grid: FourierGrid, k: int, alpha: int, kernel=None, edge_tol: float = 1e-9) -> None:
    """Nyquist and extent checks for sampling ``h~_k`` on ``grid``.

    Raises ``GridTooCoarse`` if the spacing cannot resolve the kernel width
    (aliasing of the triple convolution) or the extent cuts off the transform.
    """
    kernel = _as_kernel(kernel)
    W = kernel_width(k, alpha, kernel)
    if grid.dp > 2.0 * math.pi / (4.0 * W):
        raise GridTooCoarse(f"spacing {grid.dp:.4g} too coarse for kernel width {W:.4g}")
    v0 = compute_V(k if alpha else 0, alpha, kernel)
    edge = _direct_ft(k, alpha, kernel, np.array([grid.p_max]), grid.p_max)[0]
    if abs(edge) > edge_tol * v0:
        raise GridTooCoarse(f"extent {grid.p_max:.4g} does not cover the decay of h~_{k}")


def fourier_h(k: int, alpha: int, grid: FourierGrid | None = None, kernel=None) -> np.ndarray:
    """Sample ``h~_k(p) = int h_k(x) exp(-ipx) dx`` on ``grid.p`` by direct quadrature."""
    kernel = _as_kernel(kernel)
    grid = grid or default_grid(kernel, (k,), alpha)
    check_grid(grid, k, alpha, kernel)
    half = _direct_ft(k, alpha, kernel, grid.p[grid.n // 2:], grid.p_max)
    return np.concatenate([half[:0:-1], half])


def fourier_h_fft(k: int, alpha: int, kernel=None, n: int = 2**14, dx: float | None = None):
    """FFT fast path; returns ``(p, h~_k(p))`` on the FFT frequency lattice."""
    kernel = _as_kernel(kernel)
    W = kernel_width(k, alpha, kernel)
    if dx is None:
        dx = 4.0 * W / n
    if n * dx < 2.0 * W:
        raise GridTooCoarse("FFT window shorter than the kernel support")
    x = (np.arange(n) - n // 2) * dx
    hx = eval_h(x, k, alpha, kernel)
    vals = np.fft.fft(np.fft.ifftshift(hx)).real * dx
    p = 2.0 * math.pi * np.fft.fftfreq(n, dx)
    order = np.argsort(p)
    return p[order], vals[order]


class FourierTable:
    """Cache of sampled transforms and triple products on one shared grid."""

    def __init__(self, kernel=None, grid: FourierGrid | None = None, ks=(0, 1, 2), alpha: int = 1):
        self.kernel = _as_kernel(kernel)
        self.grid = grid or default_grid(self.kernel, ks, alpha)
        self.values: dict[tuple[int, int], np.ndarray] = {}
        self.H: dict[tuple[int, int], float] = {}

    def h(self, k: int, alpha: int) -> np.ndarray:
        key = (k if alpha else 0, alpha)
        if key not in self.values:
            self.values[key] = fourier_h(key[0], alpha, self.grid, self.kernel)
        return self.values[key]

    def triple(self, k: int, alpha: int) -> float:
        key = (k if alpha else 0, alpha)
        if key not in self.H:
            hk = self.h(k, alpha)
            self.H[key] = float(integrate.trapezoid(hk**3, dx=self.grid.dp) / (2 * math.pi))
        return self.H[key]

    def theta2(self, alpha: int) -> float:
        h1 = self.h(1, alpha)
        h2 = self.h(2, alpha)
        dp = self.grid.dp
        conv = signal.fftconvolve(h1 * h1, h2, mode="same") * dp / (2 * math.pi)
        return float(9.0 / math.pi * integrate.trapezoid(conv * h1 * h1, dx=dp))


_TABLES: dict = {}


def table_for(kernel=None, grid: FourierGrid | None = None) -> FourierTable:
    kernel = _as_kernel(kernel)
    key = (kernel, grid)
    tab = _TABLES.get(key)
    if tab is None:
        tab = _TABLES[key] = FourierTable(kernel, grid)
    return tab


def triple_product_H(k: int, alpha: int, kernel=None, grid: FourierGrid | None = None) -> float:
    """``(1/2pi) * int h~_k(p)**3 dp``, the weight of a single k-fold triangle."""
    return table_for(kernel, grid).triple(k, alpha)


def theta2_convolution(alpha: int, kernel=None, grid: FourierGrid | None = None) -> float:
    """``(9/pi) * int ((h~_1)**2 * h~_2)(p) h~_1(p)**2 dp``.

    The convolution carries the ``1/(2pi)`` factor, so the result equals 18
    times the weight of one maximal two-triangle diagram.
    """
    return table_for(kernel, grid).theta2(alpha)

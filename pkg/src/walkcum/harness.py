"""Replica experiments comparing empirical cumulants with their limits."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from scipy import stats

from . import theory
from .cumulants import CumulantEstimate, SampleSet, estimate_cumulant
from .ensemble import EnsembleParams, RegimeSpec, ResolvedRegime, ratios, resolve_regime, sample_graph
from .errors import ConfigError, InvalidKernel, InvalidParams, TooFewReplicas
from .walks import WalkStat, count_closed_X3, count_walks_Y, family_of, normalize_statistic
from .weights import WeightFunction, _as_kernel, moments_for, triple_product_H

SCHEMA_VERSION = 1
CSV_COLUMNS = [
    "schema", "regime", "statistic", "q", "alpha", "N", "c", "R", "ratio", "order", "replicas",
    "value", "stderr", "method", "theory", "theory_source", "scale", "z", "verdict",
]
MIN_REPLICAS = {1: 2, 2: 50, 3: 1000, 4: 1000}
MIN_DIST_REPLICAS = 1000


# --- plans -----------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentPlan:
    """Ladder of sizes, replicas per size, statistic and cumulant orders.

    ``regime`` fixes how ``(c, R)`` follow ``N``.  Alternatively ``c`` and
    ``R`` may be fixed directly (``regime`` then only names the theory
    family used for comparison, or is ``None``).
    """

    regime: RegimeSpec | None
    N_ladder: tuple
    replicas: int
    statistic: str = "Y"
    q: int = 2
    alpha: int = 0
    orders: tuple = (1, 2)
    seed: int = 0
    kernel: WeightFunction | None = None
    c: float | None = None
    R: float | None = None
    workers: int = 1
    z_max: float = 3.0
    tv_max: float = 0.05

    def __post_init__(self):
        ladder = tuple(int(n) for n in self.N_ladder)
        object.__setattr__(self, "N_ladder", ladder)
        object.__setattr__(self, "orders", tuple(int(k) for k in self.orders))
        if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise InvalidParams("N ladder must be non-empty and strictly increasing")
        if any(n % 2 == 0 or n < 3 for n in ladder):
            raise InvalidParams("ladder sizes must be odd and at least 3")
        if self.statistic not in ("Y", "X"):
            raise InvalidParams("statistic must be 'Y' or 'X'")
        if self.statistic == "X" and self.q != 3:
            object.__setattr__(self, "q", 3)
        if self.alpha not in (0, 1):
            raise InvalidParams("alpha must be 0 or 1")
        if not self.orders or min(self.orders) < 1:
            raise InvalidParams("orders must be positive")
        if self.regime is None and (self.c is None or self.R is None):
            raise InvalidParams("give a regime or both c and R")
        if self.regime is not None and family_of(self.regime.family) != self.statistic:
            raise InvalidParams(f"regime {self.regime.family} does not match statistic {self.statistic}")
        if self.workers < 1:
            raise InvalidParams("workers must be >= 1")

    def resolve(self, N: int) -> ResolvedRegime:
        if self.c is not None and self.R is not None:
            return ratios(N, float(self.c), float(self.R))
        return resolve_regime(self.regime, N)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["regime"] = asdict(self.regime) if self.regime else None
        d["kernel"] = _as_kernel(self.kernel).to_dict()
        d["N_ladder"] = list(self.N_ladder)
        d["orders"] = list(self.orders)
        return d


# --- theory lookup ---------------------------------------------------------


def theory_value(family: str, k: int, q: int, alpha: int, rr: ResolvedRegime,
                 kernel=None, Lambda: float | None = None) -> tuple[float | None, str, float]:
    """Limit of the order-``k`` cumulant of the normalized statistic.

    Returns ``(value, source, scale)``: the empirical cumulant of the
    normalized statistic times ``scale`` estimates ``value``.  ``value`` is
    ``None`` where no closed form is implemented.
    """
    kern = _as_kernel(kernel)
    cR = rr.c * rr.R
    if family.startswith("Y"):
        mom = moments_for(alpha, kern)
        if family == "Y1":
            if alpha:
                return float(theory.xi_1(k, q, mom)), "theory.xi_1", 1.0 / cR
            return float(theory.phi_1(k, q, mom[0])), "theory.phi_1", 1.0 / cR
        if family == "Y2":
            s = rr.cR_over_N
            if alpha:
                if (k, q) == (2, 2):
                    return float(theory.xi_2_twostar(s, mom)), "theory.xi_2_twostar", 1.0 / cR
                if k == 1:
                    return s ** (q - 1) * mom[1] ** q, "theory.mean_Y", 1.0 / cR
                return None, "", 1.0 / cR
            return float(theory.phi_2(k, q, s, mom[0])), "theory.phi_2", 1.0 / cR
        if alpha:
            return float(theory.xi_3(k, q, mom)), "theory.xi_3", 1.0 / cR
        return float(theory.phi_3(k, mom[0])), "theory.phi_3", 1.0 / cR
    H1 = triple_product_H(1 if alpha else 0, alpha, kern)
    if family == "Xi":
        if k == 1:
            return H1, "theory.mean_X3", 1.0 / cR
        if k == 2:
            return theory.theta_2_i(alpha, kern), "theory.theta_2_i", 1.0 / cR
        return None, "", 1.0 / cR
    if family == "Xii":
        s = math.sqrt(rr.c2R_over_N2)
        if k == 1:
            return s * s * H1, "theory.mean_X3", 1.0 / cR
        if k == 2:
            return theory.theta_2_ii(alpha, s, kern), "theory.theta_2_ii", 1.0 / cR
        return None, "", 1.0 / cR
    if family == "Xiii":
        return theory.theta_iii(k, alpha, kern), "theory.theta_iii", rr.N**2 / (rr.c**3 * rr.R**2)
    if family == "Xiv":
        lam = rr.c3R2_over_N2 if Lambda is None else Lambda
        law = theory.poisson_limit_params(lam, alpha, kern, kmax=max(k, 1))
        return law.cumulants[k - 1], "theory.poisson_limit_params", 1.0
    raise InvalidParams(f"unknown family {family}")


# --- distribution tests ------------------------------------------------------


@dataclass(frozen=True)
class CLTRecord:
    replicas: int
    skew: float
    excess_kurtosis: float
    p_value: float
    passed: bool


def clt_check(samples, skew_max: float = 0.15, kurt_max: float = 0.3, p_min: float = 0.01,
              min_replicas: int = 2000) -> CLTRecord:
    """Skewness, excess kurtosis and D'Agostino-Pearson normality test.

    ``passed`` also requires at least ``min_replicas`` samples.

    Raises
    ------
    TooFewReplicas
        Below 20 samples, where the omnibus test is undefined.
    """
    x = samples.values if isinstance(samples, SampleSet) else np.asarray(samples, dtype=float)
    if x.size < 20:
        raise TooFewReplicas("normality checks need at least 20 samples")
    if np.all(x == x[0]):
        return CLTRecord(int(x.size), 0.0, 0.0, 0.0, False)
    sk = float(stats.skew(x))
    ku = float(stats.kurtosis(x))
    p = float(stats.normaltest(x).pvalue)
    ok = x.size >= min_replicas and abs(sk) < skew_max and abs(ku) < kurt_max and p > p_min
    return CLTRecord(int(x.size), sk, ku, p, bool(ok))


@dataclass(frozen=True)
class PoissonRecord:
    replicas: int
    rate: float
    tv: float
    chi2_p: float
    factorial_moments: tuple
    factorial_stderr: tuple
    factorial_z: tuple
    passed: bool


def _falling(x: np.ndarray, m: int) -> np.ndarray:
    out = np.ones_like(x, dtype=float)
    for j in range(m):
        out = out * (x - j)
    return out


def poisson_gof(counts, rate: float, tv_max: float = 0.05, z_max: float = 3.0,
                n_factorial: int = 3) -> PoissonRecord:
    """Compare integer counts with ``Poisson(rate)``.

    Total variation includes the Poisson mass beyond the largest observed
    count.  The chi-square test merges cells so that every expected count is
    at least 5.  Factorial moments ``E (X)_m`` are compared with ``rate**m``.
    """
    x = np.asarray(counts)
    if x.size == 0:
        raise TooFewReplicas("no counts")
    if np.any(x < 0) or np.any(x != np.round(x)):
        raise InvalidParams("counts must be non-negative integers")
    if rate < 0:
        raise InvalidParams("rate must be non-negative")
    x = x.astype(np.int64)
    n = x.size
    top = int(x.max())
    emp = np.bincount(x, minlength=top + 1) / n
    pmf = stats.poisson.pmf(np.arange(top + 1), rate) if rate > 0 else np.eye(1, top + 1)[0]
    tail = max(0.0, 1.0 - float(pmf.sum()))
    tv = 0.5 * (float(np.abs(emp - pmf).sum()) + tail)

    # chi-square on merged cells
    obs = np.bincount(x, minlength=top + 1).astype(float)
    exp = pmf * n
    exp[-1] += tail * n
    cells_o, cells_e, acc_o, acc_e = [], [], 0.0, 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= 5:
            cells_o.append(acc_o)
            cells_e.append(acc_e)
            acc_o = acc_e = 0.0
    if cells_o:
        cells_o[-1] += acc_o
        cells_e[-1] += acc_e
    if len(cells_o) >= 2:
        chi2_p = float(stats.chisquare(cells_o, cells_e).pvalue)
    else:
        chi2_p = 1.0 if acc_e == 0 or len(cells_o) <= 1 else 0.0

    fm, fse, fz = [], [], []
    for m in range(1, n_factorial + 1):
        f = _falling(x.astype(float), m)
        mean = float(f.mean())
        se = float(f.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        target = rate**m
        if se > 0:
            z = (mean - target) / se
        else:
            z = 0.0 if mean == target else math.inf
        fm.append(mean)
        fse.append(se)
        fz.append(z)
    ok = tv < tv_max and all(abs(z) <= z_max for z in fz)
    return PoissonRecord(n, float(rate), tv, chi2_p, tuple(fm), tuple(fse), tuple(fz), bool(ok))


# --- reports -----------------------------------------------------------------


@dataclass
class RungResult:
    N: int
    c: float
    R: float
    ratio: float
    estimates: list  # CumulantEstimate
    theory: list  # value or None per order
    sources: list
    scales: list
    z: list
    trivial: bool = False


@dataclass
class ComparisonReport:
    plan: dict
    rungs: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    clt: dict | None = None
    poisson: dict | None = None
    trivial: bool = False
    passed: bool = True
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        rungs = []
        for r in self.rungs:
            d = asdict(r)
            d["estimates"] = [e.to_dict() for e in r.estimates]
            rungs.append(d)
        return {
            "schema_version": SCHEMA_VERSION, "plan": self.plan, "rungs": rungs,
            "verdicts": {str(k): v for k, v in self.verdicts.items()}, "clt": self.clt,
            "poisson": self.poisson, "trivial": self.trivial, "passed": self.passed,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonReport":
        rungs = []
        for r in d.get("rungs", []):
            r = dict(r)
            r["estimates"] = [CumulantEstimate(**e) for e in r["estimates"]]
            rungs.append(RungResult(**r))
        return cls(d.get("plan", {}), rungs, dict(d.get("verdicts", {})), d.get("clt"), d.get("poisson"),
                   d.get("trivial", False), d.get("passed", True), d.get("metadata", {}))

    def rows(self) -> list[dict]:
        reg = (self.plan.get("regime") or {}).get("family", "fixed")
        out = []
        for r in self.rungs:
            for e, th, src, sc, z in zip(r.estimates, r.theory, r.sources, r.scales, r.z):
                out.append({
                    "schema": SCHEMA_VERSION, "regime": reg, "statistic": self.plan.get("statistic"),
                    "q": self.plan.get("q"), "alpha": self.plan.get("alpha"), "N": r.N, "c": repr(r.c),
                    "R": repr(r.R), "ratio": repr(r.ratio), "order": e.order, "replicas": e.replicas,
                    "value": repr(e.value), "stderr": repr(e.stderr), "method": e.method,
                    "theory": "" if th is None else repr(th), "theory_source": src, "scale": repr(sc),
                    "z": "" if z is None else repr(z), "verdict": self.verdicts.get(str(e.order), ""),
                })
        return out


def report_to_csv(report: ComparisonReport) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in report.rows():
        w.writerow(row)
    return buf.getvalue()


def report_to_json(report: ComparisonReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=True) + "\n"


def emit_report(report: ComparisonReport, fmt: str = "json", path: str | Path | None = None) -> str:
    """Serialize ``report`` as ``csv`` (one row per rung and order) or ``json``.

    Output is a pure function of the report.  With ``path`` the text is also
    written to disk.
    """
    if fmt == "csv":
        text = report_to_csv(report)
    elif fmt == "json":
        text = report_to_json(report)
    else:
        raise InvalidParams("format must be csv or json")
    if path is not None:
        Path(path).write_text(text)
    return text


def load_report(path: str | Path) -> ComparisonReport:
    return ComparisonReport.from_dict(json.loads(Path(path).read_text()))


# --- running ---------------------------------------------------------------


def _one_replica(args) -> tuple[float, float]:
    params, stream_id, statistic, q, alpha, regime = args
    g = sample_graph(params, stream_id)
    raw = count_walks_Y(g, q, alpha) if statistic == "Y" else count_closed_X3(g, alpha)
    if regime is None:
        return raw, raw
    return raw, normalize_statistic(WalkStat(statistic, q, alpha, raw), params, regime)


def replica_values(params: EnsembleParams, n: int, statistic: str, q: int, alpha: int,
                   regime: RegimeSpec | None, rung: int = 0,
                   workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Raw and normalized statistic for replicas ``0..n-1`` (stream ``rung << 40 | r``)."""
    jobs = [(params, (rung << 40) | r, statistic, q, alpha, regime) for r in range(n)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            res = list(ex.map(_one_replica, jobs, chunksize=max(1, n // (4 * workers))))
    else:
        res = [_one_replica(j) for j in jobs]
    arr = np.array(res, dtype=float).reshape(n, 2)
    return arr[:, 0], arr[:, 1]


def _verdict(zs: Sequence[float]) -> str:
    a = [abs(z) for z in zs if z is not None and math.isfinite(z)]
    if len(a) < 2:
        return "n/a"
    if a[-1] < 0.8 * a[0]:
        return "converging"
    if a[-1] > 1.25 * a[0]:
        return "diverging"
    return "flat"


def run_experiment(plan: ExperimentPlan) -> ComparisonReport:
    """Sample every rung, estimate cumulants and compare with their limits.

    Determinism: replica ``r`` at rung ``i`` uses stream ``(i << 40) | r``
    regardless of worker count.  ``passed`` requires ``|z| <= z_max`` at the
    top rung for every order with a theory value, plus the distributional
    test (normality for Gaussian regimes, Poisson fit for ``Xiv`` with
    ``alpha = 0``) when enough replicas are available.

    Raises
    ------
    TooFewReplicas
        When ``replicas`` is below the minimum for the highest order.
    InfeasibleRegime
        From regime resolution at any rung.
    """
    need = max(MIN_REPLICAS.get(k, 1000) for k in plan.orders)
    if plan.replicas < need:
        raise TooFewReplicas(f"orders {plan.orders} need at least {need} replicas")
    fam = plan.regime.family if plan.regime else None
    kern = _as_kernel(plan.kernel)
    report = ComparisonReport(plan.to_dict())
    report.metadata = {
        "z_max": plan.z_max, "tv_max": plan.tv_max, "min_replicas": MIN_REPLICAS,
        "clt_thresholds": {"skew": 0.15, "excess_kurtosis": 0.3, "p": 0.01},
        "trend_rule": "last |z| < 0.8 first: converging; > 1.25 first: diverging",
        "s_convention": "calibrated",
    }
    last_norm = last_raw = None
    last_rr = None
    for i, N in enumerate(plan.N_ladder):
        rr = plan.resolve(N)
        params = EnsembleParams.from_N(N, rr.c, rr.R, kern, plan.alpha, plan.seed)
        raw, norm = replica_values(params, plan.replicas, plan.statistic, plan.q, plan.alpha, plan.regime,
                                   rung=i, workers=plan.workers)
        trivial = bool(np.all(raw == 0))
        ests, ths, srcs, scs, zs = [], [], [], [], []
        for k in plan.orders:
            e = estimate_cumulant(SampleSet(norm), k)
            th, src, sc = (None, "", 1.0)
            if fam is not None and not trivial:
                th, src, sc = theory_value(fam, k, plan.q, plan.alpha, rr, kern)
            z = None
            if th is not None and e.stderr > 0:
                z = (e.value * sc - th) / (e.stderr * sc)
            ests.append(e)
            ths.append(th)
            srcs.append(src)
            scs.append(sc)
            zs.append(z)
        ratio = {"X": rr.c2R_over_N2, "Y": rr.cR_over_N}[plan.statistic]
        if fam == "Xiv":
            ratio = rr.c3R2_over_N2
        report.rungs.append(RungResult(N, rr.c, rr.R, ratio, ests, ths, srcs, scs, zs, trivial))
        last_norm, last_raw, last_rr = norm, raw, rr

    report.trivial = all(r.trivial for r in report.rungs)
    for j, k in enumerate(plan.orders):
        report.verdicts[str(k)] = _verdict([r.z[j] for r in report.rungs])
    top = report.rungs[-1]
    ok = all(z is None or abs(z) <= plan.z_max for z in top.z)
    if not report.trivial and plan.replicas >= MIN_DIST_REPLICAS and fam is not None:
        if fam == "Xiv":
            if plan.alpha == 0:
                rate = theory.poisson_limit_params(last_rr.c3R2_over_N2, 0, kern).rate
                rec = poisson_gof(np.round(last_raw / 6.0), rate, tv_max=plan.tv_max, z_max=plan.z_max)
                report.poisson = asdict(rec)
                ok = ok and rec.passed
        else:
            rec = clt_check(last_norm, min_replicas=MIN_DIST_REPLICAS)
            report.clt = asdict(rec)
    report.passed = bool(ok)
    return report


# --- configuration ---------------------------------------------------------

CONFIG_KEYS = {
    "regime", "s", "lambda", "delta", "R", "N", "c", "q", "alpha", "kernel", "replicas", "orders",
    "seed", "out", "format", "statistic", "workers", "side_tol", "z_max", "tv_max",
}


def parse_kernel(spec: Any) -> WeightFunction:
    """``"gaussian"``, ``"power:p"``, ``"table:step,psi0,psi1,..."`` or a ``{kind, params}`` map."""
    if spec is None or isinstance(spec, WeightFunction):
        return _as_kernel(spec)
    if isinstance(spec, dict):
        return WeightFunction.from_dict(spec)
    text = str(spec).strip()
    if text.startswith("{"):
        return WeightFunction.from_dict(json.loads(text))
    kind, _, rest = text.partition(":")
    params = tuple(float(v) for v in rest.split(",") if v.strip()) if rest else ()
    try:
        return WeightFunction(kind, params)
    except (InvalidParams, InvalidKernel) as exc:
        raise ConfigError(str(exc)) from exc


def _int_list(v) -> list[int]:
    if isinstance(v, (list, tuple)):
        return [int(x) for x in v]
    return [int(x) for x in str(v).replace(" ", "").split(",") if x]


def load_config(path: str | Path) -> dict:
    """Read a JSON object or ``key = value`` lines (``#`` starts a comment).

    Keys mirror the command-line flags; unknown keys raise ``ConfigError``.
    """
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    else:
        cfg = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, val = (p.strip() for p in line.split("=", 1))
            cfg[key] = val
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def plan_from_config(cfg: dict) -> ExperimentPlan:
    """Build an ``ExperimentPlan`` from a flat configuration mapping."""
    try:
        fam = cfg.get("regime")
        regime = None
        if fam:
            lam = cfg.get("lambda")
            s = cfg.get("s")
            regime = RegimeSpec(
                fam,
                s=None if s in (None, "") else float(s),
                Lambda=None if lam in (None, "") else float(lam),
                delta=None if cfg.get("delta") in (None, "") else float(cfg["delta"]),
                R=None if cfg.get("R") in (None, "") or cfg.get("c") not in (None, "") else float(cfg["R"]),
                side_tol=float(cfg.get("side_tol", 0.05)),
            )
        fixed_c = cfg.get("c")
        stat = cfg.get("statistic") or (family_of(fam) if fam else "Y")
        return ExperimentPlan(
            regime=regime,
            N_ladder=tuple(_int_list(cfg["N"])),
            replicas=int(cfg.get("replicas", 100)),
            statistic=stat,
            q=int(cfg.get("q", 3 if stat == "X" else 2)),
            alpha=int(cfg.get("alpha", 0)),
            orders=tuple(_int_list(cfg.get("orders", "1,2"))),
            seed=int(cfg.get("seed", 0)),
            kernel=parse_kernel(cfg.get("kernel")),
            c=None if fixed_c in (None, "") else float(fixed_c),
            R=None if fixed_c in (None, "") else float(cfg["R"]),
            workers=int(cfg.get("workers", 1)),
            z_max=float(cfg.get("z_max", 3.0)),
            tv_max=float(cfg.get("tv_max", 0.05)),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

"""Simulation studies: MSE vs noise, sketch size sweeps, CI coverage, ARE, transmission time.

Every replication derives its own random streams from ``(seed, scenario, rep)``,
so reports are identical whatever the number of worker threads.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import stats
from scipy.special import ndtri

import bitreg
from bitreg import _rng
from bitreg.moments import estimate_moments, estimate_moments_paired, PairedQuantizedDataset
from bitreg.quantize import (EmpiricalFixed, Fixed, Ranges, SubGaussianLogN, quantize_dataset,
                             quantize_second_copy, resolve_ranges)
from bitreg.regress import NotPositiveDefinite, fit_ols, fit_quantized, solve_moments
from bitreg.sketch import SketchConfig, sketch_then_quantize
from bitreg.sparse import Infeasible, LassoConfig, debias, debias_matrix_auto, fit_lasso

DESIGNS = ("gaussian", "uniform", "rademacher", "betamix")
BETAMIX_PARAMS = ((1, 1), (2, 2), (1, 4), (1, 4))

# unit-norm coefficient vector of the MSE experiments (d = 10)
BETA_MSE = tuple(s * math.sqrt(v) for s, v in zip(
    (1, -1, 1, -1, 1, -1, 1, -1, 1, -1), (.15, .15, .1, .05, .05, .15, .15, .1, .05, .05)))
# coefficients of the inference experiments, |beta|^2 = 2
BETA_INFERENCE = (0.5, -math.sqrt(0.75), math.sqrt(0.75), -0.5)

BETA_PRESETS = {"mse10": BETA_MSE, "inference4": BETA_INFERENCE}


@dataclass(frozen=True)
class Scenario:
    """A data-generating process plus the quantizer ranges used on it.

    ``ranges`` is one of ``"empirical"`` (R = 2.5, or the support bound for
    bounded designs; L = 2.5 sqrt(sigma^2 + |beta|^2)), ``"inference"``
    (R = support bound, L = sqrt(s)|beta| + sigma sqrt(2 log n) with s the
    support size), ``"subgaussian"`` (growing log-n ranges) or ``"fixed"``
    (explicit ``R`` and ``L``).
    """

    design: str = "gaussian"
    d: int = 10
    beta_star: tuple = BETA_MSE
    sigma: float = 1.0
    n: int = 100_000
    ranges: str = "empirical"
    R: float | None = None
    L: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.design not in DESIGNS:
            raise ValueError(f"unknown design {self.design!r}")
        beta = tuple(float(b) for b in self.beta_star)
        object.__setattr__(self, "beta_star", beta)
        if len(beta) != self.d:
            raise ValueError(f"beta_star has {len(beta)} entries, d={self.d}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0 and all(map(math.isfinite, beta))):
            raise ValueError("sigma and beta_star must be finite, sigma >= 0")
        if self.n < 2:
            raise ValueError("n must be >= 2")

    @property
    def beta(self):
        return np.array(self.beta_star)

    @property
    def support_bound(self):
        return {"gaussian": None, "uniform": math.sqrt(3.0), "rademacher": 1.0, "betamix": 1.0}[self.design]

    def quantizer_ranges(self, n=None) -> Ranges:
        n = self.n if n is None else n
        norm = float(np.linalg.norm(self.beta))
        if self.ranges == "empirical":
            R = self.support_bound or 2.5
            return resolve_ranges(EmpiricalFixed(self.sigma, norm, R=R), n, self.d)
        if self.ranges == "inference":
            R = self.support_bound or 2.5
            s = max(1, int(np.count_nonzero(self.beta)))
            return resolve_ranges(Fixed(R, math.sqrt(s) * norm + self.sigma * math.sqrt(2 * math.log(n))), n, self.d)
        if self.ranges == "subgaussian":
            return resolve_ranges(SubGaussianLogN(sigma=self.sigma, signal_norm=norm), n, self.d)
        if self.ranges == "fixed":
            if self.R is None or self.L is None:
                raise ValueError("fixed ranges need R and L")
            return resolve_ranges(Fixed(self.R, self.L), n, self.d)
        raise ValueError(f"unknown range preset {self.ranges!r}")

    def to_dict(self):
        return asdict(self)


def generate_design(design, n, d, g: np.random.Generator):
    if design == "gaussian":
        return g.standard_normal((n, d))
    if design == "uniform":
        return g.uniform(-math.sqrt(3.0), math.sqrt(3.0), (n, d))
    if design == "rademacher":
        return 2.0 * g.integers(0, 2, (n, d)) - 1.0
    if design == "betamix":
        X = np.empty((n, d))
        for j in range(d):
            a, b = BETAMIX_PARAMS[j % 4]
            X[:, j] = 2.0 * g.beta(a, b, n) - 1.0
        return X
    raise ValueError(f"unknown design {design!r}")


def generate_scenario(s: Scenario, rep: int = 0, n: int | None = None):
    """Draw ``(X, y)`` with y = X beta + sigma eps, deterministic in (seed, rep)."""
    n = s.n if n is None else n
    g = _rng.generator(s.seed, _rng.SCENARIO, rep)
    X = generate_design(s.design, n, s.d, g)
    y = X @ s.beta + s.sigma * g.standard_normal(n)
    return X, y


# ---------------------------------------------------------------------------
# reports

def _mean_se(values):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return float("nan"), float("nan")
    se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else float("nan")
    return float(np.mean(v)), se


def loglog_slope(x, y):
    """Least-squares slope of log y on log x."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


@dataclass
class ExperimentReport:
    study: str
    config: dict
    records: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)

    @property
    def metadata(self):
        canon = json.dumps(self.config, sort_keys=True, default=str)
        return {"study": self.study, "version": bitreg.__version__,
                "config_id": hashlib.sha256(canon.encode()).hexdigest()[:16]}

    def to_json(self, include_records=False) -> str:
        obj = {"metadata": self.metadata, "config": self.config, "aggregates": self.aggregates}
        if include_records:
            obj["records"] = self.records
        return json.dumps(_jsonable(obj), sort_keys=True, indent=1)

    def to_csv(self) -> str:
        keys = []
        for r in self.records:
            keys.extend(k for k in r if k not in keys)
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in self.records:
            w.writerow({k: _fmt(r.get(k, "")) for k in keys})
        return buf.getvalue()


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _pmap(fn, tasks, workers):
    tasks = list(tasks)
    if workers is None or workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks))


def _rep_seed(master, *path):
    return _rng.derive_seed(master, _rng.REPLICATION, *path)


# ---------------------------------------------------------------------------
# MSE vs sigma

def run_mse_study(scenarios, reps: int, seed: int = 0, workers: int | None = 1) -> ExperimentReport:
    """Quantized vs full-precision MSE for each scenario (typically a sigma sweep)."""
    scenarios = list(scenarios)
    if reps < 2:
        raise ValueError("reps must be >= 2")

    def one(task):
        k, r = task
        s = scenarios[k]
        rs = _rep_seed(seed, k, r)
        s_rep = replace(s, seed=rs)
        X, y = generate_scenario(s_rep)
        rec = {"scenario": k, "rep": r, "seed": rs, "sigma": s.sigma}
        ols = fit_ols(X, y)
        rec["mse_plain"] = float(np.sum((ols.beta_hat - s.beta) ** 2))
        ds = quantize_dataset(X, y, s.quantizer_ranges(), rs)
        try:
            fit = fit_quantized(ds)
            rec["mse_quantized"] = float(np.sum((fit.beta_hat - s.beta) ** 2))
            rec["failed"] = False
        except NotPositiveDefinite:
            rec["mse_quantized"] = float("nan")
            rec["failed"] = True
        return rec

    records = _pmap(one, [(k, r) for k in range(len(scenarios)) for r in range(reps)], workers)
    per = []
    for k, s in enumerate(scenarios):
        rs = [r for r in records if r["scenario"] == k]
        mq, sq = _mean_se([r["mse_quantized"] for r in rs])
        mp, sp = _mean_se([r["mse_plain"] for r in rs])
        ranges = s.quantizer_ranges()
        per.append({
            "sigma": s.sigma, "design": s.design, "R": ranges.R, "L": ranges.L,
            "mse_quantized": mq, "se_quantized": sq,
            "mse_plain": mp, "se_plain": sp,
            "mse_plain_x32": 32.0 * mp,
            "are": mq / mp,
            "gap_ratio": mq / (32.0 * mp),
            "failures": sum(r["failed"] for r in rs),
        })
    config = {"scenarios": [s.to_dict() for s in scenarios], "reps": reps, "seed": seed}
    return ExperimentReport("mse", config, records, {"by_scenario": per})


# ---------------------------------------------------------------------------
# sketch size sweep

def run_sketch_study(scenario: Scenario, m_grid, reps: int, seed: int = 0, workers: int | None = 1,
                     kind: str = "gaussian", method: str = "gram", slope_points: int = 3) -> ExperimentReport:
    """MSE of sketch-then-quantize over ``m_grid`` plus the quantization-only MSE."""
    m_grid = [int(m) for m in m_grid]
    if any(b <= a for a, b in zip(m_grid, m_grid[1:])):
        raise ValueError("m_grid must be increasing")
    if reps < 2:
        raise ValueError("reps must be >= 2")
    ranges = scenario.quantizer_ranges()
    policy = Fixed(ranges.R, ranges.L)

    def one(r):
        rs = _rep_seed(seed, r)
        X, y = generate_scenario(replace(scenario, seed=rs))
        rec = {"rep": r, "seed": rs}
        try:
            fit = fit_quantized(quantize_dataset(X, y, ranges, rs))
            rec["mse_quant_only"] = float(np.sum((fit.beta_hat - scenario.beta) ** 2))
        except NotPositiveDefinite:
            rec["mse_quant_only"] = float("nan")
        for i, m in enumerate(m_grid):
            cfg = SketchConfig(m, kind=kind, seed=_rng.derive_seed(rs, i), method=method)
            try:
                fit = fit_quantized(sketch_then_quantize(X, y, cfg, policy))
                rec[f"mse_m{m}"] = float(np.sum((fit.beta_hat - scenario.beta) ** 2))
            except NotPositiveDefinite:
                rec[f"mse_m{m}"] = float("nan")
        return rec

    records = _pmap(one, range(reps), workers)
    per = []
    for m in m_grid:
        mean, se = _mean_se([r[f"mse_m{m}"] for r in records])
        per.append({"m": m, "mse": mean, "se": se,
                    "failures": int(sum(not math.isfinite(r[f"mse_m{m}"]) for r in records))})
    mses = [p["mse"] for p in per]
    q_mean, q_se = _mean_se([r["mse_quant_only"] for r in records])
    k = min(slope_points, len(m_grid))
    agg = {
        "by_m": per,
        "mse_quant_only": q_mean, "se_quant_only": q_se,
        "slope_all": loglog_slope(m_grid, mses) if len(m_grid) > 1 else float("nan"),
        "slope_top": loglog_slope(m_grid[-k:], mses[-k:]) if k > 1 else float("nan"),
        "slope_points": k,
    }
    config = {"scenario": scenario.to_dict(), "m_grid": m_grid, "reps": reps, "seed": seed,
              "kind": kind, "method": method}
    return ExperimentReport("sketch", config, records, agg)


# ---------------------------------------------------------------------------
# confidence interval coverage

def default_lambda(d, n):
    return 2.0 * math.sqrt(math.log(d) / n)


def qq_data(z):
    z = np.sort(np.asarray(z, dtype=float))
    z = z[np.isfinite(z)]
    k = z.size
    theo = ndtri((np.arange(1, k + 1) - 0.5) / k)
    return {"sample": z.tolist(), "theoretical": theo.tolist()}


def run_coverage_study(scenario: Scenario, reps: int, levels=(0.95,), lasso: LassoConfig | None = None,
                       debias_mu: float | None = None, seed: int = 0, workers: int | None = 1,
                       qq: bool = True) -> ExperimentReport:
    """Empirical coverage, bias, SD and standardized errors of per-coordinate intervals.

    Without ``lasso`` the plug-in fit with sandwich errors is used; with it,
    the Lasso fit is debiased and intervals come from the debiased estimate.
    """
    if reps < 100:
        raise ValueError("coverage studies need reps >= 100")
    levels = tuple(float(v) for v in levels)
    d, beta = scenario.d, scenario.beta
    ranges = scenario.quantizer_ranges()
    zq = {lv: float(ndtri(0.5 + lv / 2)) for lv in levels}

    def one(r):
        rs = _rep_seed(seed, r)
        X, y = generate_scenario(replace(scenario, seed=rs))
        ds = quantize_dataset(X, y, ranges, rs)
        rec = {"rep": r, "seed": rs, "failed": False}
        try:
            if lasso is None:
                fit = fit_quantized(ds)
                est, se = fit.beta_hat, fit.std_errors
            else:
                mom = estimate_moments(ds)
                las = fit_lasso(mom, lasso)
                M, mu = debias_matrix_auto(mom, debias_mu)
                db = debias(mom, las.beta, ds, M)
                est, se = db.beta_db, db.std_errors
                rec["mu"] = mu
                rec["lasso_converged"] = las.converged
                rec["support_size"] = int(las.support.size)
        except (NotPositiveDefinite, Infeasible):
            rec["failed"] = True
            est = se = np.full(d, np.nan)
        for j in range(d):
            rec[f"est{j}"] = float(est[j])
            rec[f"se{j}"] = float(se[j])
            for lv in levels:
                rec[f"cov{j}@{lv}"] = bool(abs(est[j] - beta[j]) <= zq[lv] * se[j])
        return rec

    records = _pmap(one, range(reps), workers)
    ok = [r for r in records if not r["failed"]]
    coords = []
    ks_crit = 1.63 / math.sqrt(max(len(ok), 1))
    qq_out = {}
    for j in range(d):
        est = np.array([r[f"est{j}"] for r in ok])
        se = np.array([r[f"se{j}"] for r in ok])
        z = (est - beta[j]) / se
        ks = stats.kstest(z, "norm").statistic if z.size else float("nan")
        coords.append({
            "j": j, "beta_star": beta[j],
            "bias": float(np.mean(est) - beta[j]) if est.size else float("nan"),
            "sd": float(np.std(est, ddof=1)) if est.size > 1 else float("nan"),
            "mean_se": float(np.mean(se)) if se.size else float("nan"),
            "coverage": {str(lv): float(np.mean([r[f"cov{j}@{lv}"] for r in ok])) if ok else float("nan")
                         for lv in levels},
            "ks": float(ks),
            "ks_pass": bool(ks < ks_crit),
        })
        if qq:
            qq_out[str(j)] = qq_data(z)
    agg = {"by_coordinate": coords, "failures": len(records) - len(ok), "ks_critical": ks_crit,
           "levels": list(levels)}
    if qq:
        agg["qq"] = qq_out
    config = {"scenario": scenario.to_dict(), "reps": reps, "levels": list(levels), "seed": seed,
              "lasso": asdict(lasso) if lasso else None, "debias_mu": debias_mu}
    return ExperimentReport("coverage", config, records, agg)


# ---------------------------------------------------------------------------
# squared-value vs paired quantization

def are_theory(beta, R, L):
    """Delta-method n*var for a single standard Gaussian predictor, ignoring truncation."""
    b2 = beta * beta
    squared = R * R * L * L + R * R * b2 - 6.0 * b2
    paired = 0.5 * (R * R * L * L + L * L) + R ** 4 * b2 - 2.0 * R * R * b2
    paired_first = R * R * L * L + R ** 4 * b2 - 2.0 * R * R * b2
    return {"squared": squared, "paired": paired, "paired_first": paired_first,
            "ratio": paired / squared, "ratio_first": paired_first / squared}


def are_default_R(n: int, clamp_budget: float = 0.01) -> float:
    """Smallest multiple of 1/2 with at most ``clamp_budget`` expected clamped samples per dataset.

    Larger ranges inflate the paired scheme's diagonal noise (order R^4/n),
    which pushes its ratio estimator out of the delta-method regime.
    """
    z = float(ndtri(1.0 - clamp_budget / (2.0 * n)))
    return math.ceil(2.0 * z) / 2.0


def run_are_study(reps: int, snr_grid, n: int = 100_000, seed: int = 0, R: float | None = None,
                  L_factor: float | None = None, workers: int | None = 1) -> ExperimentReport:
    """n*var of the squared-value and paired estimators for d = 1 Gaussian data.

    ``snr_grid`` holds ``(beta, sigma)`` pairs. ``R`` defaults to
    :func:`are_default_R`; ``L = L_factor * sqrt(beta^2 + sigma^2)`` with
    ``L_factor`` defaulting to ``R`` so the response range matches R|beta|
    at high SNR.
    """
    grid = [(float(b), float(s)) for b, s in snr_grid]
    if reps < 2:
        raise ValueError("reps must be >= 2")
    if R is None:
        R = are_default_R(n)
    L_factor = R if L_factor is None else L_factor

    def one(task):
        k, r = task
        beta, sigma = grid[k]
        L = L_factor * math.hypot(beta, sigma)
        ranges = Ranges.from_bounds(R, L)
        rs = _rep_seed(seed, k, r)
        s = Scenario("gaussian", 1, (beta,), sigma, n, "fixed", R, L, rs)
        X, y = generate_scenario(s)
        ds = quantize_dataset(X, y, ranges, rs)
        pds = PairedQuantizedDataset(ds.x_bits, quantize_second_copy(X, ranges, rs), ds.y_bits, R, L)
        rec = {"point": k, "rep": r, "seed": rs, "beta": beta, "sigma": sigma}
        for name, mom in (("squared", estimate_moments(ds)),
                          ("paired", estimate_moments_paired(pds, "average")),
                          ("paired_first", estimate_moments_paired(pds, "first"))):
            rec[f"beta_{name}"] = float(mom.sigma_xy_hat[0] / mom.sigma_hat[0, 0])
            rec[f"sxy_{name}"] = float(mom.sigma_xy_hat[0])
            rec[f"sxx_{name}"] = float(mom.sigma_hat[0, 0])
        return rec

    records = _pmap(one, [(k, r) for k in range(len(grid)) for r in range(reps)], workers)
    per = []
    for k, (beta, sigma) in enumerate(grid):
        rs = [r for r in records if r["point"] == k]
        L = L_factor * math.hypot(beta, sigma)
        row = {"beta": beta, "sigma": sigma, "R": R, "L": L, "theory": are_theory(beta, R, L)}
        for name in ("squared", "paired", "paired_first"):
            row[f"nvar_{name}"] = n * float(np.var([r[f"beta_{name}"] for r in rs], ddof=1))
            row[f"nvar_sxy_{name}"] = n * float(np.var([r[f"sxy_{name}"] for r in rs], ddof=1))
            row[f"nvar_sxx_{name}"] = n * float(np.var([r[f"sxx_{name}"] for r in rs], ddof=1))
        row["ratio"] = row["nvar_paired"] / row["nvar_squared"]
        row["ratio_first"] = row["nvar_paired_first"] / row["nvar_squared"]
        row["ratio_diag"] = row["nvar_sxx_paired"] / row["nvar_sxx_squared"]
        per.append(row)
    config = {"reps": reps, "snr_grid": grid, "n": n, "seed": seed, "R": R, "L_factor": L_factor}
    return ExperimentReport("are", config, records, {"by_point": per, "ratio_highest_snr": per[-1]["ratio"]})


# ---------------------------------------------------------------------------
# transmission time

QBR_OVERHEAD_BITS = 8 * (36 + 4)


def transmission_model(n: int, d: int, link_bits_per_second: float, scheme: str = "quantized",
                       m: int | None = None, header_bits: int = 0) -> float:
    """Seconds to send a dataset over a link of the given rate.

    ``full64``: 64-bit floats for X and y; ``quantized``: 2d + 1 bits per
    sample; ``sketch-quantized``: 2d + 1 bits for each of ``m`` sketched rows.
    ``header_bits`` is added to the compressed schemes.
    """
    if not link_bits_per_second > 0 or n < 1 or d < 1:
        raise ValueError("rate, n and d must be positive")
    if scheme == "full64":
        return 64.0 * n * (d + 1) / link_bits_per_second
    if scheme == "quantized":
        return (n * (2 * d + 1) + header_bits) / link_bits_per_second
    if scheme == "sketch-quantized":
        if m is None or m < 1:
            raise ValueError("sketch-quantized needs m >= 1")
        return (m * (2 * d + 1) + header_bits) / link_bits_per_second
    raise ValueError(f"unknown scheme {scheme!r}")


def run_transmission_study(n_grid, d: int, link_bits_per_second: float = 5e5,
                           sketch_fraction: float = 0.1) -> ExperimentReport:
    rows = []
    for n in n_grid:
        m = max(1, int(round(sketch_fraction * n)))
        rows.append({
            "n": int(n), "d": d, "m": m,
            "full64": transmission_model(n, d, link_bits_per_second, "full64"),
            "quantized": transmission_model(n, d, link_bits_per_second, "quantized"),
            "sketch_quantized": transmission_model(n, d, link_bits_per_second, "sketch-quantized", m=m),
        })
    config = {"n_grid": [int(n) for n in n_grid], "d": d, "rate": link_bits_per_second,
              "sketch_fraction": sketch_fraction}
    return ExperimentReport("transmission", config, rows,
                            {"ratio_quantized_full": (2 * d + 1) / (64 * (d + 1))})


# ---------------------------------------------------------------------------
# JSON configs

STUDIES = ("mse", "sketch", "coverage", "are", "transmission")
CONFIG_KEYS = frozenset({"scenario", "sigmas", "reps", "m_grid", "kind", "method", "slope_points", "levels",
                         "lasso", "debias_mu", "snr_grid", "n", "R", "L_factor", "n_grid", "d", "rate",
                         "sketch_fraction", "qq"})


def scenario_from_config(obj: dict, seed: int = 0) -> Scenario:
    obj = dict(obj)
    d = int(obj.get("d", 10))
    beta = obj.get("beta", "mse10")
    if isinstance(beta, str):
        if beta not in BETA_PRESETS:
            raise ValueError(f"unknown beta preset {beta!r}")
        beta = list(BETA_PRESETS[beta])
        if len(beta) > d:
            raise ValueError(f"beta preset has {len(beta)} entries but d={d}")
        beta += [0.0] * (d - len(beta))
    return Scenario(design=obj.get("design", "gaussian"), d=d, beta_star=tuple(beta),
                    sigma=float(obj.get("sigma", 1.0)), n=int(obj.get("n", 100_000)),
                    ranges=obj.get("ranges", "empirical"), R=obj.get("R"), L=obj.get("L"), seed=seed)


def validate_config(study: str, config: dict) -> None:
    if study not in STUDIES:
        raise ValueError(f"unknown study {study!r}; choose from {', '.join(STUDIES)}")
    if not isinstance(config, dict):
        raise ValueError("config must be a JSON object")
    unknown = set(config) - CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "scenario" in config:
        scenario_from_config(config["scenario"])


def run_from_config(study: str, config: dict, seed: int, workers: int | None = 1) -> ExperimentReport:
    """Run ``study`` from a JSON-style config dict."""
    validate_config(study, config)
    if study == "transmission":
        return run_transmission_study(config.get("n_grid", [10 ** k for k in range(3, 8)]),
                                      int(config.get("d", 10)), float(config.get("rate", 5e5)),
                                      float(config.get("sketch_fraction", 0.1)))
    reps = int(config.get("reps", 200))
    if study == "are":
        return run_are_study(reps, config.get("snr_grid", [[0.0, 1.0], [1.0, 1.0], [5.0, 0.5]]),
                             n=int(config.get("n", 100_000)), seed=seed, R=config.get("R"),
                             L_factor=config.get("L_factor"), workers=workers)
    scenario = scenario_from_config(config.get("scenario", {}))
    if study == "mse":
        sigmas = config.get("sigmas", [scenario.sigma])
        return run_mse_study([replace(scenario, sigma=float(s)) for s in sigmas], reps, seed, workers)
    if study == "sketch":
        return run_sketch_study(scenario, config.get("m_grid", [2500, 5000, 10000, 20000]), reps, seed,
                                workers, kind=config.get("kind", "gaussian"),
                                method=config.get("method", "gram"),
                                slope_points=int(config.get("slope_points", 3)))
    lasso = config.get("lasso")
    if lasso is not None:
        lasso = dict(lasso)
        lam = lasso.pop("lam", "auto")
        if lam == "auto":
            lam = default_lambda(scenario.d, scenario.n)
        if lasso.get("radius") is None:
            lasso["radius"] = math.inf
        lasso = LassoConfig(lam=float(lam), **lasso)
    return run_coverage_study(scenario, reps, levels=config.get("levels", [0.95]), lasso=lasso,
                              debias_mu=config.get("debias_mu"), seed=seed, workers=workers,
                              qq=bool(config.get("qq", True)))

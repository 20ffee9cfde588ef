"""Monte Carlo pointwise risk and rate sweeps."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..config import EstimatorConfig, ExperimentConfig
from ..selection import select
from .models import DensityModel, make_rng, model_from_name


@dataclass
class RiskPoint:
    n: int
    risk: float
    stderr: float
    partition_freq: dict[str, float]
    mean_h: tuple[float, ...]
    errors: np.ndarray = field(repr=False)
    compare_risk: float | None = None
    compare_stderr: float | None = None
    compare_errors: np.ndarray | None = field(default=None, repr=False)
    paired_p: float | None = None

    def to_dict(self) -> dict:
        out = {"n": self.n, "risk": self.risk, "stderr": self.stderr,
               "partition_freq": self.partition_freq, "mean_h": list(self.mean_h)}
        if self.compare_risk is not None:
            out.update(compare_risk=self.compare_risk, compare_stderr=self.compare_stderr, paired_p=self.paired_p)
        return out


@dataclass
class RiskReport:
    q: float
    points: list[RiskPoint]
    slope: float | None = None
    slope_ci: tuple[float, float] | None = None
    intercept: float | None = None

    def to_dict(self) -> dict:
        return {"q": self.q, "points": [p.to_dict() for p in self.points], "slope": self.slope,
                "slope_ci": list(self.slope_ci) if self.slope_ci else None, "intercept": self.intercept}


def risk_from_errors(errors: np.ndarray, q: float) -> tuple[float, float]:
    """``(mean |e|^q)^{1/q}`` and its delta-method standard error."""
    e = np.abs(np.asarray(errors, dtype=float)) ** q
    m = float(np.mean(e))
    se_m = float(np.std(e, ddof=1)) / math.sqrt(len(e))
    risk = m ** (1.0 / q)
    se = (1.0 / q) * m ** (1.0 / q - 1.0) * se_m if m > 0 else 0.0
    return risk, se


def _replicate(args) -> list[tuple]:
    model, est_cfg, cmp_cfg, x0, n, seed, reps = args
    kernel = est_cfg.kernel()
    cands = est_cfg.candidate_set(n, model.d, kernel)
    lam = est_cfg.thresholds(model.d, kernel).lam
    if cmp_cfg is not None:
        cmp_cands = cmp_cfg.candidate_set(n, model.d, kernel)
        cmp_lam = cmp_cfg.thresholds(model.d, kernel).lam
    truth = model.pdf(np.asarray(x0))
    out = []
    for r in reps:
        data = model.sample(n, make_rng(seed, n, r))
        res = select(data, x0, cands, kernel, lam)
        row = (res.estimate - truth, str(res.partition), res.h)
        if cmp_cfg is not None:
            res2 = select(data, x0, cmp_cands, kernel, cmp_lam)
            row = row + (res2.estimate - truth,)
        out.append(row)
    return out


def _chunks(R: int, k: int) -> list[range]:
    k = max(1, min(k, R))
    step = math.ceil(R / k)
    return [range(i, min(i + step, R)) for i in range(0, R, step)]


def run_replications(model: DensityModel, est_cfg: EstimatorConfig, x0, n: int, replications: int, seed: int,
                     cmp_cfg: EstimatorConfig | None = None, threads: int = 1) -> list[tuple]:
    """Per-replication ``(error, partition, h[, comparator error])`` in replication order."""
    x0 = tuple(float(v) for v in x0)
    jobs = [(model, est_cfg, cmp_cfg, x0, n, seed, chunk) for chunk in _chunks(replications, threads)]
    if threads <= 1:
        parts = [_replicate(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_replicate, jobs))
    return [row for part in parts for row in part]


def summarize(rows: list[tuple], n: int, q: float, partitions: list[str]) -> RiskPoint:
    errs = np.array([r[0] for r in rows])
    risk, se = risk_from_errors(errs, q)
    R = len(rows)
    freq = {p: sum(1 for r in rows if r[1] == p) / R for p in partitions}
    mean_h = tuple(float(v) for v in np.mean(np.array([r[2] for r in rows]), axis=0))
    pt = RiskPoint(n=n, risk=risk, stderr=se, partition_freq=freq, mean_h=mean_h, errors=errs)
    if len(rows[0]) > 3:
        cerr = np.array([r[3] for r in rows])
        pt.compare_risk, pt.compare_stderr = risk_from_errors(cerr, q)
        pt.compare_errors = cerr
        a, b = np.abs(errs) ** q, np.abs(cerr) ** q
        if np.allclose(a, b):
            pt.paired_p = 1.0
        else:
            pt.paired_p = float(stats.ttest_rel(a, b, alternative="less").pvalue)
    return pt


def mc_risk(cfg: ExperimentConfig, n: int | None = None, threads: int = 1) -> RiskReport:
    """Monte Carlo estimate of the pointwise risk at one sample size."""
    n = cfg.n if n is None else n
    model = model_from_name(cfg.density, cfg.d, cfg.sigma)
    rows = run_replications(model, cfg.estimator, cfg.query_point(), n, cfg.replications, cfg.seed,
                            cfg.comparator(), threads)
    parts = [str(P) for P in cfg.estimator.partitions(cfg.d)]
    return RiskReport(q=cfg.estimator.q, points=[summarize(rows, n, cfg.estimator.q, parts)])


def fit_slope(ns, risks, level: float = 0.95) -> tuple[float, float, tuple[float, float]]:
    """Least-squares slope of ``ln(risk)`` on ``ln(n)`` with a t-interval."""
    x, y = np.log(np.asarray(ns, dtype=float)), np.log(np.asarray(risks, dtype=float))
    if len(x) < 3:
        raise ValueError("need at least 3 sample sizes to fit a slope")
    fit = stats.linregress(x, y)
    t = stats.t.ppf(0.5 + level / 2.0, len(x) - 2)
    return float(fit.slope), float(fit.intercept), (float(fit.slope - t * fit.stderr), float(fit.slope + t * fit.stderr))


def rate_sweep(cfg: ExperimentConfig, threads: int = 1) -> RiskReport:
    if len(cfg.n_values) < 4:
        raise ValueError("a sweep needs at least 4 sample sizes")
    model = model_from_name(cfg.density, cfg.d, cfg.sigma)
    parts = [str(P) for P in cfg.estimator.partitions(cfg.d)]
    points = []
    for n in cfg.n_values:
        rows = run_replications(model, cfg.estimator, cfg.query_point(), n, cfg.replications, cfg.seed,
                                cfg.comparator(), threads)
        points.append(summarize(rows, n, cfg.estimator.q, parts))
    slope, intercept, ci = fit_slope([p.n for p in points], [p.risk for p in points])
    return RiskReport(q=cfg.estimator.q, points=points, slope=slope, slope_ci=ci, intercept=intercept)


def report_csv(report: RiskReport) -> str:
    """CSV text: n, risk, stderr, mean bandwidth per coordinate, partition frequencies."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    parts = list(report.points[0].partition_freq)
    d = len(report.points[0].mean_h)
    w.writerow(["n", "risk", "stderr"] + [f"mean_h{i + 1}" for i in range(d)] + [f"freq[{p}]" for p in parts])
    for p in report.points:
        w.writerow([p.n, repr(p.risk), repr(p.stderr)] + [repr(v) for v in p.mean_h]
                   + [repr(p.partition_freq[k]) for k in parts])
    return buf.getvalue()

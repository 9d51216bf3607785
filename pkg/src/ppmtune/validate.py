"""Hold-out bootstrap validation with BCa confidence intervals, and the
outer study loop repeating split + tune + validate Z times."""

import dataclasses
import json
import logging
import math
import warnings

import numpy as np
from scipy.stats import norm

from . import metrics
from .data import split_holdout, standardize
from .glm import FitConfig, ppm_predict_batch
from .metrics import MEASURE_NAMES, PredictionSet
from .tuner import TuningConfig, tune_multi

log = logging.getLogger(__name__)

VALIDATION_TRAIN_FRAC = 0.8


def derive_seed(seed, *path):
    """Deterministic child seed for a (seed, path...) tuple."""
    ss = np.random.SeedSequence([int(seed)] + [int(p) for p in path])
    return int(ss.generate_state(1)[0])


@dataclasses.dataclass(frozen=True)
class BootstrapRun:
    estimates: np.ndarray  # (B, len(measure_names)); NaN marks a failure
    point: metrics.MetricReport
    B: int
    seed: int
    m_prop: float
    measure_names: tuple = MEASURE_NAMES
    exclusion_counts: tuple = ()  # per-measure NaN counts


@dataclasses.dataclass(frozen=True)
class BcaInterval:
    lower: float
    upper: float
    level: float
    z0: float
    a: float
    clamped: bool = False


def scaled_m(n_train, m_prop):
    """Ceiling rule for the validation step: M = ceiling(n_train * m_prop),
    capped at n_train."""
    return min(int(math.ceil(n_train * m_prop)), n_train)


def _split_indices(n, seed):
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_tr = int(round(VALIDATION_TRAIN_FRAC * n))
    return perm[:n_tr], perm[n_tr:]


def evaluate_split_protocol(d, m_prop, fit, seed, span):
    """The validation measurement protocol: deterministic 80/20 split,
    M = ceiling(n_train * m_prop), PPM predictions, full MetricReport."""
    tr_idx, te_idx = _split_indices(d.n, seed)
    train = d.take(np.sort(tr_idx))
    test = d.take(np.sort(te_idx))
    M = scaled_m(train.n, m_prop)
    p_hat, _ = ppm_predict_batch(test, train, [M], fit)
    return metrics.report(PredictionSet(test.outcome, p_hat[:, 0]), span)


def bootstrap_validate(val, m_prop, B, fit=FitConfig(), seed=0,
                       span=metrics.LOESS_SPAN_DEFAULT):
    """B bootstrap resamples of the validation set, each measured with
    the 80/20 split protocol at M = ceiling(n_train * m_prop)."""
    if not 0.0 < m_prop <= 1.0:
        raise ValueError("m_prop must lie in (0, 1], got %r" % m_prop)
    if val.n < 50:
        warnings.warn("validation set has only %d rows" % val.n)
    if B < 1000:
        warnings.warn("B=%d bootstrap replicates; intervals are more "
                      "reliable with B >= 1000" % B)
    point = evaluate_split_protocol(val, m_prop, fit, derive_seed(seed, 0),
                                    span)
    estimates = np.full((B, len(MEASURE_NAMES)), np.nan)
    for b in range(B):
        rng = np.random.default_rng(derive_seed(seed, 1, b))
        idx = rng.integers(0, val.n, val.n)
        rep = metrics.report(
            _protocol_on_resample(val, idx, m_prop, fit,
                                  derive_seed(seed, 2, b)), span)
        for j, name in enumerate(MEASURE_NAMES):
            v = getattr(rep, name)
            if v is not None:
                estimates[b, j] = v
    excl = tuple(int(np.isnan(estimates[:, j]).sum())
                 for j in range(len(MEASURE_NAMES)))
    for j, name in enumerate(MEASURE_NAMES):
        if excl[j] > 0.2 * B:
            warnings.warn("measure %s failed in %d/%d bootstrap replicates"
                          % (name, excl[j], B))
    return BootstrapRun(estimates, point, B, seed, m_prop,
                        MEASURE_NAMES, excl)


def _protocol_on_resample(d, idx, m_prop, fit, split_seed):
    sample = d.take(idx)
    tr_idx, te_idx = _split_indices(sample.n, split_seed)
    train = sample.take(np.sort(tr_idx))
    test = sample.take(np.sort(te_idx))
    M = scaled_m(train.n, m_prop)
    p_hat, _ = ppm_predict_batch(test, train, [M], fit)
    return PredictionSet(test.outcome, p_hat[:, 0])


def jackknife_measures(val, m_prop, fit=FitConfig(), seed=0,
                       span=metrics.LOESS_SPAN_DEFAULT):
    """Leave-one-out values of every measure under the split protocol;
    feeds the BCa acceleration constant."""
    out = np.full((val.n, len(MEASURE_NAMES)), np.nan)
    split_seed = derive_seed(seed, 0)
    for i in range(val.n):
        keep = np.concatenate([np.arange(i), np.arange(i + 1, val.n)])
        rep = evaluate_split_protocol(val.take(keep), m_prop, fit,
                                      split_seed, span)
        for j, name in enumerate(MEASURE_NAMES):
            v = getattr(rep, name)
            if v is not None:
                out[i, j] = v
    return out


def bca_interval(estimates, point, jackknife_estimates, level=0.95):
    """Bias-corrected and accelerated bootstrap interval.

    z0 from the fraction of bootstrap estimates below the point value
    (ties counted half), acceleration from the jackknife skewness, and
    endpoints read off the empirical distribution with type-7 quantiles.
    """
    est = np.asarray(estimates, dtype=np.float64)
    est = est[np.isfinite(est)]
    B = est.size
    if B < 2 or est.max() == est.min():
        raise ValueError("zero bootstrap variance; interval undefined")
    if B < 100:
        warnings.warn("only %d bootstrap estimates for BCa" % B)
    frac = (np.sum(est < point) + 0.5 * np.sum(est == point)) / B
    clamped = False
    if frac <= 0.0 or frac >= 1.0:
        frac = min(max(frac, 1.0 / (B + 1)), B / (B + 1.0))
        clamped = True
    z0 = float(norm.ppf(frac))
    jk = np.asarray(jackknife_estimates, dtype=np.float64)
    jk = jk[np.isfinite(jk)]
    if jk.size >= 2:
        dev = jk.mean() - jk
        denom = float(np.sum(dev ** 2)) ** 1.5
        a = float(np.sum(dev ** 3)) / (6.0 * denom) if denom > 0.0 else 0.0
    else:
        a = 0.0
    z_lo = norm.ppf((1.0 - level) / 2.0)
    z_hi = -z_lo
    a1 = float(norm.cdf(z0 + (z0 + z_lo) / (1.0 - a * (z0 + z_lo))))
    a2 = float(norm.cdf(z0 + (z0 + z_hi) / (1.0 - a * (z0 + z_hi))))
    lower = float(np.quantile(est, a1))  # type-7 linear interpolation
    upper = float(np.quantile(est, a2))
    return BcaInterval(lower, upper, level, z0, a, clamped)


@dataclasses.dataclass(frozen=True)
class StudyCell:
    z: int
    alpha: float  # None for the full-model comparison row
    m_prop: float
    point: metrics.MetricReport
    se: dict  # measure -> bootstrap SE (None when unavailable)
    intervals: dict  # measure -> BcaInterval or None
    error: str = None


@dataclasses.dataclass(frozen=True)
class StudyReport:
    cells: tuple
    Z: int
    alphas: tuple
    seed: int
    level: float = 0.95

    def to_json(self):
        out = []
        for c in self.cells:
            row = {
                "z": c.z,
                "alpha": c.alpha,
                "m_prop": c.m_prop,
                "error": c.error,
                "measures": {},
            }
            for name in MEASURE_NAMES:
                iv = c.intervals.get(name)
                row["measures"][name] = {
                    "point": getattr(c.point, name) if c.point else None,
                    "se": c.se.get(name),
                    "lower": iv.lower if iv else None,
                    "upper": iv.upper if iv else None,
                }
            out.append(row)
        return json.dumps({"Z": self.Z, "alphas": list(self.alphas),
                           "seed": self.seed, "level": self.level,
                           "rows": out}, indent=2, sort_keys=True)

    def to_csv_rows(self):
        """Long-format rows: one per (z, alpha, measure)."""
        def fmt(v):
            return "" if v is None else "%.17g" % v
        rows = [["z", "alpha", "m_prop", "measure",
                 "point", "se", "lower", "upper"]]
        for c in self.cells:
            alpha = "" if c.alpha is None else "%.17g" % c.alpha
            for name in MEASURE_NAMES:
                iv = c.intervals.get(name)
                rows.append([
                    str(c.z), alpha, fmt(c.m_prop), name,
                    fmt(getattr(c.point, name) if c.point else None),
                    fmt(c.se.get(name)),
                    fmt(iv.lower if iv else None),
                    fmt(iv.upper if iv else None),
                ])
        return rows


def _validate_cell(z, alpha, val, m_prop, B, fit, seed, span, level):
    run = bootstrap_validate(val, m_prop, B, fit, seed, span)
    jack = jackknife_measures(val, m_prop, fit, seed, span)
    se = {}
    intervals = {}
    for j, name in enumerate(MEASURE_NAMES):
        col = run.estimates[:, j]
        col = col[np.isfinite(col)]
        point_v = getattr(run.point, name)
        se[name] = float(np.std(col, ddof=1)) if col.size >= 2 else None
        if point_v is None:
            intervals[name] = None
            continue
        try:
            intervals[name] = bca_interval(run.estimates[:, j], point_v,
                                           jack[:, j], level)
        except ValueError as exc:
            log.warning("z=%d alpha=%r measure %s: %s", z, alpha, name, exc)
            intervals[name] = None
    return StudyCell(z, alpha, m_prop, run.point, se, intervals)


def run_study(full, alphas, spec_template, tcfg=TuningConfig(), q=0.2,
              B=1000, Z=10, seed=0, level=0.95, standardization="pooled"):
    """The full pipeline, repeated over Z independent hold-out splits.

    Per split and per alpha: tune M on the TrTe side, bootstrap-validate
    at the tuned M proportion with BCa intervals; a full-model row
    (m_prop = 1.0) is appended per split for comparison.

    `standardization`: "pooled" min-max-scales the full dataset up front
    (the simulation-study order); "split" scales each TrTe side on its
    own bounds and maps the validation side with them, clamped, to avoid
    leakage on real data.
    """
    if standardization not in ("pooled", "split"):
        raise ValueError("standardization must be 'pooled' or 'split'")
    if standardization == "split" and full.standardized:
        raise ValueError("'split' standardization needs raw input data")
    if standardization == "pooled" and not full.standardized:
        full = standardize(full)
    span = spec_template.loess_span
    cells = []
    for z in range(Z):
        sp = split_holdout(full, q, derive_seed(seed, z, 0))
        if standardization == "split":
            from .data import minmax_params
            params = minmax_params(sp.trte)
            sp = dataclasses.replace(
                sp, trte=standardize(sp.trte),
                validation=standardize(sp.validation, params=params,
                                       clamp=True))
        specs = [dataclasses.replace(spec_template, alpha=a) for a in alphas]
        tcfg_z = dataclasses.replace(tcfg, seed=derive_seed(seed, z, 1))
        try:
            results = tune_multi(sp.trte, specs, tcfg_z)
        except ValueError as exc:
            for a in alphas:
                cells.append(StudyCell(z, a, float("nan"), None, {}, {},
                                       error=str(exc)))
            results = None
        if results is not None:
            for ai, (a, res) in enumerate(zip(alphas, results)):
                try:
                    cells.append(_validate_cell(
                        z, a, sp.validation, res.m_prop_opt, B, tcfg.fit,
                        derive_seed(seed, z, 2, ai), span, level))
                except ValueError as exc:
                    cells.append(StudyCell(z, a, res.m_prop_opt, None,
                                           {}, {}, error=str(exc)))
        try:
            cells.append(_validate_cell(
                z, None, sp.validation, 1.0, B, tcfg.fit,
                derive_seed(seed, z, 3), span, level))
        except ValueError as exc:
            cells.append(StudyCell(z, None, 1.0, None, {}, {},
                                   error=str(exc)))
    return StudyReport(tuple(cells), Z, tuple(alphas), seed, level)

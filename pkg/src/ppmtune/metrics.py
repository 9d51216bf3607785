"""Discrimination and calibration measures for probabilistic binary
predictions: AUROC, AUPRC, Brier score and its two-term decomposition,
Spiegelhalter's z, logistic recalibration (CITL, slope) and the
LOESS-based integrated calibration index."""

import json
from dataclasses import dataclass, asdict

import numpy as np
from scipy.stats import rankdata

from . import backends

LOESS_SPAN_DEFAULT = 0.75
LOESS_DEGREE_DEFAULT = 1

MEASURE_NAMES = ("auroc", "auprc", "lack_of_spread", "citl",
                 "calibration_slope", "ici", "brier", "spiegelhalter_z")


@dataclass(frozen=True)
class PredictionSet:
    """Paired observed outcomes and predicted probabilities."""
    y: np.ndarray
    p_hat: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y)
        p = np.asarray(self.p_hat, dtype=np.float64)
        if y.ndim != 1 or y.shape != p.shape or y.size < 1:
            raise ValueError("y and p_hat must be equal-length 1-D arrays")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("y must contain only 0/1")
        if not np.all(np.isfinite(p)) or p.min() <= 0.0 or p.max() >= 1.0:
            raise ValueError("p_hat must lie strictly inside (0, 1)")
        y = y.astype(np.int8)
        y.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "p_hat", p)

    @property
    def n(self):
        return self.y.size


@dataclass(frozen=True)
class CalibrationCurve:
    p_tilde: np.ndarray
    span: float
    degree: int


@dataclass(frozen=True)
class MetricReport:
    auroc: float = None
    auprc: float = None
    lack_of_spread: float = None
    citl: float = None
    calibration_slope: float = None
    ici: float = None
    brier: float = None
    spiegelhalter_z: float = None
    failures: tuple = ()  # (measure, reason) pairs for absent entries

    def values(self):
        return {name: getattr(self, name) for name in MEASURE_NAMES}

    def to_json(self):
        d = asdict(self)
        d["failures"] = [list(f) for f in self.failures]
        return json.dumps(d, sort_keys=True)

    def to_csv_row(self):
        return ["" if v is None else "%.17g" % v
                for v in (getattr(self, name) for name in MEASURE_NAMES)]


def brier(ps):
    """Mean squared difference between outcome and prediction."""
    return float(np.mean((ps.y - ps.p_hat) ** 2))


def brier_decomposition(ps):
    """Two-term split of the Brier score: signed mean-calibration term
    plus lack of spread. The terms sum to brier() algebraically."""
    p = ps.p_hat
    cal = float(np.mean((ps.y - p) * (1.0 - 2.0 * p)))
    disc = float(np.mean(p * (1.0 - p)))
    return cal, disc


def lack_of_spread(ps):
    """Mean p(1-p): 0 for predictions at the extremes, 0.25 at p=0.5."""
    return float(np.mean(ps.p_hat * (1.0 - ps.p_hat)))


def spiegelhalter_z(ps):
    p = ps.p_hat
    num = float(np.sum((ps.y - p) * (1.0 - 2.0 * p)))
    var = float(np.sum((1.0 - 2.0 * p) ** 2 * p * (1.0 - p)))
    if var <= 0.0:
        raise ValueError("zero variance: all predictions are 0.5")
    return num / np.sqrt(var)


def _require_both_classes(ps, what):
    s = int(ps.y.sum())
    if s == 0 or s == ps.n:
        raise ValueError("%s undefined: only one outcome class present" % what)


def auroc(ps):
    """Mann-Whitney AUROC with half credit for tied pairs."""
    _require_both_classes(ps, "AUROC")
    ranks = rankdata(ps.p_hat)
    npos = int(ps.y.sum())
    nneg = ps.n - npos
    rank_sum = float(ranks[ps.y == 1].sum())
    return (rank_sum - npos * (npos + 1) / 2.0) / (npos * nneg)


def auprc(ps):
    """Step-wise area under the precision-recall curve: sum of
    precision times recall increment over descending score cutoffs."""
    npos = int(ps.y.sum())
    if npos == 0:
        raise ValueError("AUPRC undefined: no positive outcomes")
    order = np.argsort(-ps.p_hat, kind="mergesort")
    y_sorted = ps.y[order].astype(np.float64)
    p_sorted = ps.p_hat[order]
    tp = np.cumsum(y_sorted)
    counts = np.arange(1, ps.n + 1, dtype=np.float64)
    # last index of each tied block = cutoff positions
    is_cut = np.empty(ps.n, dtype=bool)
    is_cut[:-1] = p_sorted[:-1] != p_sorted[1:]
    is_cut[-1] = True
    precision = tp[is_cut] / counts[is_cut]
    recall = tp[is_cut] / npos
    delta_r = np.diff(np.concatenate([[0.0], recall]))
    return float(np.sum(precision * delta_r))


def _logit(p):
    return np.log(p / (1.0 - p))


def _inv_logit(eta):
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def citl(ps):
    """Calibration-in-the-large: intercept of the logistic recalibration
    with logit(p_hat) as a fixed offset; 0 is ideal."""
    _require_both_classes(ps, "CITL")
    off = _logit(ps.p_hat)
    y = ps.y.astype(np.float64)
    a = 0.0
    for _ in range(100):
        mu = _inv_logit(a + off)
        g = float(np.sum(y - mu))
        h = float(np.sum(mu * (1.0 - mu)))
        if h <= 0.0:
            raise ValueError("CITL: zero curvature in recalibration fit")
        step = g / h
        a += step
        if abs(step) < 1e-12:
            break
    else:
        raise ValueError("CITL recalibration did not converge")
    return float(a)


def calibration_slope(ps):
    """Slope of logit P(y=1) = a + b*logit(p_hat); 1 is ideal."""
    _require_both_classes(ps, "calibration slope")
    lp = _logit(ps.p_hat)
    if float(np.var(lp)) <= 1e-300:
        raise ValueError("calibration slope undefined: logit(p_hat) constant")
    Xd = np.column_stack([np.ones(ps.n), lp])
    beta, converged, _, ok = backends.fit_irls(
        Xd, ps.y.astype(np.float64), 100, 1e-10, 0.0)
    if not ok:
        beta, converged, _, ok = backends.fit_irls(
            Xd, ps.y.astype(np.float64), 100, 1e-10, 1e-8)
    if not ok or not converged:
        raise ValueError("calibration slope recalibration did not converge")
    return float(beta[1])


def loess_smooth(ps, span=LOESS_SPAN_DEFAULT, degree=LOESS_DEGREE_DEFAULT):
    """LOESS calibration curve: tricube local polynomial regression of y
    on p_hat, evaluated at each p_hat, clamped into [0, 1]."""
    if ps.n < 10:
        raise ValueError("too few points to smooth (need >= 10, got %d)"
                         % ps.n)
    if not 0.0 < span <= 1.0:
        raise ValueError("span must lie in (0, 1], got %r" % span)
    if degree not in (0, 1):
        raise ValueError("degree must be 0 or 1, got %r" % degree)
    smoothed = backends.loess_smooth_values(
        ps.p_hat, ps.y.astype(np.float64), span, degree)
    return CalibrationCurve(np.clip(smoothed, 0.0, 1.0), span, degree)


def ici(ps, span=LOESS_SPAN_DEFAULT, degree=LOESS_DEGREE_DEFAULT):
    """Integrated calibration index: mean |smoothed - predicted|."""
    curve = loess_smooth(ps, span, degree)
    return float(np.mean(np.abs(curve.p_tilde - ps.p_hat)))


def report(ps, span=LOESS_SPAN_DEFAULT):
    """All measures; individually failing ones recorded as absent."""
    values = {}
    failures = []
    values["brier"] = brier(ps)
    values["lack_of_spread"] = lack_of_spread(ps)
    for name, fn in (("auroc", auroc), ("auprc", auprc), ("citl", citl),
                     ("calibration_slope", calibration_slope),
                     ("spiegelhalter_z", spiegelhalter_z),
                     ("ici", lambda s: ici(s, span))):
        try:
            values[name] = fn(ps)
        except ValueError as exc:
            failures.append((name, str(exc)))
    return MetricReport(failures=tuple(failures), **values)

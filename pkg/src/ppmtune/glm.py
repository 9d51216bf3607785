"""Logistic regression via safeguarded IRLS, and the per-patient
fit-on-subpopulation prediction used throughout tuning and validation."""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import backends
from .similarity import score_all, top_m

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitConfig:
    max_iter: int = 50
    tol: float = 1e-8
    ridge: float = 0.0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")


@dataclass(frozen=True)
class LogisticModel:
    coefficients: np.ndarray  # intercept first
    converged: bool
    iterations: int
    separation_flag: bool
    notes: tuple = ()


def fit_logistic(X, y, cfg=FitConfig()):
    """Maximum-likelihood logistic fit (optionally ridge-stabilized).

    Retries with ridge=1e-8 when the weighted system is singular at
    ridge=0; flags rather than fails on (quasi-)separation.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("X must be 2-D with one y per row")
    s = y.sum()
    if s == 0 or s == y.size:
        raise ValueError("degenerate outcome: only one class present")
    if X.shape[0] < X.shape[1] + 1:
        warnings.warn("fewer rows (%d) than parameters (%d)"
                      % (X.shape[0], X.shape[1] + 1))
    Xd = np.hstack([np.ones((X.shape[0], 1)), X])
    notes = []
    beta, converged, iters, ok = backends.fit_irls(
        Xd, y, cfg.max_iter, cfg.tol, cfg.ridge)
    if not ok:
        beta, converged, iters, ok = backends.fit_irls(
            Xd, y, cfg.max_iter, cfg.tol, 1e-8)
        notes.append("singular system; refit with ridge=1e-8")
    if not ok:
        raise np.linalg.LinAlgError("IRLS system singular even with ridge")
    sep = bool(np.max(np.abs(beta)) > backends.SEPARATION_COEF)
    return LogisticModel(beta, bool(converged), int(iters), sep, tuple(notes))


def predict_prob(model, x):
    """Inverse-logit of the linear predictor, clamped away from 0 and 1."""
    beta = model.coefficients
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (beta.size - 1,):
        raise ValueError("x length %d, expected %d" % (x.size, beta.size - 1))
    eta = beta[0] + float(np.dot(beta[1:], x))
    p = 1.0 / (1.0 + np.exp(-eta))
    return float(np.clip(p, backends.PROB_EPS, 1.0 - backends.PROB_EPS))


def fit_ppm_and_predict(index, train, M, cfg=FitConfig()):
    """Personalized prediction for one index patient.

    Scores the training set, fits a logistic model on the top-M most
    similar patients and predicts. A single-class subpopulation falls
    back to the Laplace-smoothed outcome mean.
    """
    if not train.standardized:
        raise ValueError("training data must be standardized")
    sub = top_m(score_all(index, train), M)
    ys = train.outcome[sub.row_indices]
    s = int(ys.sum())
    if s == 0 or s == M:
        log.warning("single-class subpopulation at M=%d; using smoothed mean", M)
        return (s + 0.5) / (M + 1.0)
    model = fit_logistic(train.predictors[sub.row_indices], ys, cfg)
    return predict_prob(model, index)


def ppm_predict_batch(test, train, m_values, cfg=FitConfig()):
    """Predictions for every test patient at every M in `m_values`.

    Returns (p_hat, status) of shape (n_test, len(m_values)); delegates
    to the compiled backend. Row/column order matches inputs.
    """
    if not train.standardized or not test.standardized:
        raise ValueError("both datasets must be standardized")
    m_values = np.asarray(m_values, dtype=np.int64)
    if m_values.size == 0 or m_values.min() < 1 or m_values.max() > train.n:
        raise ValueError("every M must lie in [1, n_train=%d]" % train.n)
    return backends.ppm_predict_multi(
        test.predictors, train.predictors,
        train.outcome.astype(np.float64), np.asarray(m_values, dtype=np.int64),
        cfg.max_iter, cfg.tol, cfg.ridge)

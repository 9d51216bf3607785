"""Repeated K-fold cross-validated tuning of the subpopulation size M
over a bounded grid, minimizing a mixture loss."""

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .data import kfold_partition
from .glm import FitConfig, ppm_predict_batch
from .loss import evaluate_loss
from .metrics import PredictionSet

log = logging.getLogger(__name__)

GRID_LOWER_FRAC_DEFAULT = 0.2
# upper grid bound by emphasis: 0.5 of n_train up to alpha=0.5, else 0.7
GRID_UPPER_LOW_ALPHA = 0.5
GRID_UPPER_HIGH_ALPHA = 0.7


@dataclass(frozen=True)
class TuningConfig:
    K: int = 10
    v: int = 20
    grid_lower_frac: float = GRID_LOWER_FRAC_DEFAULT
    grid_upper_frac: float = None  # None: auto-select from alpha
    grid_size: int = 11
    explicit_grid: tuple = None
    random_subset: int = None
    seed: int = 0
    fit: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("K must be >= 2")
        if self.v < 1:
            raise ValueError("v must be >= 1")
        upper = self.grid_upper_frac
        if upper is not None:
            if not 0.0 < self.grid_lower_frac < upper <= 1.0:
                raise ValueError("need 0 < lower < upper <= 1")

    def upper_frac_for(self, alpha):
        if self.grid_upper_frac is not None:
            return self.grid_upper_frac
        return (GRID_UPPER_LOW_ALPHA if alpha <= 0.5
                else GRID_UPPER_HIGH_ALPHA)


@dataclass(frozen=True)
class TuningResult:
    m_opt: int
    m_prop_opt: float
    loss_by_m: tuple  # rows of (M, mean_loss, sd_loss, n_evals)
    alpha: float
    n_train_per_fold: int
    excluded: tuple = ()  # (M, reason, count) for dropped evaluations


def build_grid(n_train, cfg, alpha=0.5):
    """Equally spaced integer grid within the fraction bounds; an
    optional seeded random subset implements random grid search."""
    if cfg.explicit_grid is not None:
        grid = sorted(set(int(m) for m in cfg.explicit_grid))
        if not grid or grid[0] < 1 or grid[-1] > n_train:
            raise ValueError("explicit grid must lie within [1, n_train]")
    else:
        if n_train < 50:
            warnings.warn("n_train=%d is small for grid tuning" % n_train)
        lower = int(math.ceil(cfg.grid_lower_frac * n_train))
        upper = int(math.floor(cfg.upper_frac_for(alpha) * n_train))
        if lower > upper:
            raise ValueError("empty M grid: [%d, %d]" % (lower, upper))
        pts = np.linspace(lower, upper, cfg.grid_size)
        grid = sorted(set(int(round(v)) for v in pts))
    if cfg.random_subset is not None and cfg.random_subset < len(grid):
        rng = np.random.default_rng(
            np.random.SeedSequence([cfg.seed, 0x9721]))
        pick = rng.choice(len(grid), size=cfg.random_subset, replace=False)
        grid = sorted(grid[i] for i in pick)
    return list(grid)


def min_train_size(n, K):
    """Smallest per-fold training size under balanced K folds."""
    return n - int(math.ceil(n / K))


def evaluate_fold(train, test, M, spec, fit=FitConfig()):
    """Mixture loss of PPM predictions for one train/test split."""
    p_hat, _ = ppm_predict_batch(test, train, [M], fit)
    return evaluate_loss(spec, PredictionSet(test.outcome, p_hat[:, 0]))


def _cv_prediction_sets(trte, grid, cfg):
    """Yield (repeat, fold, {M: PredictionSet}) over the CV lattice."""
    m_values = np.asarray(grid, dtype=np.int64)
    for r in range(cfg.v):
        fa = kfold_partition(trte, cfg.K, r, cfg.seed)
        for k in range(cfg.K):
            test_idx = np.flatnonzero(fa.fold_index == k)
            train_idx = np.flatnonzero(fa.fold_index != k)
            train = trte.take(train_idx)
            test = trte.take(test_idx)
            p_hat, _ = ppm_predict_batch(test, train, m_values, cfg.fit)
            sets = {M: PredictionSet(test.outcome, p_hat[:, j])
                    for j, M in enumerate(grid)}
            yield r, k, sets


def _select(grid, totals, exclusions, alpha, n_train):
    rows = []
    kept = []
    for M in grid:
        vals = totals[M]
        if not vals:
            continue
        mean = float(np.mean(vals))
        sd = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
        rows.append((M, mean, sd, len(vals)))
        kept.append((mean, M))
    if not rows:
        raise ValueError("all M values excluded; nothing to select")
    # ties at equal mean loss go to the smaller M
    best = min(kept, key=lambda t: (t[0], t[1]))
    m_opt = best[1]
    excluded = tuple((M, reason, count)
                     for (M, reason), count in sorted(exclusions.items()))
    return TuningResult(m_opt, m_opt / n_train, tuple(rows), alpha,
                        n_train, excluded)


def tune_multi(trte, specs, cfg):
    """Tune M for several loss specs over one shared CV evaluation.

    The per-(repeat, fold, M) prediction sets are computed once and each
    spec's loss is evaluated on them, so sweeping alpha costs little
    more than a single tuning run.
    """
    if not trte.standardized:
        raise ValueError("TrTe data must be standardized")
    if cfg.v * cfg.K < 200:
        warnings.warn("v*K = %d < 200; tuning may be noisy"
                      % (cfg.v * cfg.K))
    n_train = min_train_size(trte.n, cfg.K)
    grids = [build_grid(n_train, cfg, spec.alpha) for spec in specs]
    union = sorted(set(m for g in grids for m in g))
    totals = [{M: [] for M in g} for g in grids]
    exclusions = [{} for _ in specs]
    for r, k, sets in _cv_prediction_sets(trte, union, cfg):
        for si, spec in enumerate(specs):
            for M in grids[si]:
                try:
                    lv = evaluate_loss(spec, sets[M])
                except ValueError as exc:
                    key = (M, str(exc))
                    exclusions[si][key] = exclusions[si].get(key, 0) + 1
                    log.warning("fold (%d,%d) M=%d excluded: %s",
                                r, k, M, exc)
                    continue
                totals[si][M].append(lv.total)
    return [_select(grids[i], totals[i], exclusions[i], specs[i].alpha,
                    n_train) for i in range(len(specs))]


def tune_m(trte, spec, cfg):
    """Optimal M (and M proportion) minimizing the mean loss over the
    v-repeated K-fold lattice."""
    return tune_multi(trte, [spec], cfg)[0]


def sweep_measures(trte, measure_names, cfg, loess_span=None):
    """Raw performance measures (not the loss) at each grid M.

    Returns rows of (M, measure, mean, sd, n_evals) over the CV lattice;
    per-fold failures are excluded from that measure's average.
    """
    span = metrics.LOESS_SPAN_DEFAULT if loess_span is None else loess_span
    fns = {
        "auroc": metrics.auroc,
        "auprc": metrics.auprc,
        "lack_of_spread": metrics.lack_of_spread,
        "citl": metrics.citl,
        "calibration_slope": metrics.calibration_slope,
        "ici": lambda ps: metrics.ici(ps, span),
        "brier": metrics.brier,
        "spiegelhalter_z": metrics.spiegelhalter_z,
    }
    unknown = [m for m in measure_names if m not in fns]
    if unknown:
        raise ValueError("unknown measures %r; choose from %r"
                         % (unknown, sorted(fns)))
    n_train = min_train_size(trte.n, cfg.K)
    grid = build_grid(n_train, cfg)
    acc = {(M, m): [] for M in grid for m in measure_names}
    for r, k, sets in _cv_prediction_sets(trte, grid, cfg):
        for M in grid:
            for m in measure_names:
                try:
                    acc[(M, m)].append(fns[m](sets[M]))
                except ValueError as exc:
                    log.warning("fold (%d,%d) M=%d measure %s failed: %s",
                                r, k, M, m, exc)
    rows = []
    for M in grid:
        for m in measure_names:
            vals = acc[(M, m)]
            if not vals:
                rows.append((M, m, float("nan"), float("nan"), 0))
                continue
            mean = float(np.mean(vals))
            sd = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
            rows.append((M, m, mean, sd, len(vals)))
    return rows

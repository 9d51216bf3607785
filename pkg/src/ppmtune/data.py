"""Dataset container, CSV ingestion, standardization and splitting."""

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Dataset:
    """Predictor matrix plus binary outcome.

    Immutable after construction; `standardized` records whether every
    predictor column has been min-max mapped into [-1, 1].
    """
    predictors: np.ndarray
    outcome: np.ndarray
    feature_names: tuple
    standardized: bool = False

    def __post_init__(self):
        X = np.asarray(self.predictors, dtype=np.float64)
        y = np.asarray(self.outcome)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("predictors must be a non-empty 2-D matrix")
        if y.shape != (X.shape[0],):
            raise ValueError("outcome length %d does not match %d rows"
                             % (y.shape[0] if y.ndim == 1 else -1, X.shape[0]))
        if not np.all(np.isfinite(X)):
            bad = np.argwhere(~np.isfinite(X))[0]
            raise ValueError("non-finite predictor value at row %d column %d"
                             % (bad[0], bad[1]))
        if not np.all((y == 0) | (y == 1)):
            bad = int(np.argmax(~((y == 0) | (y == 1))))
            raise ValueError("outcome must be 0/1; offending row %d" % bad)
        if len(self.feature_names) != X.shape[1]:
            raise ValueError("feature_names length does not match predictors")
        if self.standardized:
            if X.min() < -1.0 - 1e-12 or X.max() > 1.0 + 1e-12:
                raise ValueError("standardized data must lie in [-1, 1]")
        X.setflags(write=False)
        y = y.astype(np.int8)
        y.setflags(write=False)
        object.__setattr__(self, "predictors", X)
        object.__setattr__(self, "outcome", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self):
        return self.predictors.shape[0]

    @property
    def p(self):
        return self.predictors.shape[1]

    def take(self, indices):
        """Row subset, preserving metadata."""
        idx = np.asarray(indices)
        return Dataset(self.predictors[idx], self.outcome[idx],
                       self.feature_names, self.standardized)


@dataclass(frozen=True)
class SplitPair:
    trte: Dataset
    validation: Dataset
    q: float
    seed: int


@dataclass(frozen=True)
class FoldAssignment:
    fold_index: np.ndarray
    K: int
    repeat_id: int
    seed: int


def load_csv(path, outcome_column):
    """Parse a header-ed CSV into a Dataset (standardized=False)."""
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except FileNotFoundError:
        raise FileNotFoundError("no such file: %s" % path)
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("%s: empty file" % path)
        if outcome_column not in header:
            raise ValueError("%s: outcome column %r not in header %r"
                             % (path, outcome_column, header))
        y_col = header.index(outcome_column)
        names = [h for i, h in enumerate(header) if i != y_col]
        rows = []
        ys = []
        for rownum, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError("%s: row %d has %d fields, expected %d"
                                 % (path, rownum, len(row), len(header)))
            vals = []
            for colnum, cell in enumerate(row):
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(
                        "%s: non-numeric cell %r at row %d column %r"
                        % (path, cell, rownum, header[colnum]))
                if colnum == y_col:
                    if v not in (0.0, 1.0):
                        raise ValueError(
                            "%s: outcome value %r at row %d is not 0/1"
                            % (path, cell, rownum))
                    ys.append(int(v))
                else:
                    vals.append(v)
            rows.append(vals)
    if not rows:
        raise ValueError("%s: no data rows" % path)
    return Dataset(np.array(rows, dtype=np.float64),
                   np.array(ys), tuple(names))


def write_csv(d, path, outcome_column="y"):
    """Write a Dataset back to CSV with 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(d.feature_names) + [outcome_column])
        for i in range(d.n):
            row = ["%.17g" % v for v in d.predictors[i]]
            row.append(str(int(d.outcome[i])))
            writer.writerow(row)


def minmax_params(d):
    """Per-column (min, max) used by the [-1, 1] map."""
    return d.predictors.min(axis=0), d.predictors.max(axis=0)


def standardize_matrix(X, mins=None, maxs=None, clamp=False):
    if mins is None:
        mins = X.min(axis=0)
        maxs = X.max(axis=0)
    span = maxs - mins
    out = np.zeros_like(X)
    nz = span > 0
    out[:, nz] = 2.0 * (X[:, nz] - mins[nz]) / span[nz] - 1.0
    if clamp:
        np.clip(out, -1.0, 1.0, out=out)
    return out


def standardize(d, params=None, clamp=False):
    """Min-max map of every predictor column onto [-1, 1].

    Constant columns map to 0. When `params` (mins, maxs from a training
    set) is given, values are mapped with those bounds and clamped into
    [-1, 1] if `clamp` is set.
    """
    if d.standardized:
        raise ValueError("dataset already standardized")
    if params is not None:
        mins, maxs = params
        X = standardize_matrix(d.predictors, mins, maxs, clamp=clamp)
    else:
        X = standardize_matrix(d.predictors)
    return Dataset(X, d.outcome, d.feature_names, standardized=True)


def split_holdout(d, q, seed):
    """Seeded random partition into TrTe (1-q) and validation (q)."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly in (0, 1), got %r" % q)
    n_val = int(round(d.n * q))
    if n_val < 30:
        warnings.warn("validation set has only %d rows" % n_val)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(d.n)
    val_idx = np.sort(perm[:n_val])
    trte_idx = np.sort(perm[n_val:])
    return SplitPair(d.take(trte_idx), d.take(val_idx), q, seed)


def kfold_partition(d, K, repeat_id, seed):
    """Balanced random fold assignment; distinct repeat_id gives a
    distinct permutation under the same seed."""
    if not 2 <= K <= d.n:
        raise ValueError("K must be in [2, %d], got %r" % (d.n, K))
    rng = np.random.default_rng(np.random.SeedSequence([seed, repeat_id]))
    perm = rng.permutation(d.n)
    fold_index = np.empty(d.n, dtype=np.int64)
    fold_index[perm] = np.arange(d.n) % K
    return FoldAssignment(fold_index, K, repeat_id, seed)

"""Cosine patient similarity and top-M subpopulation selection."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SimilarityScores:
    scores: np.ndarray
    index_id: object = None


@dataclass(frozen=True)
class Subpopulation:
    row_indices: np.ndarray
    M: int


def cosine_similarity(a, b):
    """dot(a,b) / (|a||b|), clamped into [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("vector lengths differ: %d vs %d" % (a.size, b.size))
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for a zero vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def score_all(index, train, index_id=None):
    """Cosine score of the index patient against every training row."""
    x = np.asarray(index, dtype=np.float64)
    if x.shape != (train.p,):
        raise ValueError("index vector length %d, expected %d"
                         % (x.size, train.p))
    xn = np.linalg.norm(x)
    if xn == 0.0:
        raise ValueError("cosine similarity undefined for a zero index vector")
    norms = np.linalg.norm(train.predictors, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValueError("zero predictor vector in training row %d" % zero[0])
    scores = np.clip(train.predictors @ x / (norms * xn), -1.0, 1.0)
    return SimilarityScores(scores, index_id)


def top_m(scores, M):
    """Indices of the M largest scores; ties broken by smaller row index."""
    s = scores.scores
    n = s.shape[0]
    if not 1 <= M <= n:
        raise ValueError("M must be in [1, %d], got %r" % (n, M))
    order = np.argsort(-s, kind="mergesort")
    return Subpopulation(order[:M].copy(), M)

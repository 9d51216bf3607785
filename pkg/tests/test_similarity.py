import numpy as np
import pytest

from ppmtune.data import Dataset
from ppmtune.similarity import cosine_similarity, score_all, top_m


def as_dataset(X):
    y = np.zeros(X.shape[0], dtype=int)
    y[0] = 1
    return Dataset(np.clip(X, -1, 1), y,
                   tuple("f%d" % j for j in range(X.shape[1])),
                   standardized=True)


class TestCosine:
    def test_identical_vectors(self):
        v = np.array([0.3, -0.7, 0.1])
        assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-15)

    def test_opposite_vectors(self):
        v = np.array([0.3, -0.7, 0.1])
        assert cosine_similarity(v, -v) == pytest.approx(-1.0, abs=1e-15)

    def test_orthogonal(self):
        assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_scale_invariant(self):
        a = np.array([0.2, 0.5, -0.1])
        b = np.array([-0.4, 0.9, 0.3])
        assert cosine_similarity(a, b) == pytest.approx(
            cosine_similarity(3.0 * a, b), abs=1e-15)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError, match="zero vector"):
            cosine_similarity([0.0, 0.0], [1.0, 0.0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="differ"):
            cosine_similarity([1.0], [1.0, 2.0])

    def test_clamped_to_unit_interval(self):
        # near-parallel vectors can overshoot 1 in floating point
        rng = np.random.default_rng(0)
        for _ in range(100):
            a = rng.normal(size=5)
            s = cosine_similarity(a, a * 1.0000001)
            assert -1.0 <= s <= 1.0


class TestScoreAll:
    def test_matches_pairwise(self):
        rng = np.random.default_rng(1)
        X = rng.uniform(-1, 1, size=(30, 4))
        d = as_dataset(X)
        x = rng.uniform(-1, 1, size=4)
        got = score_all(x, d).scores
        want = [cosine_similarity(x, X[i]) for i in range(30)]
        np.testing.assert_allclose(got, want, atol=1e-15)

    def test_zero_training_row_located(self):
        X = np.ones((4, 2))
        X[2] = 0.0
        d = as_dataset(X)
        with pytest.raises(ValueError, match="row 2"):
            score_all(np.ones(2), d)

    def test_wrong_length(self):
        d = as_dataset(np.ones((3, 2)))
        with pytest.raises(ValueError, match="length"):
            score_all(np.ones(3), d)


class TestTopM:
    def test_selects_largest(self):
        d = as_dataset(np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5],
                                 [-1.0, 0.0]]))
        sub = top_m(score_all([1.0, 0.0], d), 2)
        assert list(sub.row_indices) == [0, 2]

    def test_tie_breaks_to_smaller_index(self):
        # rows 1 and 3 are identical, both tied for second place
        d = as_dataset(np.array([[1.0, 0.0], [0.5, 0.5], [0.9, 0.1],
                                 [0.5, 0.5]]))
        sub = top_m(score_all([1.0, 0.0], d), 3)
        assert list(sub.row_indices) == [0, 2, 1]

    def test_m_equals_n(self):
        d = as_dataset(np.eye(5))
        sub = top_m(score_all(np.ones(5), d), 5)
        assert sorted(sub.row_indices) == [0, 1, 2, 3, 4]

    def test_m_bounds(self):
        d = as_dataset(np.eye(3))
        scores = score_all(np.ones(3), d)
        for M in (0, 4, -1):
            with pytest.raises(ValueError):
                top_m(scores, M)

import math

import numpy as np
import pytest

from ppmtune import metrics
from ppmtune.metrics import (MEASURE_NAMES, PredictionSet, auprc, auroc,
                             brier, brier_decomposition, calibration_slope,
                             citl, ici, lack_of_spread, loess_smooth, report,
                             spiegelhalter_z)


def random_set(n, seed, prevalence=0.4):
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < prevalence).astype(int)
    if y.sum() == 0:
        y[0] = 1
    if y.sum() == n:
        y[0] = 0
    p = rng.uniform(0.01, 0.99, n)
    return PredictionSet(y, p)


def auroc_oracle(ps):
    """All positive/negative pairs, half credit for ties."""
    pos = ps.p_hat[ps.y == 1]
    neg = ps.p_hat[ps.y == 0]
    total = 0.0
    for a in pos:
        for b in neg:
            if a > b:
                total += 1.0
            elif a == b:
                total += 0.5
    return total / (pos.size * neg.size)


def auprc_oracle(ps):
    """Threshold enumeration of sum(P(c) * delta_recall(c))."""
    npos = int(ps.y.sum())
    cuts = sorted(set(ps.p_hat), reverse=True)
    area = 0.0
    prev_recall = 0.0
    for c in cuts:
        sel = ps.p_hat >= c
        tp = int(ps.y[sel].sum())
        precision = tp / int(sel.sum())
        recall = tp / npos
        area += precision * (recall - prev_recall)
        prev_recall = recall
    return area


class TestPredictionSet:
    def test_basic(self):
        ps = PredictionSet([0, 1, 1], [0.2, 0.8, 0.5])
        assert ps.n == 3

    def test_rejects_boundary_probs(self):
        for p in (0.0, 1.0, -0.1, 1.1, np.nan):
            with pytest.raises(ValueError):
                PredictionSet([0, 1], [0.5, p])

    def test_rejects_non_binary_y(self):
        with pytest.raises(ValueError):
            PredictionSet([0, 2], [0.5, 0.5])

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            PredictionSet([0, 1], [0.5])


class TestBrier:
    def test_decomposition_identity(self):
        for seed in range(50):
            ps = random_set(100, seed)
            cal, disc = brier_decomposition(ps)
            assert abs(brier(ps) - (cal + disc)) < 1e-12

    def test_perfect_predictions(self):
        ps = PredictionSet([0, 1], [1e-12, 1.0 - 1e-12])
        assert brier(ps) < 1e-20

    def test_hand_value(self):
        ps = PredictionSet([1, 0], [0.8, 0.3])
        assert brier(ps) == pytest.approx((0.04 + 0.09) / 2, abs=1e-15)


class TestLackOfSpread:
    def test_bounds(self):
        for seed in range(20):
            ps = random_set(50, seed)
            assert 0.0 <= lack_of_spread(ps) <= 0.25

    def test_maximum_at_half(self):
        ps = PredictionSet([0, 1, 0], [0.5, 0.5, 0.5])
        assert lack_of_spread(ps) == 0.25

    def test_extreme_predictions(self):
        ps = PredictionSet([0, 1], [1e-12, 1.0 - 1e-12])
        assert lack_of_spread(ps) < 1e-11


class TestSpiegelhalter:
    def test_zero_for_exactly_calibrated_block(self):
        # 3 events out of 4 at p = 0.75: sum(y - p) = 0, so z = 0
        ps = PredictionSet([1, 1, 1, 0], [0.75] * 4)
        assert spiegelhalter_z(ps) == pytest.approx(0.0, abs=1e-12)

    def test_all_half_rejected(self):
        ps = PredictionSet([0, 1], [0.5, 0.5])
        with pytest.raises(ValueError, match="variance"):
            spiegelhalter_z(ps)

    def test_large_n_null_distribution(self):
        # under correct calibration z should be roughly standard normal
        rng = np.random.default_rng(0)
        zs = []
        for _ in range(200):
            p = rng.uniform(0.05, 0.95, 500)
            y = (rng.random(500) < p).astype(int)
            zs.append(spiegelhalter_z(PredictionSet(y, p)))
        assert abs(np.mean(zs)) < 0.2
        assert 0.8 < np.std(zs) < 1.25


class TestAuroc:
    def test_matches_oracle(self):
        for seed in range(20):
            ps = random_set(80, seed)
            assert auroc(ps) == auroc_oracle(ps)

    def test_with_heavy_ties(self):
        rng = np.random.default_rng(5)
        p = rng.choice([0.2, 0.5, 0.8], size=60)
        y = rng.integers(0, 2, 60)
        y[0], y[1] = 0, 1
        ps = PredictionSet(y, p)
        assert auroc(ps) == auroc_oracle(ps)

    def test_perfect_ranking(self):
        ps = PredictionSet([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9])
        assert auroc(ps) == 1.0

    def test_constant_scores(self):
        ps = PredictionSet([0, 1, 0, 1], [0.4, 0.4, 0.4, 0.4])
        assert auroc(ps) == 0.5

    def test_one_class_rejected(self):
        with pytest.raises(ValueError, match="one outcome class"):
            auroc(PredictionSet([1, 1], [0.5, 0.6]))


class TestAuprc:
    def test_matches_oracle(self):
        for seed in range(20):
            ps = random_set(80, seed)
            assert auprc(ps) == pytest.approx(auprc_oracle(ps), abs=1e-14)

    def test_with_ties(self):
        rng = np.random.default_rng(6)
        p = rng.choice([0.3, 0.6], size=50)
        y = rng.integers(0, 2, 50)
        y[0] = 1
        ps = PredictionSet(y, p)
        assert auprc(ps) == pytest.approx(auprc_oracle(ps), abs=1e-14)

    def test_constant_scores_give_prevalence(self):
        ps = PredictionSet([0, 1, 1, 0, 0], [0.3] * 5)
        assert auprc(ps) == 0.4

    def test_perfect_ranking(self):
        ps = PredictionSet([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9])
        assert auprc(ps) == 1.0

    def test_no_positives_rejected(self):
        with pytest.raises(ValueError, match="no positive"):
            auprc(PredictionSet([0, 0], [0.5, 0.6]))


class TestRecalibration:
    def test_citl_zero_when_calibrated(self):
        rng = np.random.default_rng(1)
        p = rng.uniform(0.05, 0.95, 20000)
        y = (rng.random(20000) < p).astype(int)
        assert abs(citl(PredictionSet(y, p))) < 0.05

    def test_citl_detects_offset(self):
        # predictions shifted down by 1 on the logit scale
        rng = np.random.default_rng(2)
        p = rng.uniform(0.05, 0.95, 20000)
        y = (rng.random(20000) < p).astype(int)
        lo = np.log(p / (1 - p)) - 1.0
        shifted = 1.0 / (1.0 + np.exp(-lo))
        assert citl(PredictionSet(y, shifted)) == pytest.approx(1.0, abs=0.08)

    def test_slope_one_when_calibrated(self):
        rng = np.random.default_rng(3)
        p = rng.uniform(0.05, 0.95, 20000)
        y = (rng.random(20000) < p).astype(int)
        assert calibration_slope(PredictionSet(y, p)) == pytest.approx(
            1.0, abs=0.05)

    def test_slope_half_for_logit_doubled(self):
        rng = np.random.default_rng(4)
        p = rng.uniform(0.05, 0.95, 20000)
        y = (rng.random(20000) < p).astype(int)
        doubled = 1.0 / (1.0 + np.exp(-2.0 * np.log(p / (1 - p))))
        assert calibration_slope(PredictionSet(y, doubled)) == pytest.approx(
            0.5, abs=0.05)

    def test_constant_logit_rejected(self):
        ps = PredictionSet([0, 1, 0, 1], [0.3] * 4)
        with pytest.raises(ValueError, match="constant"):
            calibration_slope(ps)


def loess_oracle(x, y, span, degree):
    """Independent per-point local WLS with tricube weights."""
    n = x.size
    k = int(math.ceil(span * n))
    out = np.empty(n)
    for i in range(n):
        dist = np.abs(x - x[i])
        idx = np.argsort(dist, kind="stable")[:k]
        h = dist[idx].max()
        if h == 0.0:
            out[i] = y[x == x[i]].mean()
            continue
        u = dist[idx] / h
        w = np.clip(1.0 - u ** 3, 0.0, None) ** 3
        if w.sum() == 0.0:
            w = np.ones_like(w)
        if degree == 0:
            out[i] = np.sum(w * y[idx]) / np.sum(w)
        else:
            A = np.column_stack([np.ones(idx.size), x[idx] - x[i]])
            sw = np.sqrt(w)
            beta = np.linalg.lstsq(A * sw[:, None], sw * y[idx],
                                   rcond=None)[0]
            out[i] = beta[0]
    return out


class TestLoess:
    def test_matches_per_point_oracle(self):
        rng = np.random.default_rng(7)
        x = rng.uniform(0.02, 0.98, 200)
        y = (rng.random(200) < x).astype(int)
        ps = PredictionSet(y, x)
        for degree in (0, 1):
            curve = loess_smooth(ps, 0.75, degree)
            want = np.clip(loess_oracle(x, y.astype(float), 0.75, degree),
                           0.0, 1.0)
            np.testing.assert_allclose(curve.p_tilde, want, atol=1e-6)

    def test_constant_y_recovered(self):
        x = np.linspace(0.1, 0.9, 50)
        ps = PredictionSet(np.ones(50, dtype=int), x)
        curve = loess_smooth(ps)
        np.testing.assert_allclose(curve.p_tilde, 1.0, atol=1e-10)

    def test_too_few_points(self):
        with pytest.raises(ValueError, match="too few"):
            loess_smooth(PredictionSet([0, 1], [0.2, 0.8]))

    def test_bad_span_and_degree(self):
        ps = random_set(30, 0)
        with pytest.raises(ValueError):
            loess_smooth(ps, span=0.0)
        with pytest.raises(ValueError):
            loess_smooth(ps, span=1.5)
        with pytest.raises(ValueError):
            loess_smooth(ps, degree=2)


class TestIci:
    def test_constant_predictor_fixture(self):
        # p = 0.5 everywhere, mean outcome 0.7: smoother returns 0.7
        y = np.array([1] * 7 + [0] * 3)
        ps = PredictionSet(y, np.full(10, 0.5))
        assert ici(ps) == pytest.approx(0.2, abs=1e-6)

    def test_zero_for_self_consistent_curve(self):
        # outcomes equal a smooth function of p sampled densely
        rng = np.random.default_rng(8)
        p = np.sort(rng.uniform(0.05, 0.95, 400))
        y = (rng.random(400) < p).astype(int)
        assert ici(PredictionSet(y, p)) < 0.1


class TestReport:
    def test_all_measures_present(self):
        rep = report(random_set(200, 9))
        for name in MEASURE_NAMES:
            assert getattr(rep, name) is not None
        assert rep.failures == ()

    def test_brier_equals_components(self):
        ps = random_set(150, 10)
        rep = report(ps)
        cal, _ = brier_decomposition(ps)
        assert rep.brier == pytest.approx(cal + rep.lack_of_spread,
                                          abs=1e-12)

    def test_partial_failure_recorded(self):
        # one-class outcome: AUROC/CITL/slope fail, Brier family survives
        ps = PredictionSet(np.ones(20, dtype=int),
                           np.linspace(0.1, 0.9, 20))
        rep = report(ps)
        assert rep.brier is not None
        assert rep.auroc is None
        failed = {name for name, _ in rep.failures}
        assert "auroc" in failed and "citl" in failed

    def test_json_and_csv_row(self):
        rep = report(random_set(100, 11))
        import json
        back = json.loads(rep.to_json())
        assert back["auroc"] == rep.auroc
        row = rep.to_csv_row()
        assert len(row) == len(MEASURE_NAMES)
        assert float(row[0]) == rep.auroc

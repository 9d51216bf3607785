import numpy as np
import pytest

from ppmtune import simgen
from ppmtune.simgen import (DEFAULT_CLUSTER1, DEFAULT_CLUSTER2, ClusterSpec,
                            OutcomeForm, OutcomeModel, calibrate_intercept,
                            gen_predictors, linear_outcome, nonlinear_outcome,
                            scenario, scenario_ids, scenario_model,
                            simulate_outcome)


class TestClusterSpec:
    def test_default_predictor_count(self):
        assert DEFAULT_CLUSTER1.p == 40
        assert DEFAULT_CLUSTER2.p == 40

    def test_validation(self):
        with pytest.raises(ValueError, match="variance"):
            ClusterSpec(10, ((2, 0.0, 0.0),), ())
        with pytest.raises(ValueError, match="probability"):
            ClusterSpec(10, (), ((2, 1.0),))


class TestGenPredictors:
    def test_shape_and_range(self):
        X, names, n1 = gen_predictors(seed=0)
        assert X.shape == (10000, 40)
        assert n1 == 5000
        assert len(names) == 40
        assert X.min() == -1.0 and X.max() == 1.0

    def test_deterministic(self):
        a = gen_predictors(seed=3)[0]
        b = gen_predictors(seed=3)[0]
        np.testing.assert_array_equal(a, b)

    def test_seed_matters(self):
        a = gen_predictors(seed=3)[0]
        b = gen_predictors(seed=4)[0]
        assert not np.array_equal(a, b)

    def test_binary_columns_are_pm_one(self):
        X, _, _ = gen_predictors(seed=1)
        # columns 20..39 are Bernoulli blocks
        for j in range(20, 40):
            assert set(np.unique(X[:, j])) <= {-1.0, 1.0}

    def test_cluster_separation(self):
        """Mean within-cluster cosine similarity must exceed the
        between-cluster mean, with positive margin."""
        spec1 = ClusterSpec(1000, DEFAULT_CLUSTER1.continuous_blocks,
                            DEFAULT_CLUSTER1.bernoulli_blocks)
        spec2 = ClusterSpec(1000, DEFAULT_CLUSTER2.continuous_blocks,
                            DEFAULT_CLUSTER2.bernoulli_blocks)
        X, _, n1 = gen_predictors(spec1, spec2, seed=0)
        norm = X / np.linalg.norm(X, axis=1, keepdims=True)
        S = norm @ norm.T
        within = (S[:n1, :n1].mean() + S[n1:, n1:].mean()) / 2
        between = S[:n1, n1:].mean()
        assert within - between > 0.0

    def test_mismatched_specs(self):
        bad = ClusterSpec(10, ((3, 0.0, 1.0),), ())
        with pytest.raises(ValueError, match="agree"):
            gen_predictors(DEFAULT_CLUSTER1, bad, seed=0)


class TestCalibrateIntercept:
    def test_constant_zero_balanced(self):
        assert calibrate_intercept(np.zeros(100), 0.5) == pytest.approx(
            0.0, abs=1e-3)

    def test_constant_zero_low(self):
        c = calibrate_intercept(np.zeros(100), 0.05)
        assert c == pytest.approx(np.log(0.05 / 0.95), abs=1e-2)

    def test_self_verifying(self):
        rng = np.random.default_rng(0)
        z = rng.normal(0, 3, 5000)
        c = calibrate_intercept(z, 0.15)
        assert np.mean(1 / (1 + np.exp(-(z + c)))) == pytest.approx(
            0.15, abs=1e-4)

    def test_bad_target(self):
        for t in (0.0, 1.0, -0.1):
            with pytest.raises(ValueError):
                calibrate_intercept(np.zeros(10), t)


class TestSimulateOutcome:
    def zero_noise_model(self):
        return OutcomeModel(
            OutcomeForm.LINEAR,
            (("lin", (0,), 2.0),), (("lin", (0,), 2.0),),
            intercepts=(0.0, 0.0), noise_sd=0.0)

    def test_deterministic(self):
        X, _, n1 = gen_predictors(seed=2)
        m = self.zero_noise_model()
        np.testing.assert_array_equal(simulate_outcome(X, n1, m, 5),
                                      simulate_outcome(X, n1, m, 5))

    def test_form_guards(self):
        X, _, n1 = gen_predictors(seed=2)
        m = self.zero_noise_model()
        linear_outcome(X, n1, m, 0)
        with pytest.raises(ValueError, match="not nonlinear"):
            nonlinear_outcome(X, n1, m, 0)

    def test_needs_intercept_or_target(self):
        m = OutcomeModel(OutcomeForm.LINEAR, (("lin", (0,), 1.0),),
                         (("lin", (0,), 1.0),))
        with pytest.raises(ValueError, match="intercepts or"):
            simulate_outcome(np.zeros((10, 2)), 5, m, 0)

    def test_unknown_term_kind(self):
        m = OutcomeModel(OutcomeForm.LINEAR, (("tanh", (0,), 1.0),),
                         (("lin", (0,), 1.0),), intercepts=(0.0, 0.0))
        with pytest.raises(ValueError, match="unknown term"):
            simulate_outcome(np.zeros((10, 2)), 5, m, 0)

    def test_association_with_named_predictor(self):
        # strong positive coefficient on x1: outcome rate should rise
        # with x1 within each cluster
        X, _, n1 = gen_predictors(seed=3)
        m = OutcomeModel(OutcomeForm.LINEAR, (("lin", (0,), 8.0),),
                         (("lin", (0,), 8.0),), noise_sd=0.0,
                         target_prevalence=0.5)
        y = simulate_outcome(X, n1, m, 1)
        x1 = X[:n1, 0]
        q1, q3 = np.quantile(x1, [0.25, 0.75])
        assert y[:n1][x1 > q3].mean() > y[:n1][x1 < q1].mean() + 0.2


class TestScenarioLibrary:
    def test_twelve_ids_factorial(self):
        ids = scenario_ids()
        assert len(ids) == 12
        for form in ("linear", "nonlinear"):
            for n_assoc in ("10", "20"):
                for prev in ("low", "moderate", "balanced"):
                    assert "%s-%s-%s" % (form, n_assoc, prev) in ids

    def test_unknown_id_lists_valid(self):
        with pytest.raises(ValueError, match="linear-10-low"):
            scenario_model("linear-5-low")

    def test_model_forms(self):
        assert scenario_model("linear-20-moderate").form is OutcomeForm.LINEAR
        assert scenario_model("nonlinear-20-low").form \
            is OutcomeForm.NONLINEAR

    def test_associated_predictor_counts(self):
        for sid in scenario_ids():
            n_assoc = int(sid.split("-")[1])
            m = scenario_model(sid)
            for terms in (m.terms_cluster1, m.terms_cluster2):
                used = set()
                for _, idx, _ in terms:
                    used.update(idx)
                assert len(used) == n_assoc, sid


class TestScenarioDatasets:
    @pytest.mark.parametrize("sid,lo,hi", [
        ("linear-20-moderate", 0.10, 0.20),
        ("nonlinear-20-low", 0.02, 0.08),
        ("linear-20-balanced", 0.40, 0.60),
    ])
    def test_prevalence_windows(self, sid, lo, hi):
        d = scenario(sid, n1=1000, n2=1000, seed=0)
        assert lo <= d.outcome.mean() <= hi

    def test_verbatim_low_scenario_band(self):
        # fixed-intercept model: qualitatively low prevalence
        d = scenario("linear-10-low", n1=2000, n2=2000, seed=0)
        assert 0.02 <= d.outcome.mean() <= 0.12

    def test_prevalence_across_seeds(self):
        rates = [scenario("linear-10-moderate", 500, 500, s).outcome.mean()
                 for s in range(10)]
        assert all(0.08 <= r <= 0.22 for r in rates)

    def test_deterministic_bytes(self):
        a = scenario("nonlinear-10-balanced", 300, 300, seed=9)
        b = scenario("nonlinear-10-balanced", 300, 300, seed=9)
        assert a.predictors.tobytes() == b.predictors.tobytes()
        assert a.outcome.tobytes() == b.outcome.tobytes()

    def test_standardized_output(self):
        d = scenario("linear-10-balanced", 200, 200, seed=0)
        assert d.standardized
        assert d.n == 400 and d.p == 40

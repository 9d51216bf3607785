"""Seeded two-cluster simulation generator: 40 mixed predictors per
patient and 12 factorial outcome scenarios (linear/nonlinear x 10/20
associated predictors x low/moderate/balanced prevalence)."""

import enum
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .data import Dataset, standardize_matrix


class OutcomeForm(enum.Enum):
    LINEAR = "linear"
    NONLINEAR = "nonlinear"


@dataclass(frozen=True)
class ClusterSpec:
    n: int
    continuous_blocks: tuple  # (count, mean, variance)
    bernoulli_blocks: tuple   # (count, probability)

    def __post_init__(self):
        for _, _, var in self.continuous_blocks:
            if var <= 0:
                raise ValueError("variance must be > 0")
        for _, prob in self.bernoulli_blocks:
            if not 0.0 < prob < 1.0:
                raise ValueError("Bernoulli probability must be in (0, 1)")

    @property
    def p(self):
        return (sum(c for c, _, _ in self.continuous_blocks)
                + sum(c for c, _ in self.bernoulli_blocks))


# The continuous-block second parameter is treated as a variance (so the
# (30, 4) block has sd 2); see README for the rationale.
DEFAULT_CLUSTER1 = ClusterSpec(
    5000,
    ((8, 30.0, 4.0), (5, 5.0, 1.0), (7, 89.0, 29.0)),
    ((7, 0.3), (9, 0.5), (4, 0.7)))
DEFAULT_CLUSTER2 = ClusterSpec(
    5000,
    ((8, 20.0, 8.0), (5, 15.0, 8.0), (7, 50.0, 9.0)),
    ((7, 0.5), (9, 0.15), (4, 0.45)))


@dataclass(frozen=True)
class OutcomeModel:
    form: OutcomeForm
    terms_cluster1: tuple  # (kind, indices, coef) triples
    terms_cluster2: tuple
    intercepts: tuple = None  # fixed per-cluster intercepts, or None
    noise_sd: float = 1.0
    target_prevalence: float = None  # auto-calibrated intercept when set


def _gen_cluster(spec, rng):
    cols = []
    for count, mean, var in spec.continuous_blocks:
        cols.append(rng.normal(mean, np.sqrt(var), size=(spec.n, count)))
    for count, prob in spec.bernoulli_blocks:
        cols.append((rng.random(size=(spec.n, count)) < prob)
                    .astype(np.float64))
    return np.hstack(cols)


def gen_predictors(spec1=DEFAULT_CLUSTER1, spec2=DEFAULT_CLUSTER2, seed=0):
    """Standardized predictor matrix, cluster-1 rows first.

    Returns (X, feature_names, n1); X is min-max mapped into [-1, 1]
    over the pooled dataset.
    """
    if spec1.p != spec2.p:
        raise ValueError("cluster specs must agree on predictor count")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    X = np.vstack([_gen_cluster(spec1, rng), _gen_cluster(spec2, rng)])
    names = tuple("x%d" % (j + 1) for j in range(X.shape[1]))
    return standardize_matrix(X), names, spec1.n


def _eval_terms(X, terms):
    z = np.zeros(X.shape[0])
    for kind, idx, coef in terms:
        if kind == "lin":
            z += coef * X[:, idx[0]]
        elif kind == "prod":
            z += coef * X[:, idx[0]] * X[:, idx[1]]
        elif kind == "exp":
            z += coef * np.exp(X[:, idx[0]] * X[:, idx[1]])
        elif kind == "sin":
            z += coef * np.sin(X[:, idx[0]] * X[:, idx[1]])
        elif kind == "cos":
            z += coef * np.cos(X[:, idx[0]] * X[:, idx[1]])
        elif kind == "pow2":
            z += coef * X[:, idx[0]] ** 2
        elif kind == "pow3":
            z += coef * X[:, idx[0]] ** 3
        else:
            raise ValueError("unknown term kind %r" % kind)
    return z


def calibrate_intercept(z_without_intercept, target, tol=1e-4):
    """Bisection for c with mean(inv_logit(z + c)) = target."""
    if not 0.0 < target < 1.0:
        raise ValueError("target prevalence must be in (0, 1)")
    z = np.asarray(z_without_intercept, dtype=np.float64)

    def mean_prob(c):
        return float(np.mean(1.0 / (1.0 + np.exp(-(z + c)))))

    lo, hi = -40.0, 40.0
    for _ in range(10):
        if mean_prob(lo) < target < mean_prob(hi):
            break
        lo *= 2.0
        hi *= 2.0
    else:
        raise ValueError("could not bracket target prevalence %r" % target)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = mean_prob(mid)
        if abs(val - target) < tol:
            return mid
        if val < target:
            lo = mid
        else:
            hi = mid
    raise ValueError("intercept calibration did not converge")


def simulate_outcome(X_std, n1, model, seed):
    """Bernoulli outcomes from the cluster-wise linear predictors passed
    through the inverse logit; per-patient N(0, noise_sd^2) noise."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    n = X_std.shape[0]
    z = np.empty(n)
    z[:n1] = _eval_terms(X_std[:n1], model.terms_cluster1)
    z[n1:] = _eval_terms(X_std[n1:], model.terms_cluster2)
    if model.intercepts is not None:
        z[:n1] += model.intercepts[0]
        z[n1:] += model.intercepts[1]
    if model.noise_sd > 0:
        z += rng.normal(0.0, model.noise_sd, size=n)
    if model.intercepts is None:
        if model.target_prevalence is None:
            raise ValueError("model needs intercepts or a target prevalence")
        z += calibrate_intercept(z, model.target_prevalence)
    pi = 1.0 / (1.0 + np.exp(-z))
    return (rng.random(n) < pi).astype(np.int8)


def linear_outcome(X_std, n1, model, seed):
    if model.form is not OutcomeForm.LINEAR:
        raise ValueError("model form is not linear")
    return simulate_outcome(X_std, n1, model, seed)


def nonlinear_outcome(X_std, n1, model, seed):
    if model.form is not OutcomeForm.NONLINEAR:
        raise ValueError("model form is not nonlinear")
    return simulate_outcome(X_std, n1, model, seed)


PREVALENCE_TARGETS = {"low": 0.05, "moderate": 0.15, "balanced": 0.5}


def _load_library():
    text = resources.files(__package__).joinpath("scenarios.json").read_text()
    return json.loads(text)


_LIBRARY = None


def scenario_library():
    global _LIBRARY
    if _LIBRARY is None:
        _LIBRARY = _load_library()
    return _LIBRARY


def scenario_ids():
    return sorted(k for k in scenario_library() if not k.startswith("_"))


def _model_from_entry(entry):
    def conv(terms):
        return tuple((t["kind"], tuple(t["idx"]), float(t["coef"]))
                     for t in terms)
    intercepts = entry.get("intercepts")
    return OutcomeModel(
        OutcomeForm(entry["form"]),
        conv(entry["cluster1"]), conv(entry["cluster2"]),
        tuple(intercepts) if intercepts is not None else None,
        noise_sd=1.0,
        target_prevalence=(None if intercepts is not None
                           else PREVALENCE_TARGETS[entry["prevalence"]]))


def scenario_model(scenario_id):
    lib = scenario_library()
    if scenario_id not in lib or scenario_id.startswith("_"):
        raise ValueError("unknown scenario %r; valid ids: %s"
                         % (scenario_id, ", ".join(scenario_ids())))
    return _model_from_entry(lib[scenario_id])


def scenario(scenario_id, n1=5000, n2=5000, seed=0):
    """Full simulated Dataset for one of the 12 library scenarios."""
    model = scenario_model(scenario_id)
    spec1 = ClusterSpec(n1, DEFAULT_CLUSTER1.continuous_blocks,
                        DEFAULT_CLUSTER1.bernoulli_blocks)
    spec2 = ClusterSpec(n2, DEFAULT_CLUSTER2.continuous_blocks,
                        DEFAULT_CLUSTER2.bernoulli_blocks)
    X, names, _ = gen_predictors(spec1, spec2, seed)
    y = simulate_outcome(X, n1, model, seed)
    return Dataset(X, y, names, standardized=True)

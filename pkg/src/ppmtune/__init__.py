"""Personalized predictive models: fit one classifier per index patient
on its most-similar training patients, tune the subpopulation size by a
composable discrimination/calibration mixture loss, and validate with
BCa bootstrap intervals."""

from .data import Dataset, FoldAssignment, SplitPair, kfold_partition, \
    load_csv, split_holdout, standardize, write_csv
from .glm import FitConfig, LogisticModel, fit_logistic, \
    fit_ppm_and_predict, predict_prob
from .loss import CalibrationMeasure, DiscriminationMeasure, LossSpec, \
    LossValue, evaluate_loss, loss_L_double_star, loss_L_star, \
    loss_original, parse_loss_spec
from .metrics import CalibrationCurve, MetricReport, PredictionSet, auprc, \
    auroc, brier, brier_decomposition, calibration_slope, citl, ici, \
    lack_of_spread, loess_smooth, report, spiegelhalter_z
from .similarity import SimilarityScores, Subpopulation, cosine_similarity, \
    score_all, top_m
from .tuner import TuningConfig, TuningResult, build_grid, evaluate_fold, \
    sweep_measures, tune_m, tune_multi
from .validate import BcaInterval, BootstrapRun, StudyReport, bca_interval, \
    bootstrap_validate, jackknife_measures, run_study

__version__ = "0.1.0"

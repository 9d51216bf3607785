"""Mixture loss: alpha-weighted combination of a calibration measure and
a discrimination measure, with the three named instantiations."""

import enum
from dataclasses import dataclass

from . import metrics
from .metrics import LOESS_SPAN_DEFAULT


class CalibrationMeasure(enum.Enum):
    MEAN_CAL_TERM = "cal"
    ICI = "ici"


class DiscriminationMeasure(enum.Enum):
    LACK_OF_SPREAD = "spread"
    ONE_MINUS_AUPRC = "auprc"
    ONE_MINUS_AUROC = "auroc"


@dataclass(frozen=True)
class LossSpec:
    calibration_measure: CalibrationMeasure
    discrimination_measure: DiscriminationMeasure
    alpha: float
    loess_span: float = LOESS_SPAN_DEFAULT

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1], got %r" % self.alpha)

    @property
    def name(self):
        return "%s+%s" % (self.calibration_measure.value,
                          self.discrimination_measure.value)


@dataclass(frozen=True)
class LossValue:
    total: float
    calibration_component: float
    discrimination_component: float


def _calibration_component(spec, ps):
    if spec.calibration_measure is CalibrationMeasure.MEAN_CAL_TERM:
        cal, _ = metrics.brier_decomposition(ps)
        return cal
    return metrics.ici(ps, spec.loess_span)


def _discrimination_component(spec, ps):
    if spec.discrimination_measure is DiscriminationMeasure.LACK_OF_SPREAD:
        return metrics.lack_of_spread(ps)
    if spec.discrimination_measure is DiscriminationMeasure.ONE_MINUS_AUPRC:
        return 1.0 - metrics.auprc(ps)
    return 1.0 - metrics.auroc(ps)


def evaluate_loss(spec, ps):
    """alpha * C + (1-alpha) * D; every registered measure is
    lower-is-better (AUROC/AUPRC enter as 1-value)."""
    try:
        cal = _calibration_component(spec, ps)
    except ValueError as exc:
        raise ValueError("calibration component %s failed: %s"
                         % (spec.calibration_measure.value, exc))
    try:
        disc = _discrimination_component(spec, ps)
    except ValueError as exc:
        raise ValueError("discrimination component %s failed: %s"
                         % (spec.discrimination_measure.value, exc))
    total = spec.alpha * cal + (1.0 - spec.alpha) * disc
    return LossValue(total, cal, disc)


def loss_original(ps, alpha):
    """Signed mean-calibration term plus lack of spread; at alpha=0.5
    this equals half the Brier score."""
    spec = LossSpec(CalibrationMeasure.MEAN_CAL_TERM,
                    DiscriminationMeasure.LACK_OF_SPREAD, alpha)
    return evaluate_loss(spec, ps)


def loss_L_star(ps, alpha, span=LOESS_SPAN_DEFAULT):
    """ICI plus lack of spread."""
    spec = LossSpec(CalibrationMeasure.ICI,
                    DiscriminationMeasure.LACK_OF_SPREAD, alpha, span)
    return evaluate_loss(spec, ps)


def loss_L_double_star(ps, alpha, span=LOESS_SPAN_DEFAULT):
    """ICI plus (1 - AUPRC)."""
    spec = LossSpec(CalibrationMeasure.ICI,
                    DiscriminationMeasure.ONE_MINUS_AUPRC, alpha, span)
    return evaluate_loss(spec, ps)


_CAL_BY_NAME = {m.value: m for m in CalibrationMeasure}
_DISC_BY_NAME = {m.value: m for m in DiscriminationMeasure}


def parse_loss_spec(name, alpha, loess_span=LOESS_SPAN_DEFAULT):
    """Parse 'cal+spread', 'ici+spread', 'ici+auprc', 'ici+auroc', ..."""
    parts = name.strip().lower().split("+")
    if len(parts) != 2 or parts[0] not in _CAL_BY_NAME \
            or parts[1] not in _DISC_BY_NAME:
        raise ValueError(
            "loss must be '<cal>+<disc>' with cal in %s and disc in %s; "
            "got %r" % (sorted(_CAL_BY_NAME), sorted(_DISC_BY_NAME), name))
    return LossSpec(_CAL_BY_NAME[parts[0]], _DISC_BY_NAME[parts[1]],
                    alpha, loess_span)

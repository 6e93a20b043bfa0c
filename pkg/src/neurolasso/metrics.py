"""Held-out error, support recovery and paired significance tests.

``support_precision`` follows the benchmark's own definition: the share of
truly irrelevant variables the model sets to zero (a true-negative rate),
not the information-retrieval TP / (TP + FP).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .data import FittedModel, LabeledDataset
from .errors import DimensionMismatch, LengthMismatch, Undefined, ZeroVariance


@dataclass(frozen=True)
class RunMetrics:
    mse: Optional[float] = None
    acc: Optional[float] = None
    precision: Optional[float] = None
    recall: Optional[float] = None
    selected_fraction: float = 0.0

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def _check(model, test):
    if test.p != model.p:
        raise DimensionMismatch(f"test data has {test.p} columns, model has {model.p}")


def test_mse(model: FittedModel, test: LabeledDataset) -> float:
    _check(model, test)
    r = test.y - model.predict(test.X)
    return float(np.mean(r * r))


def test_accuracy(model: FittedModel, test: LabeledDataset) -> float:
    _check(model, test)
    label = model.predict(test.X) >= 0.5
    return float(np.mean(label == (test.y == 1)))


def support_precision(model: FittedModel, truth_support) -> float:
    truth = np.asarray(truth_support, dtype=bool)
    if truth.shape != model.support.shape:
        raise DimensionMismatch("truth_support length must equal p")
    noise = ~truth
    if not noise.any():
        raise Undefined("no truly non-significant variables")
    return float(np.mean(~model.support[noise]))


def support_recall(model: FittedModel, truth_support) -> float:
    truth = np.asarray(truth_support, dtype=bool)
    if truth.shape != model.support.shape:
        raise DimensionMismatch("truth_support length must equal p")
    if not truth.any():
        raise Undefined("true support is empty")
    return float(np.mean(model.support[truth]))


def selected_fraction(model: FittedModel) -> float:
    return float(np.mean(model.support))


def evaluate(model: FittedModel, test: LabeledDataset) -> RunMetrics:
    """All metrics that apply to ``model``'s task and the available ground truth."""
    kw = {"selected_fraction": selected_fraction(model)}
    if model.task == "linear":
        kw["mse"] = test_mse(model, test)
    else:
        kw["acc"] = test_accuracy(model, test)
    truth = test.truth_support
    if truth is not None:
        if (~truth).any():
            kw["precision"] = support_precision(model, truth)
        if truth.any():
            kw["recall"] = support_recall(model, truth)
    return RunMetrics(**kw)


def t_sf(t, df):
    """Two-sided tail probability ``P(|T| >= |t|)`` of Student's t."""
    x = df / (df + t * t)
    return float(special.betainc(df / 2.0, 0.5, x))


def paired_t_test(a, b):
    """Two-sided paired t-test of ``mean(a - b) == 0``.

    Returns ``(t, p_value)``. Identical inputs give ``(0.0, 1.0)``; constant
    but nonzero differences raise :class:`ZeroVariance`.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"shapes {a.shape} and {b.shape} differ")
    if a.size < 2:
        raise LengthMismatch("need at least 2 pairs")
    d = a - b
    if np.all(d == 0):
        return 0.0, 1.0
    sd = d.std(ddof=1)
    if sd == 0 or not math.isfinite(sd):
        raise ZeroVariance("differences have zero variance")
    t = float(d.mean() / (sd / math.sqrt(d.size)))
    return t, t_sf(t, d.size - 1)

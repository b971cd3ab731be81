"""Per-step classification scores.

Macro averages run over the classes present in ``y_true`` only.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

FIXATION_THRESHOLD = 0.5
METRIC_NAMES = ("balanced_accuracy", "f1_macro", "filtered_accuracy")


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class MetricReport:
    balanced_accuracy: float
    f1_macro: float
    filtered_accuracy: float
    n_steps: int
    n_decision_steps: int

    def to_dict(self) -> dict:
        return asdict(self)


def _pair(y_true, y_pred) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(y_true)
    p = np.asarray(y_pred)
    if t.shape != p.shape or t.ndim != 1:
        raise MetricError(f"length mismatch: {t.shape} vs {p.shape}")
    if len(t) == 0:
        raise MetricError("empty label sequence")
    return t, p


def balanced_accuracy(y_true, y_pred) -> float:
    t, p = _pair(y_true, y_pred)
    classes = np.unique(t)
    recalls = [np.mean(p[t == c] == c) for c in classes]
    return float(np.mean(recalls))


def f1_macro(y_true, y_pred) -> float:
    t, p = _pair(y_true, y_pred)
    scores = []
    for c in np.unique(t):
        tp = np.sum((t == c) & (p == c))
        predicted = np.sum(p == c)
        actual = np.sum(t == c)
        # 2PR/(P+R) == 2tp/(predicted+actual), and is 0 when tp == 0
        scores.append(2.0 * tp / (predicted + actual) if tp else 0.0)
    return float(np.mean(scores))


def filtered_accuracy(y_true, y_pred, fixation) -> float:
    t, p = _pair(y_true, y_pred)
    f = np.asarray(fixation, dtype=float)
    if f.shape != t.shape:
        raise MetricError(f"fixation length {f.shape} does not match labels {t.shape}")
    mask = f < FIXATION_THRESHOLD
    if not mask.any():
        raise MetricError("no decision steps (fixation is never released)")
    return float(np.mean(t[mask] == p[mask]))


def evaluate(y_true, y_pred, fixation) -> MetricReport:
    t, _ = _pair(y_true, y_pred)
    return MetricReport(
        balanced_accuracy=balanced_accuracy(y_true, y_pred),
        f1_macro=f1_macro(y_true, y_pred),
        filtered_accuracy=filtered_accuracy(y_true, y_pred, fixation),
        n_steps=len(t),
        n_decision_steps=int(np.sum(np.asarray(fixation, dtype=float) < FIXATION_THRESHOLD)),
    )


def majority_baseline(y_true) -> float:
    """Balanced accuracy of always predicting the most frequent class."""
    t = np.asarray(y_true)
    values, counts = np.unique(t, return_counts=True)
    return balanced_accuracy(t, np.full_like(t, values[np.argmax(counts)]))

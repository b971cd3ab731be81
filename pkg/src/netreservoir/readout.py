"""Linear read-out trained by ridge regression on one-hot class targets."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class ReadoutError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ReadoutModel:
    """Class scores are ``weights @ [features, 1]``.

    Attributes:
        weights: ``(n_classes, n_features + 1)``; the last column is the bias.
        classes: Label value of each row, ascending.
        lam: Ridge penalty (not applied to the bias).
    """

    weights: np.ndarray
    classes: tuple[int, ...]
    lam: float

    @property
    def n_features(self) -> int:
        return self.weights.shape[1] - 1

    def scores(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise ReadoutError(f"expected {self.n_features} features, got shape {x.shape}")
        return x @ self.weights[:, :-1].T + self.weights[:, -1]

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "classes": list(self.classes), "lambda": self.lam}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ReadoutModel":
        return cls(np.asarray(d["weights"], dtype=float), tuple(d["classes"]), float(d["lambda"]))


def design_matrix(features: np.ndarray) -> np.ndarray:
    x = np.asarray(features, dtype=float)
    return np.hstack([x, np.ones((len(x), 1))])


def train_readout(features: np.ndarray, labels, lam: float = 1.0, washout: int = 0) -> ReadoutModel:
    """Solve ``(X^T X + lam*D) W^T = X^T Y`` where ``D`` is the identity with a
    zero in the bias position.

    The first ``washout`` rows are dropped before the solve.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    if x.ndim != 2 or y.ndim != 1 or len(x) != len(y):
        raise ReadoutError("features must be (T, F) and labels (T,)")
    if lam < 0:
        raise ReadoutError("lambda must be >= 0")
    x, y = x[washout:], y[washout:]
    classes = tuple(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise ReadoutError(f"need at least 2 distinct labels, got {list(classes)}")

    xa = design_matrix(x)
    targets = (y[:, None] == np.asarray(classes)[None, :]).astype(float)
    gram = xa.T @ xa
    penalty = np.full(xa.shape[1], float(lam))
    penalty[-1] = 0.0
    gram[np.diag_indices_from(gram)] += penalty
    if lam == 0 and np.linalg.matrix_rank(gram) < gram.shape[0]:
        raise ReadoutError("normal equations are singular with lambda=0; use lambda > 0")
    weights = np.linalg.solve(gram, xa.T @ targets).T
    return ReadoutModel(weights, classes, float(lam))


def predict(m: ReadoutModel, features: np.ndarray) -> np.ndarray:
    # argmax returns the first maximum, i.e. the smallest class on ties
    idx = np.argmax(m.scores(features), axis=1)
    return np.asarray(m.classes, dtype=np.int64)[idx]

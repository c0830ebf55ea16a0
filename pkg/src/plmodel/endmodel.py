"""A minimal noise-aware classifier: linear softmax trained on soft labels.

The downstream contract of the label model is its posterior. Training a
classifier against it means minimizing the expected cross-entropy: each
example contributes the usual log loss weighted by the posterior probability
of each class being the true one. Any probabilistic classifier can consume
that loss; the linear model here exercises it fully while staying dependency
free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_softmax, softmax

from .errors import ConfigError, NonFiniteError, ShapeMismatchError

LOG_FLOOR = -30.0
"""Per-entry clamp on log predictions, bounding the loss on confident mistakes."""


@dataclass(frozen=True)
class EndModelConfig:
    """Gradient-descent settings for :func:`fit_linear`."""

    epochs: int = 300
    learning_rate: float = 0.5
    batch_size: int | None = None  # None = full batch
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs must be positive, got {self.epochs}")
        if not math.isfinite(self.learning_rate) or self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}")


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Softmax regression weights (``d x k``) and bias (``k``,)."""

    weights: np.ndarray
    bias: np.ndarray

    def decision(self, features: np.ndarray) -> np.ndarray:
        return np.asarray(features, dtype=np.float64) @ self.weights + self.bias

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        return softmax(self.decision(features), axis=1)

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.decision(features).argmax(axis=1)


def validate_features(features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ShapeMismatchError(f"features must be 2-D, got {features.shape}")
    if not np.all(np.isfinite(features)):
        raise ValueError("features must be finite")
    return features


def validate_soft_labels(soft: np.ndarray) -> np.ndarray:
    soft = np.asarray(soft, dtype=np.float64)
    if soft.ndim != 2:
        raise ShapeMismatchError(f"soft labels must be 2-D, got {soft.shape}")
    if np.any(soft < 0) or not np.allclose(soft.sum(axis=1), 1.0, atol=1e-9):
        raise ValueError("soft label rows must be non-negative and sum to 1")
    return soft


def expected_ce_loss(predicted: np.ndarray, soft: np.ndarray) -> float:
    """Mean cross-entropy of row-stochastic predictions against soft labels.

    ``-(1/m) * sum_a sum_j soft[a, j] * log predicted[a, j]`` with each log
    clamped at :data:`LOG_FLOOR`. Zero exactly when the soft labels are
    one-hot and the predictions match them on their support.
    """
    predicted = np.asarray(predicted, dtype=np.float64)
    soft = np.asarray(soft, dtype=np.float64)
    if predicted.shape != soft.shape:
        raise ShapeMismatchError(
            f"predicted {predicted.shape} and soft labels {soft.shape} differ"
        )
    if predicted.size == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        logp = np.maximum(np.log(predicted), LOG_FLOOR)
    return float(-(soft * logp).sum() / predicted.shape[0])


def loss_and_grad(
    weights: np.ndarray, bias: np.ndarray, features: np.ndarray, soft: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Expected cross-entropy of the linear model and its exact gradient.

    The gradient accounts for the log clamp: entries already at the floor
    contribute nothing.
    """
    z = features @ weights + bias
    logp = log_softmax(z, axis=1)
    active = logp > LOG_FLOOR
    m = features.shape[0]
    loss = float(-(soft * np.maximum(logp, LOG_FLOOR)).sum() / m)
    p = np.exp(logp)
    weighted = (soft * active).sum(axis=1, keepdims=True)
    dz = (p * weighted - soft * active) / m
    return loss, features.T @ dz, dz.sum(axis=0)


def fit_linear(
    features: np.ndarray, soft: np.ndarray, config: EndModelConfig = EndModelConfig()
) -> LinearModel:
    """Train softmax regression on soft labels by (mini-batch) gradient descent.

    Deterministic given ``config.seed``; raises :class:`NonFiniteError` if
    the loss leaves the reals.
    """
    X = validate_features(features)
    S = validate_soft_labels(soft)
    if X.shape[0] != S.shape[0]:
        raise ShapeMismatchError(
            f"{X.shape[0]} feature rows vs {S.shape[0]} soft-label rows"
        )
    if X.shape[0] == 0:
        raise ValueError("at least one example is required")

    m, d = X.shape
    k = S.shape[1]
    W = np.zeros((d, k))
    b = np.zeros(k)
    bs = config.batch_size or m
    rng = np.random.Generator(np.random.Philox(config.seed))

    for _ in range(config.epochs):
        order = rng.permutation(m) if bs < m else np.arange(m)
        for lo in range(0, m, bs):
            idx = order[lo : lo + bs]
            loss, dW, db = loss_and_grad(W, b, X[idx], S[idx])
            if not math.isfinite(loss):
                raise NonFiniteError(f"end-model loss became {loss}")
            W = W - config.learning_rate * dW
            b = b - config.learning_rate * db
    return LinearModel(W, b)

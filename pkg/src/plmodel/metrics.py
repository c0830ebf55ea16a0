"""Evaluation metrics for hard label predictions."""

from __future__ import annotations

import numpy as np


def micro_accuracy(pred: np.ndarray, gold: np.ndarray) -> float:
    """Fraction of examples labeled correctly; unlabeled predictions count as wrong."""
    pred = np.asarray(pred)
    gold = np.asarray(gold)
    if pred.shape != gold.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {gold.shape}")
    if pred.size == 0:
        return 0.0
    return float((pred == gold).mean())


def macro_f1(pred: np.ndarray, gold: np.ndarray, k: int) -> float:
    """Unweighted mean of per-class F1 over all ``k`` classes.

    A class with no predictions and no gold occurrences (0/0) contributes 0.
    """
    pred = np.asarray(pred)
    gold = np.asarray(gold)
    if pred.shape != gold.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {gold.shape}")
    scores = []
    for j in range(k):
        tp = int(((pred == j) & (gold == j)).sum())
        fp = int(((pred == j) & (gold != j)).sum())
        fn = int(((pred != j) & (gold == j)).sum())
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(scores))

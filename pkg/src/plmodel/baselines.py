"""Heuristic comparison methods: nearest-class voting and the traditional-LF reduction."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ShapeMismatchError
from .labels import ABSTAIN, PlfSpec, VoteMatrix, validate_votes

logger = logging.getLogger(__name__)

UNLABELED = -1
"""Hard-label sentinel for rows where no decision is possible."""


@dataclass(frozen=True, eq=False)
class HardLabels:
    """An ``m``-vector of class indices, with :data:`UNLABELED` where undecidable."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.labels, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "labels", arr)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, HardLabels) and np.array_equal(self.labels, other.labels)


def nearest_class(
    specs: Sequence[PlfSpec],
    votes: VoteMatrix,
    balance: np.ndarray | None = None,
) -> HardLabels:
    """Pick, per row, the class compatible with the most non-abstain votes.

    A vote is compatible with every class inside its partial label; votes are
    counted one each regardless of set size. Ties go to the class with the
    higher ``balance`` (uniform when omitted), then to the lower index. Rows
    where every labeler abstained get :data:`UNLABELED`.
    """
    validate_votes(votes, specs)
    k = specs[0].k
    if balance is None:
        balance = np.full(k, 1.0 / k)
    balance = np.asarray(balance, dtype=np.float64)
    if balance.shape != (k,):
        raise ShapeMismatchError(f"balance must have shape ({k},), got {balance.shape}")

    counts = np.zeros((votes.m, k))
    for i, spec in enumerate(specs):
        col = votes.column(i)
        voted = col != ABSTAIN
        safe = np.where(voted, col, 0)
        counts += spec.membership[safe].astype(np.float64) * voted[:, None]

    # Strictly-below-1 tie offsets: higher balance first, then lower index.
    order = np.lexsort((np.arange(k), -balance))
    position = np.empty(k, dtype=np.int64)
    position[order] = np.arange(k)
    tie = (k - position) / (k + 1.0)

    labels = np.argmax(counts + tie, axis=1)
    labels[(votes.votes == ABSTAIN).all(axis=1)] = UNLABELED
    return HardLabels(labels)


def lfs_only(
    specs: Sequence[PlfSpec], votes: VoteMatrix
) -> tuple[tuple[PlfSpec, ...], VoteMatrix]:
    """Keep only labelers whose codomain is all singletons.

    Returns the retained specs and the vote matrix restricted to their
    columns. An empty result is reported with a warning, not an error.
    """
    validate_votes(votes, specs)
    keep = [i for i, spec in enumerate(specs) if spec.is_traditional()]
    if not keep:
        logger.warning("no traditional labeling functions found; result is empty")
    return tuple(specs[i] for i in keep), votes.select_columns(keep)

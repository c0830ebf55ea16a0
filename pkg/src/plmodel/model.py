"""The generative label model: parameters, likelihoods, and posterior inference.

The model couples a latent class ``Y`` with the observed vote of each labeler
through two quantities per labeler ``i``: an accuracy ``alpha[i, j]`` (the
probability that a non-abstain vote contains the true class ``j``) and a
propensity ``beta[i]`` (the probability of voting at all). Conditioned on the
true class, a vote is abstention with probability ``1 - beta``; otherwise the
labeler picks uniformly among its codomain sets consistent with the class
(probability mass ``beta * alpha``) or uniformly among the inconsistent ones
(mass ``beta * (1 - alpha)``).

Two likelihood paths are provided: :func:`naive_marginal_loglik`, a plain
triple loop kept as a slow reference oracle, and
:func:`vectorized_marginal_loglik`, which evaluates the same quantity with
elementwise tensor operations over precomputed indicator arrays and is the
path used for training and inference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit, logsumexp

from .errors import ShapeMismatchError
from .labels import ABSTAIN, PartialLabel, PlfSpec, VoteMatrix

BALANCE_MODES = ("fixed", "learned")


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Label-model parameters.

    ``A`` (``n x k``) holds log-space accuracies and ``B`` (``n``,) log-space
    propensities; :func:`to_probability` maps them to ``(0, 1)``.
    ``class_balance`` is stored in probability space regardless of
    ``balance_mode`` (the trainer keeps free logits internally when the
    balance is learned).
    """

    A: np.ndarray
    B: np.ndarray
    class_balance: np.ndarray
    balance_mode: str = "fixed"

    def __post_init__(self) -> None:
        A = np.array(self.A, dtype=np.float64)
        B = np.array(self.B, dtype=np.float64)
        p = np.array(self.class_balance, dtype=np.float64)
        if A.ndim != 2 or B.ndim != 1 or p.ndim != 1:
            raise ShapeMismatchError(
                f"expected A (n, k), B (n,), class_balance (k,); "
                f"got {A.shape}, {B.shape}, {p.shape}"
            )
        if B.shape[0] != A.shape[0] or p.shape[0] != A.shape[1]:
            raise ShapeMismatchError(
                f"inconsistent parameter shapes: A {A.shape}, B {B.shape}, "
                f"class_balance {p.shape}"
            )
        if self.balance_mode not in BALANCE_MODES:
            raise ValueError(f"balance_mode must be one of {BALANCE_MODES}")
        if not np.all(p > 0) or abs(float(p.sum()) - 1.0) > 1e-9:
            raise ValueError("class_balance must be strictly positive and sum to 1")
        for arr in (A, B, p):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "class_balance", p)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def k(self) -> int:
        return self.A.shape[1]

    def select_plfs(self, indices: Sequence[int]) -> "ModelParams":
        """Parameters restricted to a subset of labelers (rows of A/B)."""
        idx = np.asarray(indices, dtype=np.int64)
        return ModelParams(self.A[idx], self.B[idx], self.class_balance, self.balance_mode)


@dataclass(frozen=True, eq=False)
class PrecomputedBatch:
    """Indicator tensors for a block of examples.

    ``AI`` (``m x n x k``) is +1 where the voted set contains the class and -1
    otherwise; ``NLOG`` pairs with it, holding ``-log(consistent count)`` on
    +1 entries and ``-log(inconsistent count)`` on -1 entries. ``PI``
    (``m x n``) is 1 on non-abstain votes. Cells belonging to abstentions
    carry placeholder AI/NLOG values; ``PI`` masks them out of every
    downstream computation.
    """

    AI: np.ndarray
    NLOG: np.ndarray
    PI: np.ndarray

    @property
    def m(self) -> int:
        return self.AI.shape[0]

    @property
    def n(self) -> int:
        return self.AI.shape[1]

    @property
    def k(self) -> int:
        return self.AI.shape[2]

    def select_rows(self, rows: np.ndarray) -> "PrecomputedBatch":
        return PrecomputedBatch(self.AI[rows], self.NLOG[rows], self.PI[rows])


@dataclass(frozen=True, eq=False)
class Posterior:
    """Row-stochastic ``m x k`` matrix of class probabilities given the votes."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.probs, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeMismatchError(f"posterior must be 2-D, got {arr.shape}")
        object.__setattr__(self, "probs", arr)

    def argmax(self) -> np.ndarray:
        return self.probs.argmax(axis=1)


def to_probability(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Map log-space parameters to probability space.

    ``alpha[i, j] = exp(A[i, j]) / (exp(A[i, j]) + exp(-A[i, j]))`` and
    ``beta[i] = exp(B[i]) / (exp(B[i]) + 1)``; both mappings are total and
    evaluated through the logistic function for stability.
    """
    return expit(2.0 * params.A), expit(params.B)


def from_probability(
    alpha: np.ndarray,
    beta: np.ndarray,
    class_balance: np.ndarray,
    balance_mode: str = "fixed",
) -> ModelParams:
    """Inverse of :func:`to_probability`; alpha/beta must lie strictly in (0, 1)."""
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    if np.any(alpha <= 0) or np.any(alpha >= 1) or np.any(beta <= 0) or np.any(beta >= 1):
        raise ValueError("alpha and beta must lie strictly inside (0, 1)")
    A = 0.5 * (np.log(alpha) - np.log1p(-alpha))
    B = np.log(beta) - np.log1p(-beta)
    return ModelParams(A, B, class_balance, balance_mode)


def conditional_prob(
    spec: PlfSpec,
    alpha: np.ndarray,
    beta: float,
    vote: PartialLabel | None,
    label: int,
) -> float:
    """Probability of one labeler outcome given the true class.

    ``alpha`` is the labeler's accuracy vector (``k``,) and ``beta`` its
    propensity, both in probability space. ``vote`` is a codomain member or
    ``None`` for abstention. For class ``j``:

    * abstain: ``1 - beta``
    * ``j`` in the vote: ``beta * alpha[j] / consistent_counts[j]``
    * ``j`` not in the vote: ``beta * (1 - alpha[j]) / inconsistent_counts[j]``

    Summed over the codomain plus abstention this is 1 for every class.
    """
    if vote is None:
        return 1.0 - float(beta)
    if spec.index_of(vote) is None:
        raise ValueError(f"vote {vote!r} is not in the codomain of {spec.name!r}")
    a = float(alpha[label])
    if label in vote:
        return float(beta) * a / spec.consistent_counts[label]
    return float(beta) * (1.0 - a) / spec.inconsistent_counts[label]


def naive_marginal_loglik(
    specs: Sequence[PlfSpec], params: ModelParams, votes: VoteMatrix
) -> float:
    """Marginal log-likelihood of the votes by direct enumeration.

    A plain triple loop over examples, labelers, and classes with no
    vectorization; this is the reference oracle the fast path is checked
    against. Runtime is O(m * n * k) Python-level operations.
    """
    if votes.n != len(specs):
        raise ShapeMismatchError(
            f"votes have {votes.n} columns for {len(specs)} labelers"
        )
    alpha, beta = to_probability(params)
    balance = [float(p) for p in params.class_balance]
    k = params.k
    raw = votes.votes
    total = 0.0
    for a in range(votes.m):
        per_class = list(balance)
        for i, spec in enumerate(specs):
            v = raw[a, i]
            vote = None if v == ABSTAIN else spec.codomain[v]
            for j in range(k):
                per_class[j] *= conditional_prob(spec, alpha[i], beta[i], vote, j)
        total += math.log(sum(per_class))
    return total


def precompute_batch(specs: Sequence[PlfSpec], votes: VoteMatrix) -> PrecomputedBatch:
    """Build the AI/NLOG/PI indicator tensors for a vote matrix."""
    if votes.n != len(specs):
        raise ShapeMismatchError(
            f"votes have {votes.n} columns for {len(specs)} labelers"
        )
    if not specs:
        raise ShapeMismatchError("at least one labeler is required")
    if len({spec.k for spec in specs}) != 1:
        raise ShapeMismatchError("labeler specs disagree on the class count")
    raw = votes.votes
    PI = (raw != ABSTAIN).astype(np.float64)
    # One stacked gather across all labelers: offset each column into a
    # vertically concatenated outcome table. Abstain cells read row `offset`
    # of their labeler's block; PI masks them out downstream.
    offsets = np.cumsum([0] + [spec.n_outcomes for spec in specs[:-1]])
    safe = np.where(raw == ABSTAIN, 0, raw) + offsets[None, :]
    sign = np.vstack([spec.vote_sign for spec in specs])
    nlog = np.vstack([spec.vote_neglog_counts for spec in specs])
    return PrecomputedBatch(sign[safe], nlog[safe], PI)


def _check_batch_shapes(batch: PrecomputedBatch, params: ModelParams) -> None:
    if batch.AI.shape != batch.NLOG.shape or batch.PI.shape != batch.AI.shape[:2]:
        raise ShapeMismatchError(
            f"inconsistent batch tensors: AI {batch.AI.shape}, "
            f"NLOG {batch.NLOG.shape}, PI {batch.PI.shape}"
        )
    if batch.n != params.n or batch.k != params.k:
        raise ShapeMismatchError(
            f"batch is (m, {batch.n}, {batch.k}) but params are "
            f"({params.n}, {params.k})"
        )


def class_conditional_loglik(batch: PrecomputedBatch, params: ModelParams) -> np.ndarray:
    """``m x k`` matrix of log P(votes of example | class).

    Computed as the propensity normalizer plus the PI-masked sum over labelers
    of ``A * AI + NLOG + B + ZA`` where ``ZA`` and ``ZB`` are the per-parameter
    log normalizers; only elementwise and reduction operations are used.
    """
    _check_batch_shapes(batch, params)
    za = -np.logaddexp(params.A, -params.A)  # (n, k)
    zb = -np.logaddexp(params.B, 0.0)  # (n,)
    t = params.A * batch.AI
    t += batch.NLOG
    t += params.B[:, None] + za
    # einsum realizes the PI mask and the labeler reduction in one pass
    cll = np.einsum("ai,aij->aj", batch.PI, t)
    cll += zb.sum()
    return cll


def vectorized_marginal_loglik(batch: PrecomputedBatch, params: ModelParams) -> float:
    """Marginal log-likelihood via the tensor path.

    Agrees with :func:`naive_marginal_loglik` to within 1e-10 per example;
    stays finite for ``|A| <= 30`` and ``|B| <= 30``.
    """
    cll = class_conditional_loglik(batch, params)
    if batch.m == 0:
        return 0.0
    per_example = logsumexp(cll + np.log(params.class_balance), axis=1)
    return float(per_example.sum())


def posterior_from_batch(batch: PrecomputedBatch, params: ModelParams) -> np.ndarray:
    """Row-stochastic class posterior for each example, computed in log space."""
    cll = class_conditional_loglik(batch, params)
    logw = cll + np.log(params.class_balance)
    logw -= logsumexp(logw, axis=1, keepdims=True)
    return np.exp(logw)


def posterior(
    specs: Sequence[PlfSpec], params: ModelParams, votes: VoteMatrix
) -> Posterior:
    """Posterior class distribution per example given its votes.

    Rows with only abstentions reduce to the class balance.
    """
    batch = precompute_batch(specs, votes)
    return Posterior(posterior_from_batch(batch, params))

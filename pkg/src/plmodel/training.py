"""Fitting the label model by stochastic gradient ascent on the marginal likelihood.

Gradients are analytic rather than autodiff-derived. Writing ``W`` for the
per-example class posterior under the current parameters (the standard
latent-variable mixture weights), the batch marginal log-likelihood has

* ``d/dA[i, j] = sum_a W[a, j] * PI[a, i] * (AI[a, i, j] - tanh(A[i, j]))``
* ``d/dB[i]   = sum_a (PI[a, i] - beta[i])``
* ``d/dc[j]   = sum_a (W[a, j] - balance[j])`` for the balance logits ``c``
  when the class balance is learned.

These are verified against central finite differences in the test suite
before anything else relies on them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit, logsumexp, softmax

from .errors import ConfigError, EmptyDatasetError, NonFiniteError, ShapeMismatchError
from .labels import PlfSpec, VoteMatrix, coverage_filter, require_valid_specs, validate_votes
from .labels import LabelSpace
from .model import (
    ModelParams,
    PrecomputedBatch,
    class_conditional_loglik,
    precompute_batch,
    vectorized_marginal_loglik,
)

OPTIMIZERS = ("sgd", "adam")

# Adam moment defaults.
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

PLATEAU_THRESHOLD = 1e-6


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and schedule settings for :func:`fit`.

    The learning-rate schedule is reduce-on-plateau: when the full-data
    log-likelihood fails to improve by more than 1e-6 for ``plateau_patience``
    consecutive epochs, the rate is multiplied by ``plateau_factor``.
    ``initial_lr = 0`` is allowed and leaves the parameters untouched.
    """

    batch_size: int = 256
    epochs: int = 5
    optimizer: str = "sgd"
    initial_lr: float = 0.01
    plateau_factor: float = 0.1
    plateau_patience: int = 3
    seed: int = 0
    learn_balance: bool = False

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be positive, got {self.epochs}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if not math.isfinite(self.initial_lr) or self.initial_lr < 0:
            raise ConfigError(f"initial_lr must be a finite non-negative real, got {self.initial_lr}")
        if not 0.0 < self.plateau_factor < 1.0:
            raise ConfigError(f"plateau_factor must lie in (0, 1), got {self.plateau_factor}")
        if self.plateau_patience < 1:
            raise ConfigError(f"plateau_patience must be positive, got {self.plateau_patience}")


@dataclass(frozen=True, eq=False)
class LikelihoodGradient:
    """Gradient of a batch marginal log-likelihood with respect to the parameters."""

    A: np.ndarray
    B: np.ndarray
    balance_logits: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class TrainReport:
    """Outcome of a training run.

    ``trace`` holds the full-training-data marginal log-likelihood after each
    epoch (length equals the configured epoch count, over the rows that were
    actually trained on). Equality compares trace, parameters, and batch
    count bitwise; wall-clock seconds are a measurement, not a result, and
    are excluded.
    """

    trace: tuple[float, ...]
    params: ModelParams
    seconds: float
    batches: int

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrainReport):
            return NotImplemented
        return (
            self.trace == other.trace
            and self.batches == other.batches
            and np.array_equal(self.params.A, other.params.A)
            and np.array_equal(self.params.B, other.params.B)
            and np.array_equal(self.params.class_balance, other.params.class_balance)
            and self.params.balance_mode == other.params.balance_mode
        )


def default_params(n: int, k: int) -> ModelParams:
    """Initialization used when no explicit starting point is given.

    Accuracies start at the log-space preimage of 0.7 and propensities at the
    preimage of 0.5, with a uniform class balance. Starting above one half
    breaks the label-swap symmetry toward the convention that labelers are
    right more often than wrong.
    """
    A0 = 0.5 * math.log(0.7 / 0.3)
    return ModelParams(
        np.full((n, k), A0),
        np.zeros(n),
        np.full(k, 1.0 / k),
    )


def _loglik_and_grad(
    batch: PrecomputedBatch, params: ModelParams, learn_balance: bool
) -> tuple[float, LikelihoodGradient]:
    """Total batch log-likelihood and its gradient, sharing one forward pass."""
    cll = class_conditional_loglik(batch, params)
    logw = cll + np.log(params.class_balance)
    per_example = logsumexp(logw, axis=1)
    W = np.exp(logw - per_example[:, None])  # (m, k) posterior mixture weights

    pw = batch.PI.T @ W  # (n, k): sum_a PI[a, i] W[a, j]
    signed = np.einsum("ai,aij,aj->ij", batch.PI, batch.AI, W, optimize=True)
    gA = signed - np.tanh(params.A) * pw
    beta = expit(params.B)
    gB = batch.PI.sum(axis=0) - batch.m * beta
    gC = W.sum(axis=0) - batch.m * params.class_balance if learn_balance else None
    return float(per_example.sum()), LikelihoodGradient(gA, gB, gC)


def grad_marginal_loglik(
    batch: PrecomputedBatch, params: ModelParams, learn_balance: bool = False
) -> LikelihoodGradient:
    """Analytic gradient of the total batch marginal log-likelihood.

    With ``learn_balance`` the gradient with respect to the balance logits
    (free reals mapped through a normalized exponential) is included.
    """
    _, grad = _loglik_and_grad(batch, params, learn_balance)
    return grad


class _Adam:
    """Adam moments for one parameter tensor, stepped in the ascent direction."""

    def __init__(self, shape: tuple[int, ...]):
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)
        self.t = 0

    def step(self, grad: np.ndarray, lr: float) -> np.ndarray:
        self.t += 1
        self.m = ADAM_BETA1 * self.m + (1 - ADAM_BETA1) * grad
        self.v = ADAM_BETA2 * self.v + (1 - ADAM_BETA2) * grad * grad
        mhat = self.m / (1 - ADAM_BETA1**self.t)
        vhat = self.v / (1 - ADAM_BETA2**self.t)
        return lr * mhat / (np.sqrt(vhat) + ADAM_EPS)


def fit(
    specs: Sequence[PlfSpec],
    votes: VoteMatrix,
    config: TrainConfig,
    init: ModelParams | None = None,
    filter_uncovered: bool = True,
) -> TrainReport:
    """Fit label-model parameters by mini-batch gradient ascent.

    Rows where every labeler abstained are discarded first (they contribute
    no accuracy information) unless ``filter_uncovered`` is off. Batches are
    mean-normalized so the learning rate is comparable across batch sizes.
    The run is deterministic given ``config.seed``: shuffling comes from a
    counter-based Philox stream and updates are applied in batch order.

    Raises :class:`EmptyDatasetError` when nothing remains to train on and
    :class:`NonFiniteError` if the loss or a gradient stops being finite.
    """
    if not specs:
        raise ConfigError("at least one labeler spec is required")
    space = LabelSpace(specs[0].k)
    require_valid_specs(specs, space)
    validate_votes(votes, specs)

    if filter_uncovered:
        rows = coverage_filter(votes)
        votes_train = votes.select_rows(rows)
    else:
        votes_train = votes
    m = votes_train.m
    if m == 0:
        raise EmptyDatasetError("no examples remain after discarding all-abstain rows")

    n, k = len(specs), specs[0].k
    if init is None:
        init = default_params(n, k)
    if init.n != n or init.k != k:
        raise ShapeMismatchError(
            f"init params are ({init.n}, {init.k}) but the problem is ({n}, {k})"
        )

    full = precompute_batch(specs, votes_train)
    A = init.A.copy()
    B = init.B.copy()
    balance = init.class_balance.copy()
    balance_logits = np.log(balance) if config.learn_balance else None
    mode = "learned" if config.learn_balance else "fixed"

    rng = np.random.Generator(np.random.Philox(config.seed))
    lr = config.initial_lr
    adam_A = _Adam(A.shape)
    adam_B = _Adam(B.shape)
    adam_C = _Adam(balance.shape)

    trace: list[float] = []
    best = -math.inf
    stalled = 0
    batches = 0
    start = time.perf_counter()

    for epoch in range(config.epochs):
        order = rng.permutation(m)
        for lo in range(0, m, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            sub = full.select_rows(idx)
            params_now = ModelParams(A, B, balance, mode)
            ll, grad = _loglik_and_grad(sub, params_now, config.learn_balance)
            bs = len(idx)
            if not math.isfinite(ll):
                raise NonFiniteError(
                    f"batch log-likelihood became {ll} at epoch {epoch}, batch {batches}"
                )
            gA = grad.A / bs
            gB = grad.B / bs
            if not (np.all(np.isfinite(gA)) and np.all(np.isfinite(gB))):
                raise NonFiniteError(
                    f"gradient became non-finite at epoch {epoch}, batch {batches}"
                )
            if config.optimizer == "adam":
                A = A + adam_A.step(gA, lr)
                B = B + adam_B.step(gB, lr)
            else:
                A = A + lr * gA
                B = B + lr * gB
            if config.learn_balance:
                gC = grad.balance_logits / bs
                if not np.all(np.isfinite(gC)):
                    raise NonFiniteError(
                        f"balance gradient became non-finite at epoch {epoch}, batch {batches}"
                    )
                if config.optimizer == "adam":
                    balance_logits = balance_logits + adam_C.step(gC, lr)
                else:
                    balance_logits = balance_logits + lr * gC
                balance = softmax(balance_logits)
            batches += 1

        epoch_ll = vectorized_marginal_loglik(full, ModelParams(A, B, balance, mode))
        if not math.isfinite(epoch_ll):
            raise NonFiniteError(f"epoch {epoch} log-likelihood became {epoch_ll}")
        trace.append(epoch_ll)
        if epoch_ll > best + PLATEAU_THRESHOLD:
            best = epoch_ll
            stalled = 0
        else:
            stalled += 1
            if stalled >= config.plateau_patience:
                lr *= config.plateau_factor
                stalled = 0

    seconds = time.perf_counter() - start
    return TrainReport(
        trace=tuple(trace),
        params=ModelParams(A, B, balance, mode),
        seconds=seconds,
        batches=batches,
    )

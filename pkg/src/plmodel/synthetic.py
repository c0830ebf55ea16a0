"""Synthetic vote generation from known parameters, and label-swap alignment.

Sampling follows the generative story exactly: a true class per example from
the class balance, then per labeler either abstention (probability
``1 - beta``), a uniform draw among codomain sets containing the true class
(probability ``beta * alpha``), or a uniform draw among the rest. Samples are
the ground-truth oracle for parameter-recovery and calibration tests.

Randomness comes from numpy's Philox counter-based generator. Every
(example, labeler) cell consumes uniforms at fixed offsets in the stream
(label draws first, then three fixed-size blocks per labeler), so a sample is
fully determined by the seed and independent of evaluation order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ShapeMismatchError
from .labels import ABSTAIN, LabelSpace, PartialLabel, PlfSpec, VoteMatrix, require_valid_specs
from .model import ModelParams, to_probability

EXHAUSTIVE_ALIGN_LIMIT = 8


@dataclass(frozen=True, eq=False)
class SynthSample:
    """Votes drawn from known parameters together with their hidden truth."""

    true_labels: np.ndarray
    votes: VoteMatrix
    generating_params: ModelParams
    seed: int


def sample(
    specs: Sequence[PlfSpec], params: ModelParams, m: int, seed: int
) -> SynthSample:
    """Draw ``m`` examples of (true label, votes) from the generative model."""
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    space = LabelSpace(params.k)
    require_valid_specs(specs, space)
    if len(specs) != params.n:
        raise ShapeMismatchError(
            f"{len(specs)} specs but params describe {params.n} labelers"
        )
    alpha, beta = to_probability(params)
    k = params.k
    rng = np.random.Generator(np.random.Philox(seed))

    cum = np.cumsum(params.class_balance)
    y = np.searchsorted(cum, rng.random(m), side="right")
    np.clip(y, 0, k - 1, out=y)

    votes = np.empty((m, len(specs)), dtype=np.int64)
    for i, spec in enumerate(specs):
        u_vote = rng.random(m)
        u_correct = rng.random(m)
        u_pick = rng.random(m)

        max_c = max(spec.consistent_counts)
        max_w = max(spec.inconsistent_counts)
        cons = np.zeros((k, max_c), dtype=np.int64)
        incons = np.zeros((k, max_w), dtype=np.int64)
        for j in range(k):
            cj = [c for c, s in enumerate(spec.codomain) if j in s]
            wj = [c for c, s in enumerate(spec.codomain) if j not in s]
            cons[j, : len(cj)] = cj
            incons[j, : len(wj)] = wj
        n_cons = np.asarray(spec.consistent_counts, dtype=np.int64)
        n_incons = np.asarray(spec.inconsistent_counts, dtype=np.int64)

        correct = u_correct < alpha[i, y]
        pick_c = np.minimum((u_pick * n_cons[y]).astype(np.int64), n_cons[y] - 1)
        pick_w = np.minimum((u_pick * n_incons[y]).astype(np.int64), n_incons[y] - 1)
        chosen = np.where(correct, cons[y, pick_c], incons[y, pick_w])
        votes[:, i] = np.where(u_vote < beta[i], chosen, ABSTAIN)

    return SynthSample(y, VoteMatrix(votes), params, seed)


@dataclass(frozen=True)
class Alignment:
    """Best class permutation between two parameter sets and the residual errors.

    ``permutation[j]`` is the estimated class matched to true class ``j``;
    alpha and balance errors are measured after applying it (propensities are
    unaffected by relabeling).
    """

    permutation: tuple[int, ...]
    max_abs_alpha_err: float
    max_abs_beta_err: float
    max_abs_balance_err: float
    mean_abs_alpha_err: float


def align_labels(true_params: ModelParams, est_params: ModelParams) -> Alignment:
    """Match estimated classes to true classes by minimizing mean |alpha error|.

    Exhaustive over permutations for up to 8 classes, assignment-problem
    matching above that.
    """
    if (true_params.n, true_params.k) != (est_params.n, est_params.k):
        raise ShapeMismatchError(
            f"parameter shapes differ: ({true_params.n}, {true_params.k}) vs "
            f"({est_params.n}, {est_params.k})"
        )
    a_true, b_true = to_probability(true_params)
    a_est, b_est = to_probability(est_params)
    k = true_params.k

    # cost[j, j'] = mean_i |alpha_true[i, j] - alpha_est[i, j']|
    cost = np.abs(a_true[:, :, None] - a_est[:, None, :]).mean(axis=0)

    if k <= EXHAUSTIVE_ALIGN_LIMIT:
        best, best_cost = None, np.inf
        for perm in itertools.permutations(range(k)):
            c = cost[np.arange(k), list(perm)].sum()
            if c < best_cost:
                best, best_cost = perm, c
        perm = np.asarray(best, dtype=np.int64)
    else:
        rows, cols = linear_sum_assignment(cost)
        perm = np.empty(k, dtype=np.int64)
        perm[rows] = cols

    d_alpha = np.abs(a_true - a_est[:, perm])
    d_balance = np.abs(true_params.class_balance - est_params.class_balance[perm])
    return Alignment(
        permutation=tuple(int(p) for p in perm),
        max_abs_alpha_err=float(d_alpha.max()),
        max_abs_beta_err=float(np.abs(b_true - b_est).max()),
        max_abs_balance_err=float(d_balance.max()),
        mean_abs_alpha_err=float(d_alpha.mean()),
    )


def permute_classes_params(params: ModelParams, perm: Sequence[int]) -> ModelParams:
    """Relabel classes in a parameter set: column ``j`` becomes column ``perm[j]``."""
    perm = np.asarray(perm, dtype=np.int64)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    return ModelParams(
        params.A[:, inv], params.B, params.class_balance[inv], params.balance_mode
    )


def permute_classes_specs(
    specs: Sequence[PlfSpec], perm: Sequence[int]
) -> list[PlfSpec]:
    """Relabel classes inside every codomain set: class ``j`` becomes ``perm[j]``."""
    out = []
    for spec in specs:
        sets = [PartialLabel(perm[j] for j in s) for s in spec.codomain]
        out.append(PlfSpec.from_sets(spec.name, sets, spec.k))
    return out


def random_partition_spec(
    name: str, space: LabelSpace, rng: np.random.Generator, max_blocks: int = 3
) -> PlfSpec:
    """A random valid codomain that partitions the classes into 2+ blocks."""
    k = space.k
    n_blocks = int(rng.integers(2, min(k, max_blocks) + 1))
    assignment = rng.permutation(k) % n_blocks
    rng.shuffle(assignment)
    sets = [[int(j) for j in np.nonzero(assignment == b)[0]] for b in range(n_blocks)]
    return PlfSpec.from_sets(name, sets, k)


def random_plf_specs(
    space: LabelSpace,
    n: int,
    rng: np.random.Generator,
    traditional_fraction: float = 0.4,
) -> list[PlfSpec]:
    """``n`` random valid labeler specs: a mix of traditional LFs and partitions.

    Partitions of the class set are always valid codomains (every class is in
    exactly one block), so no rejection step is needed.
    """
    from .labels import traditional_lf

    specs: list[PlfSpec] = []
    for i in range(n):
        if rng.random() < traditional_fraction:
            spec = traditional_lf(space, name=f"plf{i}")
        else:
            spec = random_partition_spec(f"plf{i}", space, rng)
        specs.append(spec)
    return specs


def random_params(
    n: int,
    k: int,
    rng: np.random.Generator,
    alpha_range: tuple[float, float] = (0.6, 0.95),
    beta_range: tuple[float, float] = (0.5, 0.95),
    uniform_balance: bool = True,
) -> ModelParams:
    """Random probability-space truths mapped into log-space parameters."""
    from .model import from_probability

    alpha = rng.uniform(*alpha_range, size=(n, k))
    beta = rng.uniform(*beta_range, size=n)
    if uniform_balance:
        balance = np.full(k, 1.0 / k)
    else:
        raw = rng.uniform(0.5, 2.0, size=k)
        balance = raw / raw.sum()
    return from_probability(alpha, beta, balance)

"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.special import softmax

import plmodel as pm


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def finite_diff_check(batch, params, learn_balance, h=1e-5):
    """Max relative error between the analytic gradient and central differences.

    The relative error denominator is max(|analytic|, |numeric|, 1e-8).
    """
    grad = pm.grad_marginal_loglik(batch, params, learn_balance=learn_balance)
    logits0 = np.log(params.class_balance)

    def loglik(A, B, logits):
        p = pm.ModelParams(A, B, softmax(logits))
        return pm.vectorized_marginal_loglik(batch, p)

    worst = 0.0
    blocks = [("A", params.A, grad.A), ("B", params.B, grad.B)]
    if learn_balance:
        blocks.append(("C", logits0, grad.balance_logits))
    for name, value, analytic in blocks:
        it = np.nditer(value, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            hi = {"A": params.A.copy(), "B": params.B.copy(), "C": logits0.copy()}
            lo = {"A": params.A.copy(), "B": params.B.copy(), "C": logits0.copy()}
            hi[name][idx] += h
            lo[name][idx] -= h
            numeric = (
                loglik(hi["A"], hi["B"], hi["C"]) - loglik(lo["A"], lo["B"], lo["C"])
            ) / (2 * h)
            a = float(analytic[idx])
            worst = max(worst, abs(a - numeric) / max(abs(a), abs(numeric), 1e-8))
    return worst


@pytest.fixture
def worked_spec() -> pm.PlfSpec:
    """k=3 labeler with codomain [{0,1}, {2}] used by several hand-checked cases."""
    return pm.PlfSpec.from_sets("g1", [[0, 1], [2]], 3)


def intersecting_triple() -> list[pm.PlfSpec]:
    """Three k=4 labelers whose first sets intersect to {0}.

    Each codomain is padded with the complement so both well-formedness
    conditions hold.
    """
    return [
        pm.PlfSpec.from_sets("g1", [[0, 1, 2], [3]], 4),
        pm.PlfSpec.from_sets("g2", [[0, 2, 3], [1]], 4),
        pm.PlfSpec.from_sets("g3", [[0, 1, 3], [2]], 4),
    ]


def random_instance(
    seed: int,
    max_m: int = 20,
    max_n: int = 5,
    max_k: int = 5,
    abstain_prob: float = 0.25,
    ensure_coverage: bool = False,
) -> tuple[list[pm.PlfSpec], pm.ModelParams, pm.VoteMatrix]:
    """A random valid problem: specs, parameters, and legal votes (with abstains).

    ``ensure_coverage`` guarantees at least one non-abstain vote per row, the
    regime training actually operates in after coverage filtering. Gradient
    checks use it: on a fully-abstaining example the balance gradient is
    mathematically zero, and float64 central differences on an exact zero
    measure nothing but roundoff.
    """
    rng = philox(seed)
    k = int(rng.integers(2, max_k + 1))
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    space = pm.LabelSpace(k)
    specs = pm.random_plf_specs(space, n, rng)
    params = pm.random_params(n, k, rng, uniform_balance=bool(rng.random() < 0.5))
    votes = np.empty((m, n), dtype=np.int64)
    for i, spec in enumerate(specs):
        col = rng.integers(0, spec.n_outcomes, size=m)
        col[rng.random(m) < abstain_prob] = pm.ABSTAIN
        votes[:, i] = col
    if ensure_coverage:
        uncovered = np.nonzero((votes == pm.ABSTAIN).all(axis=1))[0]
        for a in uncovered:
            i = int(rng.integers(0, n))
            votes[a, i] = int(rng.integers(0, specs[i].n_outcomes))
    return specs, params, pm.VoteMatrix(votes)

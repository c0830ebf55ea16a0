"""Checking when labeler accuracies are recoverable from votes alone.

The model's parameters can be pinned down (up to relabeling the latent
classes) from the distribution of votes whenever the labelers can be split
into three disjoint non-empty groups such that, within each of the first two
groups and for every class ``y``, one codomain set can be chosen per labeler
whose intersection is exactly ``{y}``. :func:`check_identifiability` decides
that condition; :func:`singleton_witness` searches for the per-class set
choices.

This is a sufficient condition only. A failed search means the condition is
unsatisfied, not that the parameters are unidentifiable, and reports are
worded accordingly.

:func:`grouped_conditional_matrix` builds the conditional outcome-probability
matrix of a group of labelers treated as one combined labeler over the
Cartesian product of their outcomes (including abstention). At accuracies
identically 1 on a witness-complete group it contains, for each class, a
column whose only nonzero sits in that class's row, so its numeric row rank
is exactly the class count; at random parameter points a full rank is the
generic behavior and a deficiency is reported as a warning, never as proof
of non-identifiability.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ProductTooLargeError, TooFewPlfsError
from .labels import LabelSpace, PlfSpec

EXHAUSTIVE_LIMIT = 12
RANK_REL_TOL = 1e-8
KRUSKAL_MAX_ROWS = 8
DEFAULT_PRODUCT_CAP = 1_000_000


@dataclass(frozen=True)
class Tripartition:
    """A labeler split certifying the identifiability condition.

    ``s1``/``s2``/``s3`` are disjoint, non-empty, covering index groups.
    ``witnesses_s1[y]`` (and ``witnesses_s2[y]``) lists one codomain index per
    labeler of the group, in group order, whose chosen sets intersect to
    exactly ``{y}``.
    """

    s1: tuple[int, ...]
    s2: tuple[int, ...]
    s3: tuple[int, ...]
    witnesses_s1: tuple[tuple[int, ...], ...]
    witnesses_s2: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        groups = (self.s1, self.s2, self.s3)
        if any(len(g) == 0 for g in groups):
            raise ValueError("all three groups must be non-empty")
        seen: set[int] = set()
        for g in groups:
            for i in g:
                if i in seen:
                    raise ValueError(f"labeler {i} appears in more than one group")
                seen.add(i)

    def verify(self, specs: Sequence[PlfSpec]) -> bool:
        """Re-check coverage and every witness intersection by direct computation."""
        members = set(self.s1) | set(self.s2) | set(self.s3)
        if members != set(range(len(specs))):
            return False
        for group, witnesses in ((self.s1, self.witnesses_s1), (self.s2, self.witnesses_s2)):
            for y, choice in enumerate(witnesses):
                if len(choice) != len(group):
                    return False
                sets = [specs[i].codomain[c].members for i, c in zip(group, choice)]
                inter = frozenset.intersection(*sets)
                if inter != frozenset({y}):
                    return False
        return True


@dataclass(frozen=True)
class IdentifiabilityReport:
    """Outcome of :func:`check_identifiability`.

    ``status`` is ``"satisfied"`` (a certifying tripartition was found),
    ``"unsatisfied"`` (an exhaustive search ruled one out), or ``"unknown"``
    (the heuristic used for large labeler counts failed to find one).
    """

    status: str
    tripartition: Tripartition | None
    n_plfs: int
    detail: str


def singleton_witness(specs: Sequence[PlfSpec], label: int) -> tuple[int, ...] | None:
    """Choose one codomain set per labeler whose intersection is exactly ``{label}``.

    Returns codomain indices aligned with ``specs``, or ``None`` when no
    choice works. Search is exhaustive over combinations with pruning: only
    sets containing ``label`` are tried (anything else drops the target from
    the intersection), states that already failed are memoized, and once the
    intersection hits the singleton the remaining labelers just contribute
    their first set containing the label.
    """
    if not specs:
        raise ValueError("singleton_witness needs a non-empty labeler subset")
    k = specs[0].k
    target = 1 << label
    candidates: list[list[tuple[int, int]]] = []
    for spec in specs:
        cand = [(c, s.mask) for c, s in enumerate(spec.codomain) if label in s]
        if not cand:
            return None
        candidates.append(cand)

    n = len(specs)
    failed: set[tuple[int, int]] = set()

    def search(depth: int, mask: int) -> list[int] | None:
        if mask == target:
            return [candidates[d][0][0] for d in range(depth, n)]
        if depth == n:
            return None
        if (depth, mask) in failed:
            return None
        for c, cmask in candidates[depth]:
            rest = search(depth + 1, mask & cmask)
            if rest is not None:
                return [c] + rest
        failed.add((depth, mask))
        return None

    found = search(0, (1 << k) - 1)
    return tuple(found) if found is not None else None


def _group_witnesses(
    specs: Sequence[PlfSpec], k: int, mask: int, cache: dict
) -> tuple[tuple[int, ...], ...] | None:
    """Witnesses for every class over the labelers in ``mask``, or None."""
    if mask in cache:
        return cache[mask]
    subset = [specs[i] for i in _bits(mask)]
    out: list[tuple[int, ...]] = []
    for y in range(k):
        w = singleton_witness(subset, y)
        if w is None:
            cache[mask] = None
            return None
        out.append(w)
    result = tuple(out)
    cache[mask] = result
    return result


def _bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def check_identifiability(
    specs: Sequence[PlfSpec],
    space: LabelSpace,
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
) -> IdentifiabilityReport:
    """Search for a tripartition certifying the identifiability condition.

    Exhaustive over all tripartitions for up to ``exhaustive_limit`` labelers
    (first find in a fixed lexicographic group order, so the result is
    deterministic); beyond that a greedy pass builds the two witness-complete
    groups front to back and reports ``"unknown"`` instead of
    ``"unsatisfied"`` when it fails.
    """
    n = len(specs)
    if n < 3:
        raise TooFewPlfsError(
            f"three disjoint non-empty labeler groups are required; got {n} labelers"
        )
    k = space.k
    cache: dict[int, tuple | None] = {}

    if n <= exhaustive_limit:
        all_mask = (1 << n) - 1
        for s1 in range(1, all_mask):
            rest = all_mask ^ s1
            if rest == 0 or (rest & (rest - 1)) == 0:
                continue  # need at least two labelers left for s2 and s3
            w1 = _group_witnesses(specs, k, s1, cache)
            if w1 is None:
                continue
            sub = rest
            while sub:
                if sub != rest:  # leave s3 non-empty
                    w2 = _group_witnesses(specs, k, sub, cache)
                    if w2 is not None:
                        tri = Tripartition(
                            tuple(_bits(s1)),
                            tuple(_bits(sub)),
                            tuple(_bits(rest ^ sub)),
                            w1,
                            w2,
                        )
                        return IdentifiabilityReport(
                            "satisfied", tri, n, "found a certifying tripartition"
                        )
                sub = (sub - 1) & rest
        return IdentifiabilityReport(
            "unsatisfied",
            None,
            n,
            "no tripartition admits per-class singleton intersections in two groups "
            "(a sufficient condition only; this does not prove non-identifiability)",
        )

    # Greedy pass for large n: grow two witness-complete prefixes, dump the rest.
    def grow(available: list[int]) -> tuple[list[int], list[int]] | None:
        group: list[int] = []
        mask = 0
        for i in available:
            group.append(i)
            mask |= 1 << i
            if _group_witnesses(specs, k, mask, cache) is not None:
                remaining = [j for j in available if j not in group]
                return group, remaining
        return None

    grown1 = grow(list(range(n)))
    if grown1 is not None:
        g1, rest1 = grown1
        grown2 = grow(rest1)
        if grown2 is not None:
            g2, g3 = grown2
            if g3:
                w1 = _group_witnesses(specs, k, sum(1 << i for i in g1), cache)
                w2 = _group_witnesses(specs, k, sum(1 << i for i in g2), cache)
                tri = Tripartition(tuple(g1), tuple(g2), tuple(g3), w1, w2)
                return IdentifiabilityReport(
                    "satisfied", tri, n, "greedy search found a certifying tripartition"
                )
    return IdentifiabilityReport(
        "unknown",
        None,
        n,
        f"greedy search failed with {n} labelers (> {exhaustive_limit}, exhaustive "
        "search disabled); the condition may still hold",
    )


def outcome_matrix(spec: PlfSpec, alpha: np.ndarray, beta: float) -> np.ndarray:
    """``(n_outcomes + 1) x k`` conditional probabilities for one labeler.

    Row ``c`` is the probability of emitting codomain set ``c`` given each
    class; the final row is abstention. Columns sum to 1.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    memb = spec.membership
    cons = np.asarray(spec.consistent_counts, dtype=np.float64)
    incons = np.asarray(spec.inconsistent_counts, dtype=np.float64)
    voted = np.where(memb, beta * alpha / cons, beta * (1.0 - alpha) / incons)
    return np.vstack([voted, np.full((1, spec.k), 1.0 - beta)])


def grouped_conditional_matrix(
    specs: Sequence[PlfSpec],
    alpha: np.ndarray,
    beta: np.ndarray,
    max_entries: int = DEFAULT_PRODUCT_CAP,
) -> np.ndarray:
    """Conditional probability matrix of a labeler group's combined output.

    Row ``j`` enumerates the joint outcome probabilities over the Cartesian
    product of each labeler's outcomes (codomain order, abstention last) and
    sums to 1. Columns are in mixed-radix order with the last labeler varying
    fastest. ``alpha`` (``len(specs) x k``) and ``beta`` (``len(specs)``,)
    are in probability space, so boundary values such as accuracies exactly 1
    are expressible. Raises :class:`ProductTooLargeError` when the matrix
    would exceed ``max_entries`` entries.
    """
    if not specs:
        raise ValueError("grouped_conditional_matrix needs a non-empty labeler subset")
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    if alpha.shape != (len(specs), specs[0].k) or beta.shape != (len(specs),):
        raise ValueError(
            f"expected alpha {(len(specs), specs[0].k)} and beta {(len(specs),)}, "
            f"got {alpha.shape} and {beta.shape}"
        )
    k = specs[0].k
    cols = 1
    for spec in specs:
        cols *= spec.n_outcomes + 1
        if cols * k > max_entries:
            raise ProductTooLargeError(
                f"joint outcome enumeration needs more than {max_entries} entries"
            )
    out = np.ones((k, 1))
    for i, spec in enumerate(specs):
        per = outcome_matrix(spec, alpha[i], float(beta[i]))  # (o_i, k)
        out = (out[:, :, None] * per.T[:, None, :]).reshape(k, -1)
    return out


def numeric_rank(matrix: np.ndarray, rel_tol: float = RANK_REL_TOL) -> int:
    """Rank as the number of singular values above ``rel_tol`` times the largest."""
    s = np.linalg.svd(np.asarray(matrix, dtype=np.float64), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def kruskal_rank(matrix: np.ndarray, rel_tol: float = RANK_REL_TOL) -> int:
    """Largest ``r`` such that every set of ``r`` rows is linearly independent.

    Enumerates row subsets, so it is limited to matrices with at most 8 rows;
    use :func:`numeric_rank` beyond that.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    rows = matrix.shape[0]
    if rows > KRUSKAL_MAX_ROWS:
        raise ValueError(
            f"kruskal_rank enumerates row subsets and supports at most "
            f"{KRUSKAL_MAX_ROWS} rows; got {rows}"
        )
    for r in range(rows, 0, -1):
        if all(
            numeric_rank(matrix[list(sub)], rel_tol) == r
            for sub in itertools.combinations(range(rows), r)
        ):
            return r
    return 0

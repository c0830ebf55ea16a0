"""Label spaces, partial labels, labeler codomains, and vote matrices.

A partial labeling function (PLF) maps an example to a subset of the class
labels, or abstains by outputting the full label set. Its codomain here is
the ordered list of *non-abstain* subsets it can emit; abstention is encoded
in vote matrices with the :data:`ABSTAIN` sentinel rather than as a codomain
member. A codomain is well formed when

1. every class appears in at least one codomain set, and
2. no class appears in every codomain set.

All types in this module are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import ShapeMismatchError, SpecValidationError, VoteValidationError

ABSTAIN = -1
"""Vote sentinel: the labeler output the full label set (no information)."""


@dataclass(frozen=True)
class LabelSpace:
    """A classification label space; classes are dense indices ``0..k-1``.

    Class-name strings belong to the file format layer and are resolved to
    indices at parse time.
    """

    k: int

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError(f"a label space needs at least 2 classes, got k={self.k}")

    @property
    def classes(self) -> range:
        return range(self.k)


@dataclass(frozen=True, init=False)
class PartialLabel:
    """A non-empty set of class indices.

    A partial label equal to the full label set denotes abstention; codomains
    never store that case (see :data:`ABSTAIN`).
    """

    members: frozenset[int]

    def __init__(self, members: Iterable[int]):
        ms = frozenset(int(j) for j in members)
        if not ms:
            raise ValueError("a partial label must contain at least one class")
        if any(j < 0 for j in ms):
            raise ValueError(f"class indices must be non-negative, got {sorted(ms)}")
        object.__setattr__(self, "members", ms)

    @cached_property
    def mask(self) -> int:
        """The member set as a bitset, for fast intersection tests."""
        m = 0
        for j in self.members:
            m |= 1 << j
        return m

    @cached_property
    def sorted_members(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))

    def is_full(self, space: LabelSpace) -> bool:
        """True when this label carries no information in ``space``."""
        return len(self.members) == space.k and max(self.members) == space.k - 1

    def __contains__(self, label: int) -> bool:
        return label in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.sorted_members)

    def __repr__(self) -> str:
        return f"PartialLabel({{{', '.join(map(str, self.sorted_members))}}})"


@dataclass(frozen=True)
class PlfSpec:
    """One labeler's non-abstain codomain plus per-class consistency counts.

    ``consistent_counts[j]`` is the number of codomain sets containing class
    ``j`` and ``inconsistent_counts[j]`` the number that do not; for a valid
    spec both are at least 1 for every class and they sum to ``len(codomain)``.
    The order of ``codomain`` is significant: the position of a set is its
    wire representation in vote matrices and files.

    Use :meth:`from_sets` to construct; invalid codomains are representable
    (so :func:`validate_plf_spec` can report the violated condition) but will
    be rejected by every entry point that consumes them.
    """

    name: str
    codomain: tuple[PartialLabel, ...]
    consistent_counts: tuple[int, ...]
    inconsistent_counts: tuple[int, ...]

    @classmethod
    def from_sets(cls, name: str, sets: Iterable[Iterable[int]], k: int) -> "PlfSpec":
        """Build a spec from raw member collections for a ``k``-class space."""
        codomain = tuple(
            s if isinstance(s, PartialLabel) else PartialLabel(s) for s in sets
        )
        cons = tuple(sum(1 for s in codomain if j in s) for j in range(k))
        incons = tuple(len(codomain) - c for c in cons)
        return cls(name, codomain, cons, incons)

    @property
    def k(self) -> int:
        return len(self.consistent_counts)

    @property
    def n_outcomes(self) -> int:
        """Number of non-abstain outcomes."""
        return len(self.codomain)

    @cached_property
    def _index_by_label(self) -> dict[PartialLabel, int]:
        return {s: c for c, s in enumerate(self.codomain)}

    def index_of(self, label: PartialLabel) -> int | None:
        """Codomain position of ``label``, or None when not emitted."""
        return self._index_by_label.get(label)

    @cached_property
    def membership(self) -> np.ndarray:
        """Boolean ``(n_outcomes, k)`` matrix: entry ``(c, j)`` is ``j in codomain[c]``."""
        mat = np.zeros((len(self.codomain), self.k), dtype=bool)
        for c, s in enumerate(self.codomain):
            for j in s:
                if j < self.k:
                    mat[c, j] = True
        mat.setflags(write=False)
        return mat

    @cached_property
    def vote_sign(self) -> np.ndarray:
        """``(n_outcomes, k)`` of +1 where the outcome contains the class, else -1."""
        mat = np.where(self.membership, 1.0, -1.0)
        mat.setflags(write=False)
        return mat

    @cached_property
    def vote_neglog_counts(self) -> np.ndarray:
        """``(n_outcomes, k)``: -log(consistent count) on members, -log(inconsistent) off.

        Defined only for valid specs (both counts positive for every class).
        """
        with np.errstate(divide="ignore"):
            mat = np.where(
                self.membership,
                -np.log(np.asarray(self.consistent_counts, dtype=np.float64)),
                -np.log(np.asarray(self.inconsistent_counts, dtype=np.float64)),
            )
        mat.setflags(write=False)
        return mat

    def is_traditional(self) -> bool:
        """True when every codomain set is a singleton (a classic labeling function)."""
        return all(len(s) == 1 for s in self.codomain)


@dataclass(frozen=True)
class SpecViolation:
    """First well-formedness condition violated by a codomain."""

    code: str
    plf: str
    message: str


def validate_plf_spec(spec: PlfSpec, space: LabelSpace) -> SpecViolation | None:
    """Check a PLF spec against a label space.

    Returns ``None`` when the codomain satisfies both conditions and all
    members lie in ``0..k-1``; otherwise returns the first violation found.
    Violation codes: ``empty-codomain``, ``label-out-of-range``,
    ``full-set-in-codomain``, ``duplicate-partial-label``,
    ``class-missing-from-codomain``, ``class-in-every-set``.
    """
    k = space.k
    if not spec.codomain:
        return SpecViolation("empty-codomain", spec.name, "codomain has no label sets")
    for c, s in enumerate(spec.codomain):
        bad = [j for j in s.sorted_members if j >= k]
        if bad:
            return SpecViolation(
                "label-out-of-range",
                spec.name,
                f"set #{c} contains class {bad[0]} outside 0..{k - 1}",
            )
    full = frozenset(range(k))
    for c, s in enumerate(spec.codomain):
        if s.members == full:
            return SpecViolation(
                "full-set-in-codomain",
                spec.name,
                f"set #{c} equals the full label set (abstention is implicit)",
            )
    seen: dict[PartialLabel, int] = {}
    for c, s in enumerate(spec.codomain):
        if s in seen:
            return SpecViolation(
                "duplicate-partial-label",
                spec.name,
                f"sets #{seen[s]} and #{c} are identical",
            )
        seen[s] = c
    for j in range(k):
        if not any(j in s for s in spec.codomain):
            return SpecViolation(
                "class-missing-from-codomain",
                spec.name,
                f"class {j} appears in no codomain set",
            )
    for j in range(k):
        if all(j in s for s in spec.codomain):
            return SpecViolation(
                "class-in-every-set",
                spec.name,
                f"class {j} appears in every codomain set",
            )
    return None


def require_valid_specs(specs: Sequence[PlfSpec], space: LabelSpace) -> None:
    """Raise :class:`SpecValidationError` on the first invalid spec."""
    for spec in specs:
        if spec.k != space.k:
            raise SpecValidationError(
                SpecViolation(
                    "label-out-of-range",
                    spec.name,
                    f"spec built for k={spec.k}, space has k={space.k}",
                )
            )
        violation = validate_plf_spec(spec, space)
        if violation is not None:
            raise SpecValidationError(violation)


def traditional_lf(space: LabelSpace, name: str = "lf") -> PlfSpec:
    """The PLF encoding of a classic labeling function: codomain ``[{0},...,{k-1}]``."""
    return PlfSpec.from_sets(name, [[j] for j in range(space.k)], space.k)


@dataclass(frozen=True, eq=False)
class VoteMatrix:
    """``m x n`` observed labeler outputs.

    Entry ``(a, i)`` is an index into labeler ``i``'s codomain, or
    :data:`ABSTAIN`. The array is stored read-only.
    """

    votes: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.votes, dtype=np.int64)
        if arr.ndim != 2:
            raise ShapeMismatchError(f"votes must be 2-D, got shape {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "votes", arr)

    @property
    def m(self) -> int:
        return self.votes.shape[0]

    @property
    def n(self) -> int:
        return self.votes.shape[1]

    def column(self, i: int) -> np.ndarray:
        return self.votes[:, i]

    def select_rows(self, rows: Sequence[int] | np.ndarray) -> "VoteMatrix":
        return VoteMatrix(self.votes[np.asarray(rows, dtype=np.int64)])

    def select_columns(self, cols: Sequence[int] | np.ndarray) -> "VoteMatrix":
        return VoteMatrix(self.votes[:, np.asarray(cols, dtype=np.int64)])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, VoteMatrix) and np.array_equal(self.votes, other.votes)


def validate_votes(votes: VoteMatrix, specs: Sequence[PlfSpec]) -> None:
    """Raise :class:`VoteValidationError` unless every non-abstain entry indexes its codomain."""
    if votes.n != len(specs):
        raise ShapeMismatchError(
            f"vote matrix has {votes.n} columns but {len(specs)} labelers are declared"
        )
    for i, spec in enumerate(specs):
        col = votes.column(i)
        if col.size == 0:
            continue
        low, high = int(col.min()), int(col.max())
        if low < ABSTAIN:
            raise VoteValidationError(
                f"column {i} ({spec.name}) contains {low}; "
                f"votes must be codomain indices or {ABSTAIN}"
            )
        if high >= spec.n_outcomes:
            raise VoteValidationError(
                f"column {i} ({spec.name}) contains index {high} "
                f"but the codomain has only {spec.n_outcomes} sets"
            )


def coverage_filter(votes: VoteMatrix) -> np.ndarray:
    """Indices of rows where at least one labeler voted, in original order.

    Idempotent: re-filtering the selected rows selects everything.
    """
    return np.nonzero((votes.votes != ABSTAIN).any(axis=1))[0]

"""Project file formats.

Every format has a canonical serializer, so ``parse(serialize(x))`` returns an
equal value and ``serialize(parse(bytes))`` reproduces the bytes for files this
package wrote. All text is UTF-8 with ``\\n`` line endings and a trailing
newline.

* labeler spec file (JSON): class names plus, per labeler, a name and its
  codomain as lists of class names. The single source of truth for set
  contents; everything else stores indices.
* votes file (CSV): header of labeler names; one row per example; cells are
  codomain indices or the abstain marker ``*``.
* params file (JSON): log-space ``A`` and ``B``, the class balance, and the
  balance mode. Floats round-trip exactly.
* posterior / soft-label file (CSV): header of class names; 9 significant
  digits per probability, so re-read rows stay within 1e-6 of stochastic.
* hard/gold label file (CSV): ``label`` header; class names, ``*`` for
  unlabeled.
* feature file (CSV): ``f0..f{d-1}`` header; full-precision floats.
* end-model file (JSON): weights and bias of a linear model.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .baselines import UNLABELED
from .endmodel import LinearModel
from .errors import ParseError, ShapeMismatchError, VoteValidationError
from .labels import ABSTAIN, LabelSpace, PlfSpec, VoteMatrix, require_valid_specs
from .model import BALANCE_MODES, ModelParams

ABSTAIN_MARK = "*"


@dataclass(frozen=True)
class ProjectSpec:
    """Parsed labeler spec file: the label space, class names, and PLF specs."""

    space: LabelSpace
    class_names: tuple[str, ...]
    specs: tuple[PlfSpec, ...]

    @property
    def k(self) -> int:
        return self.space.k

    @property
    def n(self) -> int:
        return len(self.specs)

    def class_index(self, name: str) -> int:
        try:
            return self.class_names.index(name)
        except ValueError:
            raise ParseError(f"unknown class name {name!r}") from None


def _read_text(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------- spec file


def serialize_spec_file(project: ProjectSpec) -> str:
    doc = {
        "classes": list(project.class_names),
        "plfs": [
            {
                "name": spec.name,
                "codomain": [
                    [project.class_names[j] for j in s.sorted_members]
                    for s in spec.codomain
                ],
            }
            for spec in project.specs
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_spec_file(text: str) -> ProjectSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"spec file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "classes" not in doc or "plfs" not in doc:
        raise ParseError("spec file must be an object with 'classes' and 'plfs'")
    names = doc["classes"]
    if (
        not isinstance(names, list)
        or len(names) < 2
        or any(not isinstance(c, str) or not c for c in names)
    ):
        raise ParseError("'classes' must list at least two non-empty class names")
    if len(set(names)) != len(names):
        raise ParseError("class names must be unique")
    k = len(names)
    index = {c: j for j, c in enumerate(names)}

    specs = []
    seen_names: set[str] = set()
    for entry in doc["plfs"]:
        if not isinstance(entry, dict) or "name" not in entry or "codomain" not in entry:
            raise ParseError("each labeler entry needs 'name' and 'codomain'")
        name = entry["name"]
        if not isinstance(name, str) or not name:
            raise ParseError("labeler names must be non-empty strings")
        if name in seen_names:
            raise ParseError(f"duplicate labeler name {name!r}")
        seen_names.add(name)
        sets = []
        for group in entry["codomain"]:
            if not isinstance(group, list) or not group:
                raise ParseError(f"labeler {name!r}: codomain sets must be non-empty lists")
            members = []
            for cname in group:
                if cname not in index:
                    raise ParseError(f"labeler {name!r}: unknown class {cname!r}")
                members.append(index[cname])
            if len(set(members)) != len(members):
                raise ParseError(f"labeler {name!r}: repeated class inside one set")
            sets.append(members)
        specs.append(PlfSpec.from_sets(name, sets, k))
    if not specs:
        raise ParseError("spec file declares no labelers")

    project = ProjectSpec(LabelSpace(k), tuple(names), tuple(specs))
    require_valid_specs(project.specs, project.space)
    return project


def load_spec_file(path: str | Path) -> ProjectSpec:
    return parse_spec_file(_read_text(path))


def save_spec_file(path: str | Path, project: ProjectSpec) -> None:
    _write_text(path, serialize_spec_file(project))


# --------------------------------------------------------------- votes file


def serialize_votes(votes: VoteMatrix, project: ProjectSpec) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([spec.name for spec in project.specs])
    for row in votes.votes:
        writer.writerow([ABSTAIN_MARK if v == ABSTAIN else str(int(v)) for v in row])
    return buf.getvalue()


def parse_votes(text: str, project: ProjectSpec) -> VoteMatrix:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("votes file is empty") from None
    expected = [spec.name for spec in project.specs]
    if header != expected:
        raise ParseError(
            f"votes header {header!r} does not match the declared labelers {expected!r}"
        )
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(expected):
            raise ParseError(f"line {lineno}: expected {len(expected)} cells, got {len(row)}")
        parsed = []
        for i, cell in enumerate(row):
            if cell == ABSTAIN_MARK:
                parsed.append(ABSTAIN)
                continue
            try:
                v = int(cell)
            except ValueError:
                raise ParseError(
                    f"line {lineno}: cell {cell!r} is neither an index nor {ABSTAIN_MARK!r}"
                ) from None
            if not 0 <= v < project.specs[i].n_outcomes:
                raise VoteValidationError(
                    f"line {lineno}: index {v} out of range for labeler "
                    f"{project.specs[i].name!r}"
                )
            parsed.append(v)
        rows.append(parsed)
    return VoteMatrix(np.asarray(rows, dtype=np.int64).reshape(len(rows), len(expected)))


def load_votes(path: str | Path, project: ProjectSpec) -> VoteMatrix:
    return parse_votes(_read_text(path), project)


def save_votes(path: str | Path, votes: VoteMatrix, project: ProjectSpec) -> None:
    _write_text(path, serialize_votes(votes, project))


# -------------------------------------------------------------- params file


def serialize_params(params: ModelParams) -> str:
    doc = {
        "A": [[float(x) for x in row] for row in params.A],
        "B": [float(x) for x in params.B],
        "class_balance": [float(x) for x in params.class_balance],
        "balance_mode": params.balance_mode,
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_params(text: str) -> ModelParams:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"params file is not valid JSON: {exc}") from exc
    try:
        A = np.asarray(doc["A"], dtype=np.float64)
        B = np.asarray(doc["B"], dtype=np.float64)
        balance = np.asarray(doc["class_balance"], dtype=np.float64)
        mode = doc.get("balance_mode", "fixed")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"params file is malformed: {exc}") from exc
    if mode not in BALANCE_MODES:
        raise ParseError(f"balance_mode must be one of {BALANCE_MODES}, got {mode!r}")
    try:
        return ModelParams(A, B, balance, mode)
    except (ValueError, ShapeMismatchError) as exc:
        raise ParseError(f"params file is inconsistent: {exc}") from exc


def load_params(path: str | Path) -> ModelParams:
    return parse_params(_read_text(path))


def save_params(path: str | Path, params: ModelParams) -> None:
    _write_text(path, serialize_params(params))


# ---------------------------------------------------- posterior/soft labels


def serialize_posterior(probs: np.ndarray, class_names: Sequence[str]) -> str:
    probs = np.asarray(probs, dtype=np.float64)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(class_names))
    for row in probs:
        writer.writerow([f"{x:.9g}" for x in row])
    return buf.getvalue()


def parse_posterior(text: str) -> tuple[np.ndarray, tuple[str, ...]]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("posterior file is empty") from None
    if len(header) < 2:
        raise ParseError("posterior file needs at least two class columns")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"line {lineno}: expected {len(header)} cells, got {len(row)}")
        try:
            rows.append([float(x) for x in row])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    probs = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(header))
    return probs, tuple(header)


def load_posterior(path: str | Path) -> tuple[np.ndarray, tuple[str, ...]]:
    return parse_posterior(_read_text(path))


def save_posterior(path: str | Path, probs: np.ndarray, class_names: Sequence[str]) -> None:
    _write_text(path, serialize_posterior(probs, class_names))


# -------------------------------------------------------------- label files


def serialize_labels(labels: np.ndarray, class_names: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label"])
    for v in np.asarray(labels):
        writer.writerow([ABSTAIN_MARK if v == UNLABELED else class_names[int(v)]])
    return buf.getvalue()


def parse_labels(text: str, class_names: Sequence[str]) -> np.ndarray:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("label file is empty") from None
    if header != ["label"]:
        raise ParseError(f"label file header must be ['label'], got {header!r}")
    index = {c: j for j, c in enumerate(class_names)}
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 1:
            raise ParseError(f"line {lineno}: expected a single cell")
        cell = row[0]
        if cell == ABSTAIN_MARK:
            out.append(UNLABELED)
        elif cell in index:
            out.append(index[cell])
        else:
            raise ParseError(f"line {lineno}: unknown class {cell!r}")
    return np.asarray(out, dtype=np.int64)


def load_labels(path: str | Path, class_names: Sequence[str]) -> np.ndarray:
    return parse_labels(_read_text(path), class_names)


def save_labels(path: str | Path, labels: np.ndarray, class_names: Sequence[str]) -> None:
    _write_text(path, serialize_labels(labels, class_names))


# ------------------------------------------------------------ feature files


def serialize_features(features: np.ndarray) -> str:
    features = np.asarray(features, dtype=np.float64)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"f{i}" for i in range(features.shape[1])])
    for row in features:
        writer.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def parse_features(text: str) -> np.ndarray:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("feature file is empty") from None
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"line {lineno}: expected {len(header)} cells, got {len(row)}")
        try:
            rows.append([float(x) for x in row])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), len(header))


def load_features(path: str | Path) -> np.ndarray:
    return parse_features(_read_text(path))


def save_features(path: str | Path, features: np.ndarray) -> None:
    _write_text(path, serialize_features(features))


# ------------------------------------------------------------ linear models


def serialize_end_model(model: LinearModel) -> str:
    doc = {
        "weights": [[float(x) for x in row] for row in model.weights],
        "bias": [float(x) for x in model.bias],
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_end_model(text: str) -> LinearModel:
    try:
        doc = json.loads(text)
        return LinearModel(
            np.asarray(doc["weights"], dtype=np.float64),
            np.asarray(doc["bias"], dtype=np.float64),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"end-model file is malformed: {exc}") from exc


def load_end_model(path: str | Path) -> LinearModel:
    return parse_end_model(_read_text(path))


def save_end_model(path: str | Path, model: LinearModel) -> None:
    _write_text(path, serialize_end_model(model))

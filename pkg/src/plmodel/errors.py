"""Exception types shared across the engine.

Every error carries a stable machine-readable ``code`` (used by the CLI for
single-line greppable diagnostics) and a process ``exit_code``.
"""


class EngineError(Exception):
    """Base class for all engine failures."""

    code = "internal-error"
    exit_code = 1


class ParseError(EngineError):
    """A project file could not be parsed."""

    code = "parse-error"
    exit_code = 4


class ShapeMismatchError(EngineError):
    """Array shapes disagree with the declared problem dimensions."""

    code = "shape-mismatch"
    exit_code = 5


class ValidationError(EngineError):
    """Input data violates a documented invariant."""

    code = "invalid-input"
    exit_code = 6


class SpecValidationError(ValidationError):
    """A PLF codomain violates the well-formedness conditions."""

    code = "invalid-spec"

    def __init__(self, violation):
        self.violation = violation
        super().__init__(f"{violation.code}: {violation.message}")


class VoteValidationError(ValidationError):
    """A vote matrix entry is not a valid codomain index."""

    code = "invalid-votes"


class ConfigError(ValidationError):
    """A configuration value is outside its allowed range."""

    code = "invalid-config"


class EmptyDatasetError(EngineError):
    """No rows remain after discarding examples with no votes."""

    code = "empty-dataset-after-filtering"
    exit_code = 6


class TooFewPlfsError(EngineError):
    """The identifiability check needs at least three labelers."""

    code = "too-few-plfs"
    exit_code = 6


class ProductTooLargeError(EngineError):
    """A grouped outcome enumeration would exceed the configured cap."""

    code = "product-too-large"
    exit_code = 6


class NonFiniteError(EngineError):
    """A loss or gradient became NaN or infinite during optimization."""

    code = "non-finite-loss"
    exit_code = 7

"""Label-model engine for programmatic weak supervision with partial labeling functions.

Labelers vote with subsets of the class space (or abstain); the engine learns
each labeler's accuracy and propensity from unlabeled votes by maximizing the
marginal likelihood of a generative model, emits posterior label
distributions, checks when those parameters are recoverable at all, and ships
heuristic baselines, a synthetic-data oracle, and a minimal noise-aware
classifier on top.
"""

from .baselines import HardLabels, UNLABELED, lfs_only, nearest_class
from .endmodel import (
    EndModelConfig,
    LinearModel,
    expected_ce_loss,
    fit_linear,
)
from .errors import (
    ConfigError,
    EmptyDatasetError,
    EngineError,
    NonFiniteError,
    ParseError,
    ProductTooLargeError,
    ShapeMismatchError,
    SpecValidationError,
    TooFewPlfsError,
    ValidationError,
    VoteValidationError,
)
from .identifiability import (
    IdentifiabilityReport,
    Tripartition,
    check_identifiability,
    grouped_conditional_matrix,
    kruskal_rank,
    numeric_rank,
    singleton_witness,
)
from .labels import (
    ABSTAIN,
    LabelSpace,
    PartialLabel,
    PlfSpec,
    SpecViolation,
    VoteMatrix,
    coverage_filter,
    require_valid_specs,
    traditional_lf,
    validate_plf_spec,
    validate_votes,
)
from .metrics import macro_f1, micro_accuracy
from .model import (
    ModelParams,
    Posterior,
    PrecomputedBatch,
    conditional_prob,
    from_probability,
    naive_marginal_loglik,
    posterior,
    precompute_batch,
    to_probability,
    vectorized_marginal_loglik,
)
from .synthetic import (
    Alignment,
    SynthSample,
    align_labels,
    permute_classes_params,
    permute_classes_specs,
    random_params,
    random_plf_specs,
    sample,
)
from .training import (
    LikelihoodGradient,
    TrainConfig,
    TrainReport,
    default_params,
    fit,
    grad_marginal_loglik,
)

__version__ = "0.1.0"

__all__ = [
    "ABSTAIN",
    "Alignment",
    "ConfigError",
    "EmptyDatasetError",
    "EndModelConfig",
    "EngineError",
    "HardLabels",
    "IdentifiabilityReport",
    "LabelSpace",
    "LikelihoodGradient",
    "LinearModel",
    "ModelParams",
    "NonFiniteError",
    "ParseError",
    "PartialLabel",
    "PlfSpec",
    "Posterior",
    "PrecomputedBatch",
    "ProductTooLargeError",
    "ShapeMismatchError",
    "SpecValidationError",
    "SpecViolation",
    "SynthSample",
    "TooFewPlfsError",
    "TrainConfig",
    "TrainReport",
    "Tripartition",
    "UNLABELED",
    "ValidationError",
    "VoteMatrix",
    "VoteValidationError",
    "align_labels",
    "check_identifiability",
    "conditional_prob",
    "coverage_filter",
    "default_params",
    "expected_ce_loss",
    "fit",
    "fit_linear",
    "from_probability",
    "grad_marginal_loglik",
    "grouped_conditional_matrix",
    "kruskal_rank",
    "lfs_only",
    "macro_f1",
    "micro_accuracy",
    "naive_marginal_loglik",
    "nearest_class",
    "numeric_rank",
    "permute_classes_params",
    "permute_classes_specs",
    "posterior",
    "precompute_batch",
    "random_params",
    "random_plf_specs",
    "require_valid_specs",
    "sample",
    "singleton_witness",
    "to_probability",
    "traditional_lf",
    "validate_plf_spec",
    "validate_votes",
    "vectorized_marginal_loglik",
]

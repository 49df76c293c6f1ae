"""Binary CSP patterns: occurrence testing, tractability classification, solvers and generators."""

from .errors import (
    BadParameter,
    BoundExceeded,
    CsppatError,
    IllegalMerge,
    IncomparableMerge,
    IncompatibleContext,
    InternalInvariantViolation,
    NotConnected,
    NotFlat,
    NotHomomorphic,
    NotNegative,
    ParseError,
    PartialAssignment,
    SamplingExhausted,
    ScopeMismatch,
    ValidationError,
)
from .model import (
    FALSE,
    TRUE,
    UNDEFINED,
    ConstraintPattern,
    Context,
    CspInstance,
    CspPattern,
    TruthValue,
    canonical_scope,
    disjoint_union,
    instance_as_pattern,
    is_solution,
    neg,
    pattern_as_instance,
    realises,
    truth_join,
    truth_leq,
)
from .analysis import (
    Intractable,
    PivotEmbeddable,
    classify_negative_pattern,
    inconsistency_graph,
)
from .catalog import PATTERN_NAMES
from .catalog import build as build_pattern
from .occurrence import (
    ForbidsResult,
    Occurrence,
    Renaming,
    forbids,
    occurs,
    occurs_in_instance,
)
from .serialize import parse, serialise
from .solvers import SolveOutcome, SolveStatus, solve_auto

__all__ = [
    "BadParameter",
    "BoundExceeded",
    "CsppatError",
    "IllegalMerge",
    "IncomparableMerge",
    "IncompatibleContext",
    "InternalInvariantViolation",
    "NotConnected",
    "NotFlat",
    "NotHomomorphic",
    "NotNegative",
    "ParseError",
    "PartialAssignment",
    "SamplingExhausted",
    "ScopeMismatch",
    "ValidationError",
    "FALSE",
    "TRUE",
    "UNDEFINED",
    "ConstraintPattern",
    "Context",
    "CspInstance",
    "CspPattern",
    "TruthValue",
    "canonical_scope",
    "disjoint_union",
    "instance_as_pattern",
    "is_solution",
    "neg",
    "pattern_as_instance",
    "realises",
    "truth_join",
    "truth_leq",
    "Intractable",
    "PivotEmbeddable",
    "classify_negative_pattern",
    "inconsistency_graph",
    "PATTERN_NAMES",
    "build_pattern",
    "ForbidsResult",
    "Occurrence",
    "Renaming",
    "forbids",
    "occurs",
    "occurs_in_instance",
    "parse",
    "serialise",
    "SolveOutcome",
    "SolveStatus",
    "solve_auto",
]

__version__ = "0.1.0"

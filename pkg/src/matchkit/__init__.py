"""Matching under preferences: solvers, generators, oracle, wire service."""

from .errors import (
    BudgetError,
    InapplicableError,
    MatchkitError,
    ParseError,
    UnsolvableError,
)
from .model import (
    AgentId,
    Instance,
    Matching,
    ProblemClass,
    Role,
    StabilityCriterion,
    is_blocking_pair,
    is_stable,
    make_matching,
)
from .textio import classify, parse, serialize

__version__ = "0.1.0"

__all__ = [
    "AgentId",
    "BudgetError",
    "InapplicableError",
    "Instance",
    "Matching",
    "MatchkitError",
    "ParseError",
    "ProblemClass",
    "Role",
    "StabilityCriterion",
    "UnsolvableError",
    "classify",
    "is_blocking_pair",
    "is_stable",
    "make_matching",
    "parse",
    "serialize",
    "__version__",
]

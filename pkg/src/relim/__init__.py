"""Round-elimination toolkit for LCL problems in the black-white formalism."""

from relim.core import (
    Constraint,
    ParseError,
    Problem,
    constraint_contains,
    dominates_config,
    parse_problem,
    pick_check,
    serialize_problem,
)

__all__ = [
    "Constraint",
    "ParseError",
    "Problem",
    "constraint_contains",
    "dominates_config",
    "parse_problem",
    "pick_check",
    "serialize_problem",
]

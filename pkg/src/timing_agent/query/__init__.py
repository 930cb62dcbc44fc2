"""Sandboxed pipeline query language over report databases."""

from .engine import BudgetExceeded, EmptyInput, Provenance, QueryResult, SandboxBudget, execute
from .oracle import oracle_execute
from .parser import QueryError, QuerySyntaxError, QueryTypeError, parse_query

__all__ = [
    "BudgetExceeded",
    "EmptyInput",
    "Provenance",
    "QueryError",
    "QueryResult",
    "QuerySyntaxError",
    "QueryTypeError",
    "SandboxBudget",
    "execute",
    "oracle_execute",
    "parse_query",
]

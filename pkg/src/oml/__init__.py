"""OML: type classes with qualified types, entailment, functional dependencies,
and a specialization-based semantics over finite frames."""

from .errors import OmlError
from .parser import parse_expr, parse_program, parse_scheme, parse_type
from .typecheck import check_program

__all__ = ["OmlError", "parse_program", "parse_expr", "parse_scheme", "parse_type",
           "check_program"]
__version__ = "0.1.0"

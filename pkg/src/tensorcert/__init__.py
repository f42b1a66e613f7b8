"""Symbolic tensor calculus with exact coefficients and a derivation replay engine."""
from .canon import canonicalize, equal, is_zero
from .ir import Expr, Factor, Index, SymbolTable, TensorError, Term
from .parser import ParseError, parse_expr, print_expr

__version__ = "0.1.0"

__all__ = ["Expr", "Factor", "Index", "ParseError", "SymbolTable", "TensorError", "Term",
           "canonicalize", "equal", "is_zero", "parse_expr", "print_expr", "__version__"]

"""Symbolic Wirtinger calculus and numerical verification of correlation
identities for plurisubharmonic functions under the complex Gaussian measure."""
from ._backend import BACKEND
from .catalog import CatalogEntry, builtin_catalog, get_entry, make_entry, validate_entry
from .expr import (
    ConjVar,
    Const,
    Expr,
    Poly,
    Var,
    evaluate,
    evaluate_many,
    normalize,
    to_polynomial,
    to_text,
    wirtinger_dz,
    wirtinger_dzbar,
    z,
    zbar,
)
from .gauss import MCConfig, exact_moment, hermite_rule, integrate_exact, integrate_mc, integrate_poly, integrate_quadrature
from .growth import Growth, UnboundedGrowth, check_growth
from .operators import L, OU, R, Lbar, apply_operator, complex_hessian, hessian_at, mehler, min_eigenvalue
from .parser import ParseError, parse_expr
from .verify import AlphaStudy, CheckResult, Report, RunConfig, Verifier, run_suite

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CatalogEntry", "builtin_catalog", "get_entry", "make_entry", "validate_entry",
    "ConjVar", "Const", "Expr", "Poly", "Var", "evaluate", "evaluate_many", "normalize", "to_polynomial",
    "to_text", "wirtinger_dz", "wirtinger_dzbar", "z", "zbar",
    "MCConfig", "exact_moment", "hermite_rule", "integrate_exact", "integrate_mc", "integrate_poly",
    "integrate_quadrature", "Growth", "UnboundedGrowth", "check_growth",
    "L", "OU", "R", "Lbar", "apply_operator", "complex_hessian", "hessian_at", "mehler", "min_eigenvalue",
    "ParseError", "parse_expr", "AlphaStudy", "CheckResult", "Report", "RunConfig", "Verifier", "run_suite",
]

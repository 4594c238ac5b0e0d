"""Test functions with claimed properties, and the validators for those claims."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional

import numpy as np

from .expr import (
    Expr,
    NotPolynomial,
    evaluate_many,
    is_real_valued,
    max_index,
    normalize,
    to_polynomial,
    to_text,
)
from .gauss import sample_complex_gaussian
from .growth import Growth, UnboundedGrowth, can_pair, check_growth
from .operators import hessians_at, min_eigenvalue
from .parser import parse_expr

PSH_TOL = 1e-10
SYMMETRY_TOL = 1e-10
VALIDATION_SEED = 20230426


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    expr: Expr
    n: int
    claimed_psh: bool
    claimed_circular: bool
    growth: Growth
    text: str = ""
    control: bool = False

    @property
    def is_polynomial(self) -> bool:
        return self.growth.kind == "polynomial"


@dataclass(frozen=True)
class ValidationReport:
    entry: str
    check: str
    witness: Optional[tuple]
    value: float
    tol: float
    passed: bool
    detail: str = ""


def make_entry(name: str, text: str, n: int, psh: bool = False, circular: bool = False, control: bool = False) -> CatalogEntry:
    """Build an entry from a grammar string; claims are not validated here."""
    e = parse_expr(text, n)
    return CatalogEntry(name, e, n, psh, circular, check_growth(e), text, control)


def entry_from_expr(e: Expr, n: Optional[int] = None, name: Optional[str] = None) -> CatalogEntry:
    """Wrap a bare expression (no claims) so it can be passed to the checks."""
    e = normalize(e)
    n = max(max_index(e), 1) if n is None else n
    return CatalogEntry(name or to_text(e), e, n, False, False, check_growth(e), to_text(e))


def _norm2(n: int) -> str:
    return " + ".join(f"abs2(z{j})" for j in range(1, n + 1))


def _hermitian_form(n: int) -> str:
    # A = 2 I + off-diagonal (0.5 +- 0.5i): strictly diagonally dominant, so PSD
    parts = [f"2*abs2(z{j})" for j in range(1, n + 1)]
    for j in range(1, n):
        parts.append(f"(0.5+0.5i)*conj(z{j})*z{j + 1}")
        parts.append(f"(0.5-0.5i)*conj(z{j + 1})*z{j}")
    return " + ".join(parts)


@lru_cache(maxsize=8)
def _builtin(n: int):
    s = _norm2(n)
    specs = [
        # name, text, psh, circular
        ("norm2", s, True, True),
        ("herm_form", _hermitian_form(n), True, True),
        ("norm2_sq", f"({s})^2", True, True),
        ("norm2_cube", f"({s})^3", True, True),
    ]
    if n >= 2:
        powers = " + ".join(f"abs2(z{j})^{1 + (j % 3)}" for j in range(1, n + 1))
        specs.append(("sum_powers", powers, True, True))
    specs += [
        ("exp_quarter", f"exp(0.25*({s}))", True, True),
        ("exp_half", f"exp(0.5*({s}))", True, True),
        ("shift_norm", "abs2(z1 - 1)", True, False),
        ("re_sq", "re(z1)^2", True, False),
        ("exp_re", "exp(re(z1))", True, False),
        ("holo_sq", f"abs2(z1^2 + z{n} + 1)", True, False),
    ]
    controls = [
        ("re_z1", "re(z1)", True, False),
        ("neg_re_z1", "-re(z1)", True, False),
        ("neg_norm2", f"-({s})", False, True),
    ]
    entries = [make_entry(name, text, n, psh, circ) for name, text, psh, circ in specs]
    entries += [make_entry(name, text, n, psh, circ, control=True) for name, text, psh, circ in controls]
    return tuple(entries)


def builtin_catalog(n: int) -> List[CatalogEntry]:
    if not 1 <= n <= 4:
        raise ValueError(f"catalog dimension must lie in [1, 4], got {n}")
    return list(_builtin(n))


def get_entry(name: str, n: int) -> CatalogEntry:
    for e in _builtin(n):
        if e.name == name:
            return e
    raise KeyError(f"no catalog entry named {name!r} at dimension {n}")


# negative-control pairs for the correlation inequality: (f, g, hypothesis that fails)
CONTROL_PAIRS = (
    ("re_z1", "neg_re_z1", "f not circular-symmetric"),
    ("norm2", "neg_norm2", "g not psh"),
)


# ---------------------------------------------------------------------------
# validators


def default_points(n: int, seed: int = VALIDATION_SEED, gaussian: int = 200, dilated: int = 50) -> np.ndarray:
    """Gaussian sample plus a ring dilated by 3."""
    rng = np.random.default_rng(seed)
    a = sample_complex_gaussian(n, rng, gaussian)
    b = 3.0 * sample_complex_gaussian(n, rng, dilated)
    return np.concatenate([a, b])


def _as_expr(e) -> Expr:
    return e.expr if isinstance(e, CatalogEntry) else e


def _name(e) -> str:
    return e.name if isinstance(e, CatalogEntry) else to_text(e)


def check_psh(e, n: Optional[int] = None, points=None, tol: float = PSH_TOL) -> ValidationReport:
    """Minimum over sample points of the smallest complex-Hessian eigenvalue."""
    expr = _as_expr(e)
    n = (e.n if isinstance(e, CatalogEntry) else max(max_index(expr), 1)) if n is None else n
    pts = default_points(n) if points is None else np.atleast_2d(np.asarray(points, dtype=np.complex128))
    H = hessians_at(expr, pts, n)
    worst, witness = math.inf, None
    for i in range(len(pts)):
        lam = min_eigenvalue(H[i])
        if lam < worst:
            worst, witness = lam, tuple(complex(x) for x in pts[i])
    return ValidationReport(_name(e), "psh", witness, worst, tol, worst >= -tol)


def structural_circular(e: Expr) -> Optional[bool]:
    """Bidegree test ``|a| == |b|`` on every monomial; None if not a polynomial."""
    try:
        p = to_polynomial(e)
    except NotPolynomial:
        return None
    return all(sum(a) == sum(b) for (a, b), _ in p.terms)


def check_circular_symmetry(e, n: Optional[int] = None, tol: float = SYMMETRY_TOL, trials: int = 50, seed: int = VALIDATION_SEED) -> ValidationReport:
    expr = _as_expr(e)
    n = (e.n if isinstance(e, CatalogEntry) else max(max_index(expr), 1)) if n is None else n
    rng = np.random.default_rng(seed + 1)
    W = sample_complex_gaussian(n, rng, trials)
    theta = rng.uniform(-math.pi, math.pi, trials)
    theta[0] = math.pi  # always probe the half turn
    base = evaluate_many(expr, W)
    rot = evaluate_many(expr, W * np.exp(1j * theta)[:, None])
    dev = np.abs(rot - base) / (1.0 + np.abs(base))
    i = int(np.argmax(dev))
    numeric_ok = bool(dev[i] <= tol)
    structural = structural_circular(expr)
    passed = numeric_ok and (structural is None or structural == numeric_ok)
    detail = "" if structural is None else f"structural={structural}"
    return ValidationReport(_name(e), "circular", tuple(complex(x) for x in W[i]), float(dev[i]), tol, passed, detail)


def check_real_valued(e, n: Optional[int] = None, tol: float = 1e-12) -> ValidationReport:
    expr = _as_expr(e)
    n = (e.n if isinstance(e, CatalogEntry) else max(max_index(expr), 1)) if n is None else n
    pts = default_points(n, gaussian=20, dilated=0)
    vals = evaluate_many(expr, pts)
    dev = np.abs(vals.imag) / (1.0 + np.abs(vals))
    i = int(np.argmax(dev))
    ok = bool(dev[i] <= tol) and is_real_valued(expr)
    return ValidationReport(_name(e), "real", tuple(complex(x) for x in pts[i]), float(dev[i]), tol, ok)


@lru_cache(maxsize=256)
def validate_entry(entry: CatalogEntry):
    """Check every claim of ``entry``; a report passes when the verdict matches the claim."""
    out = [check_real_valued(entry)]
    psh = check_psh(entry)
    out.append(_against_claim(psh, entry.claimed_psh))
    circ = check_circular_symmetry(entry)
    out.append(_against_claim(circ, entry.claimed_circular))
    return tuple(out)


def _against_claim(rep: ValidationReport, claim: bool) -> ValidationReport:
    if claim:
        return rep
    # a false claim is confirmed when the validator fails
    return ValidationReport(rep.entry, f"not_{rep.check}", rep.witness, rep.value, rep.tol, not rep.passed, rep.detail)


def entry_is_valid(entry: CatalogEntry) -> bool:
    return all(r.passed for r in validate_entry(entry))


def pairable(f: CatalogEntry, g: CatalogEntry) -> bool:
    return can_pair(f.growth, g.growth)


__all__ = [
    "CatalogEntry",
    "ValidationReport",
    "UnboundedGrowth",
    "builtin_catalog",
    "check_circular_symmetry",
    "check_growth",
    "check_psh",
    "check_real_valued",
    "entry_from_expr",
    "get_entry",
    "make_entry",
    "pairable",
    "validate_entry",
]

"""Ornstein-Uhlenbeck type operators, complex Hessians and the Mehler semigroup.

Conventions (all sums over j = 1..n)::

    L    = sum d2/dz_j dzbar_j - zbar_j d/dzbar_j
    Lbar = sum d2/dz_j dzbar_j - z_j d/dz_j
    OU   = sum d2/dz_j dzbar_j - (z_j d/dz_j + zbar_j d/dzbar_j) / 2
         = (1/4) Laplacian - (1/2)(x . grad_x + y . grad_y)
    R    = -i sum z_j d/dz_j - zbar_j d/dzbar_j  =  sum y_j d/dx_j - x_j d/dy_j

The Mehler semigroup of ``OU`` is ``P_t f(w) = int f(c w + s u) dgamma(u)``
with ``c = exp(-t/2)`` and ``s = sqrt(1 - exp(-t))``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import product as iproduct
from typing import List, Optional

import numpy as np

from . import kernels
from .expr import (
    Const,
    DimensionError,
    Exp,
    Expr,
    Poly,
    Prod,
    Sum,
    Var,
    ConjVar,
    ZERO,
    _canon,
    _rebuild,
    _thaw,
    evaluate,
    evaluate_many,
    max_index,
    normalize,
    to_polynomial,
    wirtinger_dz,
    wirtinger_dzbar,
)
from .gauss import QuadratureRule, _weighted_sum, quadrature_grid


class OperatorKind(enum.Enum):
    OU = "OU"
    L = "L"
    LBAR = "Lbar"
    R = "R"


class NotHermitian(ValueError):
    pass


def _dim(e: Expr, n: Optional[int]) -> int:
    return max_index(e) if n is None else n


def _laplace_part(e: Expr, n: int) -> List[Expr]:
    return [wirtinger_dz(wirtinger_dzbar(e, j), j) for j in range(1, n + 1)]


def apply_operator(kind: OperatorKind, e: Expr, n: Optional[int] = None) -> Expr:
    """Apply ``kind`` symbolically; the result is normalized."""
    kind = OperatorKind(kind)
    n = _dim(e, n)
    terms: List[Expr] = []
    if kind is OperatorKind.R:
        for j in range(1, n + 1):
            terms.append(Prod((Const(-1j), Var(j), wirtinger_dz(e, j))))
            terms.append(Prod((Const(1j), ConjVar(j), wirtinger_dzbar(e, j))))
        return normalize(Sum(tuple(terms)))
    terms.extend(_laplace_part(e, n))
    for j in range(1, n + 1):
        if kind is OperatorKind.L:
            terms.append(Prod((Const(-1), ConjVar(j), wirtinger_dzbar(e, j))))
        elif kind is OperatorKind.LBAR:
            terms.append(Prod((Const(-1), Var(j), wirtinger_dz(e, j))))
        else:
            terms.append(Prod((Const(-0.5), Var(j), wirtinger_dz(e, j))))
            terms.append(Prod((Const(-0.5), ConjVar(j), wirtinger_dzbar(e, j))))
    return normalize(Sum(tuple(terms)))


def L(e: Expr, n: Optional[int] = None) -> Expr:
    return apply_operator(OperatorKind.L, e, n)


def Lbar(e: Expr, n: Optional[int] = None) -> Expr:
    return apply_operator(OperatorKind.LBAR, e, n)


def OU(e: Expr, n: Optional[int] = None) -> Expr:
    return apply_operator(OperatorKind.OU, e, n)


def R(e: Expr, n: Optional[int] = None) -> Expr:
    return apply_operator(OperatorKind.R, e, n)


def swapped_drift_L(e: Expr, n: Optional[int] = None) -> Expr:
    """``sum d2/dz dzbar - zbar_j d/dz_j``: the conjugation placement we reject.

    Kept only as a diagnostic; it fails the first integration-by-parts
    identity (see :func:`pshgauss.verify.swapped_drift_residual`).
    """
    n = _dim(e, n)
    terms = _laplace_part(e, n)
    terms += [Prod((Const(-1), ConjVar(j), wirtinger_dz(e, j))) for j in range(1, n + 1)]
    return normalize(Sum(tuple(terms)))


def divergence_form_L(e: Expr, n: Optional[int] = None) -> Expr:
    """``sum_j exp(|z_j|^2) d/dz_j (exp(-|z_j|^2) d/dzbar_j e)``."""
    n = _dim(e, n)
    terms = []
    for j in range(1, n + 1):
        q = Prod((Var(j), ConjVar(j)))
        inner = Prod((Exp(Prod((Const(-1), q))), wirtinger_dzbar(e, j)))
        terms.append(Prod((Exp(q), wirtinger_dz(inner, j))))
    return normalize(Sum(tuple(terms)))


def check_divergence_form(e: Expr, points, n: Optional[int] = None) -> float:
    """Largest pointwise gap between ``L e`` and its divergence form."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.complex128))
    lhs = evaluate_many(L(e, n), pts)
    rhs = evaluate_many(divergence_form_L(e, n), pts)
    return float(np.max(np.abs(lhs - rhs))) if len(pts) else 0.0


# ---------------------------------------------------------------------------
# complex Hessian


def complex_hessian(e: Expr, n: Optional[int] = None):
    """``H[j][k] = d2 e / dz_j dzbar_k`` (0-based lists of expressions)."""
    n = max(_dim(e, n), 1)
    return [[wirtinger_dz(wirtinger_dzbar(e, k + 1), j + 1) for k in range(n)] for j in range(n)]


@dataclass(frozen=True)
class HermitianMatrix:
    data: np.ndarray
    asymmetry: float = 0.0

    @property
    def n(self) -> int:
        return self.data.shape[0]


def hessians_at(e: Expr, Z, n: Optional[int] = None) -> np.ndarray:
    """Evaluated Hessians at each row of ``Z``; shape ``(npoints, n, n)``."""
    Z = np.atleast_2d(np.asarray(Z, dtype=np.complex128))
    n = Z.shape[1] if n is None else n
    if max_index(e) > n:
        raise DimensionError(f"expression uses z{max_index(e)} but dimension is {n}")
    H = complex_hessian(e, n)
    out = np.empty((Z.shape[0], n, n), dtype=np.complex128)
    for j in range(n):
        for k in range(n):
            out[:, j, k] = evaluate_many(H[j][k], Z)
    return out


def hessian_at(e: Expr, w) -> HermitianMatrix:
    w = np.asarray(w, dtype=np.complex128)
    if w.ndim != 1:
        raise DimensionError("a point must be a 1-d sequence")
    H = hessians_at(e, w[None, :], len(w))[0]
    dev = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
    return HermitianMatrix(0.5 * (H + H.conj().T), dev)


def min_eigenvalue(H, tol: float = 1e-10) -> float:
    """Smallest eigenvalue of a Hermitian matrix via cyclic Jacobi rotations.

    The complex matrix ``A + iB`` is embedded as the real symmetric
    ``[[A, -B], [B, A]]``, whose spectrum is that of ``H`` with every
    eigenvalue doubled.
    """
    M = H.data if isinstance(H, HermitianMatrix) else np.asarray(H, dtype=np.complex128)
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError("matrix must be square")
    scale = 1.0 + float(np.max(np.abs(M))) if M.size else 1.0
    if M.size and np.max(np.abs(M - M.conj().T)) > tol * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    M = 0.5 * (M + M.conj().T)
    A, B = M.real, M.imag
    emb = np.ascontiguousarray(np.block([[A, -B], [B, A]]))
    return float(kernels.jacobi_eigvalsh(emb)[0])


# ---------------------------------------------------------------------------
# Mehler semigroup


@dataclass(frozen=True)
class SemigroupParams:
    t: float

    def __post_init__(self):
        if not self.t >= 0:
            raise ValueError(f"semigroup time must be >= 0, got {self.t}")

    @property
    def contraction(self) -> float:
        return math.exp(-self.t / 2)

    @property
    def noise2(self) -> float:
        return -math.expm1(-self.t)

    @property
    def noise(self) -> float:
        return math.sqrt(self.noise2)


def _params(t) -> SemigroupParams:
    return t if isinstance(t, SemigroupParams) else SemigroupParams(float(t))


def mehler_apply_poly(p: Poly, t) -> Poly:
    """Exact ``P_t p``.

    Substituting ``z <- c z + s u`` and integrating in ``u`` maps each
    coordinate factor ``z^a zbar^b`` to
    ``sum_q C(a,q) C(b,q) q! c^(a+b-2q) s^(2q) z^(a-q) zbar^(b-q)``.
    """
    prm = _params(t)
    c, s2 = prm.contraction, prm.noise2
    out = {}
    for (a, b), coeff in p.terms:
        per_coord = []
        for aj, bj in zip(a, b):
            opts = []
            for q in range(min(aj, bj) + 1):
                w = math.comb(aj, q) * math.comb(bj, q) * math.factorial(q) * c ** (aj + bj - 2 * q) * s2**q
                if w != 0.0 or q == 0:
                    opts.append((q, w))
            per_coord.append(opts)
        for choice in iproduct(*per_coord):
            w = coeff
            for _, wj in choice:
                w *= wj
            key = (tuple(aj - q for aj, (q, _) in zip(a, choice)), tuple(bj - q for bj, (q, _) in zip(b, choice)))
            out[key] = out.get(key, 0j) + w
    return Poly.from_dict(p.n, out)


def _hermitian_exponent(key) -> Optional[np.ndarray]:
    """Matrix ``A`` with exponent ``= sum conj(z_j) A_jk z_k``, else None."""
    kc = _thaw(key)
    if set(kc) != {None}:
        return None
    poly = kc[None]
    n = max(j for mono in poly for j, _, _ in mono)
    A = np.zeros((n, n), dtype=np.complex128)
    for mono, v in poly.items():
        hol = [j for j, a, _ in mono for _ in range(a)]
        anti = [j for j, _, b in mono for _ in range(b)]
        if len(hol) != 1 or len(anti) != 1:
            return None
        # term v z_k zbar_j contributes A_jk
        A[anti[0] - 1, hol[0] - 1] += v
    if np.max(np.abs(A - A.conj().T)) > 1e-14 * (1 + np.max(np.abs(A))):
        return None
    return A


def _gaussian_term(A: np.ndarray, coeff: complex, prm: SemigroupParams) -> Expr:
    n = A.shape[0]
    M = np.eye(n) - prm.noise2 * A
    Minv = np.linalg.inv(M)
    Anew = prm.contraction**2 * A @ Minv
    Anew = 0.5 * (Anew + Anew.conj().T)
    pref = coeff / np.linalg.det(M).real
    quad = []
    for j in range(n):
        for k in range(n):
            if Anew[j, k] != 0:
                quad.append(Prod((Const(Anew[j, k]), ConjVar(j + 1), Var(k + 1))))
    return Prod((Const(pref), Exp(Sum(tuple(quad)))))


def has_mehler_closed_form(e: Expr) -> bool:
    try:
        mehler(e, 0.0)
    except NotImplementedError:
        return False
    return True


def mehler(e: Expr, t, n: Optional[int] = None) -> Expr:
    """Closed-form ``P_t e`` for polynomials plus ``const * exp(Hermitian form)`` terms.

    Gaussian terms use ``P_t exp(z^* A z) = det(I - s^2 A)^-1
    exp(c^2 z^* A (I - s^2 A)^-1 z)`` (requires ``A < 1``).
    """
    prm = _params(t)
    c = _canon(e)
    pieces: List[Expr] = []
    poly_part = c.get(None)
    if poly_part:
        p = to_polynomial(_rebuild({None: poly_part}), max(n or 0, max_index(e), 1))
        pieces.append(mehler_apply_poly(p, prm).to_expr())
    for key, pm in c.items():
        if key is None:
            continue
        A = _hermitian_exponent(key)
        if A is None or set(pm) != {()}:
            raise NotImplementedError("no closed-form Mehler transform for this term")
        if np.linalg.eigvalsh(A)[-1] >= 1.0:
            raise NotImplementedError("Gaussian exponent too large for the semigroup")
        pieces.append(_gaussian_term(A, pm[()], prm))
    return normalize(Sum(tuple(pieces))) if pieces else ZERO


def mehler_apply_quadrature(e: Expr, t, w, rule: QuadratureRule) -> complex:
    """``P_t e (w)`` by tensor quadrature in ``u``."""
    prm = _params(t)
    w = np.asarray(w, dtype=np.complex128)
    if prm.noise == 0.0:
        return evaluate(e, w)
    Zu, W = quadrature_grid(len(w), rule)
    pts = prm.contraction * w[None, :] + prm.noise * Zu
    return _weighted_sum(evaluate_many(e, pts), W)


def generator_check(e: Expr, t: float, points, h: Optional[float] = None) -> float:
    """Max over ``points`` of ``|(P_{t+h} e - P_{t-h} e)/2h - OU(P_t e)|``."""
    h = 1e-4 * (1 + t) if h is None else h
    if t < h:
        raise ValueError("generator_check needs t >= h")
    pts = np.atleast_2d(np.asarray(points, dtype=np.complex128))
    n = pts.shape[1]
    fd = (evaluate_many(mehler(e, t + h, n), pts) - evaluate_many(mehler(e, t - h, n), pts)) / (2 * h)
    gen = evaluate_many(OU(mehler(e, t, n), n), pts)
    return float(np.max(np.abs(fd - gen)))

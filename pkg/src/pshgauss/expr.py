"""Symbolic expressions over C^n closed under Wirtinger differentiation.

Expressions are immutable trees built from :class:`Var` (``z_j``),
:class:`ConjVar` (``conj(z_j)``), :class:`Const`, :class:`Sum`,
:class:`Prod`, :class:`IntPow`, :class:`Exp` and :class:`Conj`.  Variable
indices are 1-based.

Every expression has a canonical form ``sum_k P_k(z, zbar) * exp(K_k)``
where each ``P_k`` is a polynomial in ``z`` and ``zbar`` and each exponent
``K_k`` is itself canonical with no constant term.  :func:`normalize`
returns the tree form of that canonical representation, so structural
equality of normalized expressions implies pointwise equality.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Optional, Tuple, Union

import numpy as np

from . import kernels

Number = Union[int, float, complex]


class NotPolynomial(ValueError):
    """Raised when an expression with ``exp`` is converted to a polynomial."""


class DimensionError(ValueError):
    """Variable index or point length inconsistent with the dimension."""


class Expr:
    __slots__ = ()

    def __add__(self, other):
        return Sum((self, as_expr(other)))

    def __radd__(self, other):
        return Sum((as_expr(other), self))

    def __sub__(self, other):
        return Sum((self, Prod((Const(-1), as_expr(other)))))

    def __rsub__(self, other):
        return Sum((as_expr(other), Prod((Const(-1), self))))

    def __mul__(self, other):
        return Prod((self, as_expr(other)))

    def __rmul__(self, other):
        return Prod((as_expr(other), self))

    def __neg__(self):
        return Prod((Const(-1), self))

    def __pow__(self, k):
        return IntPow(self, k)


@dataclass(frozen=True, slots=True)
class Var(Expr):
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise DimensionError(f"variable index must be >= 1, got {self.index}")


@dataclass(frozen=True, slots=True)
class ConjVar(Expr):
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise DimensionError(f"variable index must be >= 1, got {self.index}")


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True, slots=True)
class Sum(Expr):
    terms: Tuple[Expr, ...]


@dataclass(frozen=True, slots=True)
class Prod(Expr):
    factors: Tuple[Expr, ...]


@dataclass(frozen=True, slots=True)
class IntPow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if int(self.exponent) != self.exponent or self.exponent < 0:
            raise ValueError(f"IntPow exponent must be a non-negative integer, got {self.exponent}")


@dataclass(frozen=True, slots=True)
class Exp(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Conj(Expr):
    arg: Expr


ZERO = Const(0)
ONE = Const(1)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return Const(complex(x))
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def z(j: int) -> Var:
    return Var(j)


def zbar(j: int) -> ConjVar:
    return ConjVar(j)


# ---------------------------------------------------------------------------
# canonical form
#
# Mono     : tuple of (j, a, b), sorted by j, meaning prod_j z_j^a zbar_j^b
# PolyMap  : {Mono: complex}, no zero coefficients
# Canon    : {ExpKey: PolyMap}; ExpKey is None or a frozen canon (no constant)

Mono = Tuple[Tuple[int, int, int], ...]
PolyMap = Dict[Mono, complex]


def _mono_mul(m1: Mono, m2: Mono) -> Mono:
    if not m1:
        return m2
    if not m2:
        return m1
    acc = {j: [a, b] for j, a, b in m1}
    for j, a, b in m2:
        if j in acc:
            acc[j][0] += a
            acc[j][1] += b
        else:
            acc[j] = [a, b]
    return tuple((j, ab[0], ab[1]) for j, ab in sorted(acc.items()))


def _freeze(c):
    items = []
    for k, p in c.items():
        items.append((k, tuple(sorted(p.items()))))
    items.sort(key=lambda kv: _key_sort(kv[0]))
    return tuple(items)


def _thaw(fc):
    return {k: dict(items) for k, items in fc}


def _key_sort(k):
    if k is None:
        return (0,)
    return (1, tuple((_key_sort(kk), tuple((m, (c.real, c.imag)) for m, c in items)) for kk, items in k))


def _poly_add_into(dst: PolyMap, src: PolyMap, scale: complex = 1.0) -> None:
    for m, c in src.items():
        v = dst.get(m, 0j) + scale * c
        if v == 0:
            dst.pop(m, None)
        else:
            dst[m] = v


def _c_add(a, b):
    out = {k: dict(p) for k, p in a.items()}
    for k, p in b.items():
        dst = out.setdefault(k, {})
        _poly_add_into(dst, p)
        if not dst:
            del out[k]
    return out


def _c_scale(a, s: complex):
    if s == 0:
        return {}
    return {k: {m: c * s for m, c in p.items()} for k, p in a.items()}


def _p_mul(p: PolyMap, q: PolyMap) -> PolyMap:
    out: PolyMap = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mono_mul(m1, m2)
            v = out.get(m, 0j) + c1 * c2
            if v == 0:
                out.pop(m, None)
            else:
                out[m] = v
    return out


def _key_add(k1, k2):
    if k1 is None:
        return k2
    if k2 is None:
        return k1
    s = _c_add(_thaw(k1), _thaw(k2))
    return _freeze(s) if s else None


def _c_mul(a, b):
    out = {}
    for k1, p1 in a.items():
        for k2, p2 in b.items():
            k = _key_add(k1, k2)
            prod = _p_mul(p1, p2)
            if not prod:
                continue
            dst = out.setdefault(k, {})
            _poly_add_into(dst, prod)
            if not dst:
                del out[k]
    return out


def _c_pow(a, k: int):
    result = {None: {(): 1 + 0j}}
    base = a
    while k > 0:
        if k & 1:
            result = _c_mul(result, base)
        k >>= 1
        if k:
            base = _c_mul(base, base)
    return result


def _c_exp(a):
    c0 = a.get(None, {}).get((), 0j)
    rest = {k: dict(p) for k, p in a.items()}
    if c0 != 0:
        del rest[None][()]
        if not rest[None]:
            del rest[None]
    coeff = cmath.exp(c0)
    if not rest:
        return {None: {(): coeff}}
    return {_freeze(rest): {(): coeff}}


def _c_conj(a):
    out = {}
    for k, p in a.items():
        ck = None if k is None else _freeze(_c_conj(_thaw(k)))
        out[ck] = {tuple((j, b, aa) for j, aa, b in m): c.conjugate() for m, c in p.items()}
    return out


@lru_cache(maxsize=65536)
def _canon(e: Expr):
    if isinstance(e, Var):
        return {None: {((e.index, 1, 0),): 1 + 0j}}
    if isinstance(e, ConjVar):
        return {None: {((e.index, 0, 1),): 1 + 0j}}
    if isinstance(e, Const):
        return {} if e.value == 0 else {None: {(): e.value}}
    if isinstance(e, Sum):
        out = {}
        for t in e.terms:
            out = _c_add(out, _canon(t))
        return out
    if isinstance(e, Prod):
        out = {None: {(): 1 + 0j}}
        for f in e.factors:
            out = _c_mul(out, _canon(f))
            if not out:
                break
        return out
    if isinstance(e, IntPow):
        return _c_pow(_canon(e.base), int(e.exponent))
    if isinstance(e, Exp):
        return _c_exp(_canon(e.arg))
    if isinstance(e, Conj):
        return _c_conj(_canon(e.arg))
    raise TypeError(f"not an Expr node: {e!r}")


def _rebuild(c) -> Expr:
    terms = []
    for k in sorted(c, key=_key_sort):
        exp_factor = None if k is None else Exp(_rebuild(_thaw(k)))
        for mono in sorted(c[k]):
            coeff = c[k][mono]
            factors = []
            if coeff != 1:
                factors.append(Const(coeff))
            for j, a, b in mono:
                if a:
                    factors.append(Var(j) if a == 1 else IntPow(Var(j), a))
                if b:
                    factors.append(ConjVar(j) if b == 1 else IntPow(ConjVar(j), b))
            if exp_factor is not None:
                factors.append(exp_factor)
            if not factors:
                terms.append(Const(1))
            elif len(factors) == 1:
                terms.append(factors[0])
            else:
                terms.append(Prod(tuple(factors)))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Sum(tuple(terms))


@lru_cache(maxsize=65536)
def normalize(e: Expr) -> Expr:
    """Canonical tree form: idempotent, conjugations pushed to the leaves."""
    return _rebuild(_canon(e))


def conj_expr(e: Expr) -> Expr:
    return normalize(Conj(e))


def is_polynomial(e: Expr) -> bool:
    return all(k is None for k in _canon(e))


def is_real_valued(e: Expr) -> bool:
    """Structural test: the normalized form is invariant under conjugation."""
    return conj_expr(e) == normalize(e)


def is_zero(e: Expr) -> bool:
    return not _canon(e)


@lru_cache(maxsize=65536)
def max_index(e: Expr) -> int:
    """Largest variable index appearing in ``e`` (0 for constants)."""
    if isinstance(e, (Var, ConjVar)):
        return e.index
    if isinstance(e, Const):
        return 0
    if isinstance(e, Sum):
        return max((max_index(t) for t in e.terms), default=0)
    if isinstance(e, Prod):
        return max((max_index(t) for t in e.factors), default=0)
    if isinstance(e, IntPow):
        return max_index(e.base)
    return max_index(e.arg)


# ---------------------------------------------------------------------------
# Wirtinger derivatives (rule based on the tree, normalized on return)


def _d(e: Expr, j: int, bar: bool) -> Expr:
    if isinstance(e, Var):
        return ONE if (e.index == j and not bar) else ZERO
    if isinstance(e, ConjVar):
        return ONE if (e.index == j and bar) else ZERO
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Sum):
        return Sum(tuple(_d(t, j, bar) for t in e.terms))
    if isinstance(e, Prod):
        fs = e.factors
        terms = []
        for i, f in enumerate(fs):
            df = _d(f, j, bar)
            if df == ZERO:
                continue
            terms.append(Prod(fs[:i] + (df,) + fs[i + 1:]))
        return Sum(tuple(terms)) if terms else ZERO
    if isinstance(e, IntPow):
        k = e.exponent
        if k == 0:
            return ZERO
        db = _d(e.base, j, bar)
        if db == ZERO:
            return ZERO
        return Prod((Const(k), IntPow(e.base, k - 1), db))
    if isinstance(e, Exp):
        return Prod((_d(e.arg, j, bar), e))
    if isinstance(e, Conj):
        # d/dz conj(h) = conj(d/dzbar h) and vice versa
        return Conj(_d(e.arg, j, not bar))
    raise TypeError(f"not an Expr node: {e!r}")


@lru_cache(maxsize=65536)
def wirtinger_dz(e: Expr, j: int) -> Expr:
    """``d/dz_j`` with ``d z_k/dz_j = delta_jk`` and ``d zbar_k/dz_j = 0``."""
    if j < 1:
        raise DimensionError(f"index must be >= 1, got {j}")
    return normalize(_d(e, j, False))


@lru_cache(maxsize=65536)
def wirtinger_dzbar(e: Expr, j: int) -> Expr:
    """``d/dzbar_j``; the conjugate-variable mirror of :func:`wirtinger_dz`."""
    if j < 1:
        raise DimensionError(f"index must be >= 1, got {j}")
    return normalize(_d(e, j, True))


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class Poly:
    """``sum c_{a,b} z^a zbar^b`` with dense multi-indices of length ``n``.

    ``terms`` is a tuple of ``((a, b), c)`` sorted lexicographically by
    ``(a, b)`` with no zero coefficients.
    """

    n: int
    terms: Tuple[Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], complex], ...]

    @classmethod
    def from_dict(cls, n: int, coeffs) -> "Poly":
        items = []
        for (a, b), c in coeffs.items():
            a, b = tuple(int(x) for x in a), tuple(int(x) for x in b)
            if len(a) != n or len(b) != n:
                raise DimensionError(f"multi-index length must be {n}")
            c = complex(c)
            if c != 0:
                items.append(((a, b), c))
        items.sort(key=lambda t: t[0])
        return cls(n, tuple(items))

    def as_dict(self):
        return dict(self.terms)

    def __len__(self):
        return len(self.terms)

    @property
    def degree(self) -> int:
        return max((sum(a) + sum(b) for (a, b), _ in self.terms), default=0)

    def is_real(self, tol: float = 0.0) -> bool:
        d = self.as_dict()
        for (a, b), c in d.items():
            if abs(d.get((b, a), 0j) - c.conjugate()) > tol:
                return False
        return True

    def to_expr(self) -> Expr:
        return _rebuild(self._canon())

    def _canon(self):
        p = {}
        for (a, b), c in self.terms:
            mono = tuple((j + 1, a[j], b[j]) for j in range(self.n) if a[j] or b[j])
            p[mono] = c
        return {None: p} if p else {}

    def max_abs_diff(self, other: "Poly") -> float:
        d1, d2 = self.as_dict(), other.as_dict()
        keys = set(d1) | set(d2)
        return max((abs(d1.get(k, 0j) - d2.get(k, 0j)) for k in keys), default=0.0)


def to_polynomial(e: Expr, n: Optional[int] = None) -> Poly:
    """Expand ``e`` into a :class:`Poly`; raises :class:`NotPolynomial` on ``exp``."""
    c = _canon(e)
    if any(k is not None for k in c):
        raise NotPolynomial("expression contains exp terms")
    top = max_index(e)
    if n is None:
        n = max(top, 1)
    elif top > n:
        raise DimensionError(f"variable z{top} exceeds dimension {n}")
    out = {}
    for mono, coeff in c.get(None, {}).items():
        a, b = [0] * n, [0] * n
        for j, aj, bj in mono:
            a[j - 1], b[j - 1] = aj, bj
        out[(tuple(a), tuple(b))] = coeff
    return Poly.from_dict(n, out)


# ---------------------------------------------------------------------------
# compilation and evaluation


@dataclass(frozen=True)
class Program:
    ops: np.ndarray
    args: np.ndarray
    consts: np.ndarray
    depth: int
    nvars: int


@lru_cache(maxsize=4096)
def compile_program(e: Expr) -> Program:
    """Flatten ``e`` into postfix code for :func:`pshgauss.kernels.eval_program`."""
    ops, args, consts = [], [], []
    const_index = {}
    depth = [0, 0]  # current, max

    def push(op, arg, delta):
        ops.append(op)
        args.append(arg)
        depth[0] += delta
        depth[1] = max(depth[1], depth[0])

    def emit(node):
        if isinstance(node, Var):
            push(kernels.OP_VAR, node.index - 1, 1)
        elif isinstance(node, ConjVar):
            push(kernels.OP_CONJVAR, node.index - 1, 1)
        elif isinstance(node, Const):
            key = (node.value.real, node.value.imag)
            if key not in const_index:
                const_index[key] = len(consts)
                consts.append(node.value)
            push(kernels.OP_CONST, const_index[key], 1)
        elif isinstance(node, (Sum, Prod)):
            kids = node.terms if isinstance(node, Sum) else node.factors
            if not kids:
                emit(ZERO if isinstance(node, Sum) else ONE)
                return
            for kid in kids:
                emit(kid)
            push(kernels.OP_ADD if isinstance(node, Sum) else kernels.OP_MUL, len(kids), 1 - len(kids))
        elif isinstance(node, IntPow):
            emit(node.base)
            push(kernels.OP_POW, int(node.exponent), 0)
        elif isinstance(node, Exp):
            emit(node.arg)
            push(kernels.OP_EXP, 0, 0)
        elif isinstance(node, Conj):
            emit(node.arg)
            push(kernels.OP_CONJ, 0, 0)
        else:
            raise TypeError(f"not an Expr node: {node!r}")

    emit(e)
    return Program(
        ops=np.asarray(ops, dtype=np.int64),
        args=np.asarray(args, dtype=np.int64),
        consts=np.asarray(consts if consts else [0j], dtype=np.complex128),
        depth=depth[1],
        nvars=max_index(e),
    )


def evaluate_many(e: Expr, Z: np.ndarray) -> np.ndarray:
    """Evaluate at each row of ``Z`` (shape ``(npoints, n)``)."""
    Z = np.ascontiguousarray(Z, dtype=np.complex128)
    if Z.ndim != 2:
        raise DimensionError("points must have shape (npoints, n)")
    prog = compile_program(e)
    if prog.nvars > Z.shape[1]:
        raise DimensionError(f"expression uses z{prog.nvars} but points have dimension {Z.shape[1]}")
    return kernels.eval_program(prog.ops, prog.args, prog.consts, Z, prog.depth)


def evaluate(e: Expr, w) -> complex:
    """Evaluate ``e`` at a single point ``w`` in C^n."""
    w = np.asarray(w, dtype=np.complex128)
    if w.ndim != 1:
        raise DimensionError("a point must be a 1-d sequence of complex coordinates")
    return complex(evaluate_many(e, w[None, :])[0])


# ---------------------------------------------------------------------------
# printing (output re-parses under the grammar)


def _fmt_real(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _fmt_const(c: complex) -> str:
    if c.imag == 0:
        return _fmt_real(c.real)
    if c.real == 0:
        return _fmt_real(c.imag) + "i"
    sign = "+" if c.imag >= 0 else "-"
    return f"({_fmt_real(c.real)}{sign}{_fmt_real(abs(c.imag))}i)"


def to_text(e: Expr) -> str:
    if isinstance(e, Var):
        return f"z{e.index}"
    if isinstance(e, ConjVar):
        return f"conj(z{e.index})"
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Sum):
        if not e.terms:
            return "0"
        out = to_text(e.terms[0])
        for t in e.terms[1:]:
            s = to_text(t)
            if s.startswith("-") and not s.startswith("-(") or s.startswith("-1*"):
                s = s[3:] if s.startswith("-1*") else s[1:]
                out += f" - {s}"
            else:
                out += f" + {s}"
        return out
    if isinstance(e, Prod):
        if not e.factors:
            return "1"
        parts = []
        for f in e.factors:
            s = to_text(f)
            parts.append(f"({s})" if isinstance(f, Sum) else s)
        return "*".join(parts)
    if isinstance(e, IntPow):
        s = to_text(e.base)
        if not isinstance(e.base, (Var, ConjVar)):
            s = f"({s})"
        return f"{s}^{e.exponent}"
    if isinstance(e, Exp):
        return f"exp({to_text(e.arg)})"
    if isinstance(e, Conj):
        return f"conj({to_text(e.arg)})"
    raise TypeError(f"not an Expr node: {e!r}")


Expr.__str__ = to_text

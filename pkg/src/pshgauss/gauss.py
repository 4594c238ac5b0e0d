"""Integration against the standard complex Gaussian measure on C^n.

``dgamma(w) = pi^-n exp(-|w|^2) dl(w)``: every real coordinate of ``w`` is
an independent normal with variance 1/2, so ``E |z_j|^2 = 1``.

Three backends share this module:

* exact moments for polynomials, ``int z^a zbar^b dgamma = prod delta_ab a!``;
* tensor Gauss-Hermite quadrature over the 2n real coordinates;
* Monte Carlo with a counter-based (Philox) generator keyed by
  ``(seed, stream)`` and split into fixed chunks of samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from . import kernels
from .expr import DimensionError, Expr, Poly, evaluate_many, is_polynomial, max_index, normalize, to_polynomial
from .growth import check_growth

DEFAULT_BUDGET = 10**8
DEFAULT_NODES = 32
MC_CHUNK = 1 << 16
_MATERIALIZE_LIMIT = 1 << 22


class BudgetExceeded(ValueError):
    pass


class NonFiniteSample(FloatingPointError):
    pass


# ---------------------------------------------------------------------------
# exact moments


class MomentIndex(NamedTuple):
    a: tuple
    b: tuple


def exact_moment(idx) -> float:
    """``int z^a zbar^b dgamma``; nonzero only when ``a == b``."""
    a, b = idx
    if len(a) != len(b):
        raise DimensionError("multi-indices must have equal length")
    out = 1
    for aj, bj in zip(a, b):
        if aj != bj:
            return 0.0
        out *= math.factorial(aj)
    return float(out)


def integrate_poly(p: Poly) -> complex:
    re, im = [], []
    for (a, b), c in p.terms:
        m = exact_moment((a, b))
        if m:
            re.append(c.real * m)
            im.append(c.imag * m)
    return complex(math.fsum(re), math.fsum(im))


def integrate_exact(e: Expr) -> complex:
    return integrate_poly(to_polynomial(e))


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureRule:
    """1-D rule for the normalized weight ``exp(-x^2)/sqrt(pi)``.

    ``rate`` > 0 marks a rule rescaled for integrands growing like
    ``exp(rate * x^2)``: nodes are spread by ``1/sqrt(1-rate)`` and the
    weights absorb ``exp(-rate x^2)``, so ``poly * exp(rate x^2)`` is
    integrated exactly.  Only ``rate == 0`` rules have unit weight sum.
    """

    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    rate: float = 0.0

    @property
    def m(self) -> int:
        return len(self.nodes)

    def scaled(self, rate: float) -> "QuadratureRule":
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"rate must lie in [0, 1), got {rate}")
        if self.rate != 0.0:
            raise ValueError("rule is already scaled")
        if rate == 0.0:
            return self
        beta = 1.0 - rate
        x = self.nodes / math.sqrt(beta)
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights) - rate * x * x - 0.5 * math.log(beta)
        return QuadratureRule(x, np.exp(logw), rate)


@lru_cache(maxsize=64)
def hermite_rule(m: int) -> QuadratureRule:
    """Gauss-Hermite rule with ``m`` nodes, weights normalized to sum 1."""
    if not 1 <= m <= 200:
        raise ValueError(f"node count must lie in [1, 200], got {m}")
    # Golub-Welsch eigenvalues seed the Newton polish
    off = np.sqrt(np.arange(1, m) / 2.0)
    guess = eigvalsh_tridiagonal(np.zeros(m), off) if m > 1 else np.zeros(1)
    x, w = kernels.hermite_newton(np.ascontiguousarray(guess))
    x = np.asarray(x)
    w = np.asarray(w) / math.sqrt(math.pi)
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(x, w)


def quadrature_grid(n: int, rule: QuadratureRule, lead: Sequence[int] = ()):
    """Tensor grid in lexicographic order over ``(x1, y1, ..., xn, yn)``.

    ``lead`` fixes the indices of the first coordinates, which yields one
    chunk of the full grid.  Returns ``(Z, W)`` with ``Z`` of shape
    ``(npoints, n)``.
    """
    dim = 2 * n
    free = dim - len(lead)
    m = rule.m
    idx = np.indices((m,) * free).reshape(free, -1) if free else np.zeros((0, 1), dtype=int)
    npts = idx.shape[1]
    R = np.empty((npts, dim))
    W = np.ones(npts)
    for r in range(dim):
        if r < len(lead):
            R[:, r] = rule.nodes[lead[r]]
            W *= rule.weights[lead[r]]
        else:
            ir = idx[r - len(lead)]
            R[:, r] = rule.nodes[ir]
            W *= rule.weights[ir]
    Z = R[:, 0::2] + 1j * R[:, 1::2]
    return np.ascontiguousarray(Z), W


def _weighted_sum(values: np.ndarray, W: np.ndarray) -> complex:
    # nodes whose weight underflowed carry no mass, even where the integrand overflows
    with np.errstate(invalid="ignore", over="ignore"):
        prod = np.where(W == 0.0, 0.0, values * W)
    if not np.all(np.isfinite(prod)):
        raise NonFiniteSample("non-finite integrand value on the quadrature grid")
    return kernels.pairwise_csum(prod)


def integrate_quadrature(
    e: Expr,
    rule: QuadratureRule,
    n: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
) -> complex:
    """Tensor-product quadrature of ``e`` against dgamma on C^n."""
    n = max(max_index(e), 1) if n is None else n
    total = rule.m ** (2 * n)
    if total > budget:
        raise BudgetExceeded(f"grid of {total} points exceeds budget {budget}")
    if total <= _MATERIALIZE_LIMIT:
        Z, W = quadrature_grid(n, rule)
        return _weighted_sum(evaluate_many(e, Z), W)
    nlead = 1
    while rule.m ** (2 * n - nlead) > _MATERIALIZE_LIMIT:
        nlead += 1
    partial = []
    for lead in np.ndindex(*(rule.m,) * nlead):
        Z, W = quadrature_grid(n, rule, lead)
        partial.append(_weighted_sum(evaluate_many(e, Z), W))
    return kernels.pairwise_csum(np.array(partial))


def auto_rule(e: Expr, m: int = DEFAULT_NODES) -> QuadratureRule:
    """Gauss-Hermite rule rescaled to the certified growth rate of ``e``."""
    return hermite_rule(m).scaled(check_growth(e).rate)


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class MCConfig:
    samples: int = 10**6
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("sample count must be positive")
        if not 0 <= self.seed < 2**64 or not 0 <= self.stream < 2**64:
            raise ValueError("seed and stream must be 64-bit unsigned integers")


class MCEstimate(NamedTuple):
    estimate: complex
    stderr: float
    stderr_re: float
    stderr_im: float


def _chunk_generator(seed: int, stream: int, chunk: int) -> np.random.Generator:
    # key = (seed, stream); the high counter words index the chunk
    return np.random.Generator(np.random.Philox(key=seed | (stream << 64), counter=chunk << 128))


def sample_complex_gaussian(n: int, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Draw from dgamma: real and imaginary parts i.i.d. Normal(0, 1/2)."""
    shape = (2 * n,) if size is None else (size, 2 * n)
    r = rng.standard_normal(shape) * math.sqrt(0.5)
    return r[..., :n] + 1j * r[..., n:]


@lru_cache(maxsize=4)
def mc_points(n: int, cfg: MCConfig) -> np.ndarray:
    """Samples for ``cfg``; chunk ``k`` depends only on ``(seed, stream, k)``."""
    out = np.empty((cfg.samples, n), dtype=np.complex128)
    for k, start in enumerate(range(0, cfg.samples, MC_CHUNK)):
        size = min(MC_CHUNK, cfg.samples - start)
        out[start:start + size] = sample_complex_gaussian(n, _chunk_generator(cfg.seed, cfg.stream, k), size)
    out.setflags(write=False)
    return out


def mc_stats(values: np.ndarray) -> MCEstimate:
    v = np.asarray(values, dtype=np.complex128)
    if not np.all(np.isfinite(v)):
        raise NonFiniteSample("non-finite Monte Carlo sample")
    N = v.shape[0]
    mean = kernels.pairwise_csum(v) / N
    if N < 2:
        return MCEstimate(mean, 0.0, 0.0, 0.0)
    d = v - mean
    var_re = kernels.pairwise_sum(np.ascontiguousarray(d.real**2)) / (N - 1)
    var_im = kernels.pairwise_sum(np.ascontiguousarray(d.imag**2)) / (N - 1)
    return MCEstimate(mean, math.sqrt((var_re + var_im) / N), math.sqrt(var_re / N), math.sqrt(var_im / N))


def integrate_mc(e: Expr, cfg: MCConfig, n: Optional[int] = None) -> MCEstimate:
    n = max(max_index(e), 1) if n is None else n
    return mc_stats(evaluate_many(e, mc_points(n, cfg)))


# ---------------------------------------------------------------------------
# integrators used by the verification suites
#
# An integrand is a list of (coefficient, (expr, expr, ...)) products.


class Integral(NamedTuple):
    value: complex
    stderr: Optional[float] = None


def _integrand_expr(terms) -> Expr:
    from .expr import Const, Prod, Sum

    return normalize(Sum(tuple(Prod((Const(c),) + tuple(fs)) for c, fs in terms)))


class ExactIntegrator:
    method = "exact"
    nodes = None
    samples = None
    seed = None

    def __init__(self, n: int):
        self.n = n

    def supports(self, exprs) -> bool:
        return all(is_polynomial(e) for e in exprs)

    def integrate(self, terms) -> Integral:
        return Integral(integrate_poly(to_polynomial(_integrand_expr(terms), self.n)))

    def difference(self, lhs, rhs) -> Integral:
        return self.integrate(list(lhs) + [(-c, fs) for c, fs in rhs])


class _SampledIntegrator:
    """Shared evaluation cache for point-set backends."""

    _cache_size = 24

    def __init__(self, n: int, Z: np.ndarray):
        self.n = n
        self.Z = Z
        self._values = {}

    def values(self, e: Expr) -> np.ndarray:
        v = self._values.get(e)
        if v is None:
            v = evaluate_many(e, self.Z)
            if len(self._values) >= self._cache_size:
                self._values.pop(next(iter(self._values)))
            self._values[e] = v
        return v

    def integrand_values(self, terms) -> np.ndarray:
        total = np.zeros(self.Z.shape[0], dtype=np.complex128)
        for c, fs in terms:
            prod = np.full(self.Z.shape[0], complex(c), dtype=np.complex128)
            for f in fs:
                prod *= self.values(f)
            total += prod
        return total

    def supports(self, exprs) -> bool:
        return True


class QuadratureIntegrator(_SampledIntegrator):
    method = "quadrature"
    samples = None
    seed = None

    def __init__(self, n: int, m: int = DEFAULT_NODES, rate: float = 0.0, budget: int = DEFAULT_BUDGET):
        rule = hermite_rule(m).scaled(rate)
        total = m ** (2 * n)
        if total > min(budget, _MATERIALIZE_LIMIT):
            raise BudgetExceeded(f"grid of {total} points exceeds budget")
        Z, W = quadrature_grid(n, rule)
        super().__init__(n, Z)
        self.W = W
        self.rule = rule
        self.nodes = m

    def integrate(self, terms) -> Integral:
        return Integral(_weighted_sum(self.integrand_values(terms), self.W))

    def difference(self, lhs, rhs) -> Integral:
        return self.integrate(list(lhs) + [(-c, fs) for c, fs in rhs])


class MCIntegrator(_SampledIntegrator):
    method = "mc"
    nodes = None

    def __init__(self, n: int, cfg: MCConfig):
        super().__init__(n, mc_points(n, cfg))
        self.cfg = cfg
        self.samples = cfg.samples
        self.seed = cfg.seed

    def integrate(self, terms) -> Integral:
        est = mc_stats(self.integrand_values(terms))
        return Integral(est.estimate, est.stderr)

    def difference(self, lhs, rhs) -> Integral:
        return self.integrate(list(lhs) + [(-c, fs) for c, fs in rhs])

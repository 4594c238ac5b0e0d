"""Growth bookkeeping: certify integrability against the complex Gaussian.

An expression ``sum_k P_k * exp(K_k)`` is certified when every exponent
``K_k`` is a polynomial of degree <= 2 whose real part is bounded above by
``a |z|^2 + O(|z|)`` with ``a < 1``.  The smallest such ``a`` (the largest
eigenvalue of the real quadratic form ``Re K_k``, clipped at 0) is the
subgaussian rate.  Two functions may be multiplied under the measure iff
their rates sum to less than one.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .expr import Expr, _canon, _rebuild, _thaw, evaluate_many, max_index


class UnboundedGrowth(ValueError):
    """The growth rule cannot certify integrability."""


@dataclass(frozen=True)
class Growth:
    kind: str  # "polynomial" or "subgaussian"
    degree: int
    rate: float = 0.0

    def __str__(self):
        if self.kind == "polynomial":
            return f"polynomial({self.degree})"
        return f"subgaussian({self.rate:g})"


def _mono_degree(mono) -> int:
    return sum(a + b for _, a, b in mono)


def quadratic_rate(q: Expr, n: int) -> float:
    """Largest eigenvalue of the real quadratic form ``Re q`` on R^{2n}."""
    dim = 2 * n
    basis = np.zeros((dim, n), dtype=np.complex128)
    for r in range(dim):
        basis[r, r // 2] = 1.0 if r % 2 == 0 else 1.0j
    pts = [basis[r] for r in range(dim)]
    pairs = [(r, s) for r in range(dim) for s in range(r + 1, dim)]
    pts += [basis[r] + basis[s] for r, s in pairs]
    vals = evaluate_many(q, np.array(pts)).real
    M = np.zeros((dim, dim))
    M[np.diag_indices(dim)] = vals[:dim]
    for idx, (r, s) in enumerate(pairs):
        M[r, s] = M[s, r] = 0.5 * (vals[dim + idx] - vals[r] - vals[s])
    return float(np.linalg.eigvalsh(M)[-1])


@lru_cache(maxsize=65536)
def check_growth(e: Expr) -> Growth:
    c = _canon(e)
    degree = max((_mono_degree(m) for p in c.values() for m in p), default=0)
    if all(k is None for k in c):
        return Growth("polynomial", degree)
    n = max(max_index(e), 1)
    rate = 0.0
    for key in c:
        if key is None:
            continue
        kc = _thaw(key)
        if any(kk is not None for kk in kc):
            raise UnboundedGrowth("nested exponentials are not certified")
        kpoly = kc[None]
        if max(_mono_degree(m) for m in kpoly) > 2:
            raise UnboundedGrowth("exponent of degree > 2")
        quad = {m: v for m, v in kpoly.items() if _mono_degree(m) == 2}
        if quad:
            rate = max(rate, quadratic_rate(_rebuild({None: quad}), n))
    if rate >= 1.0:
        raise UnboundedGrowth(f"subgaussian rate {rate:g} is not < 1")
    return Growth("subgaussian", degree, rate)


def pair_rate(*growths: Growth) -> float:
    return float(sum(g.rate for g in growths))


def can_pair(*growths: Growth) -> bool:
    """Integrability of the product: the rates must sum to less than one."""
    return pair_rate(*growths) < 1.0

"""Verification suites: integration by parts, operator identities, the
semigroup interpolation ``alpha(t) = int (P_t f) g dgamma`` and the
correlation inequality ``int f g >= int f int g``.

Each check yields a :class:`CheckResult`.  Deterministic backends pass an
equality when the absolute *or* relative error is within tolerance; Monte
Carlo equalities pass when the error of the difference integrand is within
``mc_sigmas`` standard errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .catalog import (
    CONTROL_PAIRS,
    CatalogEntry,
    builtin_catalog,
    entry_from_expr,
    validate_entry,
)
from .expr import Expr, conj_expr, evaluate_many, is_polynomial, normalize, to_polynomial, wirtinger_dz, wirtinger_dzbar
from .gauss import (
    DEFAULT_NODES,
    ExactIntegrator,
    MCConfig,
    MCIntegrator,
    QuadratureIntegrator,
    integrate_poly,
    sample_complex_gaussian,
)
from .growth import check_growth
from .operators import (
    L,
    OU,
    R,
    Lbar,
    complex_hessian,
    generator_check,
    hessians_at,
    mehler,
    mehler_apply_poly,
    min_eigenvalue,
    swapped_drift_L,
)

VERSION = "0.1.0"
SUITES = ("catalog", "ibp1", "ibp2", "commute", "relations", "dirichlet", "alpha", "correlation")
DEFAULT_T_GRID = (0.0, 5.0, 0.25)
DEFAULT_T_PROXY = 20.0
DEFAULT_FD_STEP = 1e-2
DEFAULT_ALPHA_NODES = 16


class NotCircular(ValueError):
    pass


class HypothesisError(ValueError):
    pass


class InfiniteVariance(ValueError):
    pass


@dataclass
class Tolerances:
    exact: float = 1e-10
    quadrature: float = 1e-8
    mc_sigmas: float = 4.0
    pointwise: float = 1e-10
    inequality: float = 1e-8
    semigroup: float = 1e-12
    generator: float = 1e-6
    proxy: float = 1e-6
    control_cov: float = -0.4

    def for_method(self, method: str) -> float:
        return self.exact if method == "exact" else self.quadrature


@dataclass
class CheckResult:
    suite: str
    identity: str
    f: str
    g: Optional[str]
    dim: int
    method: str
    lhs: complex
    rhs: complex
    abs_err: float
    rel_err: float
    tol: float
    passed: bool
    stderr: Optional[float] = None
    nodes: Optional[int] = None
    samples: Optional[int] = None
    seed: Optional[int] = None

    def to_record(self) -> dict:
        def cx(v):
            v = complex(v)
            return [v.real, v.imag]

        return {
            "suite": self.suite,
            "identity": self.identity,
            "f": self.f,
            "g": self.g,
            "dim": self.dim,
            "method": self.method,
            "lhs": cx(self.lhs),
            "rhs": cx(self.rhs),
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "tol": self.tol,
            "stderr": self.stderr,
            "nodes": self.nodes,
            "samples": self.samples,
            "seed": self.seed,
            "pass": bool(self.passed),
        }


def _rel(lhs: complex, rhs: complex, abs_err: float) -> float:
    scale = max(abs(lhs), abs(rhs))
    return abs_err / scale if scale > 0 else 0.0


@dataclass
class AlphaStudy:
    """``alpha(t)`` on an ascending grid; flags are derived from stored values."""

    f: str
    g: str
    dim: int
    method: str
    t: np.ndarray
    alpha: np.ndarray
    d1_fd: np.ndarray
    d2_fd: np.ndarray
    d2_trace: np.ndarray
    alpha_inf: float
    fd_step: float
    tol: float = 1e-8
    proxy: Optional[float] = None

    def __post_init__(self):
        if not np.all(np.diff(self.t) > 0):
            raise ValueError("t grid must be strictly ascending")

    @property
    def interior(self) -> np.ndarray:
        mask = np.ones(len(self.t), dtype=bool)
        mask[0] = mask[-1] = False
        return mask

    def fd_allowance(self) -> np.ndarray:
        return np.maximum(1e-6, 1e-3 * np.abs(self.d2_trace))

    @property
    def fd_matches_trace(self) -> bool:
        m = self.interior
        return bool(np.all(np.abs(self.d2_fd[m] - self.d2_trace[m]) <= self.fd_allowance()[m]))

    @property
    def convex(self) -> bool:
        m = self.interior
        return bool(np.all(self.d2_trace >= -self.tol) and np.all(self.d2_fd[m] >= -self.tol))

    @property
    def nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.alpha) <= self.tol))

    @property
    def endpoint_gap(self) -> float:
        return float(self.alpha[0] - self.alpha_inf)

    @property
    def endpoint_inequality(self) -> bool:
        return self.endpoint_gap >= -self.tol

    @property
    def proxy_gap(self) -> Optional[float]:
        if self.proxy is None:
            return None
        i = int(np.argmin(np.abs(self.t - self.proxy)))
        return float(abs(self.alpha[i] - self.alpha_inf))

    def columns(self) -> np.ndarray:
        return np.column_stack([self.t, self.alpha, self.d1_fd, self.d2_fd, self.d2_trace])


def make_t_grid(start: float, stop: float, step: float, proxy: Optional[float] = DEFAULT_T_PROXY) -> np.ndarray:
    if step <= 0:
        raise ValueError("t-grid step must be positive")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    grid = [start + i * step for i in range(count)]
    if proxy is not None and proxy > grid[-1]:
        grid.append(proxy)
    return np.array(grid)


# ---------------------------------------------------------------------------


def _entry(x, n: Optional[int] = None) -> CatalogEntry:
    if isinstance(x, CatalogEntry):
        return x
    return entry_from_expr(x, n)


def _rate(exprs: Iterable[Expr]) -> float:
    return sum(check_growth(e).rate for e in exprs)


class Verifier:
    """Backend selection, caches and every individual check for one dimension."""

    def __init__(
        self,
        n: int,
        method: str = "auto",
        nodes: int = DEFAULT_NODES,
        samples: int = 10**6,
        seed: int = 0,
        tol: Optional[Tolerances] = None,
        fd_step: float = DEFAULT_FD_STEP,
        alpha_nodes: Optional[int] = DEFAULT_ALPHA_NODES,
    ):
        if method not in ("auto", "exact", "quad", "quadrature", "mc"):
            raise ValueError(f"unknown method {method!r}")
        self.n = n
        self.method = "quad" if method == "quadrature" else method
        self.nodes = nodes
        self.samples = samples
        self.seed = seed
        self.tol = tol or Tolerances()
        self.fd_step = fd_step
        # the alpha study integrates dozens of integrands per pair; a smaller
        # rule is already exact for polynomial-times-Gaussian integrands
        self.alpha_nodes = min(nodes, alpha_nodes) if alpha_nodes else nodes
        self._quad: Dict[float, QuadratureIntegrator] = {}
        self._exact = ExactIntegrator(n)
        self._mc: Optional[MCIntegrator] = None
        rng = np.random.default_rng(seed)
        self.points = sample_complex_gaussian(n, rng, 20)

    # -- backends ---------------------------------------------------------

    def _quadrature(self, rate: float, nodes: Optional[int] = None) -> QuadratureIntegrator:
        nodes = nodes or self.nodes
        key = (round(rate, 12), nodes)
        integ = self._quad.get(key)
        if integ is None:
            if len(self._quad) >= 2:
                self._quad.pop(next(iter(self._quad)))
            integ = QuadratureIntegrator(self.n, nodes, key[0])
            self._quad[key] = integ
        return integ

    def _montecarlo(self) -> MCIntegrator:
        if self._mc is None:
            self._mc = MCIntegrator(self.n, MCConfig(self.samples, self.seed, 0))
        return self._mc

    def backend(self, terms, nodes: Optional[int] = None):
        """Integrator for a list of ``(coeff, factors)`` products."""
        factors = [f for _, fs in terms for f in fs]
        polynomial = all(is_polynomial(f) for f in factors)
        rate = max((_rate(fs) for _, fs in terms), default=0.0)
        method = self.method
        if method in ("auto", "exact"):
            if polynomial:
                return self._exact
            method = "quad" if self.n <= 2 else "mc"
        if method == "mc":
            if 2 * rate >= 1.0:
                raise InfiniteVariance(f"integrand rate {rate:g} gives infinite variance")
            return self._montecarlo()
        return self._quadrature(rate, nodes)

    def _meta(self, integ) -> dict:
        return {"method": integ.method, "nodes": integ.nodes, "samples": integ.samples, "seed": integ.seed}

    def _equality(self, suite, identity, f, g, lhs_terms, rhs_terms) -> CheckResult:
        integ = self.backend(list(lhs_terms) + list(rhs_terms))
        lhs = integ.integrate(lhs_terms).value
        rhs = integ.integrate(rhs_terms).value
        if integ.method == "mc":
            diff = integ.difference(lhs_terms, rhs_terms)
            abs_err = abs(diff.value)
            bound = self.tol.mc_sigmas * diff.stderr
            return CheckResult(suite, identity, f, g, self.n, lhs=lhs, rhs=rhs, abs_err=abs_err,
                               rel_err=_rel(lhs, rhs, abs_err), tol=bound, passed=abs_err <= bound,
                               stderr=diff.stderr, **self._meta(integ))
        abs_err = abs(lhs - rhs)
        rel = _rel(lhs, rhs, abs_err)
        tol = self.tol.for_method(integ.method)
        return CheckResult(suite, identity, f, g, self.n, lhs=lhs, rhs=rhs, abs_err=abs_err, rel_err=rel,
                           tol=tol, passed=abs_err <= tol or rel <= tol, **self._meta(integ))

    def _pointwise(self, suite, identity, f, residual: float, tol: Optional[float] = None) -> CheckResult:
        tol = self.tol.pointwise if tol is None else tol
        return CheckResult(suite, identity, f, None, self.n, "exact", residual, 0.0, residual, 0.0, tol, residual <= tol)

    def _inequality(self, suite, identity, f, g, value: float, bound: float, meta=None, stderr=None) -> CheckResult:
        """Record ``value >= bound``."""
        meta = meta or {"method": "exact", "nodes": None, "samples": None, "seed": None}
        gap = max(0.0, bound - value)
        return CheckResult(suite, identity, f, g, self.n, lhs=value, rhs=bound, abs_err=gap, rel_err=0.0,
                           tol=-bound, passed=value >= bound, stderr=stderr, **meta)

    # -- integration by parts ---------------------------------------------

    def ibp_first(self, f, g) -> List[CheckResult]:
        f, g = _entry(f, self.n), _entry(g, self.n)
        n = self.n
        lhs = [(1.0, (L(f.expr, n), g.expr))]
        mid = [(-1.0, (wirtinger_dzbar(f.expr, j), wirtinger_dz(g.expr, j))) for j in range(1, n + 1)]
        rhs = [(1.0, (f.expr, Lbar(g.expr, n)))]
        return [
            self._equality("ibp1", "int(Lf g) = -int(dzbar f . dz g)", f.name, g.name, lhs, mid),
            self._equality("ibp1", "-int(dzbar f . dz g) = int(f Lbar g)", f.name, g.name, mid, rhs),
        ]

    def swapped_drift_residual(self, f, g) -> float:
        """|int(L' f) g + int(dzbar f . dz g)| for the rejected conjugation placement."""
        f, g = _entry(f, self.n), _entry(g, self.n)
        lhs = [(1.0, (swapped_drift_L(f.expr, self.n), g.expr))]
        mid = [(-1.0, (wirtinger_dzbar(f.expr, j), wirtinger_dz(g.expr, j))) for j in range(1, self.n + 1)]
        integ = self.backend(lhs + mid)
        return abs(integ.difference(lhs, mid).value)

    def ibp_second(self, f, g) -> CheckResult:
        f, g = _entry(f, self.n), _entry(g, self.n)
        if not f.claimed_circular:
            raise NotCircular(f"{f.name} is not circular-symmetric")
        n = self.n
        Hf = complex_hessian(f.expr, n)
        Hg = complex_hessian(g.expr, n)
        lhs = [(1.0, (OU(OU(f.expr, n), n), g.expr))]
        rhs = [(1.0, (Hf[j][k], Hg[k][j])) for j in range(n) for k in range(n)]
        return self._equality("ibp2", "int(OU^2 f g) = sum int(Hf_jk Hg_kj)", f.name, g.name, lhs, rhs)

    def dirichlet(self, f) -> List[CheckResult]:
        f = _entry(f, self.n)
        n = self.n
        fbar = conj_expr(f.expr)
        lhs = [(-1.0, (L(f.expr, n), fbar))]
        rhs = []
        for j in range(1, n + 1):
            d = wirtinger_dzbar(f.expr, j)
            rhs.append((1.0, (d, conj_expr(d))))
        eq = self._equality("dirichlet", "int(-Lf conj f) = int|dzbar f|^2", f.name, f.name, lhs, rhs)
        bound = -eq.tol if eq.method == "mc" else -self.tol.for_method(eq.method)
        nonneg = self._inequality("dirichlet", "int|dzbar f|^2 >= 0", f.name, f.name, complex(eq.rhs).real, bound,
                                  {"method": eq.method, "nodes": eq.nodes, "samples": eq.samples, "seed": eq.seed},
                                  eq.stderr)
        return [eq, nonneg]

    # -- pointwise operator identities ------------------------------------

    def commutation(self, f, points=None) -> CheckResult:
        f = _entry(f, self.n)
        pts = self.points if points is None else np.atleast_2d(points)
        worst = 0.0
        for j in range(1, self.n + 1):
            a = evaluate_many(wirtinger_dz(L(f.expr, self.n), j), pts)
            b = evaluate_many(L(wirtinger_dz(f.expr, j), self.n), pts)
            worst = max(worst, float(np.max(np.abs(a - b))))
        return self._pointwise("commute", "dz_j L f = L dz_j f", f.name, worst)

    def commutation_control(self, points=None) -> CheckResult:
        """The OU operator does not commute with d/dz: residual |z| on f = z1^2."""
        from .expr import IntPow, Var

        f = normalize(IntPow(Var(1), 2))
        pts = self.points if points is None else np.atleast_2d(points)
        a = evaluate_many(wirtinger_dz(OU(f, self.n), 1), pts)
        b = evaluate_many(OU(wirtinger_dz(f, 1), self.n), pts)
        worst = float(np.max(np.abs(a - b)))
        return self._inequality("commute", "control: |dz OU f - OU dz f| >= 0.1", "z1^2", None, worst, 0.1)

    def relations(self, f, points=None) -> List[CheckResult]:
        f = _entry(f, self.n)
        n = self.n
        pts = self.points if points is None else np.atleast_2d(points)
        vL = evaluate_many(L(f.expr, n), pts)
        vLb = evaluate_many(Lbar(f.expr, n), pts)
        vOU = evaluate_many(OU(f.expr, n), pts)
        vR = evaluate_many(R(f.expr, n), pts)
        out = [
            self._pointwise("relations", "L = OU + (i/2) R", f.name, float(np.max(np.abs(vL - (vOU + 0.5j * vR))))),
            self._pointwise("relations", "Lbar = OU - (i/2) R", f.name, float(np.max(np.abs(vLb - (vOU - 0.5j * vR))))),
        ]
        if f.claimed_circular:
            out.append(self._pointwise("relations", "R f = 0", f.name, float(np.max(np.abs(vR)))))
            gap = max(float(np.max(np.abs(vOU - vL))), float(np.max(np.abs(vOU - vLb))))
            out.append(self._pointwise("relations", "OU f = L f = Lbar f", f.name, gap))
        return out

    # -- correlation --------------------------------------------------------

    def covariance(self, f, g) -> Tuple[float, Optional[float], dict]:
        """``int fg - int f int g`` with its standard error (Monte Carlo only)."""
        f, g = _entry(f, self.n), _entry(g, self.n)
        integ = self.backend([(1.0, (f.expr, g.expr))])
        if integ.method == "mc":
            vf, vg = integ.values(f.expr), integ.values(g.expr)
            N = len(vf)
            mf, mg = vf.mean(), vg.mean()
            cov = (vf * vg).mean() - mf * mg
            psi = vf * vg - mg * vf - mf * vg
            stderr = float(np.std(psi, ddof=1) / math.sqrt(N))
            return float(cov.real), stderr, self._meta(integ)
        fg = integ.integrate([(1.0, (f.expr, g.expr))]).value
        If = self.backend([(1.0, (f.expr,))]).integrate([(1.0, (f.expr,))]).value
        Ig = self.backend([(1.0, (g.expr,))]).integrate([(1.0, (g.expr,))]).value
        return float((fg - If * Ig).real), None, self._meta(integ)

    def correlation(self, f, g, control: bool = False) -> CheckResult:
        f, g = _entry(f, self.n), _entry(g, self.n)
        cov, stderr, meta = self.covariance(f, g)
        if control:
            # a control passes when it exhibits a clearly negative covariance
            bound = self.tol.control_cov
            return CheckResult("correlation", "control: cov <= -0.4", f.name, g.name, self.n, lhs=cov, rhs=bound,
                               abs_err=max(0.0, cov - bound), rel_err=0.0, tol=bound, passed=cov <= bound,
                               stderr=stderr, **meta)
        if meta["method"] == "mc":
            bound = -self.tol.mc_sigmas * stderr
        else:
            bound = -self.tol.inequality
        return self._inequality("correlation", "int fg - int f int g >= 0", f.name, g.name, cov, bound, meta, stderr)

    # -- semigroup and alpha ------------------------------------------------

    def alpha_study(self, f, g, t_grid=None, proxy: Optional[float] = DEFAULT_T_PROXY) -> AlphaStudy:
        f, g = _entry(f, self.n), _entry(g, self.n)
        if not f.claimed_circular:
            raise NotCircular(f"{f.name} is not circular-symmetric")
        n = self.n
        t = make_t_grid(*DEFAULT_T_GRID, proxy=proxy) if t_grid is None else np.asarray(t_grid, dtype=float)
        h = self.fd_step
        Hg = complex_hessian(g.expr, n)

        def integrand(tt):
            return [(1.0, (mehler(f.expr, tt, n), g.expr))]

        def alpha_at(tt, integ=None):
            terms = integrand(tt)
            integ = integ or self.backend(terms, self.alpha_nodes)
            return integ.integrate(terms).value.real, integ

        alpha, d1, d2, d2t = (np.zeros(len(t)) for _ in range(4))
        method = None
        for i, ti in enumerate(t):
            alpha[i], integ = alpha_at(ti)
            method = integ.method
            if i not in (0, len(t) - 1):
                am = alpha_at(ti - h, integ)[0]
                ap = alpha_at(ti + h, integ)[0]
                d1[i] = (ap - am) / (2 * h)
                d2[i] = (ap - 2 * alpha[i] + am) / (h * h)
            else:
                # one-sided second-order stencils; excluded from the flags
                sgn = 1.0 if i == 0 else -1.0
                a1, a2, a3 = (alpha_at(ti + sgn * k * h, integ)[0] for k in (1, 2, 3))
                d1[i] = sgn * (-3 * alpha[i] + 4 * a1 - a2) / (2 * h)
                d2[i] = (2 * alpha[i] - 5 * a1 + 4 * a2 - a3) / (h * h)
            HP = complex_hessian(mehler(f.expr, ti, n), n)
            tr_terms = [(1.0, (HP[j][k], Hg[k][j])) for j in range(n) for k in range(n)]
            d2t[i] = self.backend(tr_terms, self.alpha_nodes).integrate(tr_terms).value.real
        If = self.backend([(1.0, (f.expr,))], self.alpha_nodes).integrate([(1.0, (f.expr,))]).value.real
        Ig = self.backend([(1.0, (g.expr,))], self.alpha_nodes).integrate([(1.0, (g.expr,))]).value.real
        return AlphaStudy(f.name, g.name, n, method, t, alpha, d1, d2, d2t, If * Ig, h,
                          self.tol.inequality, proxy if proxy is not None and proxy in t else None)

    def alpha_checks(self, f, g, t_grid=None, proxy: Optional[float] = DEFAULT_T_PROXY) -> List[CheckResult]:
        f, g = _entry(f, self.n), _entry(g, self.n)
        st = self.alpha_study(f, g, t_grid, proxy)
        meta = {"method": st.method, "nodes": self.alpha_nodes if st.method == "quadrature" else None,
                "samples": None, "seed": None}
        tol = st.tol
        m = st.interior
        out = []
        # FD vs trace formula: report the worst interior point relative to its allowance
        excess = np.abs(st.d2_fd - st.d2_trace) / st.fd_allowance()
        excess[~m] = -np.inf
        i = int(np.argmax(excess))
        err = abs(st.d2_fd[i] - st.d2_trace[i])
        out.append(CheckResult("alpha", "alpha''(fd) = int Tr(D2 P_t f D2 g)", f.name, g.name, self.n,
                               lhs=st.d2_fd[i], rhs=st.d2_trace[i], abs_err=err,
                               rel_err=_rel(st.d2_fd[i], st.d2_trace[i], err), tol=float(st.fd_allowance()[i]),
                               passed=st.fd_matches_trace, **meta))
        worst_d2 = float(min(st.d2_trace.min(), st.d2_fd[m].min() if m.any() else np.inf))
        out.append(self._inequality("alpha", "alpha'' >= 0", f.name, g.name, worst_d2, -tol, meta))
        worst_inc = float(np.max(np.diff(st.alpha))) if len(st.t) > 1 else 0.0
        out.append(self._inequality("alpha", "alpha nonincreasing", f.name, g.name, -worst_inc, -tol, meta))
        out.append(self._inequality("alpha", "alpha(0) >= alpha(inf)", f.name, g.name, st.endpoint_gap, -tol, meta))
        if st.proxy_gap is not None:
            # the tail decays like C e^{-t}; C grows with the degree, so the bound scales with alpha(inf)
            gap = st.proxy_gap
            bound = self.tol.proxy * max(1.0, abs(st.alpha_inf))
            out.append(CheckResult("alpha", f"|alpha({st.proxy:g}) - alpha(inf)| small", f.name, g.name, self.n,
                                   lhs=gap, rhs=0.0, abs_err=gap, rel_err=gap / max(1.0, abs(st.alpha_inf)),
                                   tol=bound, passed=gap <= bound, **meta))
        if st.t[0] == 0.0:
            cov, _, _ = self.covariance(f, g)
            err = abs(st.endpoint_gap - cov)
            out.append(CheckResult("alpha", "alpha(0) - alpha(inf) = cov(f, g)", f.name, g.name, self.n,
                                   lhs=st.endpoint_gap, rhs=cov, abs_err=err, rel_err=_rel(st.endpoint_gap, cov, err),
                                   tol=tol, passed=err <= tol or _rel(st.endpoint_gap, cov, err) <= tol, **meta))
        return out

    def semigroup_checks(self, f, t_values=(0.3, 1.1)) -> List[CheckResult]:
        """Exact laws of the Mehler semigroup on a polynomial entry."""
        f = _entry(f, self.n)
        p = to_polynomial(f.expr, self.n)
        s, t = t_values
        out = []
        p0 = mehler_apply_poly(p, 0.0)
        dev0 = p0.max_abs_diff(p)
        out.append(self._pointwise("alpha", "P_0 f = f", f.name, dev0, 0.0))
        both = mehler_apply_poly(mehler_apply_poly(p, s), t)
        direct = mehler_apply_poly(p, s + t)
        scale = max(1.0, max((abs(c) for _, c in direct.terms), default=1.0))
        out.append(self._pointwise("alpha", "P_s P_t f = P_(s+t) f", f.name, both.max_abs_diff(direct) / scale,
                                   self.tol.semigroup))
        m0 = integrate_poly(p)
        mt = integrate_poly(mehler_apply_poly(p, t))
        err = abs(mt - m0)
        rel = _rel(mt, m0, err)
        out.append(CheckResult("alpha", "int P_t f = int f", f.name, None, self.n, "exact", mt, m0, err, rel,
                               self.tol.semigroup, err <= self.tol.semigroup or rel <= self.tol.semigroup))
        gen = generator_check(f.expr, 0.5, self.points)
        out.append(self._pointwise("alpha", "d/dt P_t f = OU P_t f", f.name, gen, self.tol.generator))
        return out

    def psh_preservation(self, f, t_grid=None, points=None) -> CheckResult:
        f = _entry(f, self.n)
        t = make_t_grid(*DEFAULT_T_GRID, proxy=None) if t_grid is None else t_grid
        pts = self.points if points is None else np.atleast_2d(points)
        worst = math.inf
        for ti in t:
            H = hessians_at(mehler(f.expr, ti, self.n), pts, self.n)
            for Hi in H:
                worst = min(worst, min_eigenvalue(Hi))
        return self._inequality("alpha", "P_t f psh: min eig >= 0", f.name, None, worst, -self.tol.pointwise)

    def trace_nonneg(self, f, g, t: float, points=None) -> CheckResult:
        f, g = _entry(f, self.n), _entry(g, self.n)
        pts = self.points if points is None else np.atleast_2d(points)
        A = hessians_at(mehler(f.expr, t, self.n), pts, self.n)
        B = hessians_at(g.expr, pts, self.n)
        tr = np.einsum("pjk,pkj->p", A, B).real
        return self._inequality("alpha", f"Tr(D2 P_t f D2 g) >= 0 at t={t:g}", f.name, g.name, float(tr.min()),
                                -self.tol.pointwise)


# ---------------------------------------------------------------------------
# module-level wrappers


def _verifier(entries, method="auto", **kw) -> Verifier:
    n = max(_entry(e).n for e in entries)
    return Verifier(n, method, **kw)


def check_ibp_first(f, g, method: str = "auto", **kw) -> List[CheckResult]:
    return _verifier([f, g], method, **kw).ibp_first(f, g)


def check_ibp_second(f, g, method: str = "auto", **kw) -> CheckResult:
    return _verifier([f, g], method, **kw).ibp_second(f, g)


def check_commutation(f, points=None, **kw) -> CheckResult:
    return _verifier([f], **kw).commutation(f, points)


def check_dirichlet(f, method: str = "auto", **kw) -> List[CheckResult]:
    return _verifier([f], method, **kw).dirichlet(f)


def alpha_study(f, g, t_grid=None, method: str = "auto", proxy: Optional[float] = DEFAULT_T_PROXY, **kw) -> AlphaStudy:
    return _verifier([f, g], method, **kw).alpha_study(f, g, t_grid, proxy)


def check_correlation(f, g, method: str = "auto", control: bool = False, **kw) -> CheckResult:
    return _verifier([f, g], method, **kw).correlation(f, g, control)


def check_trace_nonneg(f, g, t: float, points=None, **kw) -> CheckResult:
    return _verifier([f, g], **kw).trace_nonneg(f, g, t, points)


def trace_of_product(A, B) -> float:
    """``Tr(A B)`` for evaluated Hermitian matrices (real part)."""
    return float(np.trace(np.asarray(A) @ np.asarray(B)).real)


# ---------------------------------------------------------------------------
# suites


@dataclass
class RunConfig:
    dim: int = 1
    suite: str = "all"
    pairs: Optional[List[Tuple[str, str]]] = None  # None = all pairs
    method: str = "auto"
    nodes: int = DEFAULT_NODES
    samples: int = 10**6
    seed: int = 0
    t_grid: Tuple[float, float, float] = DEFAULT_T_GRID
    t_proxy: Optional[float] = DEFAULT_T_PROXY
    tol: Optional[float] = None
    report: Optional[str] = None
    format: str = "json"
    controls: bool = True
    extra_entries: List[CatalogEntry] = field(default_factory=list)
    alpha_nodes: Optional[int] = DEFAULT_ALPHA_NODES
    fd_step: float = DEFAULT_FD_STEP

    def __post_init__(self):
        if not 1 <= self.dim <= 4:
            raise ValueError("dimension must lie in [1, 4]")
        if self.suite != "all" and self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}")
        if self.t_grid[2] <= 0:
            raise ValueError("t-grid step must be positive")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")

    def tolerances(self) -> Tolerances:
        tol = Tolerances()
        if self.tol is not None:
            tol.exact = tol.quadrature = self.tol
        return tol

    def as_dict(self) -> dict:
        return {
            "dim": self.dim,
            "suite": self.suite,
            "pairs": None if self.pairs is None else [list(p) for p in self.pairs],
            "method": self.method,
            "nodes": self.nodes,
            "samples": self.samples,
            "seed": self.seed,
            "t_grid": list(self.t_grid),
            "t_proxy": self.t_proxy,
            "tol": self.tol,
            "controls": self.controls,
            "alpha_nodes": self.alpha_nodes,
            "fd_step": self.fd_step,
            "entries": [{"name": e.name, "expr": e.text, "psh": e.claimed_psh, "circular": e.claimed_circular}
                        for e in self.extra_entries],
        }


@dataclass
class Report:
    config: dict
    checks: List[CheckResult]
    version: str = VERSION
    timestamp: Optional[str] = None

    @property
    def summary(self) -> dict:
        passed = sum(1 for c in self.checks if c.passed)
        return {"total": len(self.checks), "passed": passed, "failed": len(self.checks) - passed}

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        d = {
            "version": self.version,
            "config": self.config,
            "checks": [c.to_record() for c in self.checks],
            "summary": self.summary,
        }
        if self.timestamp is not None:
            d["timestamp"] = self.timestamp
        return d


def _selected_pairs(cfg: RunConfig, valid: List[CatalogEntry]):
    by_name = {e.name: e for e in valid}
    if cfg.pairs is None:
        return [(f, g) for f in valid for g in valid]
    return [(by_name[a], by_name[b]) for a, b in cfg.pairs if a in by_name and b in by_name]


def _selected_singles(cfg: RunConfig, valid: List[CatalogEntry]):
    if cfg.pairs is None:
        return list(valid)
    names = []
    for a, b in cfg.pairs:
        for x in (a, b):
            if x not in names:
                names.append(x)
    by_name = {e.name: e for e in valid}
    return [by_name[x] for x in names if x in by_name]


def _integrable(v: Verifier, *entries: CatalogEntry) -> bool:
    rate = sum(e.growth.rate for e in entries)
    if rate >= 1.0:
        return False
    method = v.method
    nonpoly = any(not e.is_polynomial for e in entries)
    if method == "mc" or (method in ("auto", "exact") and nonpoly and v.n >= 3):
        return 2 * rate < 1.0
    if method == "quad" or nonpoly:
        return v.nodes ** (2 * v.n) <= (1 << 22)
    return True


def run_suite(cfg: RunConfig) -> Report:
    v = Verifier(cfg.dim, cfg.method, cfg.nodes, cfg.samples, cfg.seed, cfg.tolerances(),
                 fd_step=cfg.fd_step, alpha_nodes=cfg.alpha_nodes)
    suites = SUITES if cfg.suite == "all" else (cfg.suite,)
    catalog = builtin_catalog(cfg.dim) + list(cfg.extra_entries)
    checks: List[CheckResult] = []

    # claims are validated before any entry is used
    valid = []
    for entry in catalog:
        reports = validate_entry(entry)
        if all(r.passed for r in reports):
            valid.append(entry)
        if "catalog" in suites or not all(r.passed for r in reports):
            for r in reports:
                checks.append(CheckResult("catalog", r.check, r.entry, None, cfg.dim, "exact", r.value, -r.tol
                                          if r.check in ("psh", "not_psh") else r.tol,
                                          0.0, 0.0, r.tol, r.passed))

    pairs = _selected_pairs(cfg, valid)
    singles = _selected_singles(cfg, valid)
    circ = [e for e in singles if e.claimed_circular]

    if "ibp1" in suites:
        for f, g in pairs:
            if _integrable(v, f, g):
                checks.extend(v.ibp_first(f, g))
    if "ibp2" in suites:
        for f, g in pairs:
            if f.claimed_circular and _integrable(v, f, g):
                checks.append(v.ibp_second(f, g))
    if "commute" in suites:
        for f in singles:
            checks.append(v.commutation(f))
        if cfg.pairs is None:
            checks.append(v.commutation_control())
    if "relations" in suites:
        for f in singles:
            checks.extend(v.relations(f))
    if "dirichlet" in suites:
        for f in singles:
            if _integrable(v, f, f):
                checks.extend(v.dirichlet(f))
    if "alpha" in suites:
        tg = make_t_grid(*cfg.t_grid, proxy=cfg.t_proxy)
        for f in circ:
            if f.is_polynomial:
                checks.extend(v.semigroup_checks(f))
            if f.claimed_psh:
                checks.append(v.psh_preservation(f, make_t_grid(*cfg.t_grid, proxy=None)))
        for f, g in pairs:
            if not (f.claimed_psh and f.claimed_circular and g.claimed_psh):
                continue
            if not _integrable(v, f, g):
                continue
            if v.method == "mc" or (v.n >= 3 and not (f.is_polynomial and g.is_polynomial)):
                continue  # FD of a sampled alpha is not meaningful
            checks.extend(v.alpha_checks(f, g, tg, cfg.t_proxy))
            checks.append(v.trace_nonneg(f, g, 1.0))
    if "correlation" in suites:
        for f, g in pairs:
            if f.claimed_psh and f.claimed_circular and g.claimed_psh and _integrable(v, f, g):
                checks.append(v.correlation(f, g))
        if cfg.controls:
            names = {e.name for e in valid}
            for a, b, _ in CONTROL_PAIRS:
                if a in names and b in names and (cfg.pairs is None or (a, b) in cfg.pairs):
                    fa = next(e for e in valid if e.name == a)
                    gb = next(e for e in valid if e.name == b)
                    if _integrable(v, fa, gb):
                        checks.append(v.correlation(fa, gb, control=True))
    return Report(cfg.as_dict(), checks)

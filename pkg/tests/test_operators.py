import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import exprs, polys, random_points
from pshgauss.catalog import builtin_catalog
from pshgauss.expr import Const, evaluate, evaluate_many, normalize, to_polynomial, wirtinger_dz
from pshgauss.gauss import auto_rule, hermite_rule, integrate_poly
from pshgauss.growth import check_growth
from pshgauss.operators import (
    L,
    OU,
    HermitianMatrix,
    Lbar,
    NotHermitian,
    OperatorKind,
    R,
    SemigroupParams,
    apply_operator,
    check_divergence_form,
    complex_hessian,
    generator_check,
    hessian_at,
    hessians_at,
    mehler,
    mehler_apply_poly,
    mehler_apply_quadrature,
    min_eigenvalue,
)
from pshgauss.parser import parse_expr


def close(a, b, rel=1e-12):
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def real_coordinate_ou(e, w, h=1e-4):
    """(1/4) Laplacian - (1/2) <x, grad> by central differences in real coordinates."""
    n = len(w)
    total = 0j
    f0 = evaluate(e, w)
    for j in range(n):
        for step, coord in ((1.0, w[j].real), (1j, w[j].imag)):
            d = np.zeros(n, dtype=complex)
            d[j] = h * step
            fp, fm = evaluate(e, w + d), evaluate(e, w - d)
            total += 0.25 * (fp - 2 * f0 + fm) / h**2 - 0.5 * coord * (fp - fm) / (2 * h)
    return total


# -- operator definitions ------------------------------------------------------------


def test_operator_examples():
    zz = parse_expr("abs2(z1)", 1)
    assert L(zz) == normalize(parse_expr("1 - abs2(z1)", 1))
    z = parse_expr("z1", 1)
    assert L(z) == Const(0)
    assert OU(z) == normalize(parse_expr("-0.5*z1", 1))
    assert R(z) == normalize(parse_expr("-i*z1", 1))
    for kind in OperatorKind:
        assert apply_operator(kind, Const(3 + 1j), 2) == Const(0)


@given(exprs(2))
def test_ou_is_mean_of_l_and_lbar(e):
    ou, l_, lb = OU(e, 2), L(e, 2), Lbar(e, 2)
    for w in random_points(2, 5):
        a = evaluate(ou, w)
        assert close(a, 0.5 * (evaluate(l_, w) + evaluate(lb, w)), 1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_operator_relations_on_catalog(n):
    for entry in builtin_catalog(n):
        e = entry.expr
        pts = random_points(n, 20, seed=n)
        vl, vlb, vou, vr = (evaluate_many(op(e, n), pts) for op in (L, Lbar, OU, R))
        assert np.max(np.abs(vl - (vou + 0.5j * vr))) <= 1e-10
        assert np.max(np.abs(vlb - (vou - 0.5j * vr))) <= 1e-10
        if entry.claimed_circular:
            assert np.max(np.abs(vr)) <= 1e-10
            assert np.max(np.abs(vl - vou)) <= 1e-10


@pytest.mark.parametrize("n", [1, 2])
def test_ou_matches_real_coordinate_differences(n):
    for entry in builtin_catalog(n):
        ou = OU(entry.expr, n)
        for w in random_points(n, 20, seed=4):
            sym = evaluate(ou, w)
            fd = real_coordinate_ou(entry.expr, w)
            assert abs(sym - fd) <= 1e-6 * max(1.0, abs(sym), abs(evaluate(entry.expr, w)))


def test_rotation_generator_is_angular_derivative():
    # R f(w) = d/dtheta f(e^{i theta} w) at theta = 0 for real-coordinate rotation y d/dx - x d/dy
    e = parse_expr("z1^2*conj(z2) + re(z1)^3", 2)
    for w in random_points(2, 10):
        h = 1e-6
        fd = (evaluate(e, w * np.exp(-1j * h)) - evaluate(e, w * np.exp(1j * h))) / (2 * h)
        assert abs(evaluate(R(e, 2), w) - fd) <= 1e-6 * max(1.0, abs(fd))


@pytest.mark.parametrize("text", ["abs2(z1)", "5", "z1^2*conj(z1)", "exp(0.25*abs2(z1))*z1"])
def test_divergence_form(text):
    e = parse_expr(text, 1)
    assert check_divergence_form(e, random_points(1, 20)) <= 1e-10


@pytest.mark.parametrize("n", [1, 2, 3])
def test_commutation_with_wirtinger(n):
    for entry in builtin_catalog(n):
        for j in range(1, n + 1):
            a = evaluate_many(wirtinger_dz(L(entry.expr, n), j), random_points(n))
            b = evaluate_many(L(wirtinger_dz(entry.expr, j), n), random_points(n))
            assert np.max(np.abs(a - b)) <= 1e-10


def test_ou_does_not_commute():
    e = parse_expr("z1^2", 1)
    pts = random_points(1, 20)
    gap = evaluate_many(wirtinger_dz(OU(e), 1), pts) - evaluate_many(OU(wirtinger_dz(e, 1)), pts)
    # [d/dz, OU] = -(1/2) d/dz, so the gap is -z exactly
    assert np.allclose(gap, -pts[:, 0], atol=1e-12)


# -- Hessian and eigenvalues ---------------------------------------------------------


def test_hessian_examples():
    w = np.array([1 + 1j, 0.5 - 2j])
    H = hessian_at(parse_expr("abs2(z1) + abs2(z2)", 2), w)
    assert np.allclose(H.data, np.eye(2))
    H = hessian_at(parse_expr("re(z1)^2", 1), w[:1])
    assert np.allclose(H.data, [[0.5]])
    Hs = complex_hessian(parse_expr("z1*conj(z2)", 2), 2)
    vals = [[evaluate(Hs[j][k], w) for k in range(2)] for j in range(2)]
    assert np.allclose(vals, [[0, 1], [0, 0]])


def test_hessian_of_real_function_is_hermitian():
    for entry in builtin_catalog(3):
        H = hessians_at(entry.expr, random_points(3, 10), 3)
        assert np.max(np.abs(H - np.conj(np.transpose(H, (0, 2, 1))))) <= 1e-12 * (1 + np.max(np.abs(H)))


def test_min_eigenvalue_examples():
    assert min_eigenvalue(np.eye(2)) == pytest.approx(1, abs=1e-12)
    assert min_eigenvalue(np.diag([1.0, -1.0])) == pytest.approx(-1, abs=1e-12)
    assert min_eigenvalue(np.array([[2, 1j], [-1j, 2]])) == pytest.approx(1, abs=1e-12)
    assert min_eigenvalue(HermitianMatrix(np.array([[3.0]]))) == pytest.approx(3)
    with pytest.raises(NotHermitian):
        min_eigenvalue(np.array([[1, 1], [0, 1]], dtype=complex))


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_min_eigenvalue_matches_lapack(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = A + A.conj().T
    assert abs(min_eigenvalue(H) - np.linalg.eigvalsh(H)[0]) <= 1e-10 * (1 + np.max(np.abs(H)))


# -- Mehler semigroup ------------------------------------------------------------------


def test_semigroup_params():
    p = SemigroupParams(0.0)
    assert (p.contraction, p.noise) == (1.0, 0.0)
    p = SemigroupParams(1.3)
    assert p.contraction**2 + p.noise**2 == pytest.approx(1, abs=1e-15)
    with pytest.raises(ValueError):
        SemigroupParams(-0.1)


def test_mehler_poly_examples():
    p = to_polynomial(parse_expr("abs2(z1)", 1))
    q = mehler_apply_poly(p, math.log(2))
    assert q.max_abs_diff(to_polynomial(parse_expr("0.5*abs2(z1) + 0.5", 1))) <= 1e-15
    assert mehler_apply_poly(p, 0.0) == p
    one = to_polynomial(Const(1), 1)
    assert mehler_apply_poly(one, 3.7) == one


@given(polys(2), st.floats(0, 3), st.floats(0, 3))
def test_semigroup_law(e, s, t):
    p = to_polynomial(e, 2)
    both = mehler_apply_poly(mehler_apply_poly(p, s), t)
    direct = mehler_apply_poly(p, s + t)
    scale = max([1.0] + [abs(c) for _, c in p.terms])
    assert both.max_abs_diff(direct) <= 1e-12 * scale
    assert mehler_apply_poly(p, 0.0) == p
    assert close(integrate_poly(mehler_apply_poly(p, t)), integrate_poly(p), 1e-12 * scale)


@given(polys(2), st.floats(0.05, 3))
def test_mehler_poly_matches_quadrature_kernel(e, t):
    q = mehler(e, t, 2)
    rule = hermite_rule(8)
    for w in random_points(2, 3):
        a = evaluate(q, w)
        assert close(a, mehler_apply_quadrature(e, t, w, rule), 1e-10)


@pytest.mark.parametrize("text", ["exp(0.5*abs2(z1))", "exp(0.25*(abs2(z1) + abs2(z2)))",
                                  "3*exp(0.5*abs2(z1) + (0.1+0.2i)*z1*conj(z2) + (0.1-0.2i)*z2*conj(z1))"])
@pytest.mark.parametrize("t", [0.1, 1.0, 4.0])
def test_gaussian_closed_form_matches_quadrature(text, t):
    e = parse_expr(text, 2)
    q = mehler(e, t, 2)
    # in the u variable the growth rate shrinks by s^2
    rule = hermite_rule(24).scaled(SemigroupParams(t).noise2 * check_growth(e).rate)
    for w in random_points(2, 4):
        assert close(evaluate(q, w), mehler_apply_quadrature(e, t, w, rule), 1e-10)


def test_mehler_quadrature_examples():
    e = parse_expr("abs2(z1)", 1)
    assert mehler_apply_quadrature(e, math.log(2), [1.0], hermite_rule(8)) == pytest.approx(1, abs=1e-10)
    assert mehler_apply_quadrature(e, 0.0, [2 + 1j], hermite_rule(8)) == 5
    g = parse_expr("exp(0.5*abs2(z1))", 1)
    assert mehler_apply_quadrature(g, 20.0, [1.0], auto_rule(g)) == pytest.approx(2, abs=1e-6)


@pytest.mark.parametrize("text,t", [("abs2(z1)", 0.5), ("7", 0.5), ("abs2(z1)^2", 1.0), ("exp(0.5*abs2(z1))", 0.7)])
def test_generator_check(text, t):
    assert generator_check(parse_expr(text, 1), t, random_points(1, 20)) <= 1e-6


def test_generator_closed_form():
    e = parse_expr("abs2(z1)", 1)
    t = 0.5
    for w in random_points(1, 5):
        expected = -math.exp(-t) * (abs(w[0]) ** 2 - 1)
        assert evaluate(OU(mehler(e, t, 1), 1), w) == pytest.approx(expected, abs=1e-12)


@given(polys(2), st.floats(0, 3))
def test_hessian_contracts_under_semigroup(e, t):
    p = to_polynomial(e, 2)
    Hp = complex_hessian(mehler_apply_poly(p, t).to_expr(), 2)
    Hq = complex_hessian(p.to_expr(), 2)
    for j in range(2):
        for k in range(2):
            lhs = to_polynomial(Hp[j][k], 2)
            rhs = mehler_apply_poly(to_polynomial(Hq[j][k], 2), t)
            scaled = type(rhs)(rhs.n, tuple((key, c * math.exp(-t)) for key, c in rhs.terms))
            scale = max([1.0] + [abs(c) for _, c in p.terms])
            assert lhs.max_abs_diff(scaled) <= 1e-12 * scale


@pytest.mark.parametrize("n", [1, 2, 3])
def test_semigroup_preserves_psh(n):
    pts = random_points(n, 20, seed=9)
    for entry in builtin_catalog(n):
        if not (entry.claimed_psh and entry.claimed_circular):
            continue
        for t in np.arange(0, 5.01, 0.5):
            H = hessians_at(mehler(entry.expr, t, n), pts, n)
            assert min(min_eigenvalue(h) for h in H) >= -1e-10

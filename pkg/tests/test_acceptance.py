"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL`` line to the terminal
(bypassing capture) with the figures it was judged on.
"""
import math
import time
from collections import defaultdict

import numpy as np
import pytest

from pshgauss.catalog import builtin_catalog, get_entry, make_entry
from pshgauss.report import to_json
from pshgauss.verify import RunConfig, Verifier, alpha_study, check_dirichlet, check_ibp_second, run_suite


@pytest.fixture
def report_line(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")

    return emit


def pair_key(c):
    return (c.dim, c.f, c.g)


def ladder_ok(c):
    if c.method == "mc":
        return c.tol == pytest.approx(4 * c.stderr) and c.abs_err <= c.tol
    want = 1e-10 if c.method == "exact" else 1e-8
    return c.tol == want and (c.abs_err <= want or c.rel_err <= want)


def test_criterion_01_first_ibp_identity(report_line):
    t0 = time.perf_counter()
    checks = []
    for n in (1, 2):
        checks += [c for c in run_suite(RunConfig(dim=n, suite="ibp1")).checks if c.suite == "ibp1"]
    elapsed = time.perf_counter() - t0
    pairs = {pair_key(c) for c in checks}
    methods = sorted({c.method for c in checks})
    ok = len(pairs) >= 40 and all(ladder_ok(c) for c in checks) and elapsed <= 60
    report_line(1, ok, f"{len(pairs)} pairs, {len(checks)} equalities, methods {methods}, {elapsed:.1f}s")
    assert ok


def test_criterion_02_second_ibp_identity(report_line):
    checks = []
    for n in (1, 2):
        checks += run_suite(RunConfig(dim=n, suite="ibp2")).checks
    checks = [c for c in checks if c.suite == "ibp2"]
    norm = make_entry("norm", "abs2(z1)", 1, psh=True, circular=True)
    anchor = check_ibp_second(norm, norm)
    anchor_ok = abs(anchor.lhs - 1) <= 1e-12 and abs(anchor.rhs - 1) <= 1e-12
    ok = len(checks) >= 20 and all(ladder_ok(c) for c in checks) and anchor_ok
    report_line(2, ok, f"{len(checks)} pairs, anchor lhs={anchor.lhs.real:.12g} rhs={anchor.rhs.real:.12g}")
    assert ok


def test_criterion_03_commutation(report_line):
    worst, count = 0.0, 0
    controls = []
    for n in (1, 2, 3, 4):
        v = Verifier(n)
        assert len(v.points) == 20
        for e in builtin_catalog(n):
            worst = max(worst, v.commutation(e).lhs.real)
            count += 1
        controls.append(v.commutation_control().lhs.real)
    ok = worst <= 1e-10 and min(controls) >= 0.1
    report_line(3, ok, f"{count} entries, worst residual {worst:.2e}, control residual min {min(controls):.3f}")
    assert ok


def test_criterion_04_operator_relations(report_line):
    worst, circ = 0.0, 0
    for n in (1, 2, 3, 4):
        v = Verifier(n)
        for e in builtin_catalog(n):
            out = v.relations(e)
            assert len(out) == (4 if e.claimed_circular else 2)
            circ += e.claimed_circular
            worst = max(worst, max(c.lhs.real for c in out))
    ok = worst <= 1e-10
    report_line(4, ok, f"worst residual {worst:.2e}, {circ} circular entries with R f = 0 and OU f = L f = Lbar f")
    assert ok


def test_criterion_05_dirichlet(report_line):
    checks = []
    for n in (1, 2, 3):
        checks += [c for c in run_suite(RunConfig(dim=n, suite="dirichlet")).checks if c.suite == "dirichlet"]
    eq, nonneg = check_dirichlet(make_entry("zbar", "conj(z1)", 1))
    anchor_ok = abs(eq.lhs - 1) <= 1e-12 and abs(eq.rhs - 1) <= 1e-12 and nonneg.passed
    failed = [c for c in checks if not c.passed]
    ok = not failed and anchor_ok and len(checks) >= 2 * 30
    report_line(5, ok, f"{len(checks) // 2} self-pairings, {len(failed)} failures, anchor {eq.lhs.real:g} = {eq.rhs.real:g}")
    assert ok


def test_criterion_06_semigroup(report_line):
    worst = defaultdict(float)
    count = 0
    for n in (1, 2, 3, 4):
        v = Verifier(n)
        for e in builtin_catalog(n):
            if not e.is_polynomial:
                continue
            p0, pst, mean, gen = v.semigroup_checks(e)
            worst["P0"] = max(worst["P0"], p0.lhs.real)
            worst["PsPt"] = max(worst["PsPt"], pst.lhs.real)
            worst["mean"] = max(worst["mean"], mean.rel_err)
            worst["gen"] = max(worst["gen"], gen.lhs.real)
            count += 1
    ok = worst["P0"] == 0 and worst["PsPt"] <= 1e-12 and worst["mean"] <= 1e-12 and worst["gen"] <= 1e-6
    report_line(6, ok, f"{count} polynomial entries, " + ", ".join(f"{k} {x:.1e}" for k, x in worst.items()))
    assert ok


def test_criterion_07_alpha_study(report_line):
    t0 = time.perf_counter()
    checks = []
    for n in (1, 2):
        checks += [c for c in run_suite(RunConfig(dim=n, suite="alpha")).checks
                   if c.suite == "alpha" and c.g is not None and not c.identity.startswith("Tr")]
    elapsed = time.perf_counter() - t0
    by_pair = defaultdict(list)
    for c in checks:
        by_pair[pair_key(c)].append(c)
    # shape checks must hold for every pair; the t = 20 proxy is judged at the absolute 1e-6 bound
    shape_ok = all(c.passed for c in checks if not c.identity.startswith("|alpha("))
    full = [k for k, cs in by_pair.items()
            if all(c.passed for c in cs if not c.identity.startswith("|alpha("))
            and all(c.lhs.real <= 1e-6 for c in cs if c.identity.startswith("|alpha("))]
    norm = make_entry("norm", "abs2(z1)", 1, psh=True, circular=True)
    st = alpha_study(norm, norm)
    anchor = float(np.max(np.abs(st.alpha - (1 + np.exp(-st.t)))))
    ok = shape_ok and len(full) >= 10 and anchor <= 1e-10 and elapsed <= 120
    report_line(7, ok, f"{len(by_pair)} pairs, {len(full)} meet every bound incl. |alpha(20) - alpha(inf)| <= 1e-6, "
                       f"anchor error {anchor:.1e}, {elapsed:.1f}s")
    assert ok


def test_criterion_08_correlation_inequality(report_line):
    det = []
    for n in (1, 2):
        det += [c for c in run_suite(RunConfig(dim=n, suite="correlation", controls=False)).checks
                if c.suite == "correlation"]
    det_ok = all(c.method != "mc" and c.lhs.real >= -1e-8 for c in det)
    mc = [c for c in run_suite(RunConfig(dim=3, suite="correlation", controls=False)).checks
          if c.suite == "correlation" and c.method == "mc"]
    mc_ok = len(mc) >= 3 and all(c.lhs.real >= -4 * c.stderr for c in mc)
    v = Verifier(1)
    c1 = v.covariance(get_entry("re_z1", 1), get_entry("neg_re_z1", 1))[0]
    c2 = v.covariance(get_entry("norm2", 1), get_entry("neg_norm2", 1))[0]
    ctrl_ok = abs(c1 + 0.5) <= 1e-10 and abs(c2 + 1) <= 1e-10
    ok = det_ok and mc_ok and ctrl_ok
    report_line(8, ok, f"{len(det)} pairs at n <= 2 (min cov {min(c.lhs.real for c in det):.3g}), "
                       f"{len(mc)} MC pairs at n = 3, controls {c1:.12g} and {c2:.12g}")
    assert ok


def test_criterion_09_psh_preservation(report_line):
    worst, count = math.inf, 0
    for n in (1, 2, 3, 4):
        v = Verifier(n)
        for e in builtin_catalog(n):
            if e.claimed_psh and e.claimed_circular:
                worst = min(worst, v.psh_preservation(e).lhs.real)
                count += 1
    ok = worst >= -1e-10
    report_line(9, ok, f"{count} circular psh entries, smallest Hessian eigenvalue {worst:.3g}")
    assert ok


def test_criterion_10_replay(report_line):
    def text():
        cfg = RunConfig(dim=3, suite="correlation", samples=200_000, seed=1234)
        return to_json(run_suite(cfg))

    a, b = text(), text()
    strip = lambda s: "\n".join(line for line in s.splitlines() if not line.lstrip().startswith('"timestamp"'))
    ok = strip(a) == strip(b) and '"timestamp"' in a and '"mc"' in a
    report_line(10, ok, f"two seeded MC runs, {len(a)} bytes, identical outside the timestamp field")
    assert ok

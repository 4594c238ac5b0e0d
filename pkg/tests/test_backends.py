import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import exprs, random_points
from pshgauss import _backend, kernels
from pshgauss.expr import compile_program

pytestmark = pytest.mark.skipif(not _backend.HAVE_NUMBA, reason="numba not installed")


@given(exprs(2))
def test_eval_program_parity(e):
    p = compile_program(e)
    Z = random_points(2, 50)
    a = kernels.eval_program_numba(p.ops, p.args, p.consts, Z, p.depth)
    b = kernels.eval_program_numpy(p.ops, p.args, p.consts, Z, p.depth)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-13, equal_nan=True)


@given(st.integers(1, 5000), st.integers(0, 2**32))
def test_pairwise_sum_parity(size, seed):
    v = np.random.default_rng(seed).standard_normal(size)
    a, b = kernels.pairwise_sum_numba(v), kernels.pairwise_sum_numpy(v)
    assert a == pytest.approx(b, abs=1e-12) and a == pytest.approx(v.sum(), abs=1e-10)


@given(st.integers(1, 6), st.integers(0, 2**32))
def test_jacobi_parity_and_lapack(n, seed):
    B = np.random.default_rng(seed).standard_normal((n, n))
    A = B + B.T
    a, b = kernels.jacobi_eigvalsh_numba(A), kernels.jacobi_eigvalsh_numpy(A)
    ref = np.linalg.eigvalsh(A)
    scale = max(1.0, np.abs(ref).max())
    assert np.allclose(a, ref, atol=1e-12 * scale) and np.allclose(b, ref, atol=1e-12 * scale)


@pytest.mark.parametrize("m", [1, 2, 5, 32, 101])
def test_hermite_newton_parity(m):
    from numpy.polynomial.hermite import hermgauss

    guess = hermgauss(m)[0] * (1 + 1e-6)
    xa, wa = kernels.hermite_newton_numba(guess)
    xb, wb = kernels.hermite_newton_numpy(guess)
    assert np.allclose(xa, xb, atol=1e-14) and np.allclose(wa, wb, rtol=1e-12)


def test_numpy_backend_runs_end_to_end():
    env = dict(os.environ, PSHGAUSS_BACKEND="numpy")
    code = ("from pshgauss import kernels;"
            "from pshgauss.verify import RunConfig, run_suite;"
            "assert kernels.eval_program is kernels.eval_program_numpy;"
            "r = run_suite(RunConfig(dim=1, suite='correlation'));"
            "print(r.ok, r.summary['total'])")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    ok, total = out.stdout.split()
    assert ok == "True" and int(total) > 0


def test_bad_backend_flag_rejected():
    env = dict(os.environ, PSHGAUSS_BACKEND="fortran")
    out = subprocess.run([sys.executable, "-c", "import pshgauss"], env=env, capture_output=True, text=True)
    assert out.returncode != 0 and "PSHGAUSS_BACKEND" in out.stderr

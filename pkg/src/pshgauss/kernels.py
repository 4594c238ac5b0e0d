"""Hot numeric loops, each with a numba kernel and a pure-numpy twin.

The public names at the bottom of this module dispatch on
:data:`pshgauss._backend.BACKEND`.  Both variants are importable under their
explicit names so the test-suite and the benchmark can compare them.

Expression programs are flat postfix code produced by
:func:`pshgauss.expr.compile_program`; see ``OP_*`` below.
"""
from __future__ import annotations

import math

import numpy as np

from ._backend import BACKEND, njit

OP_VAR = 0
OP_CONJVAR = 1
OP_CONST = 2
OP_ADD = 3
OP_MUL = 4
OP_POW = 5
OP_EXP = 6
OP_CONJ = 7

_RESCALE = 1e150
_LOG_RESCALE = math.log(_RESCALE)


# ---------------------------------------------------------------------------
# expression evaluation


@njit
def eval_program_numba(ops, args, consts, Z, depth):
    npts = Z.shape[0]
    out = np.empty(npts, dtype=np.complex128)
    stack = np.empty(max(depth, 1), dtype=np.complex128)
    for i in range(npts):
        sp = 0
        for k in range(ops.shape[0]):
            op = ops[k]
            a = args[k]
            if op == OP_VAR:
                stack[sp] = Z[i, a]
                sp += 1
            elif op == OP_CONJVAR:
                stack[sp] = Z[i, a].conjugate()
                sp += 1
            elif op == OP_CONST:
                stack[sp] = consts[a]
                sp += 1
            elif op == OP_ADD:
                acc = stack[sp - a]
                for q in range(sp - a + 1, sp):
                    acc += stack[q]
                sp -= a
                stack[sp] = acc
                sp += 1
            elif op == OP_MUL:
                acc = stack[sp - a]
                for q in range(sp - a + 1, sp):
                    acc *= stack[q]
                sp -= a
                stack[sp] = acc
                sp += 1
            elif op == OP_POW:
                base = stack[sp - 1]
                r = 1.0 + 0.0j
                kk = a
                while kk > 0:
                    if kk & 1:
                        r *= base
                    base *= base
                    kk >>= 1
                stack[sp - 1] = r
            elif op == OP_EXP:
                stack[sp - 1] = np.exp(stack[sp - 1])
            else:
                stack[sp - 1] = stack[sp - 1].conjugate()
        out[i] = stack[0]
    return out


def eval_program_numpy(ops, args, consts, Z, depth):
    npts = Z.shape[0]
    stack = []
    for op, a in zip(ops.tolist(), args.tolist()):
        if op == OP_VAR:
            stack.append(Z[:, a])
        elif op == OP_CONJVAR:
            stack.append(np.conj(Z[:, a]))
        elif op == OP_CONST:
            stack.append(np.full(npts, consts[a], dtype=np.complex128))
        elif op == OP_ADD or op == OP_MUL:
            operands = stack[len(stack) - a:]
            del stack[len(stack) - a:]
            acc = operands[0].copy()
            for x in operands[1:]:
                if op == OP_ADD:
                    acc += x
                else:
                    acc *= x
            stack.append(acc)
        elif op == OP_POW:
            base = stack.pop().copy()
            r = np.ones(npts, dtype=np.complex128)
            kk = a
            while kk > 0:
                if kk & 1:
                    r = r * base
                base = base * base
                kk >>= 1
            stack.append(r)
        elif op == OP_EXP:
            stack.append(np.exp(stack.pop()))
        else:
            stack.append(np.conj(stack.pop()))
    return np.asarray(stack[0], dtype=np.complex128)


# ---------------------------------------------------------------------------
# deterministic pairwise (tree) reduction


@njit
def pairwise_sum_numba(a):
    n = a.shape[0]
    if n == 0:
        return 0.0
    buf = a.copy()
    while n > 1:
        half = (n + 1) // 2
        for i in range(half):
            j = 2 * i
            if j + 1 < n:
                buf[i] = buf[j] + buf[j + 1]
            else:
                buf[i] = buf[j] + 0.0
        n = half
    return buf[0]


def pairwise_sum_numpy(a):
    buf = np.asarray(a, dtype=np.float64)
    if buf.shape[0] == 0:
        return 0.0
    while buf.shape[0] > 1:
        if buf.shape[0] % 2:
            buf = np.append(buf, 0.0)
        buf = buf[0::2] + buf[1::2]
    return float(buf[0])


# ---------------------------------------------------------------------------
# symmetric eigenvalues by cyclic Jacobi rotations


def _jacobi_eigvalsh(A, max_sweeps=60):
    a = A.copy()
    n = a.shape[0]
    norm2 = 0.0
    for p in range(n):
        for q in range(n):
            norm2 += a[p, q] * a[p, q]
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        if off <= 1e-36 * norm2 or off == 0.0:
            break
        for p in range(n):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    return np.sort(w)


jacobi_eigvalsh_numba = njit(_jacobi_eigvalsh)
jacobi_eigvalsh_numpy = _jacobi_eigvalsh


# ---------------------------------------------------------------------------
# Gauss-Hermite nodes: Newton polishing on the orthonormal recurrence


def _hermite_newton(guess, tol=1e-15, maxit=100):
    """Polish Gauss-Hermite roots (weight exp(-x^2)) and return their weights.

    ``guess`` holds approximate nodes in ascending order; only the
    non-positive half is iterated and mirrored, so the rule is exactly
    symmetric.
    """
    m = guess.shape[0]
    x = np.zeros(m)
    w = np.zeros(m)
    pim4 = math.pi ** -0.25
    half = (m + 1) // 2
    for i in range(half):
        z = guess[i]
        pp = 1.0
        nscale = 0
        for it in range(maxit):
            p1 = pim4
            p2 = 0.0
            nscale = 0
            for j in range(m):
                p3 = p2
                p2 = p1
                p1 = z * math.sqrt(2.0 / (j + 1.0)) * p2 - math.sqrt(j / (j + 1.0)) * p3
                if abs(p1) > _RESCALE:
                    p1 /= _RESCALE
                    p2 /= _RESCALE
                    nscale += 1
            pp = math.sqrt(2.0 * m) * p2
            dz = p1 / pp
            z -= dz
            if abs(dz) <= tol * max(1.0, abs(z)):
                break
        # odd m: the middle root is exactly zero by symmetry
        if 2 * i + 1 == m:
            z = 0.0
        x[i] = z
        x[m - 1 - i] = -z
        logw = math.log(2.0) - 2.0 * (math.log(abs(pp)) + nscale * _LOG_RESCALE)
        w[i] = math.exp(logw)
        w[m - 1 - i] = w[i]
    return x, w


hermite_newton_numba = njit(_hermite_newton)
hermite_newton_numpy = _hermite_newton


if BACKEND == "numba":
    eval_program = eval_program_numba
    pairwise_sum = pairwise_sum_numba
    jacobi_eigvalsh = jacobi_eigvalsh_numba
    hermite_newton = hermite_newton_numba
else:
    eval_program = eval_program_numpy
    pairwise_sum = pairwise_sum_numpy
    jacobi_eigvalsh = jacobi_eigvalsh_numpy
    hermite_newton = hermite_newton_numpy


def pairwise_csum(v) -> complex:
    """Tree-reduced sum of a complex vector (real and imaginary parts separately)."""
    v = np.asarray(v, dtype=np.complex128)
    re = np.ascontiguousarray(v.real)
    im = np.ascontiguousarray(v.imag)
    return complex(pairwise_sum(re), pairwise_sum(im))

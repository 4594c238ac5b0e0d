import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from pshgauss.expr import Conj, ConjVar, Const, Exp, IntPow, Prod, Sum, Var

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def small_complex():
    part = st.integers(-4, 4).map(lambda k: k / 2)
    return st.builds(complex, part, part)


def leaves(n):
    return st.one_of(
        st.integers(1, n).map(Var),
        st.integers(1, n).map(ConjVar),
        small_complex().map(Const),
    )


def exprs(n=2, allow_exp=True):
    """Random expression trees; exponent arguments are scaled down to keep values moderate."""

    def extend(children):
        options = [
            st.lists(children, min_size=2, max_size=3).map(lambda xs: Sum(tuple(xs))),
            st.lists(children, min_size=2, max_size=3).map(lambda xs: Prod(tuple(xs))),
            st.tuples(children, st.integers(0, 3)).map(lambda t: IntPow(*t)),
            children.map(Conj),
        ]
        if allow_exp:
            options.append(children.map(lambda c: Exp(Prod((Const(0.25), c)))))
        return st.one_of(*options)

    return st.recursive(leaves(n), extend, max_leaves=6)


def polys(n=2):
    return exprs(n, allow_exp=False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_points(n, count=20, seed=7, scale=1.0):
    rng = np.random.default_rng(seed)
    return scale * (rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))) / np.sqrt(2)

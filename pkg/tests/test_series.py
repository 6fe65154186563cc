import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kahlerjet import series as S
from kahlerjet.series import Series
from kahlerjet.tensor_core import n_monomials, value_shape


def random_series(rng, dim, kind, trunc, lo=0, scale=0.5):
    vs = value_shape(kind, dim)
    polys = [None] * lo + [scale * rng.standard_normal((n_monomials(dim, k),) + vs) for k in range(lo, trunc + 1)]
    return Series(dim, kind, trunc, polys)


def random_anchored(rng, dim, trunc):
    return Series.identity_vector(dim, trunc) + random_series(rng, dim, "vector", trunc, lo=2)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=10, deadline=None)
@given(seed=seeds)
def test_compose_is_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_anchored(rng, 2, 4) for _ in range(3))
    left = S.compose(S.compose(a, b), c)
    right = S.compose(a, S.compose(b, c))
    assert left.max_abs_diff(right) < 1e-10


@settings(max_examples=10, deadline=None)
@given(seed=seeds)
def test_compose_matches_pointwise(seed):
    rng = np.random.default_rng(seed)
    outer = random_series(rng, 2, "endo", 4)
    inner = random_anchored(rng, 2, 4)
    comp = S.compose(outer, inner)
    X = 1e-2 * rng.standard_normal(2)
    # truncation error is O(|X|^5)
    assert np.allclose(comp.eval(X), outer.eval(inner.eval(X)), atol=1e-9)


@settings(max_examples=10, deadline=None)
@given(seed=seeds, dim=st.integers(1, 3))
def test_double_inverse(seed, dim):
    rng = np.random.default_rng(seed)
    s = random_anchored(rng, dim, 5)
    r = S.invert_anchored(s)
    assert S.compose(s, r).max_abs_diff(Series.identity_vector(dim, 5)) < 1e-10
    assert S.invert_anchored(r).max_abs_diff(s) < 1e-10


def test_invert_requires_anchor():
    s = Series.identity_vector(2, 3).scale(2.0)
    with pytest.raises(ValueError):
        S.invert_anchored(s)


@settings(max_examples=10, deadline=None)
@given(seed=seeds, kind=st.sampled_from(["endo", "scalar"]))
def test_mul_inverse(seed, kind):
    rng = np.random.default_rng(seed)
    s = random_series(rng, 2, kind, 4, lo=1)
    one = Series.identity_endo(2, 4) if kind == "endo" else Series(2, "scalar", 4, [np.ones(1)])
    s = s + one
    inv = S.mul_inverse(s)
    assert S.mul(s, inv).max_abs_diff(one) < 1e-10
    assert S.mul(inv, s).max_abs_diff(one) < 1e-10


@settings(max_examples=10, deadline=None)
@given(seed=seeds, kind=st.sampled_from(["scalar", "vector", "endo"]))
def test_directional_compose_identity_is_number_operator(seed, kind):
    rng = np.random.default_rng(seed)
    s = random_series(rng, 3, kind, 4)
    lhs = S.directional_compose(s, Series.identity_endo(3, 4))
    assert lhs.max_abs_diff(S.number_op(s)) < 1e-12


def test_jacobian_of_quadratic():
    # s(X) = (x0 x1, x0^2): poly coefficients over monomials (2,0), (1,1), (0,2)
    from kahlerjet.tensor_core import basis

    exps = basis(2, 2).exps.tolist()
    p = np.zeros((3, 2))
    p[exps.index([1, 1]), 0] = 1.0
    p[exps.index([2, 0]), 1] = 1.0
    s = Series(2, "vector", 2, [None, None, p])
    X = np.array([0.3, -0.5])
    J = S.jacobian(s).eval(X)
    assert np.allclose(J, [[X[1], X[0]], [2 * X[0], 0.0]])


def test_restrict_selects_monomials():
    rng = np.random.default_rng(5)
    s = random_series(rng, 4, "endo", 3)
    r = S.restrict(s, [0, 2])
    X = np.array([0.2, -0.4])
    full = np.zeros(4)
    full[[0, 2]] = X
    assert np.allclose(r.eval(X), s.eval(full)[np.ix_([0, 2], [0, 2])])


def test_scalar_function_series_exp():
    coeffs = [1.0 / math.factorial(j) for j in range(8)]
    arg = Series(1, "scalar", 7, [None, np.ones(1)])
    e = S.scalar_function_series(coeffs, arg)
    assert np.allclose(e.polys[5], 1.0 / 120)
    assert math.isclose(float(e.eval(np.array([0.1]))), math.exp(0.1), rel_tol=1e-12)


def test_json_roundtrip_and_kind_mismatch():
    rng = np.random.default_rng(2)
    s = random_series(rng, 2, "vector", 3)
    back = Series.from_dict(s.to_dict())
    assert back.max_abs_diff(s) == 0.0
    with pytest.raises(ValueError):
        s + random_series(rng, 2, "endo", 3)
    with pytest.raises(ValueError):
        Series(2, "vector", 1, [np.zeros((3, 2))])

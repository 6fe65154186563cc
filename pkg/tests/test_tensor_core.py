import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kahlerjet.tensor_core import KahlerPoint, SymTensor, eval, insert_slot, n_monomials, polarize, symmetrize


def random_sym(rng, dim, k, kind="scalar"):
    shape = {"scalar": (), "vector": (dim,), "endo": (dim, dim)}[kind]
    raw = rng.standard_normal((dim,) * k + shape)
    return symmetrize(raw, degree=k, dim=dim)


def test_point_rejects_bad_structures():
    with pytest.raises(ValueError):
        KahlerPoint(np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        KahlerPoint(np.eye(2), np.eye(2))
    with pytest.raises(ValueError):
        KahlerPoint(np.diag([1.0, 2.0]), np.array([[0.0, -1.0], [1.0, 0.0]]))


def test_point_roundtrip_and_omega():
    p = KahlerPoint.standard(2)
    q = KahlerPoint.from_dict(p.to_dict())
    assert np.array_equal(p.metric, q.metric) and np.array_equal(p.cplx, q.cplx)
    X, Y = np.arange(4.0), np.ones(4)
    assert np.isclose(X @ p.omega @ Y, (p.cplx @ X) @ p.metric @ Y)


def test_symmetrize_examples():
    raw = np.zeros((2, 2))
    raw[0, 1] = 1.0  # x1 y2
    t = symmetrize(raw)
    assert np.isclose(eval(t, [np.array([1.0, 0]), np.array([0, 1.0])]), 0.5)
    assert np.isclose(eval(t, [np.array([0, 1.0]), np.array([1.0, 0])]), 0.5)
    skew = raw - raw.T
    assert np.allclose(symmetrize(skew).coeffs, 0.0)
    assert symmetrize(symmetrize(raw).to_raw()).allclose(t)


def test_storage_size():
    assert n_monomials(8, 7) == 3432
    assert SymTensor.zeros(8, 7, "scalar").coeffs.shape == (3432,)


def test_eval_conventions():
    t = SymTensor(1, 0, "scalar", [3.5])
    assert eval(t, []) == 3.5
    g = symmetrize(np.eye(2))
    assert np.isclose(eval(g, [np.array([1.0, 0]), np.array([1.0, 0])]), 1.0)
    rng = np.random.default_rng(0)
    t = random_sym(rng, 3, 4)
    X = rng.standard_normal(3)
    assert np.isclose(eval(t, [X] * 4), math.factorial(4) * t.eval_diagonal(X))
    with pytest.raises(ValueError):
        eval(t, [X])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 4), k=st.integers(1, 4), kind=st.sampled_from(["scalar", "vector", "endo"]))
def test_eval_is_symmetric(seed, dim, k, kind):
    rng = np.random.default_rng(seed)
    t = random_sym(rng, dim, k, kind)
    args = [rng.standard_normal(dim) for _ in range(k)]
    base = eval(t, args)
    for perm in itertools.islice(itertools.permutations(range(k)), 6):
        assert np.allclose(eval(t, [args[i] for i in perm]), base, atol=1e-12)


def test_insert_slot_examples():
    g = symmetrize(np.eye(2))
    Z = np.array([2.0, -1.0])
    form = insert_slot(g, Z)
    assert np.allclose(form.coeffs, Z)
    # |X|^4 in dim 2 has polynomial value |X|^4, so t(X,X,X,X) = 4! |X|^4
    quartic = polarize(2, 4, "scalar", lambda X: float(X @ X) ** 2)
    dz = insert_slot(quartic, np.array([1.0, 0.0]))
    X = np.array([0.3, -0.7])
    assert np.isclose(dz.eval_diagonal(X), 4 * X[0] * (X @ X))
    W = np.array([0.5, 1.5])
    assert np.isclose(eval(insert_slot(insert_slot(g, Z), W), []), Z @ W)
    with pytest.raises(ValueError):
        insert_slot(SymTensor(2, 0, "scalar", [1.0]), Z)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 4), k=st.integers(0, 4))
def test_polarization_roundtrip(seed, dim, k):
    rng = np.random.default_rng(seed)
    t = random_sym(rng, dim, k, "vector")
    back = polarize(dim, k, "vector", t.eval_diagonal, rng)
    assert np.allclose(back.coeffs, t.coeffs, atol=1e-8)

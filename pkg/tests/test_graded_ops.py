import numpy as np
import pytest
from scipy.special import factorial
from hypothesis import given, settings
from hypothesis import strategies as st

from kahlerjet import graded_ops as G
from kahlerjet.tensor_core import KahlerPoint, basis, SymTensor, n_monomials, polarize, symmetrize

P1 = KahlerPoint.standard(1)
P2 = KahlerPoint.standard(2)


def random_vector_field(rng, dim, k):
    return SymTensor.from_poly(dim, k, "vector", rng.standard_normal((n_monomials(dim, k), dim)))


def test_der_I_kills_metric():
    g = symmetrize(P2.metric)
    assert np.allclose(G.der_I(g, P2).coeffs, 0.0)


def test_der_I_on_linear_form():
    # (Der_I a)(X) = a(IX)
    a = SymTensor(2, 1, "scalar", [1.0, 0.0])
    got = G.der_I(a, P1)
    X = np.array([0.4, -1.3])
    assert np.isclose(got.eval_diagonal(X), (P1.cplx @ X)[0])


def test_bigrade_examples():
    quartic_re = polarize(2, 4, "scalar", lambda X: ((X[0] + 1j * X[1]) ** 4).real)
    assert G.bigrade_project(quartic_re, P1, 4, 0).allclose(quartic_re)
    assert np.allclose(G.bigrade_project(quartic_re, P1, 2, 2).coeffs, 0.0)
    norm4 = polarize(2, 4, "scalar", lambda X: float(X @ X) ** 2)
    assert G.bigrade_project(norm4, P1, 2, 2).allclose(norm4)
    assert np.allclose(G.project_ge22(quartic_re, P1).coeffs, 0.0)
    assert G.project_ge22(norm4, P1).allclose(norm4)
    with pytest.raises(ValueError):
        G.bigrade_project(norm4, P1, 3, 2)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(2, 5))
def test_bigrade_components_sum_to_identity(seed, k):
    rng = np.random.default_rng(seed)
    t = SymTensor.from_poly(4, k, "scalar", rng.standard_normal(n_monomials(4, k)))
    total = sum(G.bigrade_project(t, P2, a, k - a).coeffs for a in range(k // 2 + 1))
    assert np.allclose(total, t.coeffs, atol=1e-10)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_ni_pseudo_inverse_is_moore_penrose(k):
    A = G.ni_operator(P2, k).matrix
    B = G.partial_inverse_NI(P2, k).matrix
    assert np.allclose(A @ B @ A, A, atol=1e-10)
    assert np.allclose(B @ A @ B, B, atol=1e-10)
    # Frobenius inner product of full tensors in polynomial coordinates has weight alpha!
    w = np.prod(factorial(basis(4, k).exps), axis=1)
    W = np.kron(np.diag(w), np.eye(4))
    assert np.allclose(W @ A @ B, (W @ A @ B).T, atol=1e-10)
    assert np.allclose(W @ B @ A, (W @ B @ A).T, atol=1e-10)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(2, 4))
def test_closure_roundtrip(seed, k):
    rng = np.random.default_rng(seed)
    Z = random_vector_field(rng, 4, k)
    Zh = SymTensor.from_poly(4, k, "vector", G.holomorphic_part(Z.poly, 4, k, P2.cplx))
    back = G.closure_inverse(G.closure(Zh, P2), P2)
    assert np.allclose(back.coeffs, Zh.coeffs, atol=1e-9)


def test_closure_inverse_rejects_non_closures():
    quartic_re = polarize(2, 4, "scalar", lambda X: ((X[0] + 1j * X[1]) ** 4).real)
    with pytest.raises(G.ClosureResidualError):
        G.closure_inverse(quartic_re, P1)


def test_closure_example():
    # cl(X) = |X|^2
    Z = SymTensor.from_poly(2, 1, "vector", np.eye(2))
    X = np.array([0.7, 0.2])
    assert np.isclose(G.closure(Z, P1).eval_diagonal(X), X @ X)


@pytest.mark.parametrize("n,k,d", [(1, 0, 1), (1, 2, 0), (1, 2, 1), (2, 1, 1), (2, 2, 0), (2, 1, 2)])
def test_laplacian_matches_formula(n, k, d):
    p = KahlerPoint.standard(n)
    assert np.allclose(G.laplacian(p, k, d), G.laplacian_formula(p, k, d), atol=1e-10)


@pytest.mark.parametrize("n", [1, 2])
def test_resolution_is_exact(n):
    records = G.resolution_check(n, 4 if n == 1 else 3)
    assert records and all(r["ok"] for r in records)


def test_sigma_spaces():
    s1 = G.sigma_space(P2, 1)
    assert s1.rank == 8  # half of End(R^4) anticommutes with I
    assert s1.check_anti_invariance() < 1e-12
    # a 1-form F with F(IX) = -I F(X): pr_sigma1 keeps it
    F = np.random.default_rng(3).standard_normal((4, 4))
    Fp = G.pr_sigma1(F, P2)
    assert np.allclose(G.pr_sigma1(Fp, P2), Fp)


def test_weight_of_identity_is_zero():
    ident = SymTensor.from_poly(4, 1, "vector", np.eye(4))
    assert np.allclose(G.weight(ident, P2).coeffs, 0.0)

"""Operators on polynomial-coefficient tensors: N, Der_I, weight, bigrading,
special alternating forms, the boundary operators L and L*, the formal
Laplacian, the partial inverse of N + Der_I (x) I and the closure map.

Polynomials are coefficient arrays of shape (M_k,) + value_shape as in
``tensor_core``.  Spectral projections are Lagrange interpolation polynomials
in Der_I^2, whose spectrum on degree k is the known integer set
{-(k - 2j)^2}.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .tensor_core import (
    KahlerPoint,
    SymTensor,
    basis,
    n_monomials,
    poly_gradient,
    raise_table,
    value_shape,
)

_MATRIX_CACHE: dict = {}


def _key(arr) -> bytes:
    return np.ascontiguousarray(arr, dtype=float).tobytes()


def _cplx(obj) -> np.ndarray:
    if isinstance(obj, KahlerPoint):
        if obj.cplx is None:
            raise ValueError("point has no complex structure")
        return obj.cplx
    return np.asarray(obj, dtype=float)


# ---------------------------------------------------------------------------
# Der_I on polynomials


def der_I_matrix(dim: int, k: int, cplx) -> sp.csr_matrix:
    """Sparse matrix of p -> Dp[IX] on degree-k monomial coefficients."""
    cplx = _cplx(cplx)
    key = ("derI", dim, k, _key(cplx))
    mat = _MATRIX_CACHE.get(key)
    if mat is not None:
        return mat
    b = basis(dim, k)
    rows, cols, vals = [], [], []
    if k > 0:
        lower_up = raise_table(dim, k - 1)
        for i, j in zip(*np.nonzero(cplx)):
            # x_j d/dx_i : x^alpha -> alpha_i x^(alpha - e_i + e_j)
            has = b.exps[:, i] > 0
            src = np.nonzero(has)[0]
            e = b.exps[src].copy()
            e[:, i] -= 1
            mid = basis(dim, k - 1).lookup(e)
            dst = lower_up[mid, j]
            rows.append(dst)
            cols.append(src)
            vals.append(cplx[i, j] * b.exps[src, i])
    if rows:
        rows, cols, vals = map(np.concatenate, (rows, cols, vals))
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(b.size, b.size))
    _MATRIX_CACHE[key] = mat
    return mat


def _apply_sparse(mat, p):
    flat = p.reshape(p.shape[0], -1)
    return (mat @ flat).reshape(p.shape)


def der_I_poly(p, dim, k, cplx):
    return _apply_sparse(der_I_matrix(dim, k, cplx), p)


def _der_I_sq(p, dim, k, cplx):
    m = der_I_matrix(dim, k, cplx)
    return _apply_sparse(m, _apply_sparse(m, p))


def _squares(k: int):
    """Distinct values (kappa - kappabar)^2 on degree k."""
    return sorted({(k - 2 * j) ** 2 for j in range(k // 2 + 1)})


def spectral_poly(p, dim, k, cplx, weights: dict):
    """sum_s weights[s] * P_s p, P_s the Der_I^2 = -s eigenprojector (Lagrange form)."""
    spectrum = _squares(k)
    out = np.zeros_like(p)
    for s in spectrum:
        w = weights.get(s, 0.0)
        if w == 0.0:
            continue
        q = p
        for t in spectrum:
            if t == s:
                continue
            q = (_der_I_sq(q, dim, k, cplx) + t * q) / (t - s)
        out = out + w * q
    return out


def bigrade_poly(p, dim, k, cplx, kappa, kappabar):
    if kappa + kappabar != k:
        raise ValueError("kappa + kappabar must equal the degree")
    return spectral_poly(p, dim, k, cplx, {(kappa - kappabar) ** 2: 1.0})


def ge22_poly(p, dim, k, cplx):
    return spectral_poly(p, dim, k, cplx, {s: 1.0 for s in _squares(k) if k >= 4 and s <= (k - 4) ** 2})


def bracket1_poly(p, dim, k, cplx):
    if k == 0:
        return np.zeros_like(p)
    if k == 1:
        return p.copy()
    return spectral_poly(p, dim, k, cplx, {(k - 2) ** 2: 1.0})


# ---------------------------------------------------------------------------
# SymTensor level API


class GradedOperator:
    """A linear map on the degree-k space of one value kind.

    ``apply`` works on polynomial coefficient arrays; ``matrix`` assembles the
    dense matrix in those coordinates on first use (only sensible for small
    spaces).
    """

    def __init__(self, dim, domain_degree, domain_kind, apply, target_degree=None, name=""):
        self.dim = dim
        self.domain_degree = domain_degree
        self.domain_kind = domain_kind
        self.target_degree = domain_degree if target_degree is None else target_degree
        self._apply = apply
        self._matrix = None
        self.name = name

    def apply(self, p):
        return self._apply(np.asarray(p, dtype=float))

    def __call__(self, t: SymTensor) -> SymTensor:
        return SymTensor.from_poly(self.dim, self.target_degree, self.domain_kind, self.apply(t.poly))

    @property
    def shape_in(self):
        return (n_monomials(self.dim, self.domain_degree),) + value_shape(self.domain_kind, self.dim)

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            n = int(np.prod(self.shape_in))
            cols = []
            for j in range(n):
                e = np.zeros(n)
                e[j] = 1.0
                cols.append(self.apply(e.reshape(self.shape_in)).ravel())
            self._matrix = np.array(cols).T
        return self._matrix


def _value_I(p, cplx, kind):
    if kind == "vector":
        return p @ cplx.T
    if kind == "endo":
        return np.einsum("ij,mjk->mik", cplx, p)
    raise ValueError("scalar values carry no complex structure")


def number_operator(dim, k, kind="scalar") -> GradedOperator:
    return GradedOperator(dim, k, kind, lambda p: k * p, name="N")


def der_I_operator(point, k, kind="scalar") -> GradedOperator:
    cplx = _cplx(point)
    dim = cplx.shape[0]
    return GradedOperator(dim, k, kind, lambda p: der_I_poly(p, dim, k, cplx), name="Der_I")


def der_I(t: SymTensor, point) -> SymTensor:
    """(Der_I t)(X1..Xk) = sum_i t(X1, .., I Xi, .., Xk)."""
    return der_I_operator(point, t.degree, t.kind)(t)


def weight(t: SymTensor, point) -> SymTensor:
    """delta t = I t - Der_I t for vector values; [I, t] - Der_I t for endo values."""
    cplx = _cplx(point)
    if t.kind == "scalar":
        raise ValueError("weight needs a vector or endo value")
    p = t.poly
    if t.kind == "vector":
        val = p @ cplx.T
    else:
        val = np.einsum("ij,mjk->mik", cplx, p) - np.einsum("mij,jk->mik", p, cplx)
    return SymTensor.from_poly(t.dim, t.degree, t.kind, val - der_I_poly(p, t.dim, t.degree, cplx))


def bigrade_project(t: SymTensor, point, kappa: int, kappabar: int) -> SymTensor:
    """Real bigraded component (kappa, kappabar) + (kappabar, kappa) of a scalar tensor."""
    if t.kind != "scalar":
        raise ValueError("bigrading is defined for scalar tensors")
    if kappa + kappabar != t.degree:
        raise ValueError("kappa + kappabar must equal the degree")
    p = bigrade_poly(t.poly, t.dim, t.degree, _cplx(point), kappa, kappabar)
    return SymTensor.from_poly(t.dim, t.degree, "scalar", p)


def project_ge22(t: SymTensor, point) -> SymTensor:
    return SymTensor.from_poly(t.dim, t.degree, t.kind, ge22_poly(t.poly, t.dim, t.degree, _cplx(point)))


def project_bracket1(t: SymTensor, point) -> SymTensor:
    return SymTensor.from_poly(t.dim, t.degree, t.kind, bracket1_poly(t.poly, t.dim, t.degree, _cplx(point)))


# ---------------------------------------------------------------------------
# N (x) id + Der_I (x) I on vector fields


def _L_apply(p, dim, k, cplx):
    """(Der_I (x) I) p for a vector-valued polynomial."""
    return der_I_poly(p, dim, k, cplx) @ cplx.T


def ni_apply(p, dim, k, cplx):
    return k * p + _L_apply(p, dim, k, cplx)


def _ni_spectral(p, dim, k, cplx, fn):
    """sum over eigenvalues mu of N + Der_I (x) I of fn(mu) * P_mu p.

    On the Der_I^2 = -s eigenspace, Der_I (x) I squares to s, so it splits as
    +-sqrt(s) with projectors (1 +- L/sqrt(s))/2.
    """
    out = np.zeros_like(p)
    for s in _squares(k):
        ps = spectral_poly(p, dim, k, cplx, {s: 1.0})
        if s == 0:
            out = out + fn(k) * ps
            continue
        r = math.sqrt(s)
        lps = _L_apply(ps, dim, k, cplx)
        for sign in (1, -1):
            piece = 0.5 * (ps + sign * lps / r)
            out = out + fn(k + sign * r) * piece
    return out


def ni_pinv_apply(p, dim, k, cplx):
    return _ni_spectral(p, dim, k, cplx, lambda mu: 0.0 if abs(mu) < 0.5 else 1.0 / mu)


def holomorphic_part(p, dim, k, cplx):
    """Projection onto H^k = ker(N + Der_I (x) I) (real parts of holomorphic fields)."""
    return _ni_spectral(p, dim, k, cplx, lambda mu: 1.0 if abs(mu) < 0.5 else 0.0)


def ni_operator(point, k) -> GradedOperator:
    cplx = _cplx(point)
    dim = cplx.shape[0]
    return GradedOperator(dim, k, "vector", lambda p: ni_apply(p, dim, k, cplx), name="N+Der_I(x)I")


def partial_inverse_NI(point, k) -> GradedOperator:
    """Pseudo-inverse of N (x) id + Der_I (x) I on degree-k vector fields.

    Inverts every non-zero eigenvalue and kills the kernel H^k; the
    eigenspaces are orthogonal for the inner product induced by g, so this is
    the Moore-Penrose inverse for that inner product.
    """
    cplx = _cplx(point)
    dim = cplx.shape[0]
    return GradedOperator(dim, k, "vector", lambda p: ni_pinv_apply(p, dim, k, cplx), name="(N+Der_I(x)I)^+")


# ---------------------------------------------------------------------------
# closure map


def closure_poly(z, dim, k, metric):
    """cl Z = g(Z(X), X) for a degree-k vector polynomial; result has degree k+1."""
    gz = z @ np.asarray(metric).T
    up = raise_table(dim, k)
    out = np.zeros(n_monomials(dim, k + 1))
    np.add.at(out, up.ravel(), gz.ravel())
    return out


def closure(Z: SymTensor, point: KahlerPoint) -> SymTensor:
    if Z.kind != "vector":
        raise ValueError("closure needs a vector field")
    return SymTensor.from_poly(Z.dim, Z.degree + 1, "scalar", closure_poly(Z.poly, Z.dim, Z.degree, point.metric))


class ClosureResidualError(ValueError):
    pass


def closure_inverse_poly(p, dim, k, point: KahlerPoint, tol=1e-10):
    """Holomorphic field Z of degree k-1 with cl Z = p.

    The g-gradient of p projected to H^{k-1} is the unique solution without a
    unitary linear part; the residual is checked and reported.
    """
    if k < 2:
        raise ValueError("closure_inverse needs degree >= 2")
    grad = poly_gradient(p, dim, k)  # (dim, M_{k-1})
    z = np.linalg.solve(point.metric, grad.reshape(dim, -1)).reshape(grad.shape).T
    z = holomorphic_part(np.ascontiguousarray(z), dim, k - 1, point.cplx)
    res = closure_poly(z, dim, k - 1, point.metric) - p
    scale = max(1.0, float(np.max(np.abs(p), initial=0.0)))
    err = float(np.max(np.abs(res), initial=0.0)) / scale
    if err > tol:
        raise ClosureResidualError(f"polynomial is not a closure of a holomorphic field (residual {err:.3e})")
    return z


def closure_inverse(p: SymTensor, point: KahlerPoint, tol=1e-10) -> SymTensor:
    z = closure_inverse_poly(p.poly, p.dim, p.degree, point, tol)
    return SymTensor.from_poly(p.dim, p.degree - 1, "vector", z)


# ---------------------------------------------------------------------------
# special alternating forms and boundary operators (full arrays for form slots)


def _alternating_basis(dim: int, d: int) -> np.ndarray:
    """Orthonormal basis (columns) of alternating d-forms with vector values, as full arrays."""
    cols = []
    for tup in itertools.combinations(range(dim), d):
        for v in range(dim):
            arr = np.zeros((dim,) * d + (dim,))
            for perm in itertools.permutations(range(d)):
                sign = _perm_sign(perm)
                arr[tuple(tup[i] for i in perm) + (v,)] = sign
            cols.append(arr.ravel() / math.sqrt(math.factorial(d)))
    if not cols:
        return np.zeros(((dim ** d) * dim, 0))
    return np.array(cols).T


def _perm_sign(perm) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def _form_L(arr, cplx, d):
    """(Der_I (x) I) on a full alternating-form array with vector value."""
    out = np.zeros_like(arr)
    for slot in range(d):
        moved = np.moveaxis(arr, slot, -1) @ cplx  # F(.., I e_j, ..)
        out = out + np.moveaxis(moved, -1, slot)
    return out @ cplx.T


class SigmaSpace:
    """Special alternating d-forms: (Der_I (x) I) F = d F inside Lambda^d T* (x) T."""

    def __init__(self, point, d: int):
        cplx = _cplx(point)
        dim = cplx.shape[0]
        self.dim, self.d, self.cplx = dim, d, cplx
        alt = _alternating_basis(dim, d)
        if alt.shape[1] == 0:
            self.basis = alt
            return
        shape = (dim,) * d + (dim,)
        img = np.array([_form_L(c.reshape(shape), cplx, d).ravel() for c in alt.T]).T
        ns = sla.null_space(alt.T @ img - d * np.eye(alt.shape[1]), rcond=1e-10)
        self.basis = alt @ ns

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def form_shape(self):
        return (self.dim,) * self.d + (self.dim,)

    def project(self, arr):
        """Orthogonal projection of a full array onto the span (coordinates)."""
        return self.basis.T @ arr.reshape(-1)

    def check_anti_invariance(self) -> float:
        """max |I F(X1,..) + F(IX1,..)| over basis elements."""
        worst = 0.0
        for c in self.basis.T:
            arr = c.reshape(self.form_shape)
            lhs = arr @ self.cplx.T
            rhs = np.moveaxis(np.moveaxis(arr, 0, -1) @ self.cplx, -1, 0) if self.d else arr
            worst = max(worst, float(np.max(np.abs(lhs + rhs))) if self.d else 0.0)
        return worst


@lru_cache(maxsize=None)
def _sigma_cached(cplx_bytes: bytes, dim: int, d: int) -> SigmaSpace:
    cplx = np.frombuffer(cplx_bytes).reshape(dim, dim)
    return SigmaSpace(cplx, d)


def sigma_space(point, d: int) -> SigmaSpace:
    cplx = _cplx(point)
    return _sigma_cached(_key(cplx), cplx.shape[0], d)


def pr_sigma1(F, point):
    """Projection of an endomorphism onto the I-anticommuting part, (F + I F I)/2."""
    cplx = _cplx(point)
    F = np.asarray(F, dtype=float)
    return 0.5 * (F + cplx @ F @ cplx)


class FormSpace:
    """Sym^k T* (x) Sigma^d with coordinates (monomial index, Sigma basis index)."""

    def __init__(self, point, k: int, d: int):
        self.cplx = _cplx(point)
        self.dim = self.cplx.shape[0]
        self.k, self.d = k, d
        self.sigma = sigma_space(self.cplx, d)
        self.size = n_monomials(self.dim, k) * self.sigma.rank if k >= 0 else 0

    def to_full(self, coords):
        """(M_k, r) coordinates -> (M_k,) + form array."""
        c = np.asarray(coords).reshape(n_monomials(self.dim, self.k), self.sigma.rank)
        return (c @ self.sigma.basis.T).reshape((c.shape[0],) + self.sigma.form_shape)

    def from_full(self, arr, check=True, tol=1e-10):
        m = arr.shape[0]
        flat = arr.reshape(m, -1)
        coords = flat @ self.sigma.basis
        if check:
            back = coords @ self.sigma.basis.T
            err = float(np.max(np.abs(back - flat), initial=0.0))
            if err > tol * max(1.0, float(np.max(np.abs(flat), initial=0.0))):
                raise ValueError(f"form does not lie in Sigma^{self.d} (residual {err:.2e})")
        return coords


def boundary_L_full(arr, dim, k, d, cplx):
    """L on full arrays: Sym^k (x) Lambda^d (x) T -> Sym^(k-1) (x) Lambda^(d+1) (x) T."""
    if k == 0:
        return np.zeros((n_monomials(dim, 0),) + (dim,) * (d + 1) + (dim,))
    grad = poly_gradient(arr, dim, k)  # (dim_slot, M_{k-1}, forms..., value)
    grad = np.moveaxis(grad, 0, 1)  # (M_{k-1}, slot, forms..., value)
    twisted = np.tensordot(grad, cplx, axes=([1], [0]))  # sum_j G_j I_{j i}
    twisted = np.moveaxis(twisted, -1, 1) @ cplx.T
    H = grad + twisted
    out = np.zeros_like(H)
    for mu in range(d + 1):
        out = out + (-1) ** mu * np.moveaxis(H, 1, 1 + mu)
    return 0.5 * out


def boundary_Lstar_full(arr, dim, k, d):
    """L* on full arrays: insert the point X into the first form slot."""
    if d == 0:
        return np.zeros((n_monomials(dim, k + 1),) + (dim,))
    up = raise_table(dim, k)  # (M_k, dim)
    out = np.zeros((n_monomials(dim, k + 1),) + arr.shape[2:])
    for i in range(dim):
        np.add.at(out, up[:, i], arr[:, i])
    return out


def boundary_L(point, k: int, d: int) -> np.ndarray:
    """Matrix of L: Sym^k (x) Sigma^d -> Sym^(k-1) (x) Sigma^(d+1) in FormSpace coordinates."""
    src = FormSpace(point, k, d)
    dst = FormSpace(point, k - 1, d + 1) if k >= 1 else None
    if dst is None or dst.size == 0 or src.size == 0:
        return np.zeros((0 if dst is None else dst.size, src.size))
    cols = []
    for j in range(src.size):
        e = np.zeros(src.size)
        e[j] = 1.0
        full = boundary_L_full(src.to_full(e), src.dim, k, d, src.cplx)
        cols.append(dst.from_full(full).ravel())
    return np.array(cols).T


def boundary_Lstar(point, k: int, d: int) -> np.ndarray:
    """Matrix of L*: Sym^k (x) Sigma^d -> Sym^(k+1) (x) Sigma^(d-1)."""
    src = FormSpace(point, k, d)
    if d == 0:
        return np.zeros((0, src.size))
    dst = FormSpace(point, k + 1, d - 1)
    if src.size == 0:
        return np.zeros((dst.size, 0))
    cols = []
    for j in range(src.size):
        e = np.zeros(src.size)
        e[j] = 1.0
        full = boundary_Lstar_full(src.to_full(e), src.dim, k, d)
        cols.append(dst.from_full(full).ravel())
    return np.array(cols).T


def laplacian(point, k: int, d: int) -> np.ndarray:
    """Delta = L L* + L* L on Sym^k (x) Sigma^d, assembled as a matrix."""
    size = FormSpace(point, k, d).size
    out = np.zeros((size, size))
    if d >= 1:
        out += boundary_L(point, k + 1, d - 1) @ boundary_Lstar(point, k, d)
    if k >= 1:
        out += boundary_Lstar(point, k - 1, d + 1) @ boundary_L(point, k, d)
    return out


def laplacian_formula(point, k: int, d: int) -> np.ndarray:
    """d + (k + Der_I (x) id (x) I)/2 on Sym^k (x) Sigma^d."""
    space = FormSpace(point, k, d)
    cplx, dim = space.cplx, space.dim
    cols = []
    for j in range(space.size):
        e = np.zeros(space.size)
        e[j] = 1.0
        full = space.to_full(e)
        lterm = der_I_poly(full, dim, k, cplx) @ cplx.T
        val = d * full + 0.5 * (k * full + lterm)
        cols.append(space.from_full(val).ravel())
    return np.array(cols).T if cols else np.zeros((0, 0))


def _rank(mat, tol=1e-9) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def resolution_check(n: int, k_max: int) -> list[dict]:
    """Exactness of H -> Sym (x) Sigma^0 -> Sym (x) Sigma^1 -> ... -> Sym (x) Sigma^n.

    Returns one record per (degree, position) with the compared dimensions.
    """
    if n > 2 or k_max > 4:
        raise ValueError("resolution check is limited to n <= 2, k <= 4")
    point = KahlerPoint.standard(n)
    records = []
    for k in range(k_max + 1):
        maps = {}
        for j in range(0, min(n, k) + 1):
            maps[j] = boundary_L(point, k - j, j)
        dims = {j: FormSpace(point, k - j, j).size for j in maps}
        ranks = {j: _rank(m) for j, m in maps.items()}
        kernel0 = dims[0] - ranks[0]
        expect = 2 * n * math.comb(n + k - 1, k)
        records.append({"degree": k, "position": 0, "kernel": kernel0, "expected": expect, "ok": kernel0 == expect})
        for j in range(1, min(n, k) + 1):
            ker = dims[j] - ranks[j]
            records.append(
                {"degree": k, "position": j, "kernel": ker, "expected": ranks[j - 1], "ok": ker == ranks[j - 1]}
            )
        # L o L = 0 along the complex
        for j in range(0, min(n, k)):
            if j + 1 in maps and maps[j + 1].size and maps[j].size:
                sq = float(np.max(np.abs(maps[j + 1] @ maps[j]), initial=0.0))
            else:
                sq = 0.0
            records.append({"degree": k, "position": j, "L_squared": sq, "ok": sq < 1e-10})
    return records


# ---------------------------------------------------------------------------
# slot composition of general multilinear maps (full arrays)


def weight_full(A, cplx):
    """delta on a full multilinear map A[x1..xk, value]."""
    cplx = _cplx(cplx)
    k = A.ndim - 1
    out = A @ cplx.T
    for slot in range(k):
        out = out - np.moveaxis(np.moveaxis(A, slot, -1) @ cplx, -1, slot)
    return out


def compose_slot(A, B, mu):
    """(A o_mu B)(X1..) = A(X1, .., B(X_mu..X_{mu+b}), ..) with mu counted from 0."""
    a = A.ndim - 1
    b = B.ndim - 1
    moved = np.moveaxis(A, mu, -1)  # (.., value_A, slot_mu)
    out = np.tensordot(moved, B, axes=([-1], [-1]))  # (A slots w/o mu, value_A, B slots)
    # reorder: A slots before mu, B slots, A slots after mu, value
    n_before = mu
    n_after = a - 1 - mu
    axes = (
        list(range(n_before))
        + list(range(a, a + b))
        + list(range(n_before, n_before + n_after))
        + [a - 1]
    )
    return np.transpose(out, axes)

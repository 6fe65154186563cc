"""Symmetric multilinear tensors stored on multisets of basis indices.

A symmetric k-linear map t is stored through its components t_alpha on the
C(dim+k-1, k) non-decreasing index tuples.  Internally most arithmetic runs on
the associated homogeneous polynomial p(X) = t(X, ..., X) / k!, whose
monomial coefficients are p_alpha = t_alpha / alpha!.  With this convention
inserting a vector into the first slot is the directional derivative of p.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

KINDS = ("scalar", "vector", "endo")

def value_shape(kind: str, dim: int) -> tuple:
    if kind == "scalar":
        return ()
    if kind == "vector":
        return (dim,)
    if kind == "endo":
        return (dim, dim)
    raise ValueError(f"unknown value kind {kind!r}")


def kind_of_shape(shape: tuple, dim: int) -> str:
    for kind in KINDS:
        if tuple(shape) == value_shape(kind, dim):
            return kind
    raise ValueError(f"value shape {shape} does not fit dimension {dim}")


class KahlerPoint:
    """Pointwise data of the tangent model space: metric g and complex structure I.

    ``cplx`` may be ``None`` for purely affine models (flat connections with
    torsion on Lie groups), in which case the dimension need not be even.
    """

    def __init__(self, metric, cplx=None, tol: float = 1e-12):
        metric = np.array(metric, dtype=float)
        if metric.ndim != 2 or metric.shape[0] != metric.shape[1]:
            raise ValueError("metric must be a square matrix")
        dim = metric.shape[0]
        if dim == 0:
            raise ValueError("dimension must be positive")
        if np.max(np.abs(metric - metric.T)) > tol:
            raise ValueError("metric is not symmetric")
        if np.linalg.eigvalsh(metric).min() <= 0:
            raise ValueError("metric is not positive definite")
        if cplx is not None:
            cplx = np.array(cplx, dtype=float)
            if cplx.shape != metric.shape:
                raise ValueError("complex structure has wrong shape")
            if dim % 2:
                raise ValueError("a complex structure needs even dimension")
            if np.max(np.abs(cplx @ cplx + np.eye(dim))) > tol:
                raise ValueError("I*I != -id")
            if np.max(np.abs(cplx.T @ metric @ cplx - metric)) > tol:
                raise ValueError("complex structure is not g-orthogonal")
            cplx.setflags(write=False)
        metric.setflags(write=False)
        self.dim = dim
        self.metric = metric
        self.cplx = cplx

    @classmethod
    def standard(cls, n: int) -> "KahlerPoint":
        """C^n with coordinates (x1, y1, x2, y2, ...) and I = multiplication by i."""
        cplx = np.kron(np.eye(n), np.array([[0.0, -1.0], [1.0, 0.0]]))
        return cls(np.eye(2 * n), cplx)

    @property
    def is_kahler(self) -> bool:
        return self.cplx is not None

    @property
    def omega(self) -> np.ndarray:
        """Kaehler form omega(X, Y) = g(IX, Y) as a matrix."""
        if self.cplx is None:
            raise ValueError("affine point has no complex structure")
        return self.cplx.T @ self.metric

    def inner(self, a, b):
        return np.einsum("...i,ij,...j->...", a, self.metric, b)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "metric": self.metric.tolist(),
            "cplx": None if self.cplx is None else self.cplx.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KahlerPoint":
        pt = cls(d["metric"], d.get("cplx"))
        if "dim" in d and int(d["dim"]) != pt.dim:
            raise ValueError("declared dim disagrees with metric")
        return pt


# ---------------------------------------------------------------------------
# monomial tables


class MonomialBasis:
    """Multisets of size k over range(dim), in lexicographic order."""

    def __init__(self, dim: int, k: int):
        self.dim = dim
        self.k = k
        tuples = list(itertools.combinations_with_replacement(range(dim), k))
        idx = np.array(tuples, dtype=np.int64).reshape(len(tuples), k)
        self.idx = idx
        self.size = idx.shape[0]
        exps = np.zeros((self.size, dim), dtype=np.int64)
        for col in range(k):
            np.add.at(exps, (np.arange(self.size), idx[:, col]), 1)
        self.exps = exps
        factorials = np.array([math.factorial(j) for j in range(k + 1)], dtype=float)
        self.fact = np.prod(factorials[exps], axis=1)
        self._radix = (k + 1) ** np.arange(dim, dtype=np.int64)
        keys = exps @ self._radix
        self._order = np.argsort(keys)
        self._sorted_keys = keys[self._order]

    def lookup(self, exps) -> np.ndarray:
        """Row indices of the given exponent vectors (all must have total degree k)."""
        keys = np.asarray(exps, dtype=np.int64) @ self._radix
        pos = np.searchsorted(self._sorted_keys, keys)
        return self._order[pos]


@lru_cache(maxsize=None)
def basis(dim: int, k: int) -> MonomialBasis:
    return MonomialBasis(dim, k)


def n_monomials(dim: int, k: int) -> int:
    return math.comb(dim + k - 1, k)


@lru_cache(maxsize=None)
def raise_table(dim: int, k: int) -> np.ndarray:
    """(M_k, dim) table: index in degree k+1 of alpha + e_i."""
    b = basis(dim, k)
    up = basis(dim, k + 1)
    out = np.empty((b.size, dim), dtype=np.int64)
    for i in range(dim):
        e = b.exps.copy()
        e[:, i] += 1
        out[:, i] = up.lookup(e)
    return out


@lru_cache(maxsize=None)
def fold_matrix(dim: int, k: int) -> sp.csr_matrix:
    """Sparse (M_{k+1}, M_k*dim) summation matrix for absorbing one more slot."""
    r = raise_table(dim, k)
    m = basis(dim, k).size
    rows = r.ravel()
    cols = np.arange(m * dim)
    return sp.csr_matrix(
        (np.ones(m * dim), (rows, cols)), shape=(basis(dim, k + 1).size, m * dim)
    )


@lru_cache(maxsize=None)
def pair_table(dim: int, a: int, b: int):
    """Index pairs (ia, ib) over degrees a, b and the scatter matrix onto degree a+b."""
    ba, bb = basis(dim, a), basis(dim, b)
    ia = np.repeat(np.arange(ba.size), bb.size)
    ib = np.tile(np.arange(bb.size), ba.size)
    ic = basis(dim, a + b).lookup(ba.exps[ia] + bb.exps[ib])
    scatter = sp.csr_matrix(
        (np.ones(ia.size), (ic, np.arange(ia.size))),
        shape=(basis(dim, a + b).size, ia.size),
    )
    return ia, ib, scatter


# ---------------------------------------------------------------------------
# polynomial primitives on coefficient arrays of shape (M_k,) + value_shape


def poly_deriv(p: np.ndarray, dim: int, k: int, i: int) -> np.ndarray:
    """Partial derivative d/dx_i of a degree-k polynomial."""
    if k == 0:
        raise ValueError("cannot differentiate a constant")
    lower = basis(dim, k - 1)
    up = raise_table(dim, k - 1)[:, i]
    mult = (lower.exps[:, i] + 1).astype(float)
    return mult.reshape((-1,) + (1,) * (p.ndim - 1)) * p[up]


def poly_gradient(p: np.ndarray, dim: int, k: int) -> np.ndarray:
    """All partial derivatives, shape (dim, M_{k-1}, ...)."""
    lower = basis(dim, k - 1)
    up = raise_table(dim, k - 1)
    mult = (lower.exps + 1).astype(float)  # (M_{k-1}, dim)
    out = p[up.T]  # (dim, M_{k-1}, ...)
    return mult.T.reshape(mult.T.shape + (1,) * (p.ndim - 1)) * out


def poly_directional(p: np.ndarray, dim: int, k: int, z) -> np.ndarray:
    """Directional derivative D_z p, a polynomial of degree k-1."""
    if k == 0:
        raise ValueError("cannot differentiate a constant")
    grad = poly_gradient(p, dim, k)
    return np.tensordot(np.asarray(z, dtype=float), grad, axes=(0, 0))


def monomial_values(dim: int, k: int, X) -> np.ndarray:
    """Values of all degree-k monomials at points X (shape (P, dim)) -> (P, M_k)."""
    X = np.atleast_2d(np.asarray(X))
    idx = basis(dim, k).idx
    if k == 0:
        return np.ones((X.shape[0], 1), dtype=X.dtype)
    return np.prod(X[:, idx], axis=2)


def poly_eval(p: np.ndarray, dim: int, k: int, X) -> np.ndarray:
    """Evaluate a polynomial at one point (dim,) or many points (P, dim)."""
    X = np.asarray(X)
    single = X.ndim == 1
    vals = monomial_values(dim, k, X)
    out = np.tensordot(vals, p, axes=(1, 0))
    return out[0] if single else out


def poly_from_raw(raw: np.ndarray, dim: int, k: int) -> np.ndarray:
    """Coefficients of X -> raw(X, ..., X) for a full (not necessarily symmetric) tensor.

    ``raw`` has shape (dim,)*k + value_shape with the k polynomial slots leading.
    """
    raw = np.asarray(raw)
    vshape = raw.shape[k:]
    if raw.shape[:k] != (dim,) * k:
        raise ValueError("raw tensor slots do not match dimension")
    q = raw.reshape((1,) + raw.shape)  # (M_0, dim, ..., value)
    for j in range(k):
        m = q.shape[0]
        flat = q.reshape(m * dim, -1)
        q = fold_matrix(dim, j) @ flat
        q = q.reshape((basis(dim, j + 1).size,) + raw.shape[j + 1 :])
    return q.reshape((basis(dim, k).size,) + vshape)


def poly_to_raw(p: np.ndarray, dim: int, k: int) -> np.ndarray:
    """Full symmetric tensor t with t(X..X)/k! = p(X)."""
    b = basis(dim, k)
    vshape = p.shape[1:]
    comp = p * b.fact.reshape((-1,) + (1,) * len(vshape))
    out = np.zeros((dim,) * k + vshape, dtype=p.dtype)
    for row, tup in enumerate(b.idx):
        for perm in set(itertools.permutations(tup)):
            out[perm] = comp[row]
    return out


# ---------------------------------------------------------------------------


class SymTensor:
    """Symmetric k-linear map with scalar, vector or endomorphism values.

    ``coeffs[r]`` is the value t(e_i1, ..., e_ik) on the r-th non-decreasing
    index tuple of ``basis(dim, k)``.
    """

    __slots__ = ("dim", "degree", "kind", "coeffs", "_poly")

    def __init__(self, dim: int, degree: int, kind: str, coeffs):
        coeffs = np.array(coeffs, dtype=float)
        expect = (n_monomials(dim, degree),) + value_shape(kind, dim)
        if coeffs.shape != expect:
            raise ValueError(f"coefficient shape {coeffs.shape} != {expect}")
        coeffs.setflags(write=False)
        self.dim = dim
        self.degree = degree
        self.kind = kind
        self.coeffs = coeffs
        self._poly = None

    @property
    def poly(self) -> np.ndarray:
        """Monomial coefficients of the associated polynomial t(X..X)/k!."""
        if self._poly is None:
            f = basis(self.dim, self.degree).fact
            p = self.coeffs / f.reshape((-1,) + (1,) * (self.coeffs.ndim - 1))
            p.setflags(write=False)
            self._poly = p
        return self._poly

    @classmethod
    def from_poly(cls, dim: int, degree: int, kind: str, poly) -> "SymTensor":
        poly = np.asarray(poly, dtype=float)
        f = basis(dim, degree).fact
        t = cls(dim, degree, kind, poly * f.reshape((-1,) + (1,) * (poly.ndim - 1)))
        return t

    @classmethod
    def zeros(cls, dim: int, degree: int, kind: str) -> "SymTensor":
        return cls(dim, degree, kind, np.zeros((n_monomials(dim, degree),) + value_shape(kind, dim)))

    def __repr__(self):
        return f"SymTensor(dim={self.dim}, degree={self.degree}, kind={self.kind!r})"

    def __add__(self, other: "SymTensor") -> "SymTensor":
        _check_compatible(self, other)
        return SymTensor(self.dim, self.degree, self.kind, self.coeffs + other.coeffs)

    def __sub__(self, other: "SymTensor") -> "SymTensor":
        _check_compatible(self, other)
        return SymTensor(self.dim, self.degree, self.kind, self.coeffs - other.coeffs)

    def __mul__(self, c: float) -> "SymTensor":
        return SymTensor(self.dim, self.degree, self.kind, c * self.coeffs)

    __rmul__ = __mul__

    def allclose(self, other: "SymTensor", atol: float = 1e-12) -> bool:
        _check_compatible(self, other)
        return bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=0))

    def eval_diagonal(self, X):
        """Polynomial value t(X, ..., X)/k!."""
        return poly_eval(self.poly, self.dim, self.degree, X)

    def to_raw(self) -> np.ndarray:
        return poly_to_raw(self.poly, self.dim, self.degree)


def _check_compatible(a: SymTensor, b: SymTensor):
    if (a.dim, a.degree, a.kind) != (b.dim, b.degree, b.kind):
        raise ValueError("incompatible tensors")


def symmetrize(raw, degree: int | None = None, dim: int | None = None) -> SymTensor:
    """Average a full k-argument tensor over all argument permutations.

    The argument slots lead; trailing axes are the value.  When ``degree`` is
    omitted every axis of equal length is taken as an argument slot unless the
    value shape is given implicitly through ``dim``.
    """
    raw = np.asarray(raw, dtype=float)
    if degree is None:
        degree = raw.ndim
    if degree > raw.ndim:
        raise ValueError("degree exceeds tensor rank")
    if dim is None:
        dim = raw.shape[0] if raw.ndim else 1
    if raw.shape[:degree] != (dim,) * degree:
        raise ValueError(f"dimension mismatch: slots {raw.shape[:degree]} vs dim {dim}")
    kind = kind_of_shape(raw.shape[degree:], dim)
    p = poly_from_raw(raw, dim, degree) / math.factorial(degree)
    return SymTensor.from_poly(dim, degree, kind, p)


def insert_slot(t: SymTensor, slot_value) -> SymTensor:
    """t(Z, .) as a tensor of degree k-1; equals the directional derivative of t's polynomial."""
    if t.degree == 0:
        raise ValueError("cannot insert into a degree-0 tensor")
    z = np.asarray(slot_value, dtype=float)
    if z.shape != (t.dim,):
        raise ValueError("slot value has wrong dimension")
    p = poly_directional(t.poly, t.dim, t.degree, z)
    return SymTensor.from_poly(t.dim, t.degree - 1, t.kind, p)


def eval(t: SymTensor, args) -> np.ndarray | float:  # noqa: A001 - mirrors the algebraic name
    """Multilinear evaluation t(X1, ..., Xk)."""
    args = list(args)
    if len(args) != t.degree:
        raise ValueError(f"expected {t.degree} arguments, got {len(args)}")
    p = t.poly
    k = t.degree
    for z in args:
        z = np.asarray(z, dtype=float)
        if z.shape != (t.dim,):
            raise ValueError("argument has wrong dimension")
        p = poly_directional(p, t.dim, k, z)
        k -= 1
    val = p[0]
    return float(val) if t.kind == "scalar" else np.array(val)


def polarize(dim: int, k: int, kind: str, fn, rng=None) -> SymTensor:
    """Recover a SymTensor from its diagonal (polynomial) values fn(X).

    Samples C(dim+k-1, k) random points (plus a small oversampling margin)
    and solves the monomial least-squares problem.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    m = n_monomials(dim, k)
    pts = rng.standard_normal((m + max(4, m // 4), dim))
    vals = np.array([fn(x) for x in pts], dtype=float)
    V = monomial_values(dim, k, pts)
    coef, *_ = np.linalg.lstsq(V, vals.reshape(len(pts), -1), rcond=None)
    return SymTensor.from_poly(dim, k, kind, coef.reshape((m,) + value_shape(kind, dim)))

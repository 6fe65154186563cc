"""Truncated graded power series whose homogeneous terms are symmetric tensors."""

from __future__ import annotations

import json

import numpy as np

from . import graded_ops
from .tensor_core import (
    SymTensor,
    basis,
    n_monomials,
    pair_table,
    poly_eval,
    poly_gradient,
    raise_table,
    value_shape,
)

DEFAULT_TRUNC = 7

_PRODUCT_SPECS = {
    ("endo", "endo"): ("pij,pjk->pik", "endo"),
    ("endo", "vector"): ("pij,pj->pi", "vector"),
    ("scalar", "scalar"): ("p,p->p", "scalar"),
    ("scalar", "vector"): ("p,pi->pi", "vector"),
    ("scalar", "endo"): ("p,pij->pij", "endo"),
    ("vector", "scalar"): ("pi,p->pi", "vector"),
    ("endo", "scalar"): ("pij,p->pij", "endo"),
}


def _pair_product(pa, a, pb, b, dim, spec):
    """Product of a degree-a and a degree-b polynomial with value contraction ``spec``."""
    ia, ib, scatter = pair_table(dim, a, b)
    prod = np.einsum(spec, pa[ia], pb[ib])
    flat = prod.reshape(prod.shape[0], -1)
    return (scatter @ flat).reshape((scatter.shape[0],) + prod.shape[1:])


class Series:
    """Graded truncated series sum_k terms[k] with terms[k] homogeneous of degree k.

    Coefficients are held as polynomial coefficient arrays ``polys[k]`` of
    shape (M_k,) + value_shape; ``terms`` exposes them as SymTensors.
    """

    def __init__(self, dim: int, kind: str, trunc: int, polys=None):
        self.dim = dim
        self.kind = kind
        self.trunc = trunc
        vshape = value_shape(kind, dim)
        out = []
        for k in range(trunc + 1):
            p = None if polys is None or k >= len(polys) else polys[k]
            if p is None:
                p = np.zeros((n_monomials(dim, k),) + vshape)
            else:
                p = np.asarray(p, dtype=float)
                if p.shape != (n_monomials(dim, k),) + vshape:
                    raise ValueError(f"degree {k} coefficients have shape {p.shape}")
            out.append(p)
        self.polys = out

    # -- construction -----------------------------------------------------
    @classmethod
    def zeros(cls, dim, kind, trunc):
        return cls(dim, kind, trunc)

    @classmethod
    def identity_endo(cls, dim, trunc):
        return cls(dim, "endo", trunc, [np.eye(dim)[None]])

    @classmethod
    def identity_vector(cls, dim, trunc):
        """The anchored series X -> X."""
        return cls(dim, "vector", trunc, [None, np.eye(dim)])

    @classmethod
    def constant(cls, value, trunc):
        value = np.asarray(value, dtype=float)
        dim = value.shape[0]
        kind = "vector" if value.ndim == 1 else "endo"
        return cls(dim, kind, trunc, [value[None]])

    @classmethod
    def from_terms(cls, terms, trunc=None):
        terms = [t for t in terms if t is not None]
        if not terms:
            raise ValueError("need at least one term")
        dim, kind = terms[0].dim, terms[0].kind
        trunc = max(t.degree for t in terms) if trunc is None else trunc
        polys = [None] * (trunc + 1)
        for t in terms:
            if t.kind != kind or t.dim != dim:
                raise ValueError("kind mismatch")
            if t.degree <= trunc:
                polys[t.degree] = t.poly if polys[t.degree] is None else polys[t.degree] + t.poly
        return cls(dim, kind, trunc, polys)

    @property
    def terms(self):
        return [SymTensor.from_poly(self.dim, k, self.kind, p) for k, p in enumerate(self.polys)]

    def term(self, k: int) -> SymTensor:
        return SymTensor.from_poly(self.dim, k, self.kind, self.polys[k])

    def __repr__(self):
        return f"Series(dim={self.dim}, kind={self.kind!r}, trunc={self.trunc})"

    # -- linear structure -------------------------------------------------
    def _check(self, other):
        if (self.dim, self.kind) != (other.dim, other.kind):
            raise ValueError(f"kind mismatch: {self.kind} vs {other.kind}")

    def __add__(self, other: "Series") -> "Series":
        self._check(other)
        t = min(self.trunc, other.trunc)
        return Series(self.dim, self.kind, t, [self.polys[k] + other.polys[k] for k in range(t + 1)])

    def __sub__(self, other: "Series") -> "Series":
        return self + other.scale(-1.0)

    def __neg__(self):
        return self.scale(-1.0)

    def scale(self, c: float) -> "Series":
        return Series(self.dim, self.kind, self.trunc, [c * p for p in self.polys])

    __mul__ = scale
    __rmul__ = scale

    def truncate(self, trunc: int) -> "Series":
        return Series(self.dim, self.kind, trunc, self.polys[: trunc + 1])

    def degreewise(self, fn) -> "Series":
        """Apply fn(k, poly) to every homogeneous term."""
        return Series(self.dim, self.kind, self.trunc, [fn(k, p) for k, p in enumerate(self.polys)])

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(p), initial=0.0)) for p in self.polys)

    def max_abs_diff(self, other: "Series") -> float:
        self._check(other)
        t = min(self.trunc, other.trunc)
        return max(float(np.max(np.abs(self.polys[k] - other.polys[k]), initial=0.0)) for k in range(t + 1))

    def is_anchored(self, tol: float = 1e-12) -> bool:
        if self.kind != "vector" or self.trunc < 1:
            return False
        return bool(
            np.max(np.abs(self.polys[0])) <= tol
            and np.max(np.abs(self.polys[1] - np.eye(self.dim))) <= tol
        )

    # -- evaluation -------------------------------------------------------
    def eval(self, X, degrees=None):
        """Diagonal value sum_k terms[k](X)."""
        X = np.asarray(X, dtype=float)
        degrees = range(self.trunc + 1) if degrees is None else degrees
        return sum(poly_eval(self.polys[k], self.dim, k, X) for k in degrees)

    def eval_terms(self, X):
        """Per-degree diagonal values."""
        return [poly_eval(p, self.dim, k, np.asarray(X, dtype=float)) for k, p in enumerate(self.polys)]

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        terms = []
        for k, t in enumerate(self.terms):
            if not np.any(t.coeffs):
                continue
            terms.append(
                {
                    "degree": k,
                    "multisets": basis(self.dim, k).idx.tolist(),
                    "coeffs": t.coeffs.tolist(),
                }
            )
        return {"kind": self.kind, "trunc": self.trunc, "dim": self.dim, "terms": terms}

    @classmethod
    def from_dict(cls, d: dict) -> "Series":
        dim, kind, trunc = int(d["dim"]), d["kind"], int(d["trunc"])
        polys = [None] * (trunc + 1)
        for entry in d["terms"]:
            k = int(entry["degree"])
            t = SymTensor(dim, k, kind, entry["coeffs"])
            polys[k] = t.poly
        return cls(dim, kind, trunc, polys)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def add(a: Series, b: Series) -> Series:
    return a + b


def scale(s: Series, c: float) -> Series:
    return s.scale(c)


def truncate(s: Series, trunc: int) -> Series:
    return s.truncate(trunc)


def product_degree(a: Series, b: Series, m: int, spec: str, lo_a: int = 0, lo_b: int = 0):
    """Degree-m part of a product, summing a_i * b_{m-i}."""
    vshape = None
    out = None
    for i in range(max(lo_a, m - b.trunc), min(m - lo_b, a.trunc) + 1):
        j = m - i
        pa, pb = a.polys[i], b.polys[j]
        if not (np.any(pa) and np.any(pb)):
            continue
        term = _pair_product(pa, i, pb, j, a.dim, spec)
        out = term if out is None else out + term
    return out


def mul(a: Series, b: Series, trunc: int | None = None) -> Series:
    """Pointwise product: composition of endomorphisms, endo applied to vector, scalar scaling."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    try:
        spec, kind = _PRODUCT_SPECS[(a.kind, b.kind)]
    except KeyError:
        raise ValueError(f"cannot multiply {a.kind} by {b.kind}") from None
    trunc = min(a.trunc, b.trunc) if trunc is None else trunc
    polys = [product_degree(a, b, m, spec) for m in range(trunc + 1)]
    return Series(a.dim, kind, trunc, polys)


def inner(a: Series, b: Series, metric, trunc: int | None = None) -> Series:
    """Scalar series g(a(X), b(X)) of two vector series."""
    if a.kind != "vector" or b.kind != "vector":
        raise ValueError("inner product needs vector series")
    ga = Series(a.dim, "vector", a.trunc, [p @ np.asarray(metric).T for p in a.polys])
    trunc = min(a.trunc, b.trunc) if trunc is None else trunc
    polys = [product_degree(ga, b, m, "pi,pi->p") for m in range(trunc + 1)]
    return Series(a.dim, "scalar", trunc, polys)


def apply_constant(mat, s: Series) -> Series:
    """Apply a constant matrix to the values of a vector or endo series."""
    mat = np.asarray(mat)
    if s.kind == "vector":
        return s.degreewise(lambda k, p: p @ mat.T)
    if s.kind == "endo":
        return s.degreewise(lambda k, p: np.einsum("ij,mjk->mik", mat, p))
    raise ValueError("scalar series has no value to act on")


# ---------------------------------------------------------------------------
# composition


def _batched_gradient_select(p, dim, k, batch_idx, var_idx):
    """Rows: d/dx_{var_idx[g]} of p[batch_idx[g]], p of shape (B, M_k, ...)."""
    lower = basis(dim, k - 1)
    up = raise_table(dim, k - 1)  # (M_{k-1}, dim)
    mult = (lower.exps + 1).astype(float)
    sel_up = up[:, var_idx].T  # (G, M_{k-1})
    sel_mult = mult[:, var_idx].T
    vals = p[batch_idx[:, None], sel_up]
    return sel_mult.reshape(sel_mult.shape + (1,) * (p.ndim - 2)) * vals


def _batched_scalar_product(A, a, B, b, dim):
    """Elementwise-in-batch product of scalar polynomials (G, M_a) * (G, M_b)."""
    ia, ib, scatter = pair_table(dim, a, b)
    prod = A[:, ia] * B[:, ib]
    return (scatter @ prod.T).T


def compose(outer: Series, inner_s: Series, trunc: int | None = None) -> Series:
    """outer(inner(X)) for an anchored vector series ``inner``.

    Writes inner = X + h with h = O(X^2) and sums the Taylor expansion
    sum_beta (1/beta!) d^beta outer(X) h(X)^beta over multi-indices beta.
    """
    if not inner_s.is_anchored(tol=1e-10):
        raise ValueError("inner series must be anchored (X + O(X^2))")
    if outer.dim != inner_s.dim:
        raise ValueError("dimension mismatch")
    dim = outer.dim
    trunc = min(outer.trunc, inner_s.trunc) if trunc is None else trunc
    vshape = value_shape(outer.kind, dim)
    h = [None, None] + [inner_s.polys[d] for d in range(2, trunc + 1)]

    result = [outer.polys[k].copy() for k in range(trunc + 1)]
    # level 0 data: derivatives D[k] (1, M_k, ...) and powers H[d] (1, M_d)
    D = {k: outer.polys[k][None] for k in range(trunc + 1)}
    H = {0: np.ones((1, 1))}
    jmax = trunc // 2
    for j in range(1, jmax + 1):
        level = basis(dim, j)
        first = level.idx[:, 0]
        rest_exps = level.exps.copy()
        rest_exps[np.arange(level.size), first] -= 1
        parent = basis(dim, j - 1).lookup(rest_exps)
        # derivatives: d/dx_first applied to parent's derivative
        newD = {}
        for k, arr in D.items():
            if k - j + 1 < 1:
                continue
            deg = k - j + 1  # degree of the parent's derivative polynomial
            newD[k] = _batched_gradient_select(arr, dim, deg, parent, first)
        D = newD
        # powers h^beta, scalar series per multiset, degrees >= 2j
        newH = {}
        for d_par, arr in H.items():
            for d_h in range(2, trunc + 1):
                d = d_par + d_h
                if d > trunc:
                    break
                hv = h[d_h][:, first].T  # (G, M_{d_h})
                if not np.any(hv):
                    continue
                prod = _batched_scalar_product(arr[parent], d_par, hv, d_h, dim)
                newH[d] = prod if d not in newH else newH[d] + prod
        H = newH
        weight = 1.0 / level.fact
        for k, darr in D.items():
            dk = k - j
            for d, harr in H.items():
                m = dk + d
                if m > trunc:
                    continue
                ia, ib, scatter = pair_table(dim, dk, d)
                prod = np.einsum("gp...,gp,g->p...", darr[:, ia], harr[:, ib], weight)
                flat = prod.reshape(prod.shape[0], -1)
                result[m] = result[m] + (scatter @ flat).reshape((scatter.shape[0],) + vshape)
    return Series(dim, outer.kind, trunc, result)


def invert_anchored(s: Series, trunc: int | None = None) -> Series:
    """Compositional inverse r of an anchored vector series: s(r(X)) = X."""
    if not s.is_anchored(tol=1e-10):
        raise ValueError("series must be anchored")
    trunc = s.trunc if trunc is None else trunc
    ident = Series.identity_vector(s.dim, trunc)
    hs = s.truncate(trunc) - ident
    r = ident
    for _ in range(max(trunc - 1, 0)):
        r = ident - compose(hs, r)
    return r


def mul_inverse(s: Series, trunc: int | None = None) -> Series:
    """Multiplicative inverse of an endo (or scalar) series with invertible head."""
    trunc = s.trunc if trunc is None else trunc
    if s.kind == "endo":
        head = s.polys[0][0]
        if abs(np.linalg.det(head)) < 1e-14:
            raise ValueError("degree-0 term is singular")
        hinv = np.linalg.inv(head)
        spec = "pij,pjk->pik"
        out = [hinv[None]]
        for m in range(1, trunc + 1):
            acc = np.zeros_like(s.polys[m])
            for i in range(1, m + 1):
                if not np.any(s.polys[i]) or not np.any(out[m - i]):
                    continue
                acc = acc + _pair_product(s.polys[i], i, out[m - i], m - i, s.dim, spec)
            out.append(-np.einsum("ij,mjk->mik", hinv, acc))
        return Series(s.dim, "endo", trunc, out)
    if s.kind == "scalar":
        head = float(s.polys[0][0])
        if head == 0:
            raise ValueError("degree-0 term is zero")
        out = [np.array([1.0 / head])]
        for m in range(1, trunc + 1):
            acc = np.zeros_like(s.polys[m])
            for i in range(1, m + 1):
                if not np.any(s.polys[i]) or not np.any(out[m - i]):
                    continue
                acc = acc + _pair_product(s.polys[i], i, out[m - i], m - i, s.dim, "p,p->p")
            out.append(-acc / head)
        return Series(s.dim, "scalar", trunc, out)
    raise ValueError("mul_inverse needs an endo or scalar series")


def apply_to_position(G: Series, trunc: int | None = None) -> Series:
    """The vector series X -> G(X) X."""
    return mul(G, Series.identity_vector(G.dim, G.trunc), trunc)


def directional(s: Series, v: Series, trunc: int | None = None) -> Series:
    """X -> Ds(X)[v(X)] for a vector field series v."""
    if v.kind != "vector":
        raise ValueError("direction must be a vector series")
    dim = s.dim
    trunc = min(s.trunc, v.trunc) if trunc is None else trunc
    vshape = value_shape(s.kind, dim)
    out = [np.zeros((n_monomials(dim, m),) + vshape) for m in range(trunc + 1)]
    for k in range(1, s.trunc + 1):
        if not np.any(s.polys[k]):
            continue
        grad = poly_gradient(s.polys[k], dim, k)  # (dim, M_{k-1}, ...)
        for d in range(v.trunc + 1):
            m = k - 1 + d
            if m > trunc:
                break
            if not np.any(v.polys[d]):
                continue
            ia, ib, scatter = pair_table(dim, k - 1, d)
            prod = np.einsum("ip...,pi->p...", grad[:, ia], v.polys[d][ib])
            flat = prod.reshape(prod.shape[0], -1)
            out[m] += (scatter @ flat).reshape((scatter.shape[0],) + vshape)
    return Series(dim, s.kind, trunc, out)


def directional_compose(s: Series, G: Series, trunc: int | None = None) -> Series:
    """X -> Ds(X)[G(X) X]; with G = id this is the number operator."""
    if G.kind != "endo":
        raise ValueError("G must be an endo series")
    return directional(s, apply_to_position(G), trunc)


def jacobian(s: Series) -> Series:
    """Endo series X -> Ds(X) of a vector series."""
    if s.kind != "vector":
        raise ValueError("jacobian needs a vector series")
    dim = s.dim
    polys = []
    for k in range(s.trunc):
        grad = poly_gradient(s.polys[k + 1], dim, k + 1)  # (dim_in, M_k, dim_out)
        polys.append(np.transpose(grad, (1, 2, 0)))
    return Series(dim, "endo", s.trunc - 1, polys)


def restrict(s: Series, indices) -> Series:
    """Restrict the variables (and vector or endo values) to a coordinate subspace."""
    idx = [int(i) for i in indices]
    sub = len(idx)
    polys = []
    for k, p in enumerate(s.polys):
        small = basis(sub, k)
        exps = np.zeros((small.size, s.dim), dtype=np.int64)
        exps[:, idx] = small.exps
        rows = basis(s.dim, k).lookup(exps)
        q = p[rows]
        if s.kind == "vector":
            q = q[:, idx]
        elif s.kind == "endo":
            q = q[:, idx][:, :, idx]
        polys.append(q)
    return Series(sub, s.kind, s.trunc, polys)


def number_op(s: Series, power: int = 1) -> Series:
    return s.degreewise(lambda k, p: (k**power) * p)


def der_I_series(s: Series, cplx) -> Series:
    """Der_I applied degreewise to the polynomial arguments."""
    return s.degreewise(lambda k, p: graded_ops.der_I_poly(p, s.dim, k, cplx))


def bigrade_series(s: Series, cplx, kappa: int, kappabar: int) -> Series:
    """Keep only the real bigraded component (kappa, kappabar) (degree kappa + kappabar)."""
    m = kappa + kappabar

    def fn(k, p):
        if k != m:
            return np.zeros_like(p)
        return graded_ops.bigrade_poly(p, s.dim, k, cplx, kappa, kappabar)

    return s.degreewise(fn)


def project_ge22_series(s: Series, cplx) -> Series:
    return s.degreewise(lambda k, p: graded_ops.ge22_poly(p, s.dim, k, cplx))


def project_bracket1_series(s: Series, cplx) -> Series:
    return s.degreewise(lambda k, p: graded_ops.bracket1_poly(p, s.dim, k, cplx))


def scalar_function_series(coeffs, arg: Series, trunc: int | None = None) -> Series:
    """sum_j coeffs[j] * arg^j for a scalar or endo series ``arg`` without constant term."""
    trunc = arg.trunc if trunc is None else trunc
    if arg.kind == "endo":
        one = Series.identity_endo(arg.dim, trunc)
    else:
        one = Series(arg.dim, "scalar", trunc, [np.ones(1)])
    total = one.scale(coeffs[0])
    power = one
    for c in coeffs[1:]:
        power = mul(power, arg, trunc)
        if power.max_abs() == 0:
            break
        total = total + power.scale(c)
    return total


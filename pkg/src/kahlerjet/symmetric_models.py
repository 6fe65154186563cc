"""Jacobi operators, even matrix functions, doubly even extensions, closed
forms on hermitean symmetric spaces and a zoo of explicit model geometries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla

from . import series as S
from .curvature import CurvatureJet, _slot_I
from .series import Series
from .tensor_core import KahlerPoint, poly_from_raw

# ---------------------------------------------------------------------------
# Jacobi operators


@dataclass(frozen=True)
class JacobiOps:
    """Matrices of A -> R_{X,A}X and A -> R_{IX,A}IX."""

    adsqX: np.ndarray
    adsqIX: np.ndarray


def jacobi(jet: CurvatureJet, X) -> JacobiOps:
    X = np.asarray(X, dtype=float)
    IX = jet.point.cplx @ X
    R = jet.R
    a = np.einsum("abco,a,c->ob", R, X, X)
    b = np.einsum("abco,a,c->ob", R, IX, IX)
    return JacobiOps(a, b)


def adsq_series(jet: CurvatureJet, rotated: bool = False, trunc: int = 7) -> Series:
    """Degree-2 endo series X -> ad^2 X (or ad^2 IX when ``rotated``)."""
    dim = jet.dim
    raw = np.moveaxis(jet.R, 1, -1)  # (a, c, o, b)
    if rotated:
        raw = _slot_I(_slot_I(raw, 0, jet.point.cplx), 1, jet.point.cplx)
    polys = [None, None, poly_from_raw(raw, dim, 2)]
    return Series(dim, "endo", trunc, polys)


# ---------------------------------------------------------------------------
# even functions of a Jacobi operator


def _reciprocal(c: np.ndarray) -> np.ndarray:
    out = np.zeros_like(c)
    out[0] = 1.0 / c[0]
    for j in range(1, len(c)):
        out[j] = -np.dot(c[1 : j + 1], out[j - 1 :: -1][:j]) / c[0]
    return out


def _product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: len(a)]


def even_series(tag: str, n: int) -> np.ndarray:
    """Coefficients c_j with f = sum_j c_j u^j, u standing for the squared argument."""
    j = np.arange(n)
    fact = np.array([math.factorial(2 * i + 1) for i in j], dtype=float)
    sinhc = 1.0 / fact
    cosh = np.array([1.0 / math.factorial(2 * i) for i in j])
    quarter = 0.25**j
    if tag == "sinhc":
        return sinhc
    if tag == "inv_sinhc":
        return _reciprocal(sinhc)
    if tag == "tanhc_half":
        return _product(sinhc, _reciprocal(cosh)) * quarter
    if tag == "artanhc_half":
        return quarter / (2 * j + 1)
    if tag == "log1m_quarter":
        return quarter / (j + 1)
    if tag == "coth":
        return _product(cosh, _reciprocal(sinhc))
    raise ValueError(f"unknown function tag {tag!r}")


def _closed_even(tag: str, u: np.ndarray) -> np.ndarray:
    s = np.sqrt(u.astype(complex))
    with np.errstate(all="ignore"):
        if tag == "sinhc":
            v = np.sinh(s) / s
        elif tag == "inv_sinhc":
            v = s / np.sinh(s)
        elif tag == "tanhc_half":
            v = np.tanh(s / 2) / (s / 2)
        elif tag == "artanhc_half":
            v = np.arctanh(s / 2) / (s / 2)
        elif tag == "log1m_quarter":
            v = np.log(1 - u / 4 + 0j) / (-u / 4)
        elif tag == "coth":
            v = s / np.tanh(s)
        else:
            raise ValueError(f"unknown function tag {tag!r}")
    small = np.abs(u) < 1e-4
    if np.any(small):
        c = even_series(tag, 8)
        v = np.where(small, np.polyval(c[::-1], u), v)
    return v.real


_DOMAIN_LIMITED = ("artanhc_half", "log1m_quarter")


def matfun(A, tag: str, metric=None) -> np.ndarray:
    """f(A) for a g-symmetric matrix A by eigendecomposition."""
    A = np.asarray(A, dtype=float)
    g = np.eye(A.shape[0]) if metric is None else np.asarray(metric, dtype=float)
    gA = g @ A
    if np.max(np.abs(gA - gA.T), initial=0.0) > 1e-9 * max(1.0, np.max(np.abs(gA))):
        raise ValueError("matrix is not g-symmetric")
    w, V = sla.eigh(0.5 * (gA + gA.T), g)
    if tag in _DOMAIN_LIMITED and np.any(w / 4 >= 1):
        raise ValueError(f"spectrum outside the domain of {tag}")
    fw = _closed_even(tag, w)
    return (V * fw) @ V.T @ g


def matfun_taylor(A, tag: str, terms: int = 12) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    c = even_series(tag, terms)
    out = np.zeros_like(A)
    for cj in c[::-1]:
        out = out @ A + cj * np.eye(A.shape[0])
    return out


# ---------------------------------------------------------------------------
# doubly even extension


def f_ext(coeffs, x2, xbar2, trunc: int | None = None) -> np.ndarray:
    """sum_k sum_mu C(2k+1, 2mu) F_{2k} x2^{k-mu} xbar2^mu for F = sum_k coeffs[k] x^{2k}."""
    x2 = np.atleast_2d(np.asarray(x2, dtype=float))
    xbar2 = np.atleast_2d(np.asarray(xbar2, dtype=float))
    if np.max(np.abs(x2 @ xbar2 - xbar2 @ x2), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(x2)) * np.max(np.abs(xbar2))):
        raise ValueError("arguments do not commute")
    coeffs = np.asarray(coeffs, dtype=float)
    kmax = len(coeffs) - 1 if trunc is None else min(trunc, len(coeffs) - 1)
    n = x2.shape[0]
    pa = [np.eye(n)]
    pb = [np.eye(n)]
    for _ in range(kmax):
        pa.append(pa[-1] @ x2)
        pb.append(pb[-1] @ xbar2)
    out = np.zeros((n, n))
    for k in range(kmax + 1):
        if coeffs[k] == 0:
            continue
        for mu in range(k + 1):
            out += math.comb(2 * k + 1, 2 * mu) * coeffs[k] * pa[k - mu] @ pb[mu]
    return out


def dde_check(jet: CurvatureJet, X, A, coeffs, step: float = 1e-4) -> dict:
    """Directional derivative of X -> F(ad IX)X against F^ext(ad X, ad IX)A.

    Returns residuals of the derivative identity (Richardson-extrapolated
    central differences) and of ad^2(F(ad IX)X) = ad^2X F^ext^2.
    """
    X = np.asarray(X, dtype=float)
    A = np.asarray(A, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)

    def field(Y):
        ops = jacobi(jet, Y)
        M = np.zeros_like(ops.adsqIX)
        for c in coeffs[::-1]:
            M = M @ ops.adsqIX + c * np.eye(len(Y))
        return M @ Y

    def cd(h):
        return (field(X + h * A) - field(X - h * A)) / (2 * h)

    deriv = (4 * cd(step / 2) - cd(step)) / 3
    ops = jacobi(jet, X)
    E = f_ext(coeffs, ops.adsqX, ops.adsqIX)
    r1 = float(np.max(np.abs(deriv - E @ A)))
    Y = field(X)
    r2 = float(np.max(np.abs(jacobi(jet, Y).adsqX - ops.adsqX @ E @ E)))
    return {"derivative": r1, "square": r2}


# ---------------------------------------------------------------------------
# closed forms on symmetric jets


def closed_forms(jet: CurvatureJet, X, Z=None) -> dict:
    """Pointwise closed forms for a jet with vanishing nabla R."""
    X = np.asarray(X, dtype=float)
    g = jet.point.metric
    ops = jacobi(jet, X)
    out = {
        "phi_inv": matfun(ops.adsqX, "sinhc", g),
        "phi": matfun(ops.adsqX, "inv_sinhc", g),
        "k": matfun(ops.adsqIX, "artanhc_half", g) @ X,
        "k_inv": matfun(ops.adsqIX, "tanhc_half", g) @ X,
        "theta": float(X @ g @ matfun(ops.adsqIX, "log1m_quarter", g) @ X),
        "theta_exp": matfun(ops.adsqX, "coth", g),
        "psi_inv_diag": np.linalg.solve(np.eye(len(X)) - 0.25 * ops.adsqIX, X),
    }
    if Z is not None:
        Z = np.asarray(Z, dtype=float)
        IX = jet.point.cplx @ X
        out["z_knc"] = Z - 0.25 * (jet.Rv(Z, X, X) - jet.Rv(Z, IX, IX))
    return out


def closed_form_series(jet: CurvatureJet, trunc: int = 7) -> dict:
    """Termwise series of the symmetric closed forms built from ad^2X and ad^2IX."""
    n = trunc // 2 + 1
    aX = adsq_series(jet, False, trunc)
    aIX = adsq_series(jet, True, trunc)
    ident = Series.identity_vector(jet.dim, trunc)

    def fn(tag, arg):
        return S.scalar_function_series(even_series(tag, n), arg, trunc)

    k_inv = S.mul(fn("tanhc_half", aIX), ident)
    k = S.mul(fn("artanhc_half", aIX), ident)
    theta = S.inner(ident, S.mul(fn("log1m_quarter", aIX), ident), jet.point.metric)
    return {
        "phi_inv": fn("sinhc", aX),
        "phi": fn("inv_sinhc", aX),
        "theta_exp": fn("coth", aX),
        "k_inv": k_inv,
        "k": k,
        "potential": theta,
    }


def lie_phi_inv_closed(T0: np.ndarray, X) -> np.ndarray:
    """(e^{-ad X} - id)/(-ad X) for the bracket [a, b] = -T0(a, b)."""
    X = np.asarray(X, dtype=float)
    adX = -np.einsum("abo,a->ob", T0, X)
    n = len(X)
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -adX
    block[:n, n:] = np.eye(n)
    return sla.expm(block)[:n, n:]


def lie_phi_inv_series(T0: np.ndarray, trunc: int = 7) -> Series:
    """Termwise series sum_j (-ad X)^j/(j+1)!."""
    dim = T0.shape[0]
    raw = np.transpose(-T0, (0, 2, 1))  # (a, o, b): (ad X)_{ob} = [X, e_b]_o
    negad = Series(dim, "endo", trunc, [None, poly_from_raw(-raw, dim, 1)])
    coeffs = [1.0 / math.factorial(j + 1) for j in range(trunc + 1)]
    return S.scalar_function_series(coeffs, negad, trunc)


# ---------------------------------------------------------------------------
# model zoo


def _complex_structure_pairs(n: int, sign: float = 1.0) -> np.ndarray:
    return np.kron(np.eye(n), np.array([[0.0, -sign], [sign, 0.0]]))


def _jet_from_bracket(point: KahlerPoint, curv: Callable, order: int) -> CurvatureJet:
    dim = point.dim
    E = np.eye(dim)
    R = np.zeros((dim,) * 4)
    for a in range(dim):
        for b in range(a + 1, dim):
            for c in range(dim):
                v = curv(E[a], E[b], E[c])
                R[a, b, c] = v
                R[b, a, c] = -v
    terms = [R] + [np.zeros((dim,) * (k + 4)) for k in range(1, order + 1)]
    return CurvatureJet(point, terms)


def _line_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Distance between complex lines spanned by u and v (phase aligned)."""
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    ip = np.vdot(v, u)
    if abs(ip) == 0:
        return float(np.sqrt(2.0))
    return float(np.linalg.norm(u - (ip / abs(ip)) * v))


def _subspace_distance(P: np.ndarray, Q: np.ndarray) -> float:
    """Frobenius distance of orthogonal projectors onto the column spans."""
    qp, _ = np.linalg.qr(P)
    qq, _ = np.linalg.qr(Q)
    return float(np.linalg.norm(qp @ qp.conj().T - qq @ qq.conj().T))


@dataclass
class Model:
    """Closed-form geometry exposing a jet and independent oracle maps.

    Tangent vectors are real coordinate vectors of length ``point.dim``.
    Points are returned in the model's own representation and compared by
    ``distance``.  ``k_closed``/``k_inv_closed`` are the explicit difference
    elements with exp(K X) = knc(X) and knc(K^{-1} X) = exp(X).
    """

    name: str
    point: KahlerPoint
    jet: CurvatureJet
    exp_map: Callable | None = None
    knc_map: Callable | None = None
    k_closed: Callable | None = None
    k_inv_closed: Callable | None = None
    potential_closed: Callable | None = None
    distance: Callable | None = None
    extras: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.point.dim


def _even_matrix_fn(M: np.ndarray, fn: Callable) -> np.ndarray:
    """fn(sqrt(M)) for a hermitean positive semidefinite M, fn even analytic."""
    w, V = np.linalg.eigh(M)
    w = np.clip(w, 0.0, None)
    return (V * fn(np.sqrt(w))) @ V.conj().T


def _sinc(s):
    return np.where(s < 1e-8, 1.0 - s**2 / 6, np.sin(s) / np.where(s == 0, 1, s))


def _tanc(s):
    return np.where(s < 1e-8, 1.0 + s**2 / 3, np.tan(s) / np.where(s == 0, 1, s))


def _arctanc(s):
    return np.where(s < 1e-8, 1.0 - s**2 / 3, np.arctan(s) / np.where(s == 0, 1, s))


def _arcsinc(s):
    return np.where(s < 1e-8, 1.0 + s**2 / 6, np.arcsin(s) / np.where(s == 0, 1, s))


def grassmann_c(k: int, m: int, order: int = 3) -> Model:
    """Complex Grassmannian of k-planes in C^m at P = span(e_1..e_k).

    Tangent vector coordinates: entry (r, c) of the (m-k) x k complex block
    sits at real indices 2(r k + c) (real part) and 2(r k + c) + 1 (imaginary part).
    """
    if not 0 < k < m:
        raise ValueError("need 0 < k < m")
    rows, cols = m - k, k
    n = rows * cols
    point = KahlerPoint(np.eye(2 * n), _complex_structure_pairs(n))

    def to_mat(v):
        v = np.asarray(v, dtype=float)
        return (v[0::2] + 1j * v[1::2]).reshape(rows, cols)

    def to_vec(Xm):
        flat = np.asarray(Xm).reshape(-1)
        out = np.empty(2 * n)
        out[0::2] = flat.real
        out[1::2] = flat.imag
        return out

    def curv(U, V, W):
        U, V, W = to_mat(U), to_mat(V), to_mat(W)
        Us, Vs = U.conj().T, V.conj().T
        return to_vec(U @ Vs @ W - V @ Us @ W - W @ Us @ V + W @ Vs @ U)

    jet = _jet_from_bracket(point, curv, order)

    def frame(top, bottom):
        return np.vstack([top, bottom])

    def exp_map(v):
        X = to_mat(v)
        M = X.conj().T @ X
        return frame(_even_matrix_fn(M, np.cos), X @ _even_matrix_fn(M, _sinc))

    def knc_map(v):
        X = to_mat(v)
        return frame(np.eye(cols), X)

    def k_closed(v):
        X = to_mat(v)
        return to_vec(X @ _even_matrix_fn(X.conj().T @ X, _arctanc))

    def k_inv_closed(v):
        X = to_mat(v)
        return to_vec(X @ _even_matrix_fn(X.conj().T @ X, _tanc))

    def potential(v):
        X = to_mat(v)
        return float(np.log(np.linalg.det(np.eye(cols) + X.conj().T @ X)).real)

    return Model(
        f"grassmann_c({k},{m})",
        point,
        jet,
        exp_map,
        knc_map,
        k_closed,
        k_inv_closed,
        potential,
        _subspace_distance,
        {"to_mat": to_mat, "to_vec": to_vec, "curv": curv},
    )


def grassmann_or2(m: int, order: int = 3) -> Model:
    """Oriented 2-planes in R^m at P = span(e_1, e_2).

    Tangent vectors are real (m-2) x 2 blocks X flattened row by row; the
    complex structure is X -> XJ with J the rotation by +90 degrees on P.
    Points are represented by isotropic vectors in C^m up to scale.
    """
    if m < 3:
        raise ValueError("need m >= 3")
    rows = m - 2
    dim = 2 * rows
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    cplx = np.kron(np.eye(rows), J.T)  # row (a, b) -> (a, b) J = (b, -a)
    point = KahlerPoint(np.eye(dim), cplx)
    p = np.array([1.0, -1j])

    def to_mat(v):
        return np.asarray(v, dtype=float).reshape(rows, 2)

    def to_vec(Xm):
        return np.asarray(Xm, dtype=float).reshape(-1)

    def curv(U, V, W):
        U, V, W = to_mat(U), to_mat(V), to_mat(W)
        return to_vec(U @ V.T @ W - V @ U.T @ W - W @ U.T @ V + W @ V.T @ U)

    jet = _jet_from_bracket(point, curv, order)

    def gbil(a, b):
        return np.sum(a * b)

    def exp_map(v):
        X = to_mat(v)
        M = X.T @ X
        top = _even_matrix_fn(M, np.cos) @ p
        bottom = X @ _even_matrix_fn(M, _sinc) @ p
        return np.concatenate([top, bottom])

    def knc_map(v):
        X = to_mat(v)
        Xp = X @ p
        top = p - 0.25 * gbil(Xp, Xp) * p.conj()
        return np.concatenate([top, Xp])

    def tau(X):
        t = np.trace(X.T @ X)
        t2 = np.trace(X.T @ X @ X.T @ X)
        return np.sqrt(1 + 0.5 * t + 0.125 * t2 - t**2 / 16)

    def k_inv_closed(v):
        Y = to_mat(v)
        M = Y.T @ Y
        c = np.trace(_even_matrix_fn(M, np.cos)).real
        return to_vec(2.0 / c * Y @ _even_matrix_fn(M, _sinc).real)

    def k_closed(v):
        X = to_mat(v)
        t = tau(X)
        M = X.T @ X / t**2
        return to_vec(X / t @ _even_matrix_fn(M, _arcsinc).real)

    def potential(v):
        return float(4 * np.log(tau(to_mat(v))))

    return Model(
        f"grassmann_or2({m})",
        point,
        jet,
        exp_map,
        knc_map,
        k_closed,
        k_inv_closed,
        potential,
        _line_distance,
        {"to_mat": to_mat, "to_vec": to_vec, "tau": tau, "p": p},
    )


def _twistor_basis(J0: np.ndarray) -> list:
    """g-orthonormal basis of skew endomorphisms anticommuting with J0, in pairs (B, B J0)."""
    d = J0.shape[0]

    def ip(a, b):
        return -0.5 * np.trace(a @ b)

    basis = []
    for i in range(d):
        for j in range(i + 1, d):
            E = np.zeros((d, d))
            E[i, j], E[j, i] = -1.0, 1.0
            A = 0.5 * (E + J0 @ E @ J0)
            for B in basis:
                A = A - ip(B, A) * B
            nrm = math.sqrt(max(ip(A, A), 0.0))
            if nrm < 1e-8:
                continue
            A = A / nrm
            basis.extend([A, A @ J0])
    return basis


def twistor(n: int, order: int = 3) -> Model:
    """Orthogonal complex structures on R^{2n} at the standard J0.

    Tangent vectors X are skew and anticommute with J0; coordinates refer to
    the orthonormal basis (B_1, B_1 J0, B_2, B_2 J0, ...) for g = -tr(XY)/2.
    Points are complex structures J, compared as matrices.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    J0 = _complex_structure_pairs(n)
    basis = _twistor_basis(J0)
    dim = len(basis)
    stack = np.array(basis)
    point = KahlerPoint(np.eye(dim), _complex_structure_pairs(dim // 2))

    def to_mat(v):
        return np.tensordot(np.asarray(v, dtype=float), stack, axes=(0, 0))

    def to_vec(Xm):
        return np.array([-0.5 * np.trace(B @ Xm) for B in basis])

    def curv(U, V, W):
        xi = [-0.5 * to_mat(t) @ J0 for t in (U, V, W)]
        br = xi[0] @ xi[1] - xi[1] @ xi[0]
        r = -(br @ xi[2] - xi[2] @ br)
        return to_vec(r @ J0 - J0 @ r)

    jet = _jet_from_bracket(point, curv, order)
    eye = np.eye(2 * n)

    def exp_map(v):
        X = to_mat(v)
        return sla.expm(-X @ J0) @ J0

    def knc_map(v):
        X = to_mat(v)
        X2 = X @ X
        inv = np.linalg.inv(4 * eye - X2)
        return inv @ (4 * eye + X2) @ J0 + 4 * inv @ X

    def k_closed(v):
        X = to_mat(v)
        w, V = np.linalg.eig(X)
        return to_vec(((V * (2 * np.arctanh(w / 2))) @ np.linalg.inv(V)).real)

    def k_inv_closed(v):
        X = to_mat(v)
        w, V = np.linalg.eig(X)
        return to_vec(((V * (2 * np.tanh(w / 2))) @ np.linalg.inv(V)).real)

    def potential(v):
        X = to_mat(v)
        return float(2 * np.log(np.linalg.det(eye - 0.25 * X @ X)))

    def distance(A, B):
        return float(np.max(np.abs(A - B)))

    return Model(
        f"twistor({n})",
        point,
        jet,
        exp_map,
        knc_map,
        k_closed,
        k_inv_closed,
        potential,
        distance,
        {"to_mat": to_mat, "to_vec": to_vec, "J0": J0, "basis": basis},
    )


def structure_constants(algebra: str) -> np.ndarray:
    """c[a, b, o] with [e_a, e_b] = sum_o c[a, b, o] e_o."""
    c = np.zeros((3, 3, 3))
    if algebra == "so3":
        for a, b, o in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            c[a, b, o], c[b, a, o] = 1.0, -1.0
    elif algebra == "sl2":
        H, E, F = 0, 1, 2
        c[H, E, E], c[E, H, E] = 2.0, -2.0
        c[H, F, F], c[F, H, F] = -2.0, 2.0
        c[E, F, H], c[F, E, H] = 1.0, -1.0
    else:
        raise ValueError(f"unknown Lie algebra {algebra!r}")
    return c


def lie_group(algebra: str, order: int = 3) -> Model:
    """Flat connection with parallel torsion T = -[., .] on a Lie group."""
    c = structure_constants(algebra)
    dim = c.shape[0]
    point = KahlerPoint(np.eye(dim))
    terms = [np.zeros((dim,) * (k + 4)) for k in range(order + 1)]
    tors = [-c] + [np.zeros((dim,) * (k + 3)) for k in range(1, order + 1)]
    jet = CurvatureJet(point, terms, tors, mode="affine")
    return Model(
        f"lie_group({algebra})",
        point,
        jet,
        extras={"structure_constants": c, "phi_inv_closed": lambda v: lie_phi_inv_closed(-c, v)},
    )


MODEL_NAMES = ("grassmann_c", "grassmann_or2", "twistor", "lie_group")


def model_zoo(name: str, params=(), order: int = 3) -> Model:
    """Construct a model by registry name, e.g. ("grassmann_c", (1, 2))."""
    if isinstance(params, str):
        params = tuple(p for p in params.split(",") if p)
    params = tuple(params)
    try:
        if name == "grassmann_c":
            k, m = (int(p) for p in params)
            return grassmann_c(k, m, order)
        if name == "grassmann_or2":
            (m,) = (int(p) for p in params)
            return grassmann_or2(m, order)
        if name == "twistor":
            (n,) = (int(p) for p in params)
            return twistor(n, order)
        if name == "lie_group":
            (alg,) = params
            return lie_group(str(alg), order)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid parameters {params!r} for {name}: {exc}") from exc
    raise ValueError(f"unknown model {name!r}")

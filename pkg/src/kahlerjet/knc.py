"""Kaehler normal coordinates: difference elements, Kaehler backward
transport, normal potential, distance, congruences and extended fields.
"""

from __future__ import annotations

import math

import numpy as np

from . import graded_ops as go
from . import series as S
from .curvature import CurvatureJet, sectional_from_jet
from .series import Series
from .tensor_core import poly_from_raw, poly_gradient
from .transport import phi, solve_phi_inv


class NormalizationError(ValueError):
    """A solver met a kernel component that must vanish for a valid jet."""


def _default_trunc(jet, trunc):
    return jet.order + 4 if trunc is None else trunc


def _scale(p) -> float:
    return max(1.0, float(np.max(np.abs(p), initial=0.0)))


def solve_k_inv(jet: CurvatureJet, trunc: int | None = None, tol: float = 1e-9) -> Series:
    """Inverse difference element K^{-1} as an anchored vector series.

    Solves (N + Der_I (x) I) K^{-1} = I Der_{(id - Phi) I} K^{-1} degree by
    degree with the partial inverse; the right side must have no component
    in the kernel H^m.
    """
    trunc = _default_trunc(jet, trunc)
    dim = jet.dim
    cplx = jet.point.cplx
    if cplx is None:
        raise ValueError("the difference element needs a complex structure")
    ph = phi(jet, trunc)
    G = (Series.identity_endo(dim, trunc) - ph).degreewise(lambda k, p: p @ cplx)
    kinv = Series.identity_vector(dim, trunc)
    for m in range(2, trunc + 1):
        rhs = S.directional_compose(kinv, G, trunc=m).polys[m] @ cplx.T
        h = go.holomorphic_part(rhs, dim, m, cplx)
        err = float(np.max(np.abs(h), initial=0.0)) / _scale(rhs)
        if err > tol:
            raise NormalizationError(f"degree {m}: right side has a holomorphic component ({err:.3e})")
        kinv.polys[m] = go.ni_pinv_apply(rhs, dim, m, cplx)
    return kinv


def k_inv_residual(jet: CurvatureJet, kinv: Series) -> float:
    """Max coefficient of (N + Der_I (x) I) K^{-1} - I Der_{(id - Phi) I} K^{-1}."""
    dim, trunc, cplx = jet.dim, kinv.trunc, jet.point.cplx
    ph = phi(jet, trunc)
    G = (Series.identity_endo(dim, trunc) - ph).degreewise(lambda k, p: p @ cplx)
    rhs = S.directional_compose(kinv, G).degreewise(lambda k, p: p @ cplx.T)
    lhs = kinv.degreewise(lambda k, p: go.ni_apply(p, dim, k, cplx))
    return lhs.max_abs_diff(rhs)


def k_element(jet: CurvatureJet, trunc: int | None = None) -> Series:
    """Difference element K = exp^{-1} o knc."""
    return S.invert_anchored(solve_k_inv(jet, trunc))


def psi_inv(
    jet: CurvatureJet, trunc: int | None = None, K: Series | None = None, tol: float = 1e-9, check: bool = True
) -> Series:
    """Kaehler backward transport Psi^{-1}(X) = Phi^{-1}(KX) DK(X), through degree trunc - 1.

    With check=False the commutation with I is not asserted. Use this for
    jets that only satisfy the linear symmetry constraints, whose
    curvature-quadratic terms need not intertwine I.
    """
    trunc = _default_trunc(jet, trunc)
    K = k_element(jet, trunc) if K is None else K
    pinv = solve_phi_inv(jet, trunc)
    out = S.mul(S.compose(pinv, K).truncate(trunc - 1), S.jacobian(K))
    cplx = jet.point.cplx
    comm = out.degreewise(lambda k, p: np.einsum("ij,mjk->mik", cplx, p) - p @ cplx)
    err = comm.max_abs() / max(1.0, out.max_abs())
    if check and err > tol:
        raise NormalizationError(f"Psi^-1 does not commute with I ({err:.3e})")
    return out


def _solve_pott(q, dim, k, cplx, tol, check=True):
    """Solve (N^2 + Der_I^2) t = q on degree k; the kappa*kappabar = 0 part of q must vanish."""
    weights = {}
    for s in go._squares(k):
        ev = k * k - s
        weights[s] = 0.0 if ev == 0 else 1.0 / ev
    kern = go.spectral_poly(q, dim, k, cplx, {k * k: 1.0})
    err = float(np.max(np.abs(kern), initial=0.0)) / _scale(q)
    if check and err > tol:
        raise NormalizationError(f"degree {k}: pluriharmonic component in the potential equation ({err:.3e})")
    return go.spectral_poly(q, dim, k, cplx, weights)


def potential(
    jet: CurvatureJet, trunc: int | None = None, Psi: Series | None = None, tol: float = 1e-9, check: bool = True
) -> Series:
    """Normal potential theta with (N^2 + Der_I^2) theta = 4 g(Psi^{-1}X, Psi^{-1}X)."""
    trunc = _default_trunc(jet, trunc)
    Psi = psi_inv(jet, trunc, tol=tol, check=check) if Psi is None else Psi
    v = S.apply_to_position(Psi)
    q = S.inner(v, v, jet.point.metric, trunc).scale(4.0)
    dim, cplx = jet.dim, jet.point.cplx
    polys = [None, None]
    for m in range(2, trunc + 1):
        polys.append(_solve_pott(q.polys[m], dim, m, cplx, tol, check))
    return Series(dim, "scalar", trunc, polys)


def distance_sq(jet: CurvatureJet, trunc: int | None = None, K: Series | None = None) -> Series:
    """Squared Riemannian distance g(KX, KX) in Kaehler normal coordinates."""
    K = k_element(jet, trunc) if K is None else K
    return S.inner(K, K, jet.point.metric)


def normalization_residual(theta: Series, cplx) -> float:
    """Size of theta - g(X,X) outside the bigraded parts >= (2,2)."""
    worst = 0.0
    for k in range(3, theta.trunc + 1):
        p = theta.polys[k]
        rest = p - go.ge22_poly(p, theta.dim, k, cplx)
        worst = max(worst, float(np.max(np.abs(rest), initial=0.0)))
    return worst


# ---------------------------------------------------------------------------
# congruences


def tcong_coefficient(kappa: int, kappabar: int) -> float:
    return 1.0 / (2 * kappa * (kappa - 1) * kappabar * (kappabar - 1))


def dcong_coefficient(kappa: int, kappabar: int) -> float:
    return 1.0 / (2 * (kappa + kappabar - 1) * (kappa - 1) * (kappabar - 1))


def linear_part(fn, jet: CurvatureJet, eps: float = 1e-4) -> Series:
    """d/d eps fn(eps * jet) at 0 by Richardson-extrapolated central differences."""

    def cd(h):
        return (fn(jet.scaled(h)) - fn(jet.scaled(-h))).scale(1.0 / (2 * h))

    return (cd(eps / 2).scale(4.0) - cd(eps)).scale(1.0 / 3.0)


def congruence_check(jet: CurvatureJet, trunc: int | None = None, eps: float = 1e-4) -> dict:
    """Compare the curvature-linear parts of theta and dist^2 with the sectional-curvature formulas."""
    trunc = jet.order + 4 if trunc is None else trunc
    if jet.order < trunc - 4:
        raise ValueError("jet order too small for this truncation")
    cplx = jet.point.cplx
    lin_theta = linear_part(lambda j: potential(j, trunc, check=False), jet, eps)
    lin_dist = linear_part(lambda j: distance_sq(j, trunc), jet, eps)
    sect = sectional_from_jet(jet, trunc)
    rows = []
    worst = 0.0
    for k in range(4, trunc + 1):
        for kb in range(2, k // 2 + 1):
            ka = k - kb
            if ka < 2:
                continue
            Sk = go.bigrade_poly(sect.S[k].poly, jet.dim, k, cplx, ka, kb)
            ref_t = -tcong_coefficient(ka, kb) * Sk
            ref_d = -dcong_coefficient(ka, kb) * Sk
            got_t = go.bigrade_poly(lin_theta.polys[k], jet.dim, k, cplx, ka, kb)
            got_d = go.bigrade_poly(lin_dist.polys[k], jet.dim, k, cplx, ka, kb)
            norm = float(np.max(np.abs(Sk), initial=0.0))
            den = max(norm, 1e-300)
            et = float(np.max(np.abs(got_t - ref_t), initial=0.0)) / den
            ed = float(np.max(np.abs(got_d - ref_d), initial=0.0)) / den
            if norm > 0:
                worst = max(worst, et, ed)
            rows.append({"kappa": ka, "kappabar": kb, "norm": norm, "theta_rel_err": et, "dist2_rel_err": ed})
    # curvature-linear parts outside the bidegrees of S must vanish
    leftover = 0.0
    for k in range(4, trunc + 1):
        for lin in (lin_theta, lin_dist):
            p = lin.polys[k]
            leftover = max(leftover, float(np.max(np.abs(p - go.ge22_poly(p, jet.dim, k, cplx)), initial=0.0)))
    return {"rows": rows, "max_rel_err": worst, "outside_ge22": leftover}


# ---------------------------------------------------------------------------
# extended vector fields


def z_knc_linear(jet: CurvatureJet, Z, trunc: int | None = None) -> Series:
    """Holomorphically extended field, exact to first order in the curvature.

    Z + sum_{k>=4} Re((nabla^{k-4}_{X-iIX,..} R)_{Z+iIZ, IX}(IX + iX)) / (2^{k-3} (k-2)!).
    """
    trunc = _default_trunc(jet, trunc)
    dim = jet.dim
    cplx = jet.point.cplx
    Z = np.asarray(Z, dtype=float)
    eye = np.eye(dim)
    W = eye - 1j * cplx  # X -> X - iIX
    Cm = cplx + 1j * eye  # X -> IX + iX
    a = Z + 1j * (cplx @ Z)
    polys = [Z[None]]
    for k in range(4, trunc + 3):
        deg = k - 2
        j = k - 4
        if deg > trunc or j > jet.order:
            break
        t = jet.terms[j].astype(complex)
        t = np.tensordot(a, t, axes=(0, j))  # contract A slot: axes now (v.., b, c, o)
        for i in range(j):
            t = np.moveaxis(np.tensordot(t, W, axes=([i], [0])), -1, i)
        t = np.moveaxis(np.tensordot(t, cplx.astype(complex), axes=([j], [0])), -1, j)
        t = np.moveaxis(np.tensordot(t, Cm, axes=([j + 1], [0])), -1, j + 1)
        raw = t.real / (2 ** (k - 3) * math.factorial(k - 2))
        while len(polys) < deg:
            polys.append(None)
        polys.append(poly_from_raw(raw, dim, deg))
    return Series(dim, "vector", trunc, polys)


def _split_free(theta: Series, cplx):
    """theta^free = theta - g(X,X) split into its critical part (kappa or kappabar = 2) and the rest."""
    dim = theta.dim
    crit, free = [None] * (theta.trunc + 1), [None] * (theta.trunc + 1)
    for k in range(4, theta.trunc + 1):
        p = theta.polys[k]
        free[k] = p
        crit[k] = go.spectral_poly(p, dim, k, cplx, {(k - 4) ** 2: 1.0})
    return Series(dim, "scalar", theta.trunc, free), Series(dim, "scalar", theta.trunc, crit)


def spencer(theta: Series, Z, point, tol: float = 1e-8):
    """Split the action of a constant field Z on the normal potential.

    Returns (Z^knc, nabla_Z theta) with
    Z^knc = Z - cl^{-1}(pr_[1](Z _| theta^crit))/2 and
    nabla_Z theta = pr_{>=22}(Z _| theta^free) - D theta^free [Z^rest],
    Z^rest = cl^{-1}(pr_[1](Z _| theta^crit))/2.

    nabla_Z theta is returned through degree trunc - 1; its top degree would
    need the next term of theta.
    """
    dim, trunc = theta.dim, theta.trunc
    cplx = point.cplx
    Z = np.asarray(Z, dtype=float)
    free, crit = _split_free(theta, cplx)
    rest = [None] * (trunc + 1)
    for k in range(4, trunc + 1):
        ins = np.tensordot(poly_gradient(crit.polys[k], dim, k), Z, axes=(0, 0))  # Z _| crit, degree k-1
        br = go.bracket1_poly(ins, dim, k - 1, cplx)
        if not np.any(br):
            continue
        rest[k - 2] = 0.5 * go.closure_inverse_poly(br, dim, k - 1, point, tol)
    z_rest = Series(dim, "vector", trunc, rest)
    z_knc = Series(dim, "vector", trunc, [Z[None]]) - z_rest
    nab = [None] * (trunc + 1)
    for k in range(4, trunc + 1):
        ins = np.tensordot(poly_gradient(free.polys[k], dim, k), Z, axes=(0, 0))
        nab[k - 1] = go.ge22_poly(ins, dim, k - 1, cplx)
    nabla = Series(dim, "scalar", trunc, nab) - S.directional(free, z_rest, trunc)
    return z_knc, nabla.truncate(trunc - 1)


def field_action(theta: Series, field: Series) -> Series:
    """(V theta)(X) = D theta(X)[V(X)] for a vector field series V."""
    return S.directional(theta, field)

"""Parallel transport along radial geodesics and exponentially extended fields.

All solvers run degree by degree on endomorphism-valued series in the
normal-coordinate variable X.
"""

from __future__ import annotations

import numpy as np

from . import series as S
from .curvature import CurvatureJet, curvature_series, torsion_series
from .series import Series


class TorsionError(ValueError):
    pass


def _default_trunc(jet: CurvatureJet, trunc):
    return jet.order + 2 if trunc is None else trunc


def solve_phi_inv(jet: CurvatureJet, trunc: int | None = None) -> Series:
    """Backward parallel transport Phi^{-1}(X) as an endo series.

    Solves N(N+1) P = R P + N(T P) with P(0) = id; since R starts in
    degree 2 and T in degree 1, degree m only needs lower degrees of P.
    """
    trunc = _default_trunc(jet, trunc)
    dim = jet.dim
    Rs = curvature_series(jet, trunc)
    Ts = torsion_series(jet, trunc)
    spec = "pij,pjk->pik"
    P = Series.identity_endo(dim, trunc)
    for m in range(1, trunc + 1):
        rhs = np.zeros_like(P.polys[m])
        r = S.product_degree(Rs, P, m, spec, lo_a=2)
        if r is not None:
            rhs += r
        t = S.product_degree(Ts, P, m, spec, lo_a=1)
        if t is not None:
            rhs += m * t
        P.polys[m] = rhs / (m * (m + 1))
    return P


def phi_inv_residual(jet: CurvatureJet, P: Series) -> float:
    """Max coefficient of N(N+1)P - R P - N(T P)."""
    Rs = curvature_series(jet, P.trunc)
    Ts = torsion_series(jet, P.trunc)
    lhs = P.degreewise(lambda k, p: k * (k + 1) * p)
    rhs = S.mul(Rs, P) + S.number_op(S.mul(Ts, P))
    return lhs.max_abs_diff(rhs)


def phi(jet: CurvatureJet, trunc: int | None = None) -> Series:
    """Forward parallel transport Phi = (Phi^{-1})^{-1}."""
    return S.mul_inverse(solve_phi_inv(jet, trunc))


def _require_torsion_free(jet: CurvatureJet):
    if jet.has_torsion:
        raise TorsionError("this series is only defined for torsion free jets")


def phi_minus_star(jet: CurvatureJet, trunc: int | None = None) -> Series:
    """Solution Q of the wrong sided equation N(N+1) Q = Q R with Q(0) = id."""
    _require_torsion_free(jet)
    trunc = _default_trunc(jet, trunc)
    Rs = curvature_series(jet, trunc)
    Q = Series.identity_endo(jet.dim, trunc)
    for m in range(1, trunc + 1):
        r = S.product_degree(Q, Rs, m, "pij,pjk->pik", lo_b=2)
        if r is not None:
            Q.polys[m] = r / (m * (m + 1))
    return Q


def phi_minus_star_residual(jet: CurvatureJet, Q: Series) -> float:
    Rs = curvature_series(jet, Q.trunc)
    lhs = Q.degreewise(lambda k, p: k * (k + 1) * p)
    return lhs.max_abs_diff(S.mul(Q, Rs))


def phi_star(jet: CurvatureJet, trunc: int | None = None) -> Series:
    return S.mul_inverse(phi_minus_star(jet, trunc))


def solve_theta_exp(jet: CurvatureJet, trunc: int | None = None) -> Series:
    """Endo series Theta with Z^exp(X) = Theta(X) Z.

    Solves N(N-1) Theta = N((id - Phi) Phi*) + (N Phi^{-1}) Phi Phi*, with
    Theta_0 = id and Theta_1 = 0 (the kernel of N(N-1) is fixed by the
    initial data of the extended field).
    """
    _require_torsion_free(jet)
    trunc = _default_trunc(jet, trunc)
    dim = jet.dim
    Pinv = solve_phi_inv(jet, trunc)
    Ph = S.mul_inverse(Pinv)
    Ps = phi_star(jet, trunc)
    ident = Series.identity_endo(dim, trunc)
    rhs = S.number_op(S.mul(ident - Ph, Ps)) + S.mul(S.number_op(Pinv), S.mul(Ph, Ps))
    polys = [np.eye(dim)[None], np.zeros_like(rhs.polys[1])]
    for m in range(2, trunc + 1):
        polys.append(rhs.polys[m] / (m * (m - 1)))
    return Series(dim, "endo", trunc, polys)


def gauss_lemma_residual(P: Series) -> float:
    """Max coefficient of P(X)X - X for an endo series P."""
    v = S.apply_to_position(P)
    return v.max_abs_diff(Series.identity_vector(P.dim, P.trunc))


def pullback_metric(jet: CurvatureJet, trunc: int | None = None) -> Series:
    """Scalar-valued bilinear-form series g(Phi^{-1}(X)A, Phi^{-1}(X)B) as an endo series G(X).

    Returns the endo series G with g(Phi^{-1}A, Phi^{-1}B) = <A, G B> in the
    standard basis, i.e. G = Phi^{-T} g Phi^{-1}.
    """
    P = solve_phi_inv(jet, trunc)
    g = jet.point.metric
    PT = P.degreewise(lambda k, p: np.transpose(p, (0, 2, 1)))
    return S.mul(PT, S.apply_constant(g, P))

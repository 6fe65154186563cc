"""Verification suites shared by the CLI and the acceptance tests.

Every check is a record {id, criterion, measured, tol, passed, ...}.  Suites
take a numpy Generator so a single seed drives all sampling.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np

from . import curvature as C
from . import graded_ops as go
from . import knc as K
from . import series as S
from . import symmetric_models as M
from . import transport as T
from .tensor_core import KahlerPoint

SUITES = ("coefficients", "oracles", "operators", "symmetric", "spencer")


def make_check(cid: str, criterion: int, measured: float, tol: float, **extra) -> dict:
    measured = float(measured)
    return {
        "id": cid,
        "criterion": criterion,
        "measured": measured,
        "tol": float(tol),
        "passed": bool(np.isfinite(measured) and measured <= tol),
        **extra,
    }


def synthetic_kahler_jet(n: int, order: int, rng) -> C.CurvatureJet:
    point = KahlerPoint(np.eye(2 * n), M._complex_structure_pairs(n))
    return C.synthetic_jet(point, order, rng)


# ---------------------------------------------------------------------------
# curvature-order extraction


def curvature_orders(fn, jet: C.CurvatureJet, powers: int = 4, h: float = 0.5) -> list:
    """Split fn(eps * jet) into its eps^1 .. eps^powers parts.

    The coefficients of every truncated series are polynomials in eps of
    degree at most trunc/2, so interpolation on 2*ceil(powers/2) nodes is
    exact up to rounding when powers covers that degree.
    """
    nodes = np.array([j * h for j in range(-(powers // 2 + powers % 2), powers // 2 + powers % 2 + 1) if j])
    base = fn(jet.scaled(0.0))
    vals = [fn(jet.scaled(float(e))) - base for e in nodes]
    V = np.vander(nodes, len(nodes) + 1, increasing=True)[:, 1:]
    W = np.linalg.inv(V)
    parts = []
    for p in range(min(powers, len(nodes))):
        acc = vals[0].scale(W[p, 0])
        for i in range(1, len(nodes)):
            acc = acc + vals[i].scale(W[p, i])
        parts.append(acc)
    return parts


# ---------------------------------------------------------------------------
# printed-coefficient battery


def _terms(jet):
    I = jet.point.cplx
    g = jet.point.metric

    def R(A, B, Cv):
        return jet.apply(0, [], A, B, Cv)

    def dR(k, derivs, A, B, Cv):
        return jet.apply(k, derivs, A, B, Cv)

    def ip(u, v):
        return float(u @ g @ v)

    return I, R, dR, ip


def _battery_probes(jet):
    """(object, degree, eps power, [(label, coefficient, basis(X, Y))])."""
    I, R, dR, ip = _terms(jet)
    F = Fraction
    return [
        ("phi_inv", 2, 1, [("R_{X,Y}X", F(1, 6), lambda X, Y: R(X, Y, X))]),
        ("phi_inv", 3, 1, [("(nabla_X R)_{X,Y}X", F(1, 12), lambda X, Y: dR(1, [X], X, Y, X))]),
        ("phi_inv", 4, 1, [("(nabla^2_{X,X} R)_{X,Y}X", F(1, 40), lambda X, Y: dR(2, [X, X], X, Y, X))]),
        ("phi_inv", 4, 2, [("R_{X,R_{X,Y}X}X", F(1, 120), lambda X, Y: R(X, R(X, Y, X), X))]),
        ("theta_exp", 2, 1, [("R_{X,Z}X", F(1, 3), lambda X, Y: R(X, Y, X))]),
        ("theta_exp", 3, 1, [("(nabla_X R)_{X,Z}X", F(1, 12), lambda X, Y: dR(1, [X], X, Y, X))]),
        ("theta_exp", 4, 1, [("(nabla^2_{X,X} R)_{X,Z}X", F(1, 60), lambda X, Y: dR(2, [X, X], X, Y, X))]),
        ("theta_exp", 4, 2, [("R_{X,R_{X,Z}X}X", F(-1, 45), lambda X, Y: R(X, R(X, Y, X), X))]),
        ("theta_exp", 5, 1, [("(nabla^3_{X,X,X} R)_{X,Z}X", F(1, 360), lambda X, Y: dR(3, [X, X, X], X, Y, X))]),
        (
            "theta_exp",
            5,
            2,
            [
                ("R_{X,(nabla_X R)_{X,Z}X}X", F(-1, 120), lambda X, Y: R(X, dR(1, [X], X, Y, X), X)),
                ("(nabla_X R)_{X,R_{X,Z}X}X", F(-1, 120), lambda X, Y: dR(1, [X], X, R(X, Y, X), X)),
            ],
        ),
        ("k_inv", 3, 1, [("R_{X,IX}IX", F(1, 12), lambda X, Y: R(X, I @ X, I @ X))]),
        (
            "k_inv",
            4,
            1,
            [
                ("(nabla_X R)_{X,IX}IX", F(3, 96), lambda X, Y: dR(1, [X], X, I @ X, I @ X)),
                ("(nabla_IX R)_{IX,X}X", F(-1, 96), lambda X, Y: dR(1, [I @ X], I @ X, X, X)),
            ],
        ),
        (
            "k_inv",
            5,
            1,
            [
                ("(nabla^2_{X,X} R)_{X,IX}IX", F(7, 960), lambda X, Y: dR(2, [X, X], X, I @ X, I @ X)),
                (
                    "(nabla^2_{IX,X} R + nabla^2_{X,IX} R)_{X,IX}X",
                    F(2, 960),
                    lambda X, Y: 2 * dR(2, [I @ X, X], X, I @ X, X),
                ),
                ("(nabla^2_{IX,IX} R)_{X,IX}IX", F(-1, 960), lambda X, Y: dR(2, [I @ X, I @ X], X, I @ X, I @ X)),
            ],
        ),
        (
            "k_inv",
            5,
            2,
            [
                ("R_{X,R_{X,IX}X}IX", F(-1, 120), lambda X, Y: R(X, R(X, I @ X, X), I @ X)),
                ("R_{X,R_{X,IX}IX}X", F(-1, 96), lambda X, Y: R(X, R(X, I @ X, I @ X), X)),
            ],
        ),
        ("potential", 4, 1, [("g(R_{X,IX}IX,X)", F(-1, 8), lambda X, Y: ip(R(X, I @ X, I @ X), X))]),
        ("potential", 5, 1, [("g((nabla_X R)_{X,IX}IX,X)", F(-1, 24), lambda X, Y: ip(dR(1, [X], X, I @ X, I @ X), X))]),
        (
            "potential",
            6,
            1,
            [
                ("g((nabla^2_{X,X} R)_{X,IX}IX,X)", F(-5, 576), lambda X, Y: ip(dR(2, [X, X], X, I @ X, I @ X), X)),
                (
                    "g((nabla^2_{IX,IX} R)_{X,IX}IX,X)",
                    F(1, 576),
                    lambda X, Y: ip(dR(2, [I @ X, I @ X], X, I @ X, I @ X), X),
                ),
            ],
        ),
        ("potential", 6, 2, [("g(R_{X,IX}X,R_{X,IX}X)", F(1, 48), lambda X, Y: ip(R(X, I @ X, X), R(X, I @ X, X)))]),
        ("dist2", 4, 1, [("g(R_{X,IX}IX,X)", F(-1, 6), lambda X, Y: ip(R(X, I @ X, I @ X), X))]),
        ("dist2", 5, 1, [("g((nabla_X R)_{X,IX}IX,X)", F(-1, 16), lambda X, Y: ip(dR(1, [X], X, I @ X, I @ X), X))]),
        (
            "dist2",
            6,
            1,
            [
                ("g((nabla^2_{X,X} R)_{X,IX}IX,X)", F(-7, 480), lambda X, Y: ip(dR(2, [X, X], X, I @ X, I @ X), X)),
                (
                    "g((nabla^2_{IX,IX} R)_{X,IX}IX,X)",
                    F(1, 480),
                    lambda X, Y: ip(dR(2, [I @ X, I @ X], X, I @ X, I @ X), X),
                ),
            ],
        ),
        ("dist2", 6, 2, [("g(R_{X,IX}X,R_{X,IX}X)", F(23, 720), lambda X, Y: ip(R(X, I @ X, X), R(X, I @ X, X)))]),
    ]


_SOLVERS = {
    "phi_inv": (lambda j, t: T.solve_phi_inv(j, t), 4),
    "theta_exp": (lambda j, t: T.solve_theta_exp(j, t), 5),
    "k_inv": (lambda j, t: K.solve_k_inv(j, t), 5),
    "potential": (lambda j, t: K.potential(j, t, check=False), 6),
    "dist2": (lambda j, t: K.distance_sq(j, t), 6),
}


def _sample_value(series: S.Series, degree: int, X, Y):
    val = series.eval(X, degrees=[degree])
    if series.kind == "endo":
        return val @ Y
    return np.atleast_1d(val)


def fit_coefficients(parts: dict, jet, probe, rng, samples: int = 8):
    """Least-squares fit of one homogeneous curvature-order part against a basis."""
    obj, degree, power, basis_terms = probe
    series = parts[obj][power - 1]
    rows, rhs = [], []
    for _ in range(samples):
        X = rng.standard_normal(jet.dim)
        Y = rng.standard_normal(jet.dim)
        rhs.append(_sample_value(series, degree, X, Y))
        rows.append(np.stack([np.atleast_1d(fn(X, Y)) for _, _, fn in basis_terms], axis=-1))
    A = np.concatenate(rows, axis=0)
    b = np.concatenate(rhs, axis=0)
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.linalg.norm(A @ coef - b)) / max(float(np.linalg.norm(b)), 1e-300)
    sv = np.linalg.svd(A, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    return coef, resid, cond


def coefficient_battery(rng, jet=None, tol: float = 1e-8) -> list[dict]:
    """Fit every printed coefficient from the curvature-order parts of the solvers."""
    jet = synthetic_kahler_jet(4, 3, rng) if jet is None else jet
    parts = {name: curvature_orders(lambda j, f=f, t=t: f(j, t), jet, powers=3) for name, (f, t) in _SOLVERS.items()}
    checks = []
    for probe in _battery_probes(jet):
        obj, degree, power, basis_terms = probe
        coef, resid, cond = fit_coefficients(parts, jet, probe, rng)
        for (label, expected, _), got in zip(basis_terms, coef):
            rel = abs(got - float(expected)) / abs(float(expected))
            checks.append(
                make_check(
                    f"coefficient/{obj}/deg{degree}/eps{power}/{label}",
                    1,
                    rel,
                    tol,
                    expected=str(expected),
                    fitted=float(got),
                    fit_residual=resid,
                    condition=cond,
                )
            )
        checks.append(make_check(f"coefficient/{obj}/deg{degree}/eps{power}/completeness", 1, resid, tol))
    return checks


def model_battery(rng, tol: float = 1e-8) -> list[dict]:
    """Battery entries whose basis survives on a symmetric jet, fitted on Gr_2(C^4)."""
    jet = M.grassmann_c(2, 4).jet
    parts = {name: curvature_orders(lambda j, f=f, t=t: f(j, t), jet, powers=3) for name, (f, t) in _SOLVERS.items()}
    checks = []
    for probe in _battery_probes(jet):
        obj, degree, power, basis_terms = probe
        X = rng.standard_normal(jet.dim)
        Y = rng.standard_normal(jet.dim)
        if any(np.max(np.abs(fn(X, Y))) < 1e-12 for _, _, fn in basis_terms):
            continue
        coef, resid, cond = fit_coefficients(parts, jet, probe, rng)
        for (label, expected, _), got in zip(basis_terms, coef):
            rel = abs(got - float(expected)) / abs(float(expected))
            checks.append(
                make_check(
                    f"coefficient_model/{obj}/deg{degree}/eps{power}/{label}",
                    1,
                    rel,
                    tol,
                    expected=str(expected),
                    fitted=float(got),
                    fit_residual=resid,
                    condition=cond,
                )
            )
    return checks


def congruence_checks(rng, tol: float = 1e-7) -> list[dict]:
    jet = synthetic_kahler_jet(4, 3, rng)
    rep = K.congruence_check(jet, 7)
    checks = []
    for row in rep["rows"]:
        for key, name in (("theta_rel_err", "theta"), ("dist2_rel_err", "dist2")):
            checks.append(
                make_check(
                    f"congruence/{name}/({row['kappa']},{row['kappabar']})",
                    6,
                    row[key],
                    tol,
                    sectional_norm=row["norm"],
                )
            )
    checks.append(make_check("congruence/outside_ge22", 6, rep["outside_ge22"], 1e-9))
    return checks


def suite_coefficients(rng) -> list[dict]:
    return coefficient_battery(rng) + model_battery(rng) + congruence_checks(rng)


# ---------------------------------------------------------------------------
# model-zoo oracles

SYMMETRIC_CASES = (("grassmann_c", (1, 2)), ("grassmann_c", (1, 3)), ("grassmann_c", (2, 4)), ("twistor", (3,)))
COHERENCE_CASES = SYMMETRIC_CASES + (("twistor", (2,)), ("grassmann_or2", (4,)), ("grassmann_or2", (5,)))


def sample_ball(rng, dim: int, radius: float = 0.3):
    v = rng.standard_normal(dim)
    return v * (radius * rng.uniform(0.05, 1.0) / np.linalg.norm(v))


def lie_checks(rng, trunc: int = 7, tol: float = 1e-10) -> list[dict]:
    checks = []
    for algebra in ("so3", "sl2"):
        m = M.lie_group(algebra)
        c = m.extras["structure_constants"]
        got = T.solve_phi_inv(m.jet, trunc)
        ref = M.lie_phi_inv_series(-c, trunc)
        checks.append(make_check(f"lie/{algebra}/phi_inv_termwise", 2, got.max_abs_diff(ref), tol))
        worst = 0.0
        for _ in range(10):
            X = sample_ball(rng, m.dim, 0.05)
            worst = max(worst, float(np.max(np.abs(got.eval(X) - m.extras["phi_inv_closed"](X)))))
        checks.append(make_check(f"lie/{algebra}/phi_inv_pointwise_small", 2, worst, tol))
    return checks


def symmetric_closed_form_checks(rng, trunc: int = 7, samples: int = 50) -> list[dict]:
    checks = []
    for name, params in SYMMETRIC_CASES:
        m = M.model_zoo(name, params)
        cf = M.closed_form_series(m.jet, trunc)
        pinv = T.solve_phi_inv(m.jet, trunc)
        kinv = K.solve_k_inv(m.jet, trunc)
        solved = {
            "phi_inv": pinv,
            "phi": S.mul_inverse(pinv),
            "theta_exp": T.solve_theta_exp(m.jet, trunc),
            "k_inv": kinv,
            "k": S.invert_anchored(kinv),
            "potential": K.potential(m.jet, trunc),
        }
        for obj, series in solved.items():
            checks.append(make_check(f"closed_form/{m.name}/{obj}", 3, series.max_abs_diff(cf[obj]), 1e-9))
        worst = {"k_inv": 0.0, "k": 0.0, "potential": 0.0}
        for _ in range(samples):
            X = sample_ball(rng, m.dim)
            pc = M.closed_forms(m.jet, X)
            worst["k_inv"] = max(worst["k_inv"], float(np.max(np.abs(pc["k_inv"] - m.k_inv_closed(X)))))
            worst["k"] = max(worst["k"], float(np.max(np.abs(pc["k"] - m.k_closed(X)))))
            worst["potential"] = max(worst["potential"], abs(pc["theta"] - m.potential_closed(X)))
        for obj, val in worst.items():
            checks.append(make_check(f"matrix_oracle/{m.name}/{obj}", 3, val, 1e-8, samples=samples))
    return checks


def coherence_checks(rng, samples: int = 50, tol: float = 1e-9) -> list[dict]:
    checks = []
    for name, params in COHERENCE_CASES:
        m = M.model_zoo(name, params)
        w_fwd = w_bwd = w_main = 0.0
        for _ in range(samples):
            X = sample_ball(rng, m.dim)
            w_fwd = max(w_fwd, m.distance(m.exp_map(m.k_closed(X)), m.knc_map(X)))
            w_bwd = max(w_bwd, m.distance(m.knc_map(m.k_inv_closed(X)), m.exp_map(X)))
            w_main = max(w_main, m.distance(m.exp_map(M.closed_forms(m.jet, X)["k"]), m.knc_map(X)))
        checks.append(make_check(f"coherence/{m.name}/exp(K X)=knc(X)", 4, w_fwd, tol, samples=samples))
        checks.append(make_check(f"coherence/{m.name}/knc(K^-1 X)=exp(X)", 4, w_bwd, tol, samples=samples))
        checks.append(make_check(f"coherence/{m.name}/exp(K_closed X)=knc(X)", 4, w_main, tol, samples=samples))
    return checks


def suite_oracles(rng) -> list[dict]:
    return lie_checks(rng) + symmetric_closed_form_checks(rng) + coherence_checks(rng)


# ---------------------------------------------------------------------------
# operator algebra and reconstruction


def operator_checks(rng) -> list[dict]:
    checks = []
    for n in (1, 2):
        point = KahlerPoint.standard(n)
        for k in range(0, 4):
            for d in range(0, n + 1):
                lap = go.laplacian(point, k, d)
                if lap.size == 0:
                    continue
                ref = go.laplacian_formula(point, k, d)
                checks.append(make_check(f"operators/n{n}/k{k}/d{d}/laplacian_formula", 5, np.max(np.abs(lap - ref)), 1e-10))
                ev = np.linalg.eigvals(lap)
                allowed = np.array([d + kb for kb in range(k + 1)], dtype=float)
                off = float(np.max(np.min(np.abs(ev[:, None] - allowed[None, :]), axis=1)))
                checks.append(make_check(f"operators/n{n}/k{k}/d{d}/laplacian_spectrum", 5, off, 1e-10))
        for rec in go.resolution_check(n, 4):
            if "L_squared" in rec:
                checks.append(
                    make_check(f"operators/n{n}/k{rec['degree']}/pos{rec['position']}/L_squared", 5, rec["L_squared"], 1e-10)
                )
            else:
                checks.append(
                    make_check(
                        f"operators/n{n}/k{rec['degree']}/pos{rec['position']}/exactness",
                        5,
                        abs(rec["kernel"] - rec["expected"]),
                        0,
                        kernel=rec["kernel"],
                        expected=rec["expected"],
                    )
                )
        for k in range(0, 7):
            N = go.number_operator(2 * n, k)
            D = go.der_I_operator(point, k)
            op = N.matrix @ N.matrix + D.matrix @ D.matrix
            ev = np.linalg.eigvals(op)
            allowed = np.array(sorted({4 * ka * (k - ka) for ka in range(k + 1)}), dtype=float)
            off = float(np.max(np.min(np.abs(ev[:, None] - allowed[None, :]), axis=1)))
            missing = sum(1 for a in allowed if np.min(np.abs(ev - a)) > 1e-8)
            checks.append(make_check(f"operators/n{n}/k{k}/N2_plus_DerI2_spectrum", 5, off + missing, 1e-10))
    return checks


def reconstruction_checks(rng, tol: float = 1e-9) -> list[dict]:
    checks = []
    jets = [(f"model/{M.model_zoo(nm, pr).name}", M.model_zoo(nm, pr, order=1).jet) for nm, pr in SYMMETRIC_CASES]
    point2 = KahlerPoint(np.eye(4), M._complex_structure_pairs(2))
    jets.append(("synthetic/n2", C.synthetic_jet(point2, 1, rng)))
    jets.append(("synthetic/n4", synthetic_kahler_jet(4, 1, rng)))
    jets.append(("projected/n2", C.projected_jet(point2, 1, rng)))
    for label, jet in jets:
        sect = C.sectional_from_jet(jet, 5)
        R = C.reconstruct_R(sect.S[4], jet.point)
        scale = max(1.0, float(np.max(np.abs(jet.R))))
        checks.append(make_check(f"reconstruction/{label}/R_from_S4", 9, np.max(np.abs(R - jet.R)) / scale, tol))
        dR = C.reconstruct_gradR(sect.S[5], jet.point)
        scale = max(1.0, float(np.max(np.abs(jet.terms[1]))))
        checks.append(
            make_check(f"reconstruction/{label}/gradR_from_S5", 9, np.max(np.abs(dR - jet.terms[1])) / scale, tol)
        )
    return checks


def suite_operators(rng) -> list[dict]:
    return operator_checks(rng) + reconstruction_checks(rng)


# ---------------------------------------------------------------------------
# curvature identities on symmetric and synthetic jets


def _unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def suite_symmetric(rng) -> list[dict]:
    checks = []
    for name, params in SYMMETRIC_CASES + (("grassmann_or2", (5,)),):
        m = M.model_zoo(name, params)
        worst_comm = worst_fcc = 0.0
        for _ in range(20):
            X, A = _unit(rng, m.dim), _unit(rng, m.dim)
            ops = M.jacobi(m.jet, X)
            worst_comm = max(worst_comm, float(np.max(np.abs(ops.adsqX @ ops.adsqIX - ops.adsqIX @ ops.adsqX))))
            worst_fcc = max(worst_fcc, float(np.max(np.abs(C.fcc_residual(m.jet, X, A)))))
        checks.append(make_check(f"jacobi/{m.name}/commutator", 7, worst_comm, 1e-11))
        checks.append(make_check(f"jacobi/{m.name}/fcc_full", 7, worst_fcc, 1e-9))
    for n in (2, 4):
        jet = synthetic_kahler_jet(n, 2, rng)
        scale = float(np.max(np.abs(jet.R))) ** 2
        worst_fcc = worst_scc = 0.0
        for _ in range(10):
            X, A = _unit(rng, jet.dim), _unit(rng, jet.dim)
            worst_fcc = max(worst_fcc, float(np.max(np.abs(C.fcc_residual(jet, X, A)))) / scale)
            worst_scc = max(worst_scc, C.scc_residual(jet, X) / scale)
        checks.append(make_check(f"jacobi/synthetic_n{n}/fcc_full_relative", 7, worst_fcc, 1e-9))
        checks.append(make_check(f"jacobi/synthetic_n{n}/scc_relative", 7, worst_scc, 1e-9))
    cp2 = M.grassmann_c(1, 3).jet
    functions = {"x^2": [0.0, 1.0], "tanhc_half": M.even_series("tanhc_half", 6)}
    for label, coeffs in functions.items():
        worst = 0.0
        for _ in range(10):
            X = sample_ball(rng, cp2.dim, 0.5)
            A = _unit(rng, cp2.dim)
            res = M.dde_check(cp2, X, A, coeffs)
            worst = max(worst, res["derivative"])
        checks.append(make_check(f"dde/CP2/{label}", 7, worst, 1e-6))
    return checks


# ---------------------------------------------------------------------------
# extended fields and the Spencer splitting


def suite_spencer(rng) -> list[dict]:
    checks = []
    for name, params in SYMMETRIC_CASES + (("grassmann_or2", (4,)),):
        m = M.model_zoo(name, params, order=4)
        theta = K.potential(m.jet, 8)
        w_lin = w_sp = w_act = 0.0
        for _ in range(3):
            Z = rng.standard_normal(m.dim)
            zl = K.z_knc_linear(m.jet, Z, 8)
            for _ in range(5):
                X = rng.standard_normal(m.dim)
                ref = M.closed_forms(m.jet, X, Z)["z_knc"]
                w_lin = max(w_lin, float(np.max(np.abs(zl.eval(X) - ref))))
            zk, _ = K.spencer(theta, Z, m.point)
            w_sp = max(w_sp, zk.max_abs_diff(zl))
            act = K.field_action(theta, zk).truncate(7)
            lin = S.Series(m.dim, "scalar", 7, [None, 2.0 * (m.point.metric @ Z)])
            w_act = max(w_act, act.max_abs_diff(lin))
        checks.append(make_check(f"extended/{m.name}/z_knc_linear_vs_quadratic_formula", 8, w_lin, 1e-10))
        checks.append(make_check(f"extended/{m.name}/spencer_vs_z_knc_linear", 8, w_sp, 1e-8))
        checks.append(make_check(f"extended/{m.name}/z_knc_action_on_theta", 8, w_act, 1e-9))
    big = M.grassmann_c(2, 4)
    sub = big.jet.restrict([0, 1])
    for obj, fn in (("k_inv", lambda j: K.solve_k_inv(j, 7)), ("potential", lambda j: K.potential(j, 7))):
        got = S.restrict(fn(big.jet), [0, 1])
        checks.append(make_check(f"extended/restriction_CP1_in_Gr2C4/{obj}", 8, got.max_abs_diff(fn(sub)), 1e-10))
    return checks


# ---------------------------------------------------------------------------
# driver

_RUNNERS = {
    "coefficients": suite_coefficients,
    "oracles": suite_oracles,
    "operators": suite_operators,
    "symmetric": suite_symmetric,
    "spencer": suite_spencer,
}


def run_suites(names, seed: int = 0, tol: float | None = None, timings: bool = False) -> dict:
    """Run suites with one Generator per suite derived from the seed.

    ``tol`` replaces every per-check tolerance when given.  Wall-clock
    timings are only reported on request so that reports stay reproducible.
    """
    if "all" in names:
        names = SUITES
    unknown = [n for n in names if n not in _RUNNERS]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    checks = []
    elapsed = {}
    for i, name in enumerate(SUITES):
        if name not in names:
            continue
        rng = np.random.default_rng([seed, i])
        t0 = time.perf_counter()
        for c in _RUNNERS[name](rng):
            c["suite"] = name
            if tol is not None:
                c["tol"] = float(tol)
                c["passed"] = bool(np.isfinite(c["measured"]) and c["measured"] <= tol)
            checks.append(c)
        elapsed[name] = time.perf_counter() - t0
    checks.sort(key=lambda c: c["id"])
    report = {
        "schema": 1,
        "seed": seed,
        "suites": [n for n in SUITES if n in names],
        "tol_override": tol,
        "n_checks": len(checks),
        "n_failed": sum(not c["passed"] for c in checks),
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
    }
    if timings:
        report["timings"] = elapsed
    return report

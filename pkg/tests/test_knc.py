from fractions import Fraction as F

import numpy as np
import pytest

from kahlerjet import knc
from kahlerjet import series as S
from kahlerjet.curvature import CurvatureJet
from kahlerjet.series import Series
from kahlerjet.tensor_core import KahlerPoint

# Maclaurin coefficients of tan, arctan, log(1+t^2) and arctan^2
TAN = {1: F(1), 3: F(1, 3), 5: F(2, 15), 7: F(17, 315)}
ARCTAN = {1: F(1), 3: F(-1, 3), 5: F(1, 5), 7: F(-1, 7)}
LOG1P_SQ = {2: F(1), 4: F(-1, 2), 6: F(1, 3), 8: F(-1, 4)}
ARCTAN_SQ = {2: F(1), 4: F(-2, 3), 6: F(23, 45), 8: F(-44, 105)}


def line_coefficients(s: Series, component=None):
    r = S.restrict(s, [0])
    out = {}
    for k, p in enumerate(r.polys):
        out[k] = float(p.ravel()[0] if component is None else p[0, component])
    return out


@pytest.fixture(scope="module")
def cp1_deep(cp1):
    return cp1.jet.with_order(6)


@pytest.mark.parametrize(
    "name,fn,expected",
    [
        ("k_inv", lambda j: knc.solve_k_inv(j, 8), TAN),
        ("k", lambda j: knc.k_element(j, 8), ARCTAN),
        ("potential", lambda j: knc.potential(j, 8), LOG1P_SQ),
        ("dist2", lambda j: knc.distance_sq(j, 8), ARCTAN_SQ),
    ],
)
def test_cp1_radial_profiles(cp1_deep, name, fn, expected):
    s = fn(cp1_deep)
    coeffs = line_coefficients(s, 0 if s.kind == "vector" else None)
    for k in range(s.trunc + 1):
        assert coeffs[k] == pytest.approx(float(expected.get(k, 0)), abs=1e-12), (name, k)


def test_cp1_psi_inv_is_conformal(cp1_deep):
    P = knc.psi_inv(cp1_deep, 7)
    X = np.array([0.1, 0.05])
    assert np.allclose(P.eval(X, degrees=range(7)), np.eye(2) / (1 + X @ X), atol=1e-8)


def test_flat_jet():
    jet = CurvatureJet.flat(KahlerPoint.standard(2), 2)
    ident = Series.identity_vector(4, 6)
    assert knc.solve_k_inv(jet, 6).max_abs_diff(ident) == 0.0
    theta = knc.potential(jet, 6)
    X = np.array([0.1, 0.2, -0.3, 0.4])
    assert theta.eval(X) == pytest.approx(X @ X)
    assert knc.distance_sq(jet, 6).eval(X) == pytest.approx(X @ X)
    zk, nab = knc.spencer(theta, X, jet.point)
    assert zk.max_abs_diff(Series.constant(X, 6)) == 0.0
    assert nab.max_abs() == 0.0


def test_solvers_meet_normalization(gr24):
    K = knc.solve_k_inv(gr24.jet, 5)
    assert knc.k_inv_residual(gr24.jet, K) < 1e-10
    theta = knc.potential(gr24.jet, 6)
    assert knc.normalization_residual(theta, gr24.jet.point.cplx) < 1e-10


def test_psi_inv_commutation_is_enforced(synthetic4):
    # random jets only satisfy the constraints linear in the curvature
    with pytest.raises(knc.NormalizationError):
        knc.psi_inv(synthetic4, 5)
    knc.psi_inv(synthetic4, 5, check=False)


def test_congruence_coefficients():
    assert knc.tcong_coefficient(2, 2) == pytest.approx(1 / 8)
    assert knc.dcong_coefficient(2, 2) == pytest.approx(1 / 6)
    assert knc.tcong_coefficient(3, 2) == pytest.approx(1 / 24)
    assert knc.dcong_coefficient(3, 2) == pytest.approx(1 / 16)


def test_congruence_check_on_random_jet(synthetic4):
    rep = knc.congruence_check(synthetic4.with_order(2), 6)
    assert rep["max_rel_err"] < 1e-7
    assert rep["outside_ge22"] < 1e-9
    with pytest.raises(ValueError):
        knc.congruence_check(synthetic4.with_order(1), 6)


def test_spencer_on_cp1(cp1_deep):
    theta = knc.potential(cp1_deep, 9)
    Z = np.array([0.3, -1.0])
    zk, nab = knc.spencer(theta, Z, cp1_deep.point)
    assert zk.max_abs_diff(knc.z_knc_linear(cp1_deep, Z, 9)) < 1e-12
    act = knc.field_action(theta, zk).truncate(8)
    lin = Series(2, "scalar", 8, [None, 2 * Z])
    assert (act - lin).max_abs_diff(nab) < 1e-12

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kahlerjet import series as S
from kahlerjet import transport as T
from kahlerjet.curvature import CurvatureJet, synthetic_jet
from kahlerjet.series import Series
from kahlerjet.tensor_core import KahlerPoint

from conftest import pair_point


def test_flat_transport_is_identity():
    jet = CurvatureJet.flat(KahlerPoint.standard(2), order=2)
    ident = Series.identity_endo(4, 5)
    assert T.solve_phi_inv(jet, 5).max_abs_diff(ident) == 0.0
    assert T.solve_theta_exp(jet, 5).max_abs_diff(ident) == 0.0


def test_cp1_transport_closed_form(cp1):
    # round sphere of curvature 4: transverse part of Phi^{-1} is sin(2r)/(2r)
    jet = cp1.jet.with_order(6)
    P = T.solve_phi_inv(jet, 9)
    G = T.pullback_metric(jet, 9)
    r = 0.2
    X = np.array([r, 0.0])
    assert np.allclose(P.eval(X), np.diag([1.0, np.sin(2 * r) / (2 * r)]), atol=1e-9)
    assert np.allclose(G.eval(X), np.diag([1.0, (np.sin(2 * r) / (2 * r)) ** 2]), atol=1e-9)


@settings(max_examples=5, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_solvers_satisfy_their_equations(seed):
    jet = synthetic_jet(pair_point(2), 2, np.random.default_rng(seed))
    P = T.solve_phi_inv(jet, 5)
    assert T.phi_inv_residual(jet, P) < 1e-10
    assert T.gauss_lemma_residual(P) < 1e-10
    Q = T.phi_minus_star(jet, 5)
    assert T.phi_minus_star_residual(jet, Q) < 1e-10
    assert S.mul(T.phi(jet, 5), P).max_abs_diff(Series.identity_endo(4, 5)) < 1e-10


def test_theta_low_degrees(synthetic4):
    Th = T.solve_theta_exp(synthetic4, 4)
    assert np.allclose(Th.polys[0][0], np.eye(4))
    assert not np.any(Th.polys[1])


def affine_jet(rng, dim=2):
    R = rng.standard_normal((dim,) * 4)
    R = R - np.swapaxes(R, 0, 1)
    Tt = rng.standard_normal((dim,) * 3)
    Tt = Tt - np.swapaxes(Tt, 0, 1)
    return CurvatureJet(KahlerPoint(np.eye(dim)), [R], [Tt], mode="affine")


def test_torsion_enters_phi_inv_and_blocks_theta():
    jet = affine_jet(np.random.default_rng(1))
    P = T.solve_phi_inv(jet, 4)
    assert T.phi_inv_residual(jet, P) < 1e-12
    assert np.any(P.polys[1])
    with pytest.raises(T.TorsionError):
        T.solve_theta_exp(jet)
    with pytest.raises(T.TorsionError):
        T.phi_minus_star(jet)

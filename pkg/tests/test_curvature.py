import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kahlerjet import curvature as C
from kahlerjet.curvature import CurvatureJet
from kahlerjet.tensor_core import KahlerPoint, SymTensor, poly_eval

from conftest import pair_point


def test_models_and_synthetic_jets_validate(cp1, gr24, synthetic4):
    for jet in (cp1.jet, gr24.jet, synthetic4):
        report = C.validate(jet)
        assert report["passed"], report["residuals"]


def test_validate_flags_broken_jet(synthetic4):
    R = np.array(synthetic4.R)
    R[0, 1, 2, 3] += 1.0
    R[1, 0, 2, 3] -= 1.0  # keep antisymmetry, break the rest
    broken = synthetic4.replace_terms([R] + synthetic4.terms[1:])
    report = C.validate(broken)
    assert not report["passed"]
    assert report["residuals"]["antisymmetry"] < 1e-12


def test_cp1_sectional_curvature(cp1):
    # constant holomorphic sectional curvature 4: S4(X) = 4|X|^4
    S4 = C.sectional_poly(cp1.jet, 4)
    X = np.array([0.3, -0.8])
    assert np.isclose(poly_eval(S4, 2, 4, X), 4 * (X @ X) ** 2)


def test_s4_definition_matches_diagonal(synthetic4):
    # to_raw gives t with t(X,X,X,X) = 4! S4(X), the same normalization as the definition
    full = SymTensor.from_poly(4, 4, "scalar", C.sectional_poly(synthetic4, 4)).to_raw()
    assert np.allclose(C.s4_from_definition(synthetic4), full, atol=1e-10)


@settings(max_examples=6, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_reconstruction_from_sectional_curvatures(seed):
    jet = C.synthetic_jet(pair_point(2), 1, np.random.default_rng(seed))
    data = C.sectional_from_jet(jet)
    R = C.reconstruct_R(data.S[4], jet.point)
    dR = C.reconstruct_gradR(data.S[5], jet.point)
    assert np.allclose(R, jet.R, atol=1e-10 * np.abs(jet.R).max())
    assert np.allclose(dR, jet.terms[1], atol=1e-10 * np.abs(jet.terms[1]).max())


def test_reconstruction_rejects_non_invariant():
    bad = SymTensor.from_poly(2, 4, "scalar", np.array([1.0, 0, 0, 0, 0]))
    with pytest.raises(ValueError):
        C.reconstruct_R(bad, KahlerPoint.standard(1))


def test_json_roundtrip(tmp_path, synthetic4):
    path = tmp_path / "jet.json"
    synthetic4.dump(path)
    back = CurvatureJet.load(path)
    assert back.order == synthetic4.order and back.mode == synthetic4.mode
    for a, b in zip(back.terms, synthetic4.terms):
        assert np.allclose(a, b, rtol=0, atol=1e-13 * np.abs(b).max())


def test_constructor_errors():
    p = KahlerPoint.standard(1)
    with pytest.raises(ValueError):
        CurvatureJet(p, [np.zeros((2, 2, 2))])
    with pytest.raises(ValueError):
        CurvatureJet(p, [])
    with pytest.raises(ValueError):
        CurvatureJet(p, [np.zeros((2,) * 4)], [np.ones((2,) * 3)])
    with pytest.raises(ValueError):
        CurvatureJet(KahlerPoint(np.eye(2)), [np.zeros((2,) * 4)], mode="kahler")


def test_restrict_to_totally_geodesic_line(gr24):
    sub = gr24.jet.restrict([0, 1])
    assert sub.dim == 2 and C.validate(sub)["passed"]
    # a complex line in Gr_2(C^4) through the origin carries curvature 4
    assert np.allclose(C.sectional_poly(sub, 4), [4.0, 0, 8.0, 0, 4.0])


def test_restrict_errors(gr24, synthetic4):
    with pytest.raises(ValueError, match="I-invariant"):
        gr24.jet.restrict([0])
    with pytest.raises(ValueError, match="closed"):
        synthetic4.restrict([0, 1])


def test_commutator_identity_on_models(cp1, gr24):
    rng = np.random.default_rng(0)
    for model in (cp1, gr24):
        X = rng.standard_normal(model.dim)
        A = rng.standard_normal(model.dim)
        assert np.max(np.abs(C.fcc_residual(model.jet, X, A))) < 1e-10

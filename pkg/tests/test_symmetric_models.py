import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kahlerjet import symmetric_models as M
from kahlerjet.curvature import validate

TAGS = ["sinhc", "inv_sinhc", "tanhc_half", "artanhc_half", "log1m_quarter", "coth"]


def random_spd(rng, n, radius):
    B = rng.standard_normal((n, n))
    A = B @ B.T
    return radius * A / np.linalg.norm(A, 2)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), tag=st.sampled_from(TAGS), sign=st.sampled_from([1.0, -1.0]))
def test_matfun_eigen_vs_taylor(seed, tag, sign):
    A = sign * random_spd(np.random.default_rng(seed), 4, 0.5)
    assert np.allclose(M.matfun(A, tag), M.matfun_taylor(A, tag, terms=20), atol=1e-12)


def test_matfun_scalar_values():
    u = 0.36  # s = 0.6
    assert M.matfun(np.array([[u]]), "sinhc")[0, 0] == pytest.approx(np.sinh(0.6) / 0.6)
    assert M.matfun(np.array([[-u]]), "tanhc_half")[0, 0] == pytest.approx(np.tan(0.3) / 0.3)
    with pytest.raises(ValueError):
        M.matfun(np.array([[5.0]]), "artanhc_half")
    with pytest.raises(ValueError):
        M.matfun(np.array([[0.0, 1.0], [0.0, 0.0]]), "sinhc")


def test_f_ext_of_square():
    x2 = np.diag([1.0, 2.0])
    xb2 = np.diag([0.5, -1.0])
    assert np.allclose(M.f_ext([0.0, 1.0], x2, xb2), x2 + 3 * xb2)
    assert np.allclose(M.f_ext([1.0], x2, xb2), np.eye(2))
    with pytest.raises(ValueError):
        M.f_ext([0.0, 1.0], x2, np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.mark.parametrize("tag", ["sinhc", "tanhc_half", "log1m_quarter"])
def test_even_series_against_numeric_closed_form(tag):
    c = M.even_series(tag, 12)
    u = np.array([0.01, -0.2, 0.3])
    assert np.allclose(np.polyval(c[::-1], u), M._closed_even(tag, u), atol=1e-13)


def test_dde_on_cp2(cp2):
    rng = np.random.default_rng(4)
    X, A = 0.3 * rng.standard_normal(4), rng.standard_normal(4)
    res = M.dde_check(cp2.jet, X, A, [0.0, 1.0])
    assert res["derivative"] < 1e-6 and res["square"] < 1e-10


@pytest.mark.parametrize(
    "name,params",
    [("grassmann_c", "1,2"), ("grassmann_c", "2,4"), ("twistor", "3"), ("grassmann_or2", "4")],
)
def test_model_jets_and_anchoring(name, params):
    model = M.model_zoo(name, params)
    assert validate(model.jet)["passed"]
    v = np.random.default_rng(1).standard_normal(model.dim)
    v /= np.sqrt(v @ model.point.metric @ v)
    # knc(X) and exp(X) agree through second order, so their gap scales like t^3
    gaps = [model.distance(model.exp_map(t * v), model.knc_map(t * v)) for t in (0.1, 0.05)]
    assert gaps[0] / gaps[1] == pytest.approx(8.0, rel=0.05)
    assert model.distance(model.exp_map(np.zeros(model.dim)), model.knc_map(np.zeros(model.dim))) < 1e-14


def test_lie_group_model():
    model = M.model_zoo("lie_group", "so3")
    assert model.jet.has_torsion and model.jet.mode == "affine"
    c = M.structure_constants("so3")
    assert np.allclose(c, -np.swapaxes(c, 0, 1))


def test_model_zoo_errors():
    with pytest.raises(ValueError):
        M.model_zoo("nope")
    with pytest.raises(ValueError):
        M.model_zoo("grassmann_c", "1")
    with pytest.raises(ValueError):
        M.model_zoo("twistor", "x")

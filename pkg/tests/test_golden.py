import json
from fractions import Fraction
from importlib import resources

import numpy as np
import pytest

from kahlerjet import suites


@pytest.fixture(scope="module")
def golden():
    return json.loads(resources.files("kahlerjet").joinpath("data/coefficients_golden.json").read_text())


@pytest.fixture(scope="module")
def battery(golden):
    checks = suites.coefficient_battery(np.random.default_rng(golden["seed"]))
    return {c["id"]: c for c in checks if "fitted" in c}


def test_golden_covers_battery(golden, battery):
    assert set(golden["entries"]) == set(battery)


def test_fitted_coefficients_match_golden(golden, battery):
    for cid, entry in golden["entries"].items():
        got = battery[cid]
        assert got["expected"] == entry["expected"]
        assert got["fitted"] == pytest.approx(entry["fitted"], rel=1e-9), cid
        # golden values themselves sit on the printed fractions
        assert entry["fitted"] == pytest.approx(float(Fraction(entry["expected"])), rel=1e-9), cid

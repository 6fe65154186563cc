import json

import numpy as np
import pytest

from kahlerjet import cli


def expand(tmp_path, *args):
    out = tmp_path / "out.json"
    code = cli.main(["expand", *args, "--out", str(out)])
    return code, (json.loads(out.read_text()) if code == 0 else None)


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_expand_k_inv_on_cp1(tmp_path, capsys):
    at = write(tmp_path, "x.json", {"dim": 2, "values": [0.1, 0.0]})
    code, doc = expand(tmp_path, "--model", "grassmann_c", "--params", "1,2", "--object", "k_inv", "--at", at)
    assert code == 0
    assert doc["kind"] == "expansion" and doc["order"] == 7 and doc["model"] == "grassmann_c(1,2)"
    vals = doc["at"]["degree_values"]
    # tan(t) = t + t^3/3 + 2t^5/15 + ...
    assert vals[3][0] == pytest.approx(1e-3 / 3, rel=1e-12)
    assert vals[5][0] == pytest.approx(2e-5 / 15, rel=1e-12)
    assert "degree 3" in capsys.readouterr().out


def test_expand_flat_potential(tmp_path):
    from kahlerjet.curvature import CurvatureJet
    from kahlerjet.tensor_core import KahlerPoint

    jet = write(tmp_path, "jet.json", CurvatureJet.flat(KahlerPoint.standard(1), 2).to_dict())
    code, doc = expand(tmp_path, "--jet", jet, "--object", "potential", "--order", "6")
    assert code == 0
    assert [t["degree"] for t in doc["series"]["terms"]] == [2]


def test_expand_z_knc_needs_field(tmp_path):
    args = ["--model", "grassmann_c", "--params", "1,2", "--object", "z_knc"]
    assert expand(tmp_path, *args)[0] == cli.EXIT_USAGE
    field = write(tmp_path, "z.json", [1.0, 0.0])
    code, doc = expand(tmp_path, *args, "--field", field)
    assert code == 0 and doc["series"]["kind"] == "vector"


@pytest.mark.parametrize(
    "args,code",
    [
        (["--model", "nope", "--object", "k"], cli.EXIT_MODEL),
        (["--model", "grassmann_c", "--params", "1,2", "--object", "k", "--order", "13"], cli.EXIT_MODEL),
        (["--model", "lie_group", "--params", "so3", "--object", "k"], cli.EXIT_MODEL),
        (["--model", "grassmann_c", "--params", "1,2", "--object", "bogus"], cli.EXIT_USAGE),
        (["--object", "k"], cli.EXIT_USAGE),
    ],
)
def test_expand_exit_codes(tmp_path, args, code):
    assert expand(tmp_path, *args)[0] == code


def test_malformed_inputs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert expand(tmp_path, "--jet", str(bad), "--object", "phi_inv")[0] == cli.EXIT_INPUT
    wrong = write(tmp_path, "wrong.json", {"point": {}})
    assert expand(tmp_path, "--jet", wrong, "--object", "phi_inv")[0] == cli.EXIT_INPUT
    at = write(tmp_path, "x.json", {"dim": 3, "values": [0, 0, 0]})
    args = ["--model", "grassmann_c", "--params", "1,2", "--object", "k", "--at", at]
    assert expand(tmp_path, *args)[0] == cli.EXIT_INPUT


def test_verify_is_deterministic(tmp_path, capsys):
    paths = [tmp_path / f"r{i}.json" for i in range(2)]
    for p in paths:
        assert cli.main(["verify", "--suite", "symmetric", "--report", str(p)]) == 0
    a, b = (json.loads(p.read_text()) for p in paths)
    assert a == b and a["passed"] and a["suites"] == ["symmetric"]
    assert "checks passed" in capsys.readouterr().out


def test_verify_tol_override_can_fail(tmp_path):
    report = tmp_path / "r.json"
    assert cli.main(["verify", "--suite", "symmetric", "--tol", "0", "--report", str(report)]) == cli.EXIT_FAIL
    doc = json.loads(report.read_text())
    assert doc["tol_override"] == 0 and doc["n_failed"] > 0


def test_thread_cap_validation(monkeypatch):
    monkeypatch.setenv("KJET_THREADS", "zero")
    assert cli.main(["verify", "--suite", "symmetric"]) == cli.EXIT_USAGE


def test_read_vector_forms(tmp_path):
    assert np.allclose(cli.read_vector(write(tmp_path, "a.json", [1, 2]), 2), [1, 2])
    with pytest.raises(cli.CliError):
        cli.read_vector(write(tmp_path, "b.json", {"dim": 2, "values": ["x", 1]}), 2)

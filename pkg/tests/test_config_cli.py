import copy
import json

import numpy as np
import pytest

from fixlab.cli import catalog, main, report_path
from fixlab.config import ConfigError, build, load, preset_document, preset_names

HALPERN = preset_document("halpern_rotation")


def _write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _mut(doc, **changes):
    d = copy.deepcopy(doc)
    for path, value in changes.items():
        cur = d
        keys = path.split("__")
        for k in keys[:-1]:
            cur = cur[k]
        cur[keys[-1]] = value
    return d


def test_presets_bundled():
    assert preset_names() == ["halpern_rotation", "ishikawa_errors_demo", "viscosity_segment", "yao_demo"]
    for name in preset_names():
        exp = load(name)
        assert exp.theorem in {"2.1", "3.1", "3.2", "3.3"}


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="bogus"):
        build(_mut(HALPERN, bogus=1))
    with pytest.raises(ConfigError):
        build(_mut(HALPERN, operator_T__extra=1))
    with pytest.raises(ConfigError):
        build(_mut(HALPERN, schedules__alpha={"family": "harmonic"}))


def test_vector_length_checked():
    with pytest.raises(ConfigError, match="length"):
        build(_mut(HALPERN, x0=[1.0, 2.0, 3.0]))


def test_p_one_rejected():
    with pytest.raises(ConfigError, match="uniformly smooth"):
        build(_mut(HALPERN, space__p=1.0))


def test_scheme_family_mismatch():
    with pytest.raises(ConfigError, match="errors_family"):
        build(_mut(HALPERN, scheme="mann_errors"))


def test_degenerate_schedule_is_config_error():
    doc = preset_document("yao_demo")
    doc["schedules"] = {"alpha": {"family": "zero"}, "beta": {"family": "zero"}}
    with pytest.raises(ConfigError, match="degenerate"):
        build(doc)


def test_extended_scheme_config():
    doc = {
        "space": {"dim": 2},
        "operator_T": {"kind": "box_clamp", "lo": [0, 0], "hi": [1, 1]},
        "f_family": {"kind": "decaying_perturbation",
                     "base": {"kind": "affine", "matrix": 0.5, "offset": [0.5, 0.5], "lipschitz": 0.5},
                     "direction": {"kind": "constant", "u": [1.0, 0.0]},
                     "rate": {"family": "power", "c": 0.1, "rho": 1.0, "offset": 1}},
        "schedules": {"alpha": {"family": "power", "c": 1, "rho": 1, "offset": 1},
                      "beta": {"family": "constant", "c": 0.5}},
        "x0": [3.0, -1.0],
        "scheme": "extended",
        "stop": {"max_iters": 50},
    }
    exp = build(doc)
    assert exp.process.scheme == "extended"
    T, f = exp.anchor_maps()
    assert f.claims_contraction


def test_cli_run_writes_csv_and_report(tmp_path, capsys):
    out = tmp_path / "halpern.csv"
    assert main(["run", "halpern_rotation", "--out", str(out), "--reference", "anchor"]) == 0
    rows = out.read_text().strip().split("\n")
    assert 2 <= len(rows) <= 10_002
    rep = json.loads(report_path(out).read_text())
    assert list(rep)[:3] == ["stop", "iterations", "final_residual"]
    assert rep["stop"] == "residual_below_tol" and rep["hypotheses"]["passed"]


def test_cli_run_reference_vector(tmp_path):
    out = tmp_path / "v.csv"
    assert main(["run", "halpern_rotation", "--out", str(out), "--reference", "vector", "--point", "0,0"]) == 0
    assert main(["run", "halpern_rotation", "--out", str(out), "--reference", "vector"]) == 2


def test_cli_run_p1_exit2(tmp_path, capsys):
    code = main(["run", _write(tmp_path, _mut(HALPERN, space__p=1.0)), "--out", str(tmp_path / "x.csv")])
    assert code == 2
    assert "uniformly smooth" in capsys.readouterr().err


def test_cli_run_divergence_exit3(tmp_path):
    doc = _mut(HALPERN, operator_T={"kind": "affine", "matrix": 2.0, "lipschitz": 1.0},
               schedules={"alpha": {"family": "zero"}}, stop={"max_iters": 1000, "divergence_radius": 1.0})
    assert main(["run", _write(tmp_path, doc), "--out", str(tmp_path / "d.csv")]) == 3
    assert json.loads((tmp_path / "d.report.json").read_text())["runtime"]["bounded"] is False


def test_cli_missing_config_exit2(tmp_path):
    assert main(["run", str(tmp_path / "nope.json"), "--out", str(tmp_path / "x.csv")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["validate", str(bad), "--theorem", "2.1"]) == 2


def test_cli_validate(tmp_path, capsys):
    assert main(["validate", "viscosity_segment", "--theorem", "3.1"]) == 0
    doc = _mut(HALPERN, schedules={"alpha": {"family": "power", "c": 1.0, "rho": 2.0, "offset": 1}})
    assert main(["validate", _write(tmp_path, doc), "--theorem", "2.1"]) == 1
    assert "FAIL" in capsys.readouterr().out
    doc = preset_document("ishikawa_errors_demo")
    doc["schedules"]["gamma"] = {"family": "power", "c": 0.25, "rho": 1.0, "offset": 1}
    assert main(["validate", _write(tmp_path, doc, "g.json"), "--theorem", "3.2"]) == 1
    assert main(["validate", "halpern_rotation", "--theorem", "3.2"]) == 2


def test_cli_anchor(tmp_path, capsys):
    out = tmp_path / "path.csv"
    assert main(["anchor", "viscosity_segment", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "q_hat" in text and "vi residual" in text
    header = out.read_text().split("\n")[0]
    assert header == "stage,t,z_0,z_1,inner_iters,inner_residual"

    ident = _mut(HALPERN, operator_T={"kind": "identity"}, scheme="viscosity",
                 f_family={"kind": "constant_family",
                           "f": {"kind": "affine", "matrix": 0.5, "offset": [0.5, 0.5], "lipschitz": 0.5}})
    assert main(["anchor", _write(tmp_path, ident)]) == 0
    assert "(1, 1)" in capsys.readouterr().out


def test_cli_anchor_nonconvergence_exit4(tmp_path):
    doc = _mut(preset_document("viscosity_segment"), anchor={"max_stages": 2, "path_tol": 1e-15})
    assert main(["anchor", _write(tmp_path, doc)]) == 4


def test_cli_anchor_needs_contraction(tmp_path):
    doc = _mut(HALPERN, f_family={"kind": "identity_family"})
    assert main(["anchor", _write(tmp_path, doc)]) == 2


def test_cli_check(capsys):
    assert main(["check", "--suite", "lemma13"]) == 0
    assert "a_N" not in capsys.readouterr().err
    assert main(["check", "--suite", "duality", "--seed", "3"]) == 0


def test_cli_catalog(capsys):
    assert main(["catalog"]) == 0
    out = capsys.readouterr().out
    for name in ("rotation2d", "errors_family", "power", "halpern_rotation"):
        assert name in out
    assert main(["catalog", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert list(data) == ["operators", "families", "schedules", "presets"]
    assert data == catalog()
    with pytest.raises(SystemExit) as exc:
        main(["catalog", "--bogus"])
    assert exc.value.code == 2


def test_cli_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["run", "ishikawa_errors_demo", "--out", str(out), "--reference", "anchor"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert report_path(a).read_bytes() == report_path(b).read_bytes()

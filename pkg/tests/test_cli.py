import json

import pytest

from liecurv import scenario
from liecurv.cli import main
from liecurv.errors import SchemaError
from liecurv.suite import run_suite


def write(tmp_path, text, name="s.json"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run_json(capsys, argv):
    code = main(argv + ["--json"])
    return code, json.loads(capsys.readouterr().out)


@pytest.mark.parametrize("name", scenario.bundled())
def test_bundled_scenarios_pass(name, capsys):
    assert main(["run", str(scenario.bundled_path(name))]) == 0
    assert capsys.readouterr().out.rstrip().endswith("PASSED")


def test_inline_constant_curvature(tmp_path, capsys):
    p = write(tmp_path, json.dumps({"algebra": "su2", "metric": "identity", "target": "curvature",
                                    "checks": ["constant_curvature"]}))
    code, rep = run_json(capsys, ["run", p])
    assert code == 0
    res = rep["checks"][0]["result"]
    assert res["constant"] and res["kappa"] == pytest.approx(0.25, abs=1e-8)
    p = write(tmp_path, json.dumps({"algebra": "abelian:4", "target": "curvature", "checks": ["constant_curvature"]}))
    code, rep = run_json(capsys, ["run", p])
    assert rep["checks"][0]["result"]["kappa"] == pytest.approx(0.0, abs=1e-12)


def test_malformed_json_exit_1(tmp_path, capsys):
    p = write(tmp_path, '{"algebra": "su2",\n "target": curvature}')
    assert main(["run", p]) == 1
    err = capsys.readouterr().err
    assert "line 2" in err and "column" in err


def test_schema_error_reports_line_and_field(tmp_path, capsys):
    p = write(tmp_path, '{"algebra": "su2",\n "target": "curvature",\n "checks": [42]}')
    assert main(["run", p]) == 1
    err = capsys.readouterr().err
    assert "line 3" in err and "checks[0]" in err


def test_parse_raises_schema_error():
    with pytest.raises(SchemaError, match="target"):
        scenario.parse('{"algebra": "su2", "target": "nonsense", "checks": ["jacobi"]}')


def test_unknown_check_and_algebra(tmp_path, capsys):
    p = write(tmp_path, json.dumps({"algebra": "su2", "target": "curvature", "checks": ["no_such_check"]}))
    assert main(["run", p]) == 1
    p = write(tmp_path, json.dumps({"algebra": "su7", "target": "curvature", "checks": ["killing_form"]}))
    assert main(["run", p]) == 1
    capsys.readouterr()


def test_dimension_mismatch_is_input_error(tmp_path, capsys):
    p = write(tmp_path, json.dumps({"algebra": "su2", "target": "germ", "germ": {"tangent": [[1, 0]], "eta": [0, 0, 1]},
                                    "checks": ["prop9"]}))
    assert main(["run", p]) == 1
    assert "field" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["run", "/nonexistent/scenario.json"]) == 1
    capsys.readouterr()


def test_failed_expectation_exit_2(tmp_path, capsys):
    p = write(tmp_path, json.dumps({"algebra": "su2", "metric": "identity", "target": "curvature",
                                    "checks": [{"name": "sectional", "x": [1, 0, 0], "y": [0, 1, 0],
                                                "expect": {"sec": 0.3}}]}))
    assert main(["run", p]) == 2
    capsys.readouterr()


def test_expected_error_passes(tmp_path, capsys):
    p = write(tmp_path, json.dumps({"algebra": "su2", "metric": "identity", "target": "germ",
                                    "germ": {"tangent": [[1, 0, 0], [0, 1, 0]], "eta": [0, 0, 1],
                                             "gauss_term": [[0.3, 0], [0, 0.3]]},
                                    "checks": [{"name": "shape_operator", "expect": {"error": "InconsistentGaussTerm"}}]}))
    code, rep = run_json(capsys, ["run", p])
    assert code == 0 and rep["checks"][0]["verdict"] == "pass"


def test_json_round_trip_and_determinism(capsys):
    path = str(scenario.bundled_path("su2xsu2_nonadapted.json"))
    assert main(["run", path, "--json"]) == 0
    first = capsys.readouterr().out
    main(["run", path, "--json"])
    second = capsys.readouterr().out
    assert first == second
    rep = json.loads(first)
    assert json.loads(json.dumps(rep, sort_keys=True)) == rep
    assert rep["passed"] and rep["schema_version"] == "1"
    assert all("verdict" in c for c in rep["checks"])


def test_seed_flag_recorded(capsys):
    path = str(scenario.bundled_path("su2_constant_curvature.json"))
    _, rep = run_json(capsys, ["run", path, "--seed", "5"])
    assert rep["seed"] == 5


def test_tol_fd_flag(capsys):
    path = str(scenario.bundled_path("su2xR_umbilic.json"))
    _, rep = run_json(capsys, ["run", path, "--tol-fd", "1e-4"])
    assert rep["tolerances"]["fd"] == 1e-4 and rep["passed"]


def test_tolerance_env_override(monkeypatch, capsys):
    path = str(scenario.bundled_path("su2xR_umbilic.json"))
    monkeypatch.setenv("LIECURV_TOL_OVERRIDE", '{"fd": 1e-12}')
    assert main(["run", path]) == 2
    monkeypatch.setenv("LIECURV_TOL_OVERRIDE", '{"nope": 1}')
    assert main(["run", path]) == 1
    monkeypatch.setenv("LIECURV_TOL_OVERRIDE", "{not json")
    assert main(["run", path]) == 1
    capsys.readouterr()


def test_catalog_output(capsys):
    assert main(["catalog", "--algebras"]) == 0
    assert "su2 (dim 3, compact simple)" in capsys.readouterr().out
    assert main(["catalog", "--families"]) == 0
    assert "exp-graph (params: coefficients, source_dim" in capsys.readouterr().out
    assert main(["catalog", "--scenarios"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in scenario.bundled())


def test_unknown_suite_and_usage(capsys):
    assert main(["suite", "nonexistent"]) == 1
    assert main(["frobnicate"]) == 1
    assert main([]) == 1
    capsys.readouterr()


def test_suite_seed_8_same_verdicts():
    rep = run_suite("paper-verification", 8)
    assert rep["passed"]
    assert [c["passed"] for c in rep["criteria"]] == [True] * 10

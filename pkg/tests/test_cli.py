import csv
import io
import json

import pytest

from ldpu.cli import build_parser, parse_assignment, parse_mech, run
from ldpu.errors import ParameterError

CONCENTRATION = ["concentration", "--mech", "laplace", "--eps", "2", "--x", "0.5", "--a", "0.2", "--b", "0.8"]


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_concentration_example(capsys):
    code, out, _ = invoke(capsys, *CONCENTRATION)
    assert code == 0 and out.strip() == "0.4512"


def test_concentration_csv_and_json(capsys):
    _, out, _ = invoke(capsys, *CONCENTRATION, "--format", "csv")
    (rec,) = list(csv.DictReader(io.StringIO(out)))
    assert float(rec["probability"]) == pytest.approx(0.451188, abs=1e-6)
    assert rec["includes_left_atom"] == "false"
    _, out, _ = invoke(capsys, *CONCENTRATION, "--format", "json")
    (obj,) = json.loads(out)
    assert obj["family"] == "laplace" and obj["epsilon"] == 2.0


def test_radius_example(capsys):
    code, out, _ = invoke(capsys, "radius", "--model", "fixtures/nn2d", "--point", "0.5,0.5",
                          "--tau", "0.02", "--omega", "0.05", "--seed", "7")
    assert code == 0
    theta = float(out.split("=")[-1]) if "=" in out else float(out)
    assert theta == pytest.approx(0.20, abs=0.01)


def test_select_eps_zero_target_gives_range_minimum(capsys):
    code, out, _ = invoke(capsys, "select-eps", "--target", "0")
    assert code == 0 and out.strip() == "0.0100"


def test_select_eps_closed_form(capsys):
    _, out, _ = invoke(capsys, "select-eps", "--target", "0.8", "--theta", "0.3")
    assert float(out) == pytest.approx(5.365, abs=0.005)


def test_quantify_statement(capsys):
    code, out, _ = invoke(capsys, "quantify", "--model", "fixtures/nn2d", "--point", "0.5,0.5",
                          "--mech", "pm:4", "--seed", "7")
    assert code == 0
    assert out.startswith("With probability at least ")
    assert "pure 8-LDP" in out


def test_quantify_eps_grid_json(capsys):
    code, out, _ = invoke(capsys, "quantify", "--point", "0.5", "--lower", "0.2", "--upper", "0.8",
                          "--mech", "laplace", "--eps", "1,2", "--format", "json")
    assert code == 0
    records = json.loads(out)
    assert [r["epsilon"] for r in records] == [1.0, 2.0]
    assert records[1]["rho"] == pytest.approx(0.451188, abs=1e-6)


def test_sweep_csv_columns(capsys):
    _, out, _ = invoke(capsys, "sweep", "--families", "laplace,pm", "--eps", "2", "--thetas", "0.3", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0])[:7] == [
        "family", "epsilon", "theta_or_rect", "rho", "per_dim_probs", "composed_eps", "composed_delta"
    ]
    assert len(rows) == 2


# ---------------------------------------------------------------- exit codes


def test_unknown_flag_is_validation_error(capsys):
    code, _, err = invoke(capsys, "concentration", "--bogus")
    assert code == 2
    assert len(err.strip().splitlines()) == 1


def test_bad_mechanism_is_validation_error(capsys):
    code, _, err = invoke(capsys, "concentration", "--mech", "wat", "--x", "0.5")
    assert code == 2 and err.startswith("ldpu: error:")


def test_malformed_model_file(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text("{broken")
    code, _, err = invoke(capsys, "radius", "--model", str(path), "--point", "0.5,0.5")
    assert code == 2 and "not valid JSON" in err
    assert len(err.strip().splitlines()) == 1


def test_infeasible_target_is_runtime_error(capsys):
    code, _, err = invoke(capsys, "select-eps", "--target", "0.99", "--eps-range", "0.01,2")
    assert code == 1 and "not reachable" in err


def test_missing_subcommand(capsys):
    assert invoke(capsys)[0] == 2


# ---------------------------------------------------------------- seeds and manifests


def test_env_seed_and_flag_override(monkeypatch, capsys):
    argv = ["empirical", "--model", "fixtures/nn2d", "--point", "0.5,0.5", "--mech", "krr:1", "--n", "400",
            "--format", "json"]
    monkeypatch.setenv("LDPU_SEED", "5")
    from_env = invoke(capsys, *argv)[1]
    assert invoke(capsys, *argv, "--seed", "5")[1] == from_env
    monkeypatch.setenv("LDPU_SEED", "6")
    assert invoke(capsys, *argv, "--seed", "5")[1] == from_env


DETERMINISTIC = {
    "concentration": CONCENTRATION,
    "radius": ["radius", "--model", "fixtures/step1d", "--point", "0.5", "--seed", "3"],
    "hyperrect": ["hyperrect", "--model", "fixtures/step1d", "--point", "0.5", "--seed", "3"],
    "quantify": ["quantify", "--model", "fixtures/step1d", "--point", "0.5", "--mech", "pm:2", "--seed", "3"],
    "select-eps": ["select-eps", "--target", "0.7", "--family", "sw"],
    "sweep": ["sweep", "--eps", "1,2", "--thetas", "0.2,0.3", "--format", "csv"],
    "empirical": ["empirical", "--model", "fixtures/nn2d", "--point", "0.5,0.5", "--mech", "1=pm:2,2=krr:2:50",
                  "--n", "300", "--seed", "9"],
}


@pytest.mark.parametrize("name", list(DETERMINISTIC))
def test_manifest_replay_is_byte_identical(tmp_path, capsys, name):
    out = tmp_path / "result.txt"
    assert invoke(capsys, *DETERMINISTIC[name], "--out", str(out))[0] == 0
    manifest = json.loads((tmp_path / "result.txt.manifest.json").read_text())
    assert manifest["command"] == name
    assert manifest["outputs"] == [str(out)]
    assert {"seed", "tool_version", "parameters"} <= set(manifest)
    again = tmp_path / "again.txt"
    assert invoke(capsys, "replay", str(tmp_path / "result.txt.manifest.json"), "--out", str(again))[0] == 0
    assert again.read_bytes() == out.read_bytes()


def test_fixtures_export_replay(tmp_path, capsys):
    first, second = tmp_path / "a", tmp_path / "b"
    listing = tmp_path / "list.txt"
    invoke(capsys, "fixtures", "export", "--dir", str(first), "--out", str(listing))
    manifest = json.loads((tmp_path / "list.txt.manifest.json").read_text())
    manifest["parameters"]["dir"] = str(second)
    (tmp_path / "m2.json").write_text(json.dumps(manifest))
    invoke(capsys, "replay", str(tmp_path / "m2.json"), "--out", str(tmp_path / "list2.txt"))
    names = sorted(p.name for p in first.iterdir())
    assert names and names == sorted(p.name for p in second.iterdir())
    for n in names:
        assert (first / n).read_bytes() == (second / n).read_bytes()


def test_exported_fixture_loads_as_model(tmp_path, capsys):
    invoke(capsys, "fixtures", "export", "--dir", str(tmp_path), "--names", "step1d")
    code, out, _ = invoke(capsys, "radius", "--model", str(tmp_path / "step1d.json"), "--point", "0.5")
    assert code == 0 and out.strip()


# ---------------------------------------------------------------- help and parsing


def _subparsers(parser):
    for action in parser._actions:
        if action.__class__.__name__ == "_SubParsersAction":
            for name, sub in action.choices.items():
                yield name, sub
                yield from ((f"{name} {n}", s) for n, s in _subparsers(sub))


@pytest.mark.parametrize("name,sub", list(_subparsers(build_parser())))
def test_help_lists_every_flag_with_default(name, sub):
    text = " ".join(sub.format_help().split())
    for action in sub._actions:
        if not action.option_strings or action.dest in ("help", "version"):
            continue
        assert action.option_strings[-1] in text, (name, action.dest)
        if not action.required:
            assert f"(default: {action.default})" in text, (name, action.dest)


def test_help_exits_zero(capsys):
    assert invoke(capsys, "sweep", "--help")[0] == 0


@pytest.mark.parametrize("text,expected", [
    ("laplace", ("laplace", None, 0.0, 100)),
    ("pm:2", ("pm", 2.0, 0.0, 100)),
    ("gaussian:1", ("gaussian", 1.0, 0.1, 100)),
    ("gaussian:1:0.05", ("gaussian", 1.0, 0.05, 100)),
    ("krr:2:50", ("krr", 2.0, 0.0, 50)),
    ("exponential:2:0.1:50", ("exponential", 2.0, 0.1, 50)),
])
def test_parse_mech(text, expected):
    spec = parse_mech(text)
    assert (spec.family, spec.eps, spec.delta, spec.k) == expected


@pytest.mark.parametrize("text", ["", "foo:1", "pm:x", "pm:1:2:3:4:5"])
def test_parse_mech_rejects(text):
    with pytest.raises(ParameterError):
        parse_mech(text)


def test_parse_assignment_one_based():
    specs = parse_assignment("1=pm:2,3=krr:2:100", 3)
    assert sorted(specs) == [0, 2]
    assert specs[2].k == 100
    assert sorted(parse_assignment("sw:1", 2)) == [0, 1]
    with pytest.raises(ParameterError):
        parse_assignment("4=pm:1", 3)

import csv
import json
from fractions import Fraction

import pytest

from closure14.cli import SAMPLE_POINT, main
from closure14.closure import flux_tensors
from closure14.solutions import SolutionParams, build_H
from closure14.thermo import synthetic_table, write_thermo_csv

F = Fraction
BETA1 = {"beta": {"1": "1"}, "F": "G1"}
ONE = {"monomials": [{"lam_exp": 0, "psi": None, "num": 1, "den": 1}]}


def _params(tmp_path, data, name="params.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def _run(args, capsys):
    code = main(args)
    return code, capsys.readouterr()


def test_generate_zero_params(tmp_path, capsys):
    code, out = _run(["generate", "--order", "2", "--params", _params(tmp_path, {})], capsys)
    assert code == 0
    data = json.loads(out.out)
    for per_order in data["closure_tensors"]["tensors"]["F_kij"]:
        assert all(F(x) == 0 for x in per_order)


def test_generate_writes_both_files(tmp_path, capsys):
    out_dir = tmp_path / "out"
    code, _ = _run(["generate", "--order", "3", "--params", _params(tmp_path, BETA1),
                    "--out", str(out_dir)], capsys)
    assert code == 0
    tensors = json.loads((out_dir / "closure_tensors.json").read_text(encoding="utf-8"))
    want = flux_tensors(build_H(SolutionParams.from_json(BETA1), 5), 3, SAMPLE_POINT).to_json()
    assert tensors["tensors"] == json.loads(json.dumps(want))
    assert json.loads((out_dir / "theta_table.json").read_text(encoding="utf-8"))


def test_generate_is_byte_identical(tmp_path, capsys):
    p = _params(tmp_path, BETA1)
    outs = []
    for name in ("a", "b"):
        main(["generate", "--order", "2", "--params", p, "--out", str(tmp_path / name)])
        outs.append((tmp_path / name / "closure_tensors.json").read_bytes())
    assert outs[0] == outs[1]


@pytest.mark.parametrize("args", [
    ["generate", "--order", "-1"],
    ["generate", "--params", "/nonexistent/params.json"],
    ["verify", "--tol", "0"],
    ["nosuchcommand"],
    ["xmat"],
    ["xmat", "--velocity", "1,2"],
    ["appendix2"],
])
def test_input_errors_exit_2(args, capsys):
    code, _ = _run(args, capsys)
    assert code == 2


def test_malformed_json_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    code, out = _run(["generate", "--params", str(bad)], capsys)
    assert code == 2 and "not valid JSON" in out.err


def test_bad_params_exit_2(tmp_path, capsys):
    code, _ = _run(["generate", "--params", _params(tmp_path, {"F": "G7"})], capsys)
    assert code == 2


def test_conflicting_seed_table_exit_2(tmp_path, capsys):
    seeds = {"max_order": 4, "max_s": 4, "entries": [{"p": 0, "q": 0, "r": 0, "s": 0,
                                                      "value": ONE}]}
    code, out = _run(["generate", "--order", "2", "--seed-table",
                      _params(tmp_path, seeds, "seeds.json")], capsys)
    assert code == 2 and "conflict" in out.err


def test_verify_passes(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _ = _run(["verify", "--order", "2", "--points", "5", "--params",
                    _params(tmp_path, BETA1), "--out", str(out)], capsys)
    rep = json.loads(out.read_text(encoding="utf-8"))
    assert code == 0 and rep["pass"] and rep["failed"] == []
    names = {c["condition"] for c in rep["checks"]}
    assert {"theta_table", "beta0_obstruction", "low_order_flux_symmetry"} <= names


def test_verify_injected_beta0_fails(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _ = _run(["verify", "--order", "2", "--points", "5", "--inject-beta0", "1",
                    "--out", str(out)], capsys)
    rep = json.loads(out.read_text(encoding="utf-8"))
    assert code == 1 and not rep["pass"]
    assert "beta0_obstruction" in rep["failed"]


def test_profile_csv(tmp_path, capsys):
    code, out = _run(["profile", "--order", "3", "--params", _params(tmp_path, BETA1)], capsys)
    rows = list(csv.DictReader(out.out.splitlines()))
    assert code == 0 and [r["order"] for r in rows] == ["0", "1", "2", "3"]
    assert all(F(r["antisym_F"]) == 0 == F(r["antisym_G"]) for r in rows[:3])
    assert F(rows[3]["antisym_F"]) == F(9, 2)


def test_profile_float_mode(tmp_path, capsys):
    code, out = _run(["profile", "--order", "3", "--mode", "float", "--params",
                      _params(tmp_path, BETA1)], capsys)
    rows = list(csv.DictReader(out.out.splitlines()))
    assert code == 0 and float(rows[3]["antisym_F"]) > 0


def test_xmat(capsys):
    code, out = _run(["xmat", "--velocity", "1,0,1/2"], capsys)
    data = json.loads(out.out)
    assert code == 0 and data["velocity"] == ["1", "0", "1/2"]
    assert data["X"][10][0] == "5/4"
    assert len(data["X"]) == 14 and all(len(r) == 14 for r in data["X"])


@pytest.mark.parametrize("C,code,message", [
    (7.0, 0, "broken"),
    (0.0, 0, "first-order symmetry holds"),
])
def test_appendix2(tmp_path, capsys, C, code, message):
    path = tmp_path / "thermo.csv"
    write_thermo_csv(synthetic_table(lambda T: C / T), path)
    got, out = _run(["appendix2", "--thermo", str(path)], capsys)
    rep = json.loads(out.out)
    assert got == code and message in rep["message"]


def test_appendix2_rejects_f_equal_T(tmp_path, capsys):
    path = tmp_path / "thermo.csv"
    write_thermo_csv(synthetic_table(lambda T: T), path)
    code, _ = _run(["appendix2", "--thermo", str(path)], capsys)
    assert code == 1


def test_appendix2_missing_file(capsys):
    code, _ = _run(["appendix2", "--thermo", "/nonexistent.csv"], capsys)
    assert code == 2

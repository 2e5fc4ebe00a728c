import json
import subprocess
import sys

import numpy as np
import pytest

from adiabatic_ss import io
from adiabatic_ss import InvalidInput
from adiabatic_ss.cli import build_model, main, parse_model_spec


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def random_file(tmp_path, capsys):
    path = tmp_path / "c.json"
    assert run_cli(capsys, "model", "--out", str(path), "random", "--seed", "3", "--q", "2")[0] == 0
    return path


def test_model_kronecker_to_stdout(capsys):
    code, out, _ = run_cli(capsys, "model", "kronecker", "--alpha", "golden", "--N", "2")
    assert code == 0
    C = io.parse_complex(out)
    assert np.all(C.dims == 25)


def test_pages_check_on_rational_torus(capsys):
    code, out, _ = run_cli(capsys, "pages", "--model", "kronecker:alpha=0,N=4", "--check")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "results.v1" and doc["pass"]
    assert set(doc["result"]["pages"]["2"]["dims"].values()) == {1}
    assert doc["result"]["betti"] == [1, 2, 1]


@pytest.mark.parametrize("command", ["check", "pages", "sweep", "theorem-a", "tower", "forman", "compare-nested"])
def test_every_command_on_random_input(capsys, random_file, command):
    code, out, err = run_cli(capsys, command, "--input", str(random_file))
    assert code == 0, err
    assert json.loads(out)["command"] == command


def test_tower_kinds(capsys, random_file):
    for kind in ("hodge", "forman", "mazzeo-melrose"):
        code, out, _ = run_cli(capsys, "tower", "--input", str(random_file), "--kind", kind)
        assert code == 0


def test_corrupted_complex_exit_one(tmp_path, capsys):
    doc = {"schema": "complex.v1", "p": 2, "q": 0, "dims": [[1, 1, 1]],
           "d01": {"0,0": [[1.0]], "0,1": [[1.0]]}, "d10": {}, "d2m1": {}}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, out, err = run_cli(capsys, "check", "--input", str(path))
    assert code == 1
    assert "d01_squared" in err
    assert json.loads(out)["pass"] is False


def test_missing_key_exit_two(tmp_path, capsys, random_file):
    doc = json.loads(random_file.read_text())
    del doc["d10"]
    path = tmp_path / "missing.json"
    path.write_text(json.dumps(doc))
    code, _, err = run_cli(capsys, "check", "--input", str(path))
    assert code == 2 and "d10" in err


def test_malformed_json_exit_two(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, _, err = run_cli(capsys, "pages", "--input", str(path))
    assert code == 2 and "line 1" in err


def test_both_sources_rejected(capsys, random_file):
    code, _, _ = run_cli(capsys, "check", "--input", str(random_file), "--model", "product:N=2")
    assert code == 2


def test_bad_tolerance_rejected(capsys):
    code, _, _ = run_cli(capsys, "check", "--model", "product:N=2", "--tol-rank", "0")
    assert code == 2


def test_sweep_csv_and_out(tmp_path, capsys):
    out_path, csv_path = tmp_path / "r.json", tmp_path / "b.csv"
    code, out, _ = run_cli(capsys, "theorem-a", "--model", "kronecker:alpha=0,N=3",
                           "--out", str(out_path), "--csv", str(csv_path))
    assert code == 0 and out == ""
    doc = io.load_results(out_path)
    assert doc["pass"]
    sw = io.load_branches_csv(csv_path)
    assert sw.h_grid.size == 12


def test_liouville_command(capsys):
    code, out, _ = run_cli(capsys, "liouville", "--alpha", "sqrt2", "--N-list", "2,4,8")
    assert code == 0
    assert len(json.loads(out)["result"]["rows"]) == 3


def test_parse_model_spec():
    assert parse_model_spec("kronecker:alpha=golden,N=2") == ("kronecker", {"alpha": "golden", "N": "2"})
    C = build_model(*parse_model_spec("random:seed=4,q=2"))
    assert C.q == 2
    with pytest.raises(InvalidInput):
        parse_model_spec("kronecker:N")
    with pytest.raises(InvalidInput):
        build_model(*parse_model_spec("sphere:N=2"))


def test_reports_are_deterministic(capsys):
    a = run_cli(capsys, "pages", "--model", "random:seed=5,q=2")[1]
    b = run_cli(capsys, "pages", "--model", "random:seed=5,q=2")[1]
    assert io.canonical_report(json.loads(a)) == io.canonical_report(json.loads(b))


def test_console_pipeline():
    model = subprocess.run([sys.executable, "-m", "adiabatic_ss.cli", "model", "kronecker", "--alpha", "0", "--N", "2"],
                           capture_output=True, text=True, check=True)
    res = subprocess.run([sys.executable, "-m", "adiabatic_ss.cli", "pages", "--check"],
                         input=model.stdout, capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["pass"]

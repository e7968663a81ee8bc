import json
import subprocess
import sys

import pytest

from kcsym.cli import EXIT_BUILD, EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_table(capsys):
    code, out, _ = run(capsys, "verify", "--system", "3p", "--pq", "1,1,1,1", "--seed", "7")
    assert code == EXIT_OK
    assert "3P-JL3" in out and "PASS" in out
    assert out.strip().splitlines()[-1].endswith("skipped")


def test_verify_json_selection(capsys):
    code, out, _ = run(capsys, "verify", "--ids", "4P-KK,4P-JJ", "--json")
    data = json.loads(out)
    assert code == EXIT_OK
    assert data["schema"] == 1 and data["command"] == "verify"
    assert [r["id"] for r in data["reports"]] == ["4P-JJ", "4P-KK"]
    assert data["summary"]["FAIL_FITTED"] == 1


def test_verify_without_fit_is_unhealthy(capsys):
    code, _, _ = run(capsys, "verify", "--ids", "4P-JJ", "--no-fit")
    assert code == EXIT_FAIL


def test_explicit_params(capsys):
    code, out, _ = run(capsys, "verify", "--ids", "4P-KK", "--params", "alpha=1/2,b=1/3,c=2/5,u=7/3,d=1/7", "--json")
    assert code == EXIT_OK
    assert json.loads(out)["params"]["u"] == "7/3"


def test_fit_command(capsys):
    code, out, _ = run(capsys, "fit", "--system", "3p", "--target", "[J1,J2]", "--basis", "J1^2; Pminus", "--json")
    data = json.loads(out)
    assert code == EXIT_OK
    assert data["result"]["coefficients"] == ["-2/1", "-2/1"]


def test_fit_without_solution(capsys):
    code, out, _ = run(capsys, "fit", "--target", "K1", "--basis", "J1")
    assert code == EXIT_FAIL and "no solution" in out


def test_fit_unknown_name(capsys):
    code, _, err = run(capsys, "fit", "--target", "Nope", "--basis", "J1")
    assert code == EXIT_USAGE and "Nope" in err


def test_ladders(capsys):
    code, out, _ = run(capsys, "ladders")
    assert code == EXIT_OK
    assert "ladder cases within tolerance" in out


def test_ladders_failing_file(capsys, tmp_path):
    f = tmp_path / "cases.txt"
    f.write_text("Q9+ | n=1\n")
    code, out, _ = run(capsys, "ladders", "--cases", str(f))
    assert code == EXIT_FAIL and "FAIL" in out


def test_multiplet(capsys):
    code, out, _ = run(capsys, "multiplet", "--system", "4p", "--pq", "1,1,1,1", "--seed-label", "2,0,0",
                       "--bound", "8", "--json")
    data = json.loads(out)
    assert code == EXIT_OK and data["shared_u"]
    assert [2, 0, 0] in data["labels"]


def test_multiplet_three_param(capsys):
    code, out, _ = run(capsys, "multiplet", "--system", "3p", "--seed-label", "1,0,3/2", "--bound", "3")
    assert code == EXIT_OK and "(n, m, rho)" in out


def test_multiplet_needs_seed(capsys):
    code, _, err = run(capsys, "multiplet")
    assert code == EXIT_USAGE and "seed-label" in err


def test_wronskian(capsys):
    code, out, _ = run(capsys, "wronskian")
    assert code == EXIT_OK
    assert out.startswith("identity holds, sign = +1")


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_unknown_flag():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--colour"])
    assert exc.value.code == 2


@pytest.mark.parametrize("argv", [["verify", "--pq", "2,4,1,1"], ["verify", "--params", "alpha=1,b=0,c=0,u=0"]])
def test_construction_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_BUILD and "construction failed" in err


@pytest.mark.parametrize("argv", [["verify", "--pq", "1,1,1"], ["verify", "--system", "5p"],
                                  ["verify", "--params", "alpha=1"]])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == EXIT_USAGE


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults for this run\nsystem = 3p\nids = 3P-JL3\njson = true\nseed = 3\n")
    code, out, _ = run(capsys, "verify", "--config", str(cfg))
    first = json.loads(out)
    assert code == EXIT_OK and first["system"] == "3p" and len(first["reports"]) == 1
    code, out, _ = run(capsys, "verify", "--config", str(cfg), "--ids", "3P-JL3,3P-KL2", "--seed", "4")
    second = json.loads(out)
    assert len(second["reports"]) == 2
    assert second["params"] != first["params"]


def test_bad_config(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    code, _, err = run(capsys, "verify", "--config", str(cfg))
    assert code == EXIT_USAGE and "unknown key" in err


@pytest.mark.parametrize("argv", [
    ["verify", "--system", "4p", "--seed", "5", "--json"],
    ["multiplet", "--seed-label", "2,0,0", "--json"],
    ["ladders", "--json"],
])
def test_json_is_byte_identical(capsys, argv):
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_entry_point_subprocess():
    res = subprocess.run([sys.executable, "-m", "kcsym.cli", "wronskian", "--json"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["sign"] == 1

import json

import pytest

from wfexcursions import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("text,expected", [("0.1,0.2", [0.1, 0.2]), ("0:1:3", [0.0, 0.5, 1.0])])
def test_parse_grid(text, expected):
    assert cli.parse_grid(text) == pytest.approx(expected)


def test_parse_grid_error():
    with pytest.raises(cli.ConfigError):
        cli.parse_grid("a:b")


def test_eigen_csv_has_provenance(capsys):
    code, out, _ = run(capsys, "eigen", "--x-grid", "0.1,0.9")
    lines = out.splitlines()
    assert code == 0
    assert lines[0].startswith("# ")
    assert json.loads(lines[0][2:])["config"]["lambda"] == 0.1
    assert lines[1] == "x,phi_minus,phi_plus,theta1,theta2,lambda"
    assert len(lines) == 2 + 2 * 3


def test_output_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.main(["green", "--theta1", "0.3", "--theta2", "0.7", "--x-grid", "0.2,0.5", "--out", str(a)])
    cli.main(["green", "--theta1", "0.3", "--theta2", "0.7", "--x-grid", "0.2,0.5", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    assert b"\r\n" not in a.read_bytes()


def test_json_output(capsys):
    code, out, _ = run(capsys, "resolvent", "--theta1", "0.5", "--theta2", "0.5", "--x-grid", "0.5", "--format", "json")
    body = json.loads(out)
    assert code == 0
    # R 1(x) = 1/lambda
    rec = body["records"][0]
    assert rec["function"] == "identity" and rec["value"] == pytest.approx(0.5)


def test_config_error_exit_code(capsys):
    code, _, err = run(capsys, "eigen", "--theta1", "1.5")
    assert code == cli.EXIT_CONFIG and "config error" in err


def test_numeric_failure_exit_code(capsys):
    code, _, _ = run(capsys, "entrance", "--t-grid", "0.001", "--x-grid", "0.5")
    assert code == cli.EXIT_NUMERIC


def test_verify_passes_and_detects_perturbation(capsys):
    code, out, _ = run(capsys, "verify", "--theta1", "0.3", "--theta2", "0.7")
    assert code == 0 and out.count("true") >= 8
    code, _, err = run(capsys, "verify", "--theta1", "0.3", "--theta2", "0.7", "--perturb-gamma", "1e-4")
    assert code == cli.EXIT_VERIFY


def test_simulate_independent_of_threads(capsys):
    args = ["simulate", "--estimate", "exit", "--theta1", "0.5", "--theta2", "0.5", "--x0", "0.25",
            "--n-paths", "3000", "--seed", "3"]
    _, one, _ = run(capsys, *args, "--threads", "1")
    _, three, _ = run(capsys, *args, "--threads", "3")
    assert one.splitlines()[2:] == three.splitlines()[2:]


def test_hausdorff_command(capsys):
    code, out, _ = run(capsys, "hausdorff", "--theta1", "0.3", "--theta2", "0.5", "--format", "json")
    recs = json.loads(out)["records"]
    assert code == 0
    for r in recs:
        assert abs(r["slope"] - r["expected"]) < 0.05


def test_entrance_command(capsys):
    code, out, _ = run(capsys, "entrance", "--t-grid", "0.5", "--x-grid", "0.05,0.5", "--format", "json")
    recs = json.loads(out)["records"]
    assert code == 0 and recs[0]["density"] > recs[1]["density"] > 0

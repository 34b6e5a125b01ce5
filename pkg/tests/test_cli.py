import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from trapcc.cli import main

from conftest import SQUARE_LAMBDA, UNIT_SQUARE


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_square(capsys):
    code, out, _ = run(capsys, "solve", "--masses", "1,1,1,1")
    assert code == 0
    data = json.loads(out)
    np.testing.assert_allclose(data["r"], UNIT_SQUARE, atol=1e-8)
    assert data["lambda"] == pytest.approx(SQUARE_LAMBDA, abs=1e-8)
    assert data["certificate"]["passed"]


@pytest.mark.parametrize("masses", ["1,1,-1,1", "1,1,1", "a,b,c,d", "1,0,1,1"])
def test_solve_bad_masses(masses):
    proc = subprocess.run(
        [sys.executable, "-m", "trapcc", "solve", "--masses", masses],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1
    assert "error" in proc.stderr


def test_solve_is_deterministic(capsys):
    first = run(capsys, "solve", "--masses", "1,2,3,4", "--seed", "7")
    second = run(capsys, "solve", "--masses", "1,2,3,4", "--seed", "7")
    assert first == second
    # the critical point exists but is not a trapezoid
    assert first[0] == 2
    assert json.loads(first[1])["realizable"] is False


def test_probe_report(capsys):
    code, out, _ = run(capsys, "probe", "--masses", "1,1,1,1", "--starts", "30")
    assert code == 0
    data = json.loads(out)
    assert data["n_starts"] == 30
    assert data["distinct_realizable_clusters"] == 1


def test_certify_roundtrip(tmp_path, capsys):
    square = tmp_path / "square.json"
    assert main(["solve", "--masses", "1,1,1,1", "--starts", "10", "-o", str(square)]) == 0
    code, out, _ = run(capsys, "certify", "--input", str(square))
    assert code == 0
    assert json.loads(out)["passed"]

    data = json.loads(square.read_text())
    data["lambda"] = -data["lambda"]
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(data))
    code, out, _ = run(capsys, "certify", "--input", str(tampered))
    assert code == 4
    report = json.loads(out)
    assert not report["passed"] and not report["lambda_positive"]


def test_certify_unconverged(tmp_path, capsys):
    square = tmp_path / "square.json"
    main(["solve", "--masses", "1,1,1,1", "--starts", "10", "-o", str(square)])
    data = json.loads(square.read_text())
    data["residual_norm"] = 1e-3
    square.write_text(json.dumps(data))
    code, _, err = run(capsys, "certify", "--input", str(square))
    assert code == 4 and "certificate failed" in err


def test_certify_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "certify", "--input", str(tmp_path / "nope.json"))
    assert code == 1 and "cannot read" in err


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--grid", "3", "--starts", "20")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 27
    assert all(int(row["clusters"]) <= 1 for row in rows)


def test_sweep_json(capsys):
    code, out, _ = run(capsys, "sweep", "--grid", "1", "--starts", "5", "--format", "json")
    assert code == 0
    assert json.loads(out)[0]["distinct_realizable_clusters"] == 1


def test_verify_identities_small(capsys):
    code, out, _ = run(capsys, "verify-identities", "--samples", "10")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 7 and all(line.startswith("PASS") for line in lines)


def test_verify_identities_injected_fault(capsys):
    code, out, _ = run(capsys, "verify-identities", "--samples", "100", "--inject-fault", "k-sign")
    assert code == 4
    assert "FAIL 2H = FQ - K^2" in out
    witness = next(line for line in out.splitlines() if line.startswith("witness"))
    assert len(json.loads(witness.split(": ", 1)[1])) == 6


def test_missing_subcommand():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 1

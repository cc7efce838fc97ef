import csv
import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from azrenyi.channels import QuantumMap
from azrenyi.cli import main
from azrenyi.fileio import read_channel, read_matrix
from oracles import classical_q, mp_q

FIX = Path(__file__).parent / "fixtures"


def fx(name):
    return str(FIX / name)


def run_json(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_compute_identical_states(capsys):
    code, out = run_json(capsys, "compute", "--psi", fx("psi_qubit.json"), "--phi", fx("psi_qubit.json"),
                         "--alpha", "0.5", "--z", "1")
    assert code == 0
    assert out["D"] == pytest.approx(0, abs=1e-12)
    assert out["region"] == "dpi-i" and out["psi_trace"] == pytest.approx(1)


def test_compute_orthogonal_pure_states(capsys):
    code, out = run_json(capsys, "compute", "--psi", fx("pure0.json"), "--phi", fx("pure1.json"),
                         "--alpha", "2", "--z", "1")
    assert code == 0 and out["Q"] == "inf" and out["D"] == "inf"


def test_compute_commuting_fixture_matches_classical(capsys):
    p = np.real(np.diag(read_matrix(fx("psi_commuting.json"))))
    q = np.real(np.diag(read_matrix(fx("phi_commuting.json"))))
    for z in ("0.5", "1", "3"):
        code, out = run_json(capsys, "compute", "--psi", fx("psi_commuting.json"),
                             "--phi", fx("phi_commuting.json"), "--alpha", "2", "--z", z)
        assert code == 0
        assert out["Q"] == pytest.approx(classical_q(p, q, 2.0), rel=1e-12)
        assert out["Q"] == pytest.approx(4 / 3, rel=1e-12)


def test_compute_variants(capsys):
    args = ("compute", "--psi", fx("psi_qubit.json"), "--phi", fx("phi_qubit.json"))
    _, petz = run_json(capsys, *args, "--alpha", "0.5", "--variant", "petz")
    _, auto = run_json(capsys, *args, "--alpha", "0.5", "--z", "1")
    assert petz == auto
    _, sand = run_json(capsys, *args, "--alpha", "2", "--variant", "sandwiched")
    assert sand["Q"] == pytest.approx(mp_q(read_matrix(fx("psi_qubit.json")), read_matrix(fx("phi_qubit.json")), 2, 2),
                                      rel=1e-10)
    _, d1 = run_json(capsys, *args, "--alpha", "1", "--variant", "d1")
    assert d1["Q"] is None and d1["region"] == "d1" and d1["D"] > 0
    code, inf = run_json(capsys, *args, "--alpha", "2", "--z", "inf")
    assert code == 0 and inf["region"] == "outside"


def test_compute_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["compute", "--psi", str(bad), "--phi", fx("psi_qubit.json"), "--alpha", "0.5", "--z", "1"]) == 2
    assert "error" in capsys.readouterr().err
    args = ["compute", "--psi", fx("psi_qubit.json"), "--phi", fx("phi_qubit.json")]
    assert main(args + ["--alpha", "1", "--z", "1"]) == 2
    assert main(args + ["--alpha", "0.5"]) == 2
    assert main(args + ["--alpha", "-1", "--z", "1"]) == 2
    assert main(args + ["--alpha", "abc", "--z", "1"]) == 2
    assert main(["compute", "--psi", fx("psi_block.json"), "--phi", fx("phi_qubit.json"), "--alpha", "0.5", "--z", "1"]) == 2
    assert main(["compute", "--psi", fx("pure0.json"), "--phi", fx("pure1.json"), "--alpha", "2", "--z", "inf"]) == 2
    assert main(["compute"]) == 2
    assert capsys.readouterr().out == ""


def sweep(out, alphas="0.5,1.5,2", zs="1,2,inf"):
    return main(["sweep", "--psi", fx("psi_qubit.json"), "--phi", fx("phi_qubit.json"),
                 "--alphas", alphas, "--zs", zs, "--out", str(out)])


def test_sweep_matches_golden(tmp_path):
    out = tmp_path / "s.csv"
    assert sweep(out) == 0
    assert out.read_bytes() == (FIX / "golden_sweep_qubit.csv").read_bytes()


def test_golden_values_against_high_precision():
    psi, phi = read_matrix(fx("psi_qubit.json")), read_matrix(fx("phi_qubit.json"))
    with open(FIX / "golden_sweep_qubit.csv") as fh:
        for row in csv.DictReader(fh):
            a, z = float(row["alpha"]), float(row["z"])
            if math.isinf(z):
                continue
            assert float(row["Q"]) == pytest.approx(mp_q(psi, phi, a, z), rel=1e-12)


def test_sweep_shape_and_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert sweep(a, "0.3,0.7,2.5", "0.8,1.6") == 0
    assert sweep(b, "0.3,0.7,2.5", "0.8,1.6") == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "alpha,z,Q,D,region" and len(lines) == 7


def test_sweep_unwritable_path(tmp_path, capsys):
    assert sweep(tmp_path / "missing" / "s.csv") == 3
    assert "cannot write" in capsys.readouterr().err


def test_sweep_bad_grid(tmp_path):
    assert sweep(tmp_path / "s.csv", "1", "1") == 2
    assert sweep(tmp_path / "s.csv", "0.5", "x") == 2


def test_random_state(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["random", "--kind", "state", "--dim", "2", "--seed", "1", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    for seed in range(10):
        assert main(["random", "--kind", "state", "--dim", "4", "--seed", str(seed), "--rank", "2", "--out", str(a)]) == 0
        rho = read_matrix(a)
        assert np.allclose(rho, rho.conj().T) and np.linalg.eigvalsh(rho).min() >= -1e-14
        assert abs(np.trace(rho) - 1) <= 1e-12
        assert np.linalg.matrix_rank(rho, tol=1e-10) == 2


def test_random_rank_too_large(tmp_path):
    assert main(["random", "--kind", "state", "--dim", "2", "--seed", "1", "--rank", "3",
                 "--out", str(tmp_path / "x.json")]) == 2


def test_random_channel(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["random", "--kind", "channel", "--dim", "3", "--dim-in", "2", "--seed", "5",
                     "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    gamma = read_channel(a)
    assert isinstance(gamma, QuantumMap)
    assert gamma.dim_in == 2 and gamma.dim_out == 3
    assert gamma.unital and gamma.completely_positive and gamma.dual.trace_preserving


def test_check_dpi(capsys):
    code, out = run_json(capsys, "check", "--suite", "dpi", "--trials", "200", "--seed", "7")
    assert code == 0 and out["ok"]
    assert out["seed"] == 7 and out["suites"][0]["suite"] == "dpi"


def test_check_all_within_budget(capsys):
    start = time.perf_counter()
    code, out = run_json(capsys, "check", "--suite", "all", "--trials", "50")
    assert time.perf_counter() - start <= 120
    assert code == 0 and len(out["suites"]) == 6


def test_check_errors(capsys):
    assert main(["check", "--suite", "nonsense"]) == 2
    assert main(["check", "--suite", "dpi", "--dim", "9"]) == 2
    assert main(["check", "--suite", "dpi", "--trials", "0"]) == 2
    assert main(["check", "--suite", "dpi", "--channel", fx("pinching_channel.json")]) == 2


def test_check_sufficiency_fixture(capsys):
    code, out = run_json(capsys, "check", "--suite", "sufficiency", "--trials", "5",
                         "--channel", fx("pinching_channel.json"), "--psi", fx("psi_block.json"),
                         "--phi", fx("phi_block.json"), "--alpha", "0.5", "--z", "1")
    assert code == 0
    assert out["fixture"]["equality"] and out["fixture"]["recovered"]


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "azrenyi", "compute", "--psi", fx("psi_qubit.json"),
                          "--phi", fx("phi_qubit.json"), "--alpha", "0.5", "--z", "1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stderr == ""
    assert json.loads(res.stdout)["Q"] == pytest.approx(0.8679413153012026, rel=1e-12)

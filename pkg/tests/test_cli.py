import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from extprob import schemas
from extprob.bimodule import (
    diagonal,
    operator_to_json,
    random_hermitian,
    random_vector,
    vector_from_json,
    vector_to_json,
)
from extprob.cli import main
from extprob.counterexample import build
from extprob.detector import ColorModel
from extprob.extmeasure import SignedLHVModel, witness_model
from extprob.hypercomplex import CLIFFORD, QUATERNION


def write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def error_of(err):
    return json.loads(err.strip().splitlines()[0])


@pytest.fixture
def files(tmp_path, rng):
    A = random_hermitian(QUATERNION, 3, rng)
    psi = random_vector(QUATERNION, 3, rng)
    ce = build()
    return {
        "A": write(tmp_path / "A.json", operator_to_json(A)),
        "A2": write(tmp_path / "A2.json", operator_to_json(A @ A)),
        "psi": write(tmp_path / "psi.json", vector_to_json(psi)),
        "B": write(tmp_path / "B.json", operator_to_json(ce.B)),
        "CA": write(tmp_path / "CA.json", operator_to_json(diagonal(CLIFFORD, [1.0, 1.0]))),
        "cpsi": write(tmp_path / "cpsi.json", vector_to_json(random_vector(CLIFFORD, 2, rng))),
        "g0": write(tmp_path / "g0.json", operator_to_json(diagonal(CLIFFORD, [CLIFFORD.unit(1)]))),
        "colors": write(tmp_path / "colors.json", {"colors": [{"n": -1, "p": 0.2}, {"n": 0, "p": 0.5},
                                                              {"n": 2, "p": 0.3}]}),
        "lhv": write(tmp_path / "lhv.json", witness_model().to_json()),
    }


# -- subcommands and round trips ------------------------------------------------

def test_verify_algebra(capsys):
    code, out, _ = run(["verify-algebra"], capsys)
    assert code == 0 and json.loads(out)["all_ok"]


def test_verify_algebra_fault_hook(capsys, monkeypatch):
    monkeypatch.setenv("EXTPROB_INJECT_FAULT", "gamma5_product")
    code, _, err = run(["verify-algebra"], capsys)
    assert code == 1 and "gamma5_product" in err


def test_verify_algebra_tiny_tolerance(capsys):
    code, out, _ = run(["verify-algebra", "--tol", "1e-30"], capsys)
    assert code == 1 and not json.loads(out)["all_ok"]


@pytest.mark.parametrize("lam,mu,compatible", [(1, 2, False), (1, 1, True)])
def test_counterexample(capsys, lam, mu, compatible):
    code, out, _ = run(["counterexample", "--lambda", str(lam), "--mu", str(mu)], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["all_ok"]
    assert doc["checks"]["compatibility"]["compatible"] is compatible


def test_spectral_roundtrip(capsys, files):
    code, out, _ = run(["spectral", "--operator", files["B"]], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["physical"]
    assert sorted(doc["eigenvalues"]) == [-1.0, 1.0]
    for v in doc["basis"]:
        jsonschema.validate(v, schemas.VECTOR)
        assert vector_from_json(v).ring is CLIFFORD


def test_spectral_not_physical(capsys, files):
    code, _, err = run(["spectral", "--operator", files["g0"]], capsys)
    assert code == 1
    e = error_of(err)
    assert e["error"] == "NotPhysical" and e["reason"]


def test_conjecture_scan_both_spellings(capsys):
    c1, o1, _ = run(["conjecture-scan", "--count", "5", "--seed", "2"], capsys)
    c2, o2, _ = run(["spectral", "--conjecture-scan", "5", "--seed", "2"], capsys)
    assert c1 == c2 == 0 and o1 == o2


def test_measure_born_case(capsys, files):
    code, out, _ = run(["measure", "--state", files["psi"], "--observable", files["A"]], capsys)
    doc = json.loads(out)
    assert code == 0
    assert abs(sum(doc["probabilities"]) - 1) <= 1e-12
    assert all(r["scalar"] >= 0 for r in doc["raw"])
    denom = sum(r["scalar"] for r in doc["raw"])
    assert doc["probabilities"] == pytest.approx([r["scalar"] / denom for r in doc["raw"]], abs=1e-15)


def test_measure_degenerate_state(capsys, files, tmp_path):
    zero = write(tmp_path / "zero.json", {"ring": "clifford", "rank": 2, "coeffs": [[[0, 0]] * 16] * 2})
    code, _, err = run(["measure", "--state", zero, "--observable", files["CA"]], capsys)
    assert code == 1 and error_of(err)["error"] == "DegenerateState"


@pytest.mark.parametrize("order", ["a-first", "b-first", "symmetric"])
def test_joint(capsys, files, order):
    code, out, _ = run(["joint", "--state", files["psi"], "--a", files["A"], "--b", files["A2"],
                        "--order", order], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["order"] == order
    assert abs(np.sum(doc["table"]) - 1) <= 1e-12


def test_joint_not_commuting(capsys, files, tmp_path):
    swap = write(tmp_path / "swap.json", {"ring": "clifford", "rank": 2, "entries": [
        [[1, 0]] + [[0, 0]] * 15 if (i in (1, 2)) else [[0, 0]] * 16 for i in range(4)]})
    code, _, err = run(["joint", "--state", files["cpsi"], "--a", files["B"], "--b", swap], capsys)
    assert code == 1 and error_of(err)["error"] == "NotCommuting"


def test_chsh_modes(capsys, files):
    code, out, _ = run(["chsh", "--mode", "raw", "--model", files["lhv"]], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["S"] == 6.0
    assert SignedLHVModel.from_json(doc["model"]).to_json() == witness_model().to_json()
    code, out, _ = run(["chsh", "--mode", "renorm"], capsys)
    assert json.loads(out)["S"] == 2 / 3
    code, out, _ = run(["chsh", "--mode", "quantum"], capsys)
    assert abs(json.loads(out)["S"] - 2 * np.sqrt(2)) <= 1e-6


def test_chsh_scan_csv(capsys, tmp_path):
    out_file = tmp_path / "s.csv"
    code, out, _ = run(["chsh", "--mode", "renorm", "--scan", "10000", "--seed", "7",
                        "--format", "csv", "--out", str(out_file)], capsys)
    assert code == 0 and "max |S|" in out and len(out.strip().splitlines()) == 1
    lines = out_file.read_text().splitlines()
    assert lines[0] == "index,S" and len(lines) == 10001
    assert max(abs(float(line.split(",")[1])) for line in lines[1:]) <= 2 + 1e-9


def test_chsh_bad_weights(capsys, tmp_path):
    bad = write(tmp_path / "bad.json", {"weights": [0.5, 0.6], "a_outcomes": [[1, 1], [1, 1]],
                                        "b_outcomes": [[1, 1], [1, 1]]})
    code, _, err = run(["chsh", "--mode", "raw", "--model", bad], capsys)
    assert code == 1 and error_of(err)["error"] == "WeightSumInvalid"


def test_detector_sim_roundtrip(capsys, files):
    code, out, _ = run(["detector-sim", "--model", files["colors"], "--shots", "100000", "--seed", "3"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["N"] == 100000
    assert sum(doc["counts"].values()) == 100000
    jsonschema.validate(doc["model"], schemas.COLOR_MODEL)
    assert ColorModel.from_json(doc["model"]) == ColorModel.from_mapping({-1: 0.2, 0: 0.5, 2: 0.3})


def test_detector_sim_exact_and_csv(capsys, files):
    code, out, _ = run(["detector-sim", "--model", files["colors"], "--exact"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["exact"]["P_a"] == pytest.approx(0.4) and doc["exact"]["coarse"] == 0.5
    code, out, _ = run(["detector-sim", "--model", files["colors"], "--shots", "1000", "--format", "csv"], capsys)
    assert code == 0 and out.splitlines()[0] == "n,count,P_n"


def test_detector_shards_and_workers_identical(capsys, files, tmp_path):
    outs = []
    for extra in ([], ["--shards", "4"], ["--workers", "2"]):
        path = tmp_path / f"r{len(outs)}.json"
        assert run(["detector-sim", "--model", files["colors"], "--shots", "300000", "--seed", "5",
                    "--out", str(path)] + extra, capsys)[0] == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


# -- determinism -----------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["chsh", "--mode", "renorm", "--scan", "300"],
    ["conjecture-scan", "--count", "4"],
    ["verify-algebra"],
])
def test_byte_identical_outputs(capsys, tmp_path, argv):
    a, b = tmp_path / "a.out", tmp_path / "b.out"
    assert run(argv + ["--seed", "4", "--out", str(a)], capsys)[0] == 0
    assert run(argv + ["--seed", "4", "--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_seed_environment_variable(capsys, monkeypatch):
    _, explicit, _ = run(["chsh", "--scan", "50", "--seed", "13"], capsys)
    monkeypatch.setenv("EXTPROB_SEED", "13")
    _, from_env, _ = run(["chsh", "--scan", "50"], capsys)
    _, overridden, _ = run(["chsh", "--scan", "50", "--seed", "0"], capsys)
    assert explicit == from_env != overridden
    monkeypatch.setenv("EXTPROB_SEED", "abc")
    assert run(["chsh", "--scan", "5"], capsys)[0] == 2


# -- error classes ----------------------------------------------------------------

def test_missing_input(capsys):
    code, _, err = run(["measure", "--state", "nope.json", "--observable", "nope.json"], capsys)
    assert code == 2
    e = error_of(err)
    assert e["error"] == "InputNotFound" and "input not found" in e["reason"]


def test_malformed_json(capsys, tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    code, _, err = run(["spectral", "--operator", str(p)], capsys)
    assert code == 2 and error_of(err)["error"] == "MalformedInput"


def test_schema_violation_reports_pointer(capsys, tmp_path, files):
    bad = write(tmp_path / "bad.json", {"ring": "quaternion", "rank": 1, "coeffs": [[1, 0, 0]]})
    code, _, err = run(["measure", "--state", bad, "--observable", files["A"]], capsys)
    e = error_of(err)
    assert code == 2 and e["pointer"] == "/coeffs/0"
    bad = write(tmp_path / "bad2.json", {"colors": [{"n": 1, "p": 0.5}, {"n": "x", "p": 0.5}]})
    code, _, err = run(["detector-sim", "--model", bad, "--exact"], capsys)
    assert code == 2 and error_of(err)["pointer"] == "/colors/1/n"


def test_rank_mismatch_in_file(capsys, tmp_path):
    bad = write(tmp_path / "r.json", {"ring": "quaternion", "rank": 2, "coeffs": [[1, 0, 0, 0]]})
    code, _, err = run(["spectral", "--operator", bad], capsys)
    assert code == 2


def test_invalid_color_model_is_domain_error(capsys, tmp_path):
    bad = write(tmp_path / "m.json", {"colors": [{"n": 0, "p": 0.5}, {"n": 1, "p": 0.4}]})
    code, _, err = run(["detector-sim", "--model", bad, "--exact"], capsys)
    assert code == 1 and error_of(err)["error"] == "InvalidModel"


def test_output_write_failure(capsys, tmp_path):
    code, _, err = run(["verify-algebra", "--out", str(tmp_path / "missing" / "r.json")], capsys)
    assert code == 3 and error_of(err)["error"] == "OutputWriteFailed"


def test_csv_rejected_for_non_tabular(capsys):
    assert run(["verify-algebra", "--format", "csv"], capsys)[0] == 2


def test_distinct_exit_codes(capsys, tmp_path, files):
    codes = {
        run(["counterexample"], capsys)[0],
        run(["spectral", "--operator", files["g0"]], capsys)[0],
        run(["spectral", "--operator", "missing.json"], capsys)[0],
        run(["verify-algebra", "--out", str(tmp_path / "no" / "x")], capsys)[0],
    }
    assert codes == {0, 1, 2, 3}


def test_undocumented_flags_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["chsh", "--bogus"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["chsh", "--sca", "5"])  # no abbreviations


def test_help_lists_every_subcommand(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    for name in ("verify-algebra", "counterexample", "spectral", "measure", "joint", "chsh",
                 "detector-sim", "conjecture-scan"):
        assert name in out


def test_console_script_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "extprob.cli", "counterexample", "--out",
                          str(tmp_path / "c.json")], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("counterexample lambda=1 mu=2: ok")
    assert json.loads((tmp_path / "c.json").read_text())["all_ok"]

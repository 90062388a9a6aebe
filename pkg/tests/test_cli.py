import json
import math
import subprocess
import sys

import pytest

from parabranch.cli import main


def run_cli(args, tmp_path=None):
    """Invoke the CLI in-process, capturing stdout."""
    import contextlib
    import io
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(args)
    return code, buf.getvalue()


def test_classify_json():
    code, out = run_cli(["classify", "--g", "8", "--r", "1", "--q", "0",
                         "--sigma", "0", "--kernel", "uniform"])
    assert code == 0
    blob = json.loads(out)
    assert blob["result"]["regime"] == "MeanExtinction"
    assert blob["result"]["d"] == pytest.approx(-1.0, abs=1e-9)
    assert blob["manifest"]["subcommand"] == "classify"
    assert blob["manifest"]["backend"] in ("compiled", "python")


def test_classify_infinity_encoding():
    code, out = run_cli(["classify", "--g", "8", "--kernel", "equal"])
    assert code == 0
    assert json.loads(out)["result"]["lambda_minus"] == "-inf"


def test_x0_subcommand():
    code, out = run_cli(["x0", "--q-over-r", "0"])
    assert code == 0
    blob = json.loads(out)["result"]
    assert blob["x0"] == pytest.approx(4.3110704, rel=1e-6)
    assert abs(blob["residual"]) < 1e-12


def test_threshold_subcommand():
    code, out = run_cli(["threshold", "--which", "g", "--g", "1", "--r", "1",
                         "--q", "0", "--kernel", "uniform"])
    assert code == 0
    assert json.loads(out)["result"]["value"] == pytest.approx(3 + 2 * math.sqrt(2), rel=1e-8)


def test_kernel_info():
    code, out = run_cli(["kernel-info", "--kernel", "beta:alpha=0"])
    assert code == 0
    blob = json.loads(out)["result"]
    assert blob["min_share"] == pytest.approx(0.25, abs=1e-12)


def test_construct_kernel():
    code, out = run_cli(["construct-kernel", "--g", "1", "--r", "1", "--q", "0",
                         "--vartheta", "0.2"])
    assert code == 0
    blob = json.loads(out)["result"]
    assert blob["kernel"] == "det:z=0.2"
    assert blob["regime"] == "MeanSurvival"


def test_bad_kernel_exit_code_2(capsys):
    code = main(["classify", "--g", "1", "--kernel", "nope:z=1"])
    assert code == 2
    assert "nope" in capsys.readouterr().err


def test_precondition_exit_code_3(capsys):
    code = main(["construct-kernel", "--g", "1", "--r", "1", "--q", "2",
                 "--vartheta", "0.2"])
    assert code == 3


def test_search_exhausted_exit_code_4(capsys):
    code = main(["construct-kernel", "--g", "1000", "--r", "1", "--q", "0",
                 "--vartheta", "0.45"])
    assert code == 4


def test_budget_exit_code_4(capsys):
    code = main(["verify-mto", "--g", "1", "--r", "1", "--q", "0", "--kernel",
                 "uniform", "--t", "30", "--reps", "100000", "--seed", "1"])
    assert code == 4


def test_verify_mto_small():
    code, out = run_cli(["verify-mto", "--g", "1", "--r", "1", "--q", "0.2",
                         "--kernel", "uniform", "--t", "1", "--f", "exp_neg",
                         "--reps", "2000", "--seed", "7"])
    assert code == 0
    blob = json.loads(out)["result"]
    assert blob["z_score"] < 4.0


def test_spine_requires_stable(capsys):
    code = main(["spine", "--g", "1", "--kernel", "uniform", "--t", "1"])
    assert code == 3


def test_spine_json():
    code, out = run_cli(["spine", "--g", "1", "--kernel", "uniform", "--t", "1",
                         "--stable-b", "-0.5", "--stable-c", "-1", "--reps", "500"])
    assert code == 0
    blob = json.loads(out)["result"]
    assert 0.0 < blob["nonexplosion"]["estimate"] <= 1.0


def test_boundary_json():
    code, out = run_cli(["boundary", "--kernel", "uniform"])
    assert code == 0
    assert json.loads(out)["result"]["boundary_g_over_r"] == pytest.approx(
        3 + 2 * math.sqrt(2), rel=1e-7)


def test_scatter_csv(tmp_path):
    out_file = tmp_path / "scatter.csv"
    code = main(["scatter", "--n-modes", "2", "--draws", "3", "--seed", "3",
                 "--out", str(out_file)])
    assert code == 0
    lines = out_file.read_text().strip().split("\n")
    assert lines[0].startswith("# manifest: ")
    assert lines[1] == "vartheta,boundary,n_modes,seed,draw_index"
    assert len(lines) == 5


def test_phase_csv_small(tmp_path):
    out_file = tmp_path / "phase.csv"
    code = main(["phase", "--gr-steps", "6", "--param-steps", "5",
                 "--param-hi", "4", "--out", str(out_file)])
    assert code == 0
    lines = out_file.read_text().strip().split("\n")
    header = lines[1].split(",")
    assert header == ["g_over_r", "param", "m_det", "d_det", "regime_det",
                      "m_rand", "d_rand", "regime_rand", "color"]
    assert len(lines) == 2 + 6 * 5


def test_simulate_csv_schema(tmp_path):
    out_file = tmp_path / "sim.csv"
    code = main(["simulate", "--g", "1", "--r", "1", "--q", "0", "--kernel",
                 "uniform", "--t", "1", "--reps", "50", "--seed", "2",
                 "--record", "0.5,1.0", "--out", str(out_file)])
    assert code == 0
    lines = out_file.read_text().strip().split("\n")
    assert lines[1] == "rep,t,N,C,frac_growing,frac_const,frac_positive"
    assert len(lines) == 2 + 50 * 2


def test_simulate_json_summary():
    code, out = run_cli(["simulate", "--g", "1", "--r", "1", "--q", "0",
                         "--kernel", "uniform", "--t", "1", "--reps", "50",
                         "--seed", "2", "--output", "json"])
    assert code == 0
    blob = json.loads(out)["result"]
    assert blob["record_times"] == [1.0]
    assert blob["N"][0]["mean"] > 1.0


def test_byte_identical_reruns(tmp_path):
    args = ["simulate", "--g", "1", "--r", "1", "--q", "0.2", "--kernel",
            "beta:alpha=1", "--t", "1", "--reps", "40", "--seed", "11"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_check_conditions_cli():
    code, out = run_cli(["check-conditions", "--check", "drift_i", "--kernel",
                         "equal", "--drift", "linear:g=3", "--r", "1",
                         "--grid-lo", "0.5", "--grid-hi", "4", "--grid-steps", "4"])
    assert code == 0
    blob = json.loads(out)["result"]
    assert blob["verdict"] == "holds_on_grid"
    assert blob["witness"]["eta"] == pytest.approx(3 - 2 * math.log(2), rel=1e-10)


def test_cli_as_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "parabranch.cli", "x0", "--q-over-r", "0.5"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["x0"] > 2.0
    assert "done in" in proc.stderr

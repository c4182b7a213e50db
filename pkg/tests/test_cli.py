import json
import subprocess
import sys

import pytest

from qms.cli import main, manifest_path
from qms.io import read_csv

SMALL_DEFECTS = ["fidelity-defects", "--nx", "7", "--ny", "7", "--waist", "0.6", "--alpha2", "4",
                 "--fractions", "0,0.1", "--stderr-tol", "0.02", "--min-real", "10",
                 "--max-real", "200", "--seed", "5"]


def test_eit_scan_zero_row(tmp_path):
    out = tmp_path / "eit.csv"
    assert main(["eit-scan", "--V", "0", "--deltar", "0", "-o", str(out)]) == 0
    header, rows = read_csv(out)
    assert float(rows[0][header.index("r_re")]) == 0.0
    assert float(rows[0][header.index("r_im")]) == 0.0
    assert out.read_text().startswith("# units:")
    man = json.loads(manifest_path(out).read_text())
    assert {"config", "config_digest", "seed", "wall_time_s", "versions"} <= set(man)


def test_eit_scan_product(tmp_path):
    out = tmp_path / "eit.csv"
    assert main(["eit-scan", "--V", "0,10,100", "--omegap", "0.5,1", "-o", str(out)]) == 0
    assert len(read_csv(out)[1]) == 6


def test_protocol_ghz_verify(tmp_path, capsys):
    out = tmp_path / "ghz.json"
    assert main(["protocol", "--preset", "ghz", "--m", "6", "--verify", "-o", str(out)]) == 0
    assert "stabilizers: 7/7 OK" in capsys.readouterr().out
    rep = json.loads(out.read_text())
    assert rep["verification"]["joint_ghz"]["passed"] == 7


@pytest.mark.parametrize("preset", ["cluster1d", "tree-fig2b"])
@pytest.mark.parametrize("outcome", ["+", "-"])
def test_protocol_graph_presets(tmp_path, capsys, preset, outcome):
    out = tmp_path / "p.json"
    assert main(["protocol", "--preset", preset, "--outcome", outcome, "--verify",
                 "-o", str(out)]) == 0
    assert "OK" in capsys.readouterr().out


def test_protocol_script_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n_photons": 2, "steps": [{"op": "scatter", "targets": [1]},
                                                         {"op": "scatter", "targets": [1]},
                                                         {"op": "measure_qms"}]}))
    assert main(["protocol", "--script", str(bad), "-o", str(tmp_path / "x.json")]) == 2
    assert capsys.readouterr().err.startswith("ERR 2: step 1")


def test_dry_run_writes_nothing(tmp_path, capsys):
    out = tmp_path / "never.csv"
    assert main(SMALL_DEFECTS + ["--dry-run", "-o", str(out)]) == 0
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["scenario"] == "fidelity-defects" and cfg["seed"] == 5
    assert not out.exists()


@pytest.mark.parametrize("argv", [
    ["scatter", "--nx", "0"],
    ["scatter", "--spacing", "-1"],
    ["fidelity-defects", "--fractions", "0,2"],
    ["mode-spectrum", "--kmin", "-1.2"],
    ["eit-scan", "--V", "a,b"],
    ["nonsense"],
    ["scatter", "--threads", "0"],
])
def test_invalid_input_exit_2(argv, capsys):
    assert main(argv + ["--dry-run"] if argv[0] != "nonsense" else argv) == 2
    assert capsys.readouterr().err.startswith("ERR 2:")


def test_convergence_failure_exit_3(tmp_path, capsys):
    argv = [a if a != "0.02" else "1e-9" for a in SMALL_DEFECTS]
    argv[argv.index("--max-real") + 1] = "12"
    assert main(argv + ["-o", str(tmp_path / "f.csv")]) == 3
    assert capsys.readouterr().err.startswith("ERR 3:")


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"V": [0, 5], "omegap": 2.0, "seed": 11}))
    assert main(["eit-scan", "--config", str(cfg), "--seed", "3", "--dry-run"]) == 0
    got = json.loads(capsys.readouterr().out)
    assert got["V"] == [0, 5] and got["omegap"] == [2.0] and got["seed"] == 3
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["eit-scan", "--config", str(cfg), "--dry-run"]) == 2


def test_defect_scan_byte_identical_across_threads(tmp_path):
    outs = []
    for n in (1, 4, 8):
        out = tmp_path / f"d{n}.csv"
        assert main(SMALL_DEFECTS + ["--threads", str(n), "-o", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_env_thread_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("QMS_THREADS", "2")
    out = tmp_path / "env.csv"
    assert main(SMALL_DEFECTS + ["-o", str(out)]) == 0
    ref = tmp_path / "ref.csv"
    assert main(SMALL_DEFECTS + ["--threads", "1", "-o", str(ref)]) == 0
    assert out.read_bytes() == ref.read_bytes()


def test_scatter_and_mode_spectrum_run(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["scatter", "--nx", "7", "--ny", "7", "--waist", "0.6", "--detuning", "0,-0.1",
                 "-o", str(out)]) == 0
    assert len(read_csv(out)[1]) == 2
    out = tmp_path / "m.csv"
    assert main(["mode-spectrum", "--nx", "9", "--ny", "9", "--Ka", "0", "--num", "3",
                 "-o", str(out)]) == 0
    assert len(read_csv(out)[1]) == 6


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qms.cli", "eit-scan", "--dry-run"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and '"scenario": "eit-scan"' in proc.stdout

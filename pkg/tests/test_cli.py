import csv
import json
import subprocess
import sys

import pytest

from failbench.cli import main

SMALL_SYNTH = {"n_sessions": 3, "session_length_s": [3 * 3600, 4 * 3600], "fault_rate": 1.0,
               "min_history_s": 1800, "seed": 2, "precursor": {"lead_time_s": 600}}


def stderr_events(text):
    return [json.loads(line) for line in text.splitlines() if line.startswith("{")]


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    (d / "params.json").write_text(json.dumps(SMALL_SYNTH))
    assert main(["synth", "--config", str(d / "params.json"), "--out", str(d)]) == 0
    cfg = json.loads((d / "config.json").read_text())
    cfg.update(rw=["10m"], pw=["10m", "20m"], protocol={"k": 3, "rus_repeats": 1},
               algorithms={"logreg": [{"C": 1.0}]})
    (d / "config.json").write_text(json.dumps(cfg))
    return d


def test_synth_outputs(synth_dir):
    for name in ("telemetry.csv", "alerts.csv", "ground_truth.json", "synth_config.json", "config.json"):
        assert (synth_dir / name).is_file()


def test_validate(synth_dir, capsys):
    assert main(["validate", "--config", str(synth_dir / "config.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ok"] and out["sessions"] == 3 and out["target_alerts"] > 0


def test_run_and_report(synth_dir, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", "--config", str(synth_dir / "config.json"), "--seed", "4", "--out", str(out)]) == 0
    events = stderr_events(capsys.readouterr().err)
    assert [e["event"] for e in events].count("cell_finished") == 2
    assert events[-1]["event"] == "run_finished"
    for name in ("results.csv", "best.csv", "heatmap.svg", "manifest.json"):
        assert (out / name).is_file()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 4 and manifest["run"]["protocol"]["seed"] == 4
    assert len(manifest["run"]["data"]["telemetry_sha256"]) == 64

    again = tmp_path / "again"
    assert main(["report", "--manifest", str(out), "--out", str(again)]) == 0
    for name in ("results.csv", "best.csv", "heatmap.svg"):
        assert (out / name).read_bytes() == (again / name).read_bytes()

    rerun = tmp_path / "rerun"
    assert main(["run", "--config", str(out / "manifest.json"), "--out", str(rerun)]) == 0
    assert (out / "results.csv").read_bytes() == (rerun / "results.csv").read_bytes()


def test_missing_key_exit_1(synth_dir, tmp_path, capsys):
    cfg = json.loads((synth_dir / "config.json").read_text())
    del cfg["pw"]
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert main(["run", "--config", str(tmp_path / "c.json")]) == 1
    err = stderr_events(capsys.readouterr().err)[-1]
    assert err["exit"] == 1 and "'pw'" in err["message"]


def test_missing_data_file_exit_1(tmp_path, synth_dir, capsys):
    cfg = json.loads((synth_dir / "config.json").read_text())
    cfg["telemetry"] = "nowhere.csv"
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert main(["validate", "--config", str(tmp_path / "c.json")]) == 1


def test_unwritable_output_exit_2(synth_dir, tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "--config", str(synth_dir / "config.json"), "--out", str(blocker / "x")]) == 2
    assert stderr_events(capsys.readouterr().err)[-1]["error"] == "OutputUnwritable"


def test_bad_arguments_exit_1(capsys):
    assert main(["frobnicate"]) == 1
    assert main(["run"]) == 1


def test_sessionize_all_zero_movement(tmp_path, capsys):
    rows = ["timestamp,move_0,temp"] + [f"{1623751200 + 60 * i},0,{20 + i % 3}" for i in range(30)]
    (tmp_path / "t.csv").write_text("\n".join(rows) + "\n")
    (tmp_path / "a.csv").write_text("timestamp,code\n")
    cfg = {"telemetry": "t.csv", "alerts": "a.csv", "period": "1m", "target_code": 11, "rw": ["5m"],
           "pw": ["5m"], "algorithms": {"logreg": [{}]}, "movement_variables": ["move_0"]}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert main(["sessionize", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "s.csv")]) == 0
    with open(tmp_path / "s.csv", newline="") as f:
        ids = [r["session_id"] for r in csv.DictReader(f)]
    assert len(ids) == 30 and set(ids) == {"-1"}


def test_profile_knob_zero(tmp_path, capsys):
    params = dict(SMALL_SYNTH, noise_sigma=0.0, precursor={"lead_time_s": 900, "diversity": 0.0})
    (tmp_path / "p.json").write_text(json.dumps(params))
    assert main(["synth", "--config", str(tmp_path / "p.json"), "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    assert main(["profile", "--config", str(tmp_path / "config.json")]) == 0
    prof = json.loads(capsys.readouterr().out)
    assert prof["diversity_m"] <= 0.05
    assert 0.0 <= prof["spectral_entropy"] <= 1.0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "failbench", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("failbench ")

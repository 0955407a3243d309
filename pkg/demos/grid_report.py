"""
A small RW x PW grid with a heatmap
===================================

Runs the k-fold protocol with random undersampling on every (RW, PW) pair and
writes ``results.csv``, ``best.csv``, ``heatmap.svg`` and ``manifest.json``.
Scores should fall as the prediction window grows past the precursor lead time.
"""
import sys
from pathlib import Path

from failbench.protocol import Dataset, ProtocolConfig, run_grid
from failbench.report import emit_results
from failbench.sessions import MovementSpec, compute_sessions
from failbench.synth import PrecursorConfig, SynthConfig, generate
from failbench.timeseries import resample_locf

out = Path(sys.argv[1] if len(sys.argv) > 1 else "grid_report_out")

cfg = SynthConfig(n_sessions=10, session_length_s=(10 * 3600, 12 * 3600), fault_rate=0.15, noise_sigma=0.1,
                  precursor=PrecursorConfig(lead_time_s=900, diversity=0.3))
raw, alerts, truth = generate(cfg)
series = resample_locf(raw, cfg.period_s)
sessions = compute_sessions(series, MovementSpec(truth.movement_variables, cfg.inactivity_gap_s))
data = Dataset(series, sessions, alerts.select(cfg.target_code))

hypergrid = {"logreg": [{"C": 0.1}, {"C": 1.0}], "random_forest": [{"n_estimators": 10}]}
table = run_grid(data, [600, 1200], [900, 3600, 3 * 3600], ProtocolConfig(k=5, rus_repeats=1), hypergrid,
                 progress=lambda e: e["event"] == "cell_finished" and print(e))
for cell in table.cells:
    score = "undefined" if cell.best_score is None else f"{cell.best_score:.3f} ({cell.best_algorithm})"
    print(f"RW {cell.rw_s // 60:>3}m  PW {cell.pw_s // 60:>4}m  support {cell.support:>4}  best {score}")
for path in emit_results(table, out):
    print("wrote", path)

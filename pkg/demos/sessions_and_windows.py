"""
Sessions, labeled windows and support
=====================================

Irregular telemetry is resampled onto a regular grid, split into machine
sessions from the movement counters, and cut into reading/prediction window
pairs. The support table counts failure-labeled windows per (RW, PW).
"""
import numpy as np

from failbench.sessions import MovementSpec, compute_sessions, session_spans
from failbench.synth import SynthConfig, generate
from failbench.timeseries import resample_locf
from failbench.windows import WindowSpec, extract_windows, support_grid

cfg = SynthConfig(n_sessions=4, fault_rate=0.3, seed=1)
raw, alerts, truth = generate(cfg)
print("variables:", raw.variables)
print("observations per variable:", {n: len(raw.samples[n][0]) for n in raw.variables})

# last value carried forward onto a 1-minute grid
series = resample_locf(raw, cfg.period_s)
print("grid rows:", len(series))

sessions = compute_sessions(series, MovementSpec(truth.movement_variables, cfg.inactivity_gap_s))
spans = session_spans(sessions)
print("sessions found:", len(spans), "planted:", len(truth.sessions))
for sid, a, b in spans:
    print(f"  session {sid}: rows {a}..{b} ({(b - a + 1) * cfg.period_s / 3600:.1f} h)")

target = alerts.select(cfg.target_code)
spec = WindowSpec.from_durations(20 * 60, 15 * 60, cfg.period_s)
windows = extract_windows(series, sessions, target, spec)
labels = np.array([w.label for w in windows])
print(f"RW 20m / PW 15m: {len(windows)} windows, {labels.sum()} failure-labeled")

rw = [10, 20, 30]
pw = [15, 60, 120, 240]
grid = support_grid(series, sessions, target, rw, pw)
print("support (rows: RW minutes, columns: PW minutes)")
print("      " + "".join(f"{p:>7}" for p in pw))
for r, row in zip(rw, grid):
    print(f"{r:>5} " + "".join(f"{v:>7}" for v in row))

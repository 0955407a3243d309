"""Shared builders for tests."""
from failbench.protocol import Dataset
from failbench.sessions import MovementSpec, compute_sessions
from failbench.synth import SynthConfig, generate
from failbench.timeseries import resample_locf


def synth_dataset(**overrides):
    cfg = SynthConfig(**overrides)
    raw, alerts, truth = generate(cfg)
    series = resample_locf(raw, cfg.period_s)
    sessions = compute_sessions(series, MovementSpec(truth.movement_variables, cfg.inactivity_gap_s))
    return Dataset(series, sessions, alerts.select(cfg.target_code)), truth, cfg

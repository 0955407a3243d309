"""Synthetic session-structured telemetry with planted fault precursors.

The generated machine alternates idle gaps (every variable exactly zero) with
work sessions. Movement variables pulse between two levels during a session so
the sessionizer sees a strictly positive increase every other row. Sensor
variables sit at a noisy baseline; before every fault a precursor motif is
added over the ``lead_time_s`` seconds that end at the fault. Motif shapes are
a slow ramp-down, a spike, a late drop and a growing oscillation.

Raw output imitates "transmit on change" acquisition: a sample is emitted only
when a value changes, timestamped up to one period early, so LOCF resampling
at ``period_s`` restores the generating grid exactly.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidConfig
from .timeseries import AlertLog, RawSeries
from .windows import LabeledWindow

DEFAULT_START = 1622505600  # 2021-06-01T00:00:00Z


@dataclass(frozen=True)
class PrecursorConfig:
    motif_bank_size: int = 4
    lead_time_s: int = 900
    diversity: float = 0.5
    amplitude: float = 1.0
    order_sensitive: bool = False


@dataclass(frozen=True)
class SynthConfig:
    n_variables: int = 4
    n_movement: int = 1
    n_sessions: int = 8
    session_length_s: tuple = (4 * 3600, 8 * 3600)
    idle_gap_s: tuple = (1800, 7200)
    period_s: int = 60
    fault_rate: float = 0.5
    min_history_s: int = 3600
    noise_sigma: float = 0.05
    target_code: int = 11
    distractor_code: int = 34
    distractor_rate: float = 0.0
    inactivity_gap_s: int = 600
    precursor: PrecursorConfig = field(default_factory=PrecursorConfig)
    start: int = DEFAULT_START
    jitter: bool = True
    seed: int = 0
    # order-sensitive task only
    order_window: int = 24
    order_n_windows: int = 1000
    order_event_width: int = 3

    def __post_init__(self):
        if isinstance(self.precursor, dict):
            object.__setattr__(self, "precursor", PrecursorConfig(**self.precursor))
        object.__setattr__(self, "session_length_s", tuple(self.session_length_s))
        object.__setattr__(self, "idle_gap_s", tuple(self.idle_gap_s))

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown synth keys {sorted(unknown)}")
        return cls(**data)

    def as_dict(self):
        return asdict(self)

    def validate(self):
        p = self.precursor
        if self.period_s <= 0:
            raise InvalidConfig("period_s must be positive")
        if not 1 <= self.n_movement < self.n_variables:
            raise InvalidConfig("need at least one movement and one sensor variable")
        if self.n_sessions < 1:
            raise InvalidConfig("n_sessions must be >= 1")
        lo, hi = self.session_length_s
        if not 0 < lo <= hi:
            raise InvalidConfig("session_length_s must be an ordered positive range")
        if not self.inactivity_gap_s + 2 * self.period_s < self.idle_gap_s[0] <= self.idle_gap_s[1]:
            raise InvalidConfig("idle gaps must exceed the inactivity gap by at least two periods")
        if p.lead_time_s % self.period_s or p.lead_time_s <= 0:
            raise InvalidConfig("lead_time_s must be a positive multiple of period_s")
        if not p.lead_time_s < lo:
            raise InvalidConfig("lead time must be shorter than the shortest session")
        if self.min_history_s + p.lead_time_s >= lo:
            raise InvalidConfig("min_history_s leaves no room for faults in the shortest session")
        if not 0 <= p.diversity <= 1:
            raise InvalidConfig("diversity knob must lie in [0, 1]")
        if p.motif_bank_size < 1:
            raise InvalidConfig("motif_bank_size must be >= 1")
        if self.fault_rate < 0 or self.noise_sigma < 0 or self.distractor_rate < 0:
            raise InvalidConfig("rates and noise must be non-negative")
        if self.target_code < 0 or self.distractor_code < 0 or self.target_code == self.distractor_code:
            raise InvalidConfig("alert codes must be distinct and non-negative")


@dataclass
class GroundTruth:
    alert_times: list
    motif_ids: list
    sessions: list  # (start_ts, end_ts) of generated active rows
    movement_variables: list
    target_code: int
    period_s: int

    def as_dict(self):
        return asdict(self)


def motif_shape(kind, n):
    """One of the four precursor shapes sampled on ``n`` points, peak magnitude 1."""
    u = np.linspace(0.0, 1.0, n)
    kind %= 4
    if kind == 0:
        s = -u
    elif kind == 1:
        s = np.exp(-((u - 0.7) / 0.12) ** 2)
    elif kind == 2:
        s = -1.0 / (1.0 + np.exp(-(u - 0.75) / 0.04))
    else:
        s = np.sin(2 * np.pi * 3 * u) * u
    peak = np.max(np.abs(s))
    return s / peak if peak > 0 else s


def motif_bank(cfg):
    """``(bank_size, lead_rows, n_sensors)`` motifs blended by the diversity knob.

    The base motif drives every sensor with the ramp shape; bank motif ``k``
    drives only sensor ``k mod n_sensors`` with shape ``k``. Knob 0 yields a
    single shared motif, knob 1 the mutually orthogonal bank.
    """
    p = cfg.precursor
    n = p.lead_time_s // cfg.period_s
    n_sensors = cfg.n_variables - cfg.n_movement
    base = np.repeat(motif_shape(0, n)[:, None], n_sensors, axis=1)
    bank = np.zeros((p.motif_bank_size, n, n_sensors))
    for k in range(p.motif_bank_size):
        bank[k, :, k % n_sensors] = motif_shape(k, n)
    return p.amplitude * ((1 - p.diversity) * base[None] + p.diversity * bank)


def variable_names(cfg):
    return ([f"move_{i}" for i in range(cfg.n_movement)]
            + [f"sensor_{i}" for i in range(cfg.n_variables - cfg.n_movement)])


def generate(cfg):
    """Return ``(RawSeries, AlertLog, GroundTruth)`` for ``cfg``; bit-deterministic per seed."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    period = cfg.period_s
    lead = cfg.precursor.lead_time_s // period
    min_hist = -(-cfg.min_history_s // period)
    bank = motif_bank(cfg)

    def rows(lo_s, hi_s):
        return int(rng.integers(-(-lo_s // period), hi_s // period + 1))

    layout = []  # (first_row, n_rows) per session
    cursor = rows(*cfg.idle_gap_s)
    for _ in range(cfg.n_sessions):
        n = rows(*cfg.session_length_s)
        layout.append((cursor, n))
        cursor += n + rows(*cfg.idle_gap_s)
    total = cursor

    n_move = cfg.n_movement
    values = np.zeros((total, cfg.n_variables))
    alert_rows, motif_ids, distractor_rows = [], [], []
    for first, n in layout:
        r = np.arange(n)
        for j in range(n_move):
            values[first:first + n, j] = (1.0 + j) * (1.0 + (r % 2))
        values[first:first + n, n_move:] = cfg.noise_sigma * rng.standard_normal((n, cfg.n_variables - n_move))
        hours = n * period / 3600
        expected = cfg.fault_rate * hours
        n_faults = int(expected) + int(rng.random() < expected - int(expected))
        # candidate fault offsets: even (same movement phase), enough history, spaced by 2 leads
        lo = max(min_hist, lead)
        lo += lo % 2
        slots = np.arange(lo, n - 1, 2 * lead)
        if slots.size and n_faults:
            picks = np.sort(rng.choice(slots, size=min(n_faults, slots.size), replace=False))
            for a in picks:
                k = int(rng.integers(bank.shape[0]))
                values[first + a - lead + 1:first + a + 1, n_move:] += bank[k]
                alert_rows.append(first + int(a))
                motif_ids.append(k)
        n_dis = int(rng.poisson(cfg.distractor_rate * hours)) if cfg.distractor_rate else 0
        distractor_rows.extend((first + rng.integers(0, n, n_dis)).tolist())

    grid = cfg.start + period * np.arange(total, dtype=np.int64)
    jit = rng.integers(0, period, total) if cfg.jitter else np.zeros(total, dtype=np.int64)
    jit[0] = 0
    names = variable_names(cfg)
    samples = {}
    for j, name in enumerate(names):
        col = values[:, j]
        keep = np.concatenate(([True], col[1:] != col[:-1]))
        samples[name] = ((grid - jit)[keep], col[keep].copy())
    raw = RawSeries(names, samples)

    def alert_time(row):
        return int(grid[row] + (rng.integers(0, period) if cfg.jitter else 0))

    target = [(alert_time(r), cfg.target_code) for r in alert_rows]
    distract = [(alert_time(r), cfg.distractor_code) for r in distractor_rows]
    alerts = AlertLog.from_events(target + distract)
    truth = GroundTruth(
        alert_times=[t for t, _ in target],
        motif_ids=motif_ids,
        sessions=[(int(grid[f]), int(grid[f + n - 1])) for f, n in layout],
        movement_variables=names[:n_move],
        target_code=cfg.target_code,
        period_s=period,
    )
    return raw, alerts, truth


@dataclass
class OrderTask:
    """Windows whose label is decided solely by the order of two events."""

    features: np.ndarray
    labels: np.ndarray
    first_event: np.ndarray
    second_event: np.ndarray

    @property
    def windows(self):
        pw = 1
        return [LabeledWindow(0, i, self.features[i], int(self.labels[i]), pw) for i in range(self.labels.size)]


def order_sensitive_task(cfg):
    """Two-channel windows holding one event of type A and one of type B.

    A moves both channels with the same sign, B with opposite signs; each
    event's overall sign is random. The label is 1 iff A comes first. Event
    positions share one distribution across classes and signs are symmetric, so
    per-timestep value histograms match across classes and a linear readout of
    the raw values carries no label information.
    """
    if not cfg.precursor.order_sensitive:
        raise InvalidConfig("order_sensitive flag is not set")
    T, w, m = int(cfg.order_window), int(cfg.order_event_width), int(cfg.order_n_windows)
    if T < 2 * w + 1 or m < 2:
        raise InvalidConfig("order_window too short for two events or too few windows")
    rng = np.random.default_rng(cfg.seed)
    labels = rng.permutation(np.arange(m) % 2)
    x = cfg.noise_sigma * rng.standard_normal((m, T, 2))
    first = rng.integers(0, T - 2 * w + 1, m)
    # second event starts uniformly after the first one ends
    second = first + w + (rng.random(m) * (T - w - (first + w) + 1)).astype(np.int64)
    amp = cfg.precursor.amplitude
    for i in range(m):
        a_pos, b_pos = (first[i], second[i]) if labels[i] == 1 else (second[i], first[i])
        sa, sb = rng.choice((-1.0, 1.0), 2)
        x[i, a_pos:a_pos + w, 0] += amp * sa
        x[i, a_pos:a_pos + w, 1] += amp * sa
        x[i, b_pos:b_pos + w, 0] += amp * sb
        x[i, b_pos:b_pos + w, 1] -= amp * sb
    return OrderTask(x, labels.astype(np.int64), first, second)

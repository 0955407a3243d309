"""Reading-window extraction and prediction-window labeling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DurationNotMultipleOfPeriod, ValidationError
from .sessions import session_spans

FAILURE = 1
NO_FAILURE = 0


@dataclass(frozen=True)
class WindowSpec:
    """Reading/prediction window sizes in grid samples (stride is always 1)."""

    rw_samples: int
    pw_samples: int

    def __post_init__(self):
        if int(self.rw_samples) < 1 or int(self.pw_samples) < 1:
            raise ValidationError("window sizes must be at least one sample")

    @classmethod
    def from_durations(cls, rw_s, pw_s, period_s):
        for d in (rw_s, pw_s):
            if int(d) != d or int(d) <= 0 or int(d) % int(period_s):
                raise DurationNotMultipleOfPeriod(d, period_s)
        return cls(int(rw_s) // int(period_s), int(pw_s) // int(period_s))


@dataclass(frozen=True, eq=False)
class LabeledWindow:
    """One reading window plus the label of the prediction window after it.

    ``features`` is a read-only view of the series rows
    ``[start_row, start_row + S_RW - 1]``.
    """

    session_id: int
    start_row: int
    features: np.ndarray
    label: int
    pw_samples: int

    @property
    def rw_samples(self):
        return self.features.shape[0]

    @property
    def end_row(self):
        """Last row covered by the reading and prediction windows together."""
        return self.start_row + self.rw_samples + self.pw_samples - 1


def alert_row_counts(series, alerts):
    """Number of alerts falling in each grid row's interval."""
    rows = series.row_of(alerts.times)
    return np.bincount(rows[rows >= 0], minlength=len(series))


def extract_windows(series, sessions, alerts, spec):
    """Emit every labeled window whose RW and PW both fit inside one session.

    ``alerts`` should already be filtered to the target code. A window is a
    failure iff an alert falls in the interval of any of its PW rows.
    """
    if len(sessions) != len(series):
        raise ValidationError("session map and series differ in length")
    s_rw, s_pw = int(spec.rw_samples), int(spec.pw_samples)
    cum = np.concatenate(([0], np.cumsum(alert_row_counts(series, alerts))))
    values = series.values
    out = []
    for sid, first, last in session_spans(sessions):
        n_emit = last - first + 1 - s_rw - s_pw + 1
        if n_emit <= 0:
            continue
        starts = np.arange(first, first + n_emit)
        pw_lo = starts + s_rw
        hits = cum[pw_lo + s_pw] - cum[pw_lo]
        for s, h in zip(starts.tolist(), hits.tolist()):
            out.append(LabeledWindow(sid, s, values[s:s + s_rw], FAILURE if h > 0 else NO_FAILURE, s_pw))
    return out


def count_support(windows):
    """Number of failure-labeled windows."""
    return sum(1 for w in windows if w.label == FAILURE)


def flatten_features(window):
    """Row-major (time-major, then variable) feature vector of length S_RW * V."""
    return np.ascontiguousarray(window.features).reshape(-1)


def stack_features(windows):
    """``(M, S_RW, V)`` tensor of window features."""
    if not windows:
        return np.empty((0, 0, 0))
    return np.stack([w.features for w in windows])


def labels_of(windows):
    return np.array([w.label for w in windows], dtype=np.int64)


def support_grid(series, sessions, alerts, rw_samples, pw_samples):
    """Failure-window counts for every ``(rw, pw)`` pair of sample sizes."""
    grid = np.zeros((len(rw_samples), len(pw_samples)), dtype=np.int64)
    for i, r in enumerate(rw_samples):
        for j, p in enumerate(pw_samples):
            grid[i, j] = count_support(extract_windows(series, sessions, alerts, WindowSpec(r, p)))
    return grid

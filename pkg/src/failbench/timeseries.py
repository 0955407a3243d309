"""Time-series containers, LOCF resampling, normalization and data-set profiling.

Timestamps are integer UTC seconds throughout. A :class:`RawSeries` holds the
irregular "transmit on change" acquisition, one sample stream per variable; a
:class:`RegularSeries` holds the same data on a uniform grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySpan, InsufficientFaults, NoPriorObservation, SeriesTooShort, ValidationError

#: Default grid periods (seconds) for the wrapping machine, the blood
#: refrigerator and the nitrogen generator.
DEFAULT_PERIODS = {"wrapping_machine": 5, "blood_refrigerator": 34, "nitrogen_generator": 60}


@dataclass(frozen=True)
class RawSeries:
    """Irregularly sampled multivariate series.

    ``samples`` maps each variable name to a pair ``(times, values)`` of
    equal-length 1-D arrays with strictly increasing integer times.
    """

    variables: tuple
    samples: dict

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        fixed = {}
        for name in self.variables:
            if name not in self.samples:
                raise ValidationError(f"no samples for variable {name!r}")
            t, v = self.samples[name]
            t = np.asarray(t, dtype=np.int64)
            v = np.asarray(v, dtype=float)
            if t.ndim != 1 or t.shape != v.shape:
                raise ValidationError(f"variable {name!r}: times and values must be equal-length 1-D")
            if t.size == 0:
                raise ValidationError(f"variable {name!r} has no samples")
            if np.any(np.diff(t) <= 0):
                raise ValidationError(f"variable {name!r}: timestamps must be strictly increasing")
            fixed[name] = (t, v)
        object.__setattr__(self, "samples", fixed)

    def first_time(self):
        return max(int(self.samples[n][0][0]) for n in self.variables)

    def last_time(self):
        return max(int(self.samples[n][0][-1]) for n in self.variables)


@dataclass(frozen=True, eq=False)
class RegularSeries:
    """Multivariate series on the grid ``start + k * period_s``."""

    start: int
    period_s: int
    variables: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim == 1:
            values = values[:, None]
        object.__setattr__(self, "variables", tuple(self.variables))
        if values.ndim != 2 or values.shape[0] < 1:
            raise ValidationError("values must be an N x V matrix with N >= 1")
        if values.shape[1] != len(self.variables):
            raise ValidationError("one column per variable is required")
        if int(self.period_s) <= 0:
            raise ValidationError("period_s must be positive")
        if not np.all(np.isfinite(values)):
            raise ValidationError("regular series cells must all be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "start", int(self.start))
        object.__setattr__(self, "period_s", int(self.period_s))

    def __len__(self):
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, RegularSeries):
            return NotImplemented
        return (self.start == other.start and self.period_s == other.period_s
                and self.variables == other.variables
                and np.array_equal(self.values, other.values))

    @property
    def timestamps(self):
        return self.start + self.period_s * np.arange(len(self), dtype=np.int64)

    @property
    def end(self):
        return self.start + self.period_s * (len(self) - 1)

    def column(self, name):
        return self.values[:, self.variables.index(name)]

    def row_of(self, t):
        """Grid row whose interval ``[t_row, t_row + period)`` contains ``t``.

        Returns -1 when ``t`` falls outside the grid.
        """
        t = np.asarray(t, dtype=np.int64)
        rows = np.floor_divide(t - self.start, self.period_s)
        return np.where((rows >= 0) & (rows < len(self)), rows, -1)

    def to_raw(self):
        ts = self.timestamps
        return RawSeries(self.variables, {n: (ts, self.values[:, i]) for i, n in enumerate(self.variables)})


@dataclass(frozen=True, eq=False)
class AlertLog:
    """Ordered alert events: integer timestamps and non-negative integer codes."""

    times: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    codes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.int64).reshape(-1)
        c = np.asarray(self.codes, dtype=np.int64).reshape(-1)
        if t.shape != c.shape:
            raise ValidationError("alert times and codes differ in length")
        if np.any(np.diff(t) < 0):
            raise ValidationError("alert timestamps must be non-decreasing")
        if np.any(c < 0):
            raise ValidationError("alert codes must be non-negative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "codes", c)

    @classmethod
    def from_events(cls, events):
        events = sorted((int(t), int(c)) for t, c in events)
        if not events:
            return cls()
        t, c = zip(*events)
        return cls(np.array(t), np.array(c))

    def __len__(self):
        return self.times.size

    def __eq__(self, other):
        if not isinstance(other, AlertLog):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(self.codes, other.codes)

    def select(self, code):
        """Alerts carrying ``code`` only; ``None`` keeps every alert."""
        if code is None:
            return self
        keep = self.codes == int(code)
        return AlertLog(self.times[keep], self.codes[keep])

    def events(self):
        return list(zip(self.times.tolist(), self.codes.tolist()))


@dataclass(frozen=True)
class DatasetProfile:
    diversity_m: float
    spectral_entropy: float
    window_s: int

    def as_dict(self):
        return {"diversity_m": self.diversity_m, "spectral_entropy": self.spectral_entropy,
                "window_s": self.window_s}


def resample_locf(raw, period_s, span=None):
    """Resample ``raw`` onto a uniform grid with last-observation-carried-forward.

    Parameters
    ----------
    raw : RawSeries
    period_s : int
        Grid step in seconds.
    span : (int, int), optional
        Inclusive ``[start, end]`` interval. The grid is ``start + k * period_s``
        for every point not after ``end``. Defaults to the interval from the
        latest first-sample time to the latest last-sample time.

    Returns
    -------
    RegularSeries
    """
    period_s = int(period_s)
    if period_s <= 0:
        raise ValidationError("period_s must be positive")
    if span is None:
        span = (raw.first_time(), raw.last_time())
    t0, t1 = int(span[0]), int(span[1])
    if t1 < t0:
        raise EmptySpan(f"span [{t0}, {t1}] is empty")
    grid = t0 + period_s * np.arange((t1 - t0) // period_s + 1, dtype=np.int64)
    out = np.empty((grid.size, len(raw.variables)))
    for j, name in enumerate(raw.variables):
        times, values = raw.samples[name]
        idx = np.searchsorted(times, grid, side="right") - 1
        if idx[0] < 0:
            raise NoPriorObservation(name)
        out[:, j] = values[idx]
    return RegularSeries(t0, period_s, raw.variables, out)


def minmax_normalize(series):
    """Map every variable onto [0, 1]; constant variables become all zeros."""
    x = series.values
    lo = x.min(axis=0)
    rng = x.max(axis=0) - lo
    safe = np.where(rng > 0, rng, 1.0)
    out = np.where(rng > 0, (x - lo) / safe, 0.0)
    # guard against 1 + 1e-16 style overshoot
    out = np.clip(out, 0.0, 1.0)
    return RegularSeries(series.start, series.period_s, series.variables, out)


def _normalized_entropy(x):
    psd = np.abs(np.fft.rfft(x)) ** 2
    psd = psd[1:]  # drop DC
    total = psd.sum()
    if psd.size < 2 or not total > 0:
        return 0.0
    p = psd / total
    nz = p[p > 0]
    h = -np.sum(nz * np.log(nz)) / np.log(psd.size)
    return float(min(max(h, 0.0), 1.0))


def spectral_entropy(series):
    """Mean over variables of the normalized FFT spectral entropy.

    Each variable's power spectrum (DC bin excluded) is normalized to a
    probability distribution; its Shannon entropy is divided by the log of the
    number of bins, giving a value in [0, 1]. A spectrum with no power outside
    DC has entropy 0.
    """
    x = series.values
    if x.shape[0] < 8:
        raise SeriesTooShort(f"need at least 8 samples, got {x.shape[0]}")
    return float(np.mean([_normalized_entropy(x[:, j]) for j in range(x.shape[1])]))


def prefault_windows(series, alerts, window_s):
    """Stack the ``window_s``-long histories that end at each alert.

    A history covers the grid rows up to and including the row whose interval
    holds the alert. Alerts without a full history inside the grid are skipped.
    """
    n = _samples_for(window_s, series.period_s)
    rows = series.row_of(alerts.times)
    rows = rows[rows >= n - 1]
    if rows.size == 0:
        return np.empty((0, n, len(series.variables)))
    idx = rows[:, None] + np.arange(-n + 1, 1)[None, :]
    return series.values[idx]


def precursor_diversity(series, alerts, window_s):
    """Mean absolute pointwise distance between every pair of pre-fault windows.

    ``series`` is expected to be min-max normalized, so the result lies in
    [0, 1]. The pairwise sum is computed per (position, variable) from sorted
    values, which keeps the cost at O(n log n) in the number of faults.
    """
    w = prefault_windows(series, alerts, window_s)
    n = w.shape[0]
    if n < 2:
        raise InsufficientFaults(f"need at least 2 alerts with full history, got {n}")
    s = np.sort(w, axis=0)
    # sum_{i<j} |x_i - x_j| = sum_r x_(r) * (2r - n + 1) over sorted x
    coef = (2 * np.arange(n) - n + 1).astype(float)
    pair_sums = np.tensordot(coef, s, axes=(0, 0))
    n_pairs = n * (n - 1) / 2
    return float(pair_sums.sum() / (n_pairs * w.shape[1] * w.shape[2]))


def profile_dataset(series, alerts, window_s):
    """Diversity and spectral entropy of a data set, both on min-max scaled data."""
    norm = minmax_normalize(series)
    return DatasetProfile(precursor_diversity(norm, alerts, window_s), spectral_entropy(norm), int(window_s))


def compute_ttf(series, sessions, alerts):
    """Seconds from each in-session row to the next alert in the same session.

    Returns a float array aligned with the grid; NaN marks rows outside any
    session or rows with no later alert in their session.
    """
    from .sessions import session_spans

    ts = series.timestamps
    out = np.full(len(series), np.nan)
    a_rows = series.row_of(alerts.times)
    for _, first, last in session_spans(sessions):
        inside = (a_rows >= first) & (a_rows <= last)
        a_times = np.sort(alerts.times[inside])
        if a_times.size == 0:
            continue
        t = ts[first:last + 1]
        nxt = np.searchsorted(a_times, t, side="left")
        has = nxt < a_times.size
        seg = np.full(t.size, np.nan)
        seg[has] = a_times[nxt[has]] - t[has]
        out[first:last + 1] = seg
    return out


def _samples_for(duration_s, period_s):
    from .errors import DurationNotMultipleOfPeriod

    duration_s, period_s = int(duration_s), int(period_s)
    if duration_s <= 0 or duration_s % period_s:
        raise DurationNotMultipleOfPeriod(duration_s, period_s)
    return duration_s // period_s

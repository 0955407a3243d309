"""Work-session boundaries derived from movement variables."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnknownMovementVariable, ValidationError

OUT_OF_SESSION = -1


@dataclass(frozen=True)
class MovementSpec:
    movement_variables: tuple
    inactivity_gap_s: float = 600

    def __post_init__(self):
        object.__setattr__(self, "movement_variables", tuple(self.movement_variables))
        if not self.movement_variables:
            raise ValidationError("at least one movement variable is required")
        if not self.inactivity_gap_s > 0:
            raise ValidationError("inactivity_gap_s must be positive")


@dataclass(frozen=True, eq=False)
class SessionMap:
    """Per-row session id; -1 marks rows outside every session."""

    ids: np.ndarray

    def __post_init__(self):
        ids = np.array(self.ids, dtype=np.int64, copy=True).reshape(-1)
        ids.setflags(write=False)
        object.__setattr__(self, "ids", ids)

    def __len__(self):
        return self.ids.size

    def __eq__(self, other):
        return isinstance(other, SessionMap) and np.array_equal(self.ids, other.ids)


def compute_sessions(series, spec):
    """Label grid rows with session numbers from movement activity.

    A row opens or extends a session when any movement variable strictly
    increases with respect to the previous row. While a session is open, rows
    without an increase keep the current number; the first such row more than
    ``inactivity_gap_s`` after the latest increase still carries the number and
    closes the session, so the next increase opens a new one.
    """
    missing = [n for n in spec.movement_variables if n not in series.variables]
    if missing:
        raise UnknownMovementVariable(missing[0])
    cols = [series.variables.index(n) for n in spec.movement_variables]
    mv = series.values[:, cols]
    ts = series.timestamps
    n = len(series)
    ids = np.full(n, OUT_OF_SESSION, dtype=np.int64)
    if n < 2:
        return SessionMap(ids)
    increased = np.any(np.diff(mv, axis=0) > 0, axis=1)

    latest = ts[0]
    counter = 1
    active = False
    gap = spec.inactivity_gap_s
    for k in range(1, n):
        if increased[k - 1]:
            latest = ts[k]
            active = True
            ids[k] = counter
        elif active:
            ids[k] = counter
            if ts[k] - latest > gap:
                counter += 1
                active = False
    return SessionMap(ids)


def whole_dataset_session(series):
    """Treat the whole grid as a single session (continuous machines)."""
    return SessionMap(np.ones(len(series), dtype=np.int64))


def session_spans(sessions):
    """Maximal runs of equal in-session ids as ``(id, first_row, last_row)``."""
    ids = sessions.ids
    if ids.size == 0:
        return []
    change = np.flatnonzero(np.diff(ids)) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change - 1, [ids.size - 1]))
    return [(int(ids[s]), int(s), int(e)) for s, e in zip(starts, ends) if ids[s] >= 1]

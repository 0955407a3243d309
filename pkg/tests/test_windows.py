import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from failbench.errors import DurationNotMultipleOfPeriod, ValidationError
from failbench.sessions import SessionMap
from failbench.timeseries import AlertLog, RegularSeries
from failbench.windows import (FAILURE, NO_FAILURE, LabeledWindow, WindowSpec, alert_row_counts, count_support,
                               extract_windows, flatten_features, labels_of, support_grid)
from oracles import windows_bruteforce


def flat_series(n, period=60, v=2):
    return RegularSeries(0, period, [f"v{j}" for j in range(v)], np.arange(n * v, dtype=float).reshape(n, v))


class TestWindowSpec:
    def test_from_durations(self):
        assert WindowSpec.from_durations(1200, 900, 60) == WindowSpec(20, 15)

    def test_not_multiple(self):
        with pytest.raises(DurationNotMultipleOfPeriod):
            WindowSpec.from_durations(1230, 900, 60)

    def test_blood_refrigerator_period(self):
        # 10 min is not a whole number of 34 s samples
        with pytest.raises(DurationNotMultipleOfPeriod):
            WindowSpec.from_durations(600, 1800, 34)

    def test_positive(self):
        with pytest.raises(ValidationError):
            WindowSpec(0, 3)


class TestExtract:
    def test_count_one_session(self):
        s = flat_series(100)
        w = extract_windows(s, SessionMap(np.ones(100)), AlertLog(), WindowSpec(4, 6))
        assert len(w) == 91
        assert all(x.label == NO_FAILURE for x in w)

    def test_rw_starts_before_truncation(self):
        # with S_PW = 1 there are N - S_RW windows, one fewer than the N - S_RW + 1 RW positions
        s = flat_series(100)
        w = extract_windows(s, SessionMap(np.ones(100)), AlertLog(), WindowSpec(4, 1))
        assert len(w) == 96 == 100 - 4 + 1 - 1

    def test_features_are_views(self):
        s = flat_series(20)
        w = extract_windows(s, SessionMap(np.ones(20)), AlertLog(), WindowSpec(3, 2))
        assert np.shares_memory(w[0].features, s.values)
        assert w[5].features.tolist() == s.values[5:8].tolist()

    def test_alert_labels_pw_rows_only(self):
        s = flat_series(30, period=10)
        alerts = AlertLog([105], [11])  # row 10
        w = extract_windows(s, SessionMap(np.ones(30)), alerts, WindowSpec(3, 2))
        failing = [x.start_row for x in w if x.label == FAILURE]
        # PW rows of start r are r+3, r+4
        assert failing == [6, 7]

    def test_windows_never_cross_sessions(self):
        ids = [1] * 10 + [-1] * 3 + [2] * 10
        w = extract_windows(flat_series(23), SessionMap(ids), AlertLog(), WindowSpec(3, 2))
        assert len(w) == 2 * (10 - 5 + 1)
        for x in w:
            assert len({ids[r] for r in range(x.start_row, x.end_row + 1)}) == 1

    def test_short_session_yields_nothing(self):
        w = extract_windows(flat_series(5), SessionMap(np.ones(5)), AlertLog(), WindowSpec(3, 3))
        assert w == []

    def test_alert_counts(self):
        s = flat_series(5, period=10)
        counts = alert_row_counts(s, AlertLog([0, 9, 10, 1000], [1, 1, 1, 1]))
        assert counts.tolist() == [2, 1, 0, 0, 0]

    @given(st.lists(st.sampled_from([-1, 1, 1, 1]), min_size=1, max_size=80),
           st.sets(st.integers(0, 79), max_size=8), st.integers(1, 6), st.integers(1, 6))
    def test_matches_bruteforce(self, raw_ids, alert_rows, s_rw, s_pw):
        # turn the in/out pattern into increasing session ids per run
        ids, sid, prev = [], 0, -1
        for v in raw_ids:
            if v == 1 and prev != 1:
                sid += 1
            ids.append(sid if v == 1 else -1)
            prev = v
        n = len(ids)
        rows = {r for r in alert_rows if r < n}
        s = flat_series(n, period=10)
        alerts = AlertLog(sorted(10 * r + 3 for r in rows), [11] * len(rows))
        got = [(w.session_id, w.start_row, w.label)
               for w in extract_windows(s, SessionMap(ids), alerts, WindowSpec(s_rw, s_pw))]
        assert got == windows_bruteforce(ids, rows, s_rw, s_pw)


class TestSupport:
    def test_empty(self):
        assert count_support([]) == 0

    def test_labels(self):
        z = np.zeros((1, 1))
        w = [LabeledWindow(1, i, z, lab, 1) for i, lab in enumerate([FAILURE, NO_FAILURE, FAILURE])]
        assert count_support(w) == 2
        assert labels_of(w).tolist() == [1, 0, 1]

    def test_one_alert_per_session(self):
        n, s_rw, s_pw = 40, 5, 4
        ids = [1] * n + [2] * n
        rows = [25, n + 30]
        s = flat_series(2 * n, period=10)
        alerts = AlertLog([10 * r for r in rows], [11, 11])
        got = count_support(extract_windows(s, SessionMap(ids), alerts, WindowSpec(s_rw, s_pw)))
        # an alert at session row a is reached by starts a - s_rw - s_pw + 1 .. a - s_rw
        expected = sum(min(s_pw, n - s_rw - s_pw + 1) for _ in rows)
        assert got == expected == sum(w[2] for w in windows_bruteforce(ids, set(rows), s_rw, s_pw))

    def test_support_grid(self):
        ids = np.ones(60)
        s = flat_series(60, period=10)
        alerts = AlertLog([400], [11])
        g = support_grid(s, SessionMap(ids), alerts, [2, 4], [1, 3, 5])
        assert g.tolist() == [[1, 3, 5], [1, 3, 5]]


class TestFlatten:
    def test_one_by_one(self):
        w = LabeledWindow(1, 0, np.array([[3.0]]), 0, 1)
        assert flatten_features(w).tolist() == [3.0]

    def test_time_major(self):
        w = LabeledWindow(1, 0, np.array([[1.0, 2.0], [3.0, 4.0]]), 0, 1)
        assert flatten_features(w).tolist() == [1.0, 2.0, 3.0, 4.0]

    @given(st.integers(1, 6), st.integers(1, 4))
    def test_round_trip(self, r, v):
        m = np.arange(r * v, dtype=float).reshape(r, v)
        w = LabeledWindow(1, 0, m, 0, 1)
        assert np.array_equal(flatten_features(w).reshape(r, v), m)

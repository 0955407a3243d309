import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from failbench.errors import TooFewWindows, ValidationError
from failbench.protocol import (OK, REFERENCE_GRIDS, UNDEFINED, CellResult, ProtocolConfig, derive_seed,
                                plan_folds, run_cell, run_grid, run_holdout_cell, run_kfold_cell,
                                select_settings, split_sizes, summarize)
from failbench.windows import LabeledWindow
from oracles import aggregate_chain, spans_overlap

LR = {"logreg": [{"C": 1.0}]}
FAST = {"logreg": [{"C": 0.1}, {"C": 1.0}], "random_forest": [{"n_estimators": 5}]}


def flat_windows(labels, session=1, rw=2, pw=2, stride=None, rng=None):
    """Windows on one session whose first feature carries the label."""
    rng = rng or np.random.default_rng(0)
    stride = stride or rw + pw
    out = []
    for i, lab in enumerate(labels):
        x = rng.normal(scale=0.3, size=(rw, 2))
        x[:, 0] += 2.0 * lab
        out.append(LabeledWindow(session, i * stride, x, int(lab), pw))
    return out


class TestSeeds:
    def test_frozen_value(self):
        assert derive_seed(0, 600, 900, "rus-train", 0, 0) == 3190849665080476010

    def test_distinct_and_in_range(self):
        seeds = {derive_seed(1, r, p) for r in range(20) for p in range(20)}
        assert len(seeds) == 400
        assert all(0 <= s < 2 ** 63 for s in seeds)


class TestFolds:
    def test_even_split(self):
        plan = plan_folds(flat_windows([0, 1] * 5), 5)
        assert [len(plan.fold(k)) for k in range(5)] == [2] * 5

    def test_remainder_to_earliest(self):
        plan = plan_folds(flat_windows([0, 1] * 5 + [0]), 5)
        assert [len(plan.fold(k)) for k in range(5)] == [3, 2, 2, 2, 2]

    def test_contiguous_in_time(self):
        ws = flat_windows([0, 1] * 6)
        perm = [ws[i] for i in np.random.default_rng(1).permutation(12)]
        plan = plan_folds(perm, 3)
        starts = [[perm[i].start_row for i in plan.fold(k)] for k in range(3)]
        assert max(starts[0]) < min(starts[1]) and max(starts[1]) < min(starts[2])

    def test_k_below_two(self):
        with pytest.raises(ValidationError):
            plan_folds(flat_windows([0, 1]), 1)
        with pytest.raises(ValidationError):
            ProtocolConfig(k=1)

    def test_too_few(self):
        with pytest.raises(TooFewWindows):
            plan_folds(flat_windows([0, 1]), 5)

    @given(st.integers(2, 12), st.integers(0, 60))
    def test_partition(self, k, extra):
        ws = flat_windows([0] * (k + extra))
        plan = plan_folds(ws, k)
        sizes = [len(plan.fold(f)) for f in range(k)]
        assert sum(sizes) == len(ws) and max(sizes) - min(sizes) <= 1
        assert sizes == sorted(sizes, reverse=True)


class TestSummarize:
    def test_against_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            algs = ["a", "b", "c"][: rng.integers(1, 4)]
            grid = {a: [{}] * int(rng.integers(1, 4)) for a in algs}
            # coarse values make ties common
            scores = {(a, l): (rng.integers(0, 4, size=int(rng.integers(1, 5))) / 4).tolist()
                      for a in algs for l in range(len(grid[a]))}
            got = summarize(algs, grid, scores)
            want = aggregate_chain(scores, algs, {a: len(grid[a]) for a in algs})
            assert got[0] == pytest.approx(want[0])
            assert got[1] == pytest.approx(want[1])
            assert got[2] == pytest.approx(want[2]) and got[3] == want[3]

    def test_tie_goes_to_first_algorithm(self):
        scores = {("x", 0): [0.5], ("y", 0): [0.5]}
        assert summarize(["x", "y"], {"x": [{}], "y": [{}]}, scores)[3] == "x"
        assert summarize(["y", "x"], {"x": [{}], "y": [{}]}, scores)[3] == "y"

    def test_failed_runs_ignored(self):
        means, best, *_ = summarize(["x"], {"x": [{}, {}]}, {("x", 0): [None, 0.4, 0.6], ("x", 1): [None]})
        assert means["x", 0] == pytest.approx(0.5) and means["x", 1] is None and best["x"] == 0.5


class TestKfold:
    def test_planted_signal(self):
        ws = flat_windows(([0] * 4 + [1]) * 20)
        cell = run_kfold_cell(ws, ["logreg"], LR, ProtocolConfig(k=5, rus_repeats=3))
        assert cell.status == OK and cell.best_score >= 0.95
        s = cell.settings[0]
        assert s.n_scores == 15 and s.n_failed == 0

    def test_crossed_pairing_counts(self):
        ws = flat_windows(([0] * 4 + [1]) * 20)
        cell = run_kfold_cell(ws, ["logreg"], LR, ProtocolConfig(k=5, rus_repeats=3, rus_pairing="crossed"))
        assert cell.settings[0].n_scores == 45

    def test_fold_without_failures_is_undefined(self):
        ws = flat_windows([1, 0] * 5 + [0] * 10)
        cell = run_kfold_cell(ws, ["logreg"], LR, ProtocolConfig(k=5, rus_repeats=1))
        assert cell.status == UNDEFINED and cell.best_score is None and cell.warnings

    def test_too_few_windows_is_undefined(self):
        cell = run_kfold_cell(flat_windows([0, 1]), ["logreg"], LR, ProtocolConfig(k=5))
        assert cell.status == UNDEFINED

    def test_no_leakage(self):
        # overlapping windows (stride 2 < span 6) exercise the exclusion step
        ws = flat_windows(([0] * 3 + [1]) * 15, rw=3, pw=3, stride=2)
        pairs = []
        cell = run_kfold_cell(ws, ["logreg"], LR, ProtocolConfig(k=4, rus_repeats=2),
                              trace=lambda k, i, tr, te: pairs.append((tr, te)))
        assert cell.status == OK and len(pairs) == 8
        for tr, te in pairs:
            assert not set(tr.tolist()) & set(te.tolist())
            for a in tr:
                for b in te:
                    wa, wb = ws[a], ws[b]
                    assert not spans_overlap(wa.start_row, wa.end_row, wb.start_row, wb.end_row)
            assert (np.array([ws[i].label for i in tr]) == 1).sum() * 2 == len(tr)
            assert (np.array([ws[i].label for i in te]) == 1).sum() * 2 == len(te)

    def test_deterministic(self):
        ws = flat_windows(([0] * 4 + [1]) * 12)
        cfg = ProtocolConfig(k=3, rus_repeats=2, seed=5)
        a = run_kfold_cell(ws, list(FAST), FAST, cfg).to_dict()
        b = run_kfold_cell(ws, list(FAST), FAST, cfg).to_dict()
        assert a == b

    def test_round_trip(self):
        ws = flat_windows(([0] * 4 + [1]) * 12)
        cell = run_kfold_cell(ws, ["logreg"], LR, ProtocolConfig(k=3, rus_repeats=1))
        assert CellResult.from_dict(cell.to_dict()) == cell


class TestHoldout:
    def test_split_sizes(self):
        assert split_sizes(100, (0.6, 0.2, 0.2)) == (60, 20, 20)
        assert sum(split_sizes(37, (0.6, 0.2, 0.2))) == 37

    @pytest.mark.parametrize("alg,grid", [("logreg", [{"C": 1.0}]),
                                          ("random_forest", [{"n_estimators": 10}])])
    def test_planted_pattern(self, alg, grid):
        ws = flat_windows(([0] * 4 + [1]) * 40, rng=np.random.default_rng(4))
        cell = run_holdout_cell(ws, [alg], {alg: grid}, ProtocolConfig(kind="holdout_weighted"))
        assert cell.status == OK and cell.best_score >= 0.9

    def test_no_leakage(self):
        ws = flat_windows(([0] * 3 + [1]) * 25, rw=3, pw=3, stride=2)
        pairs = []
        run_holdout_cell(ws, ["logreg"], LR, ProtocolConfig(kind="holdout_weighted"),
                         trace=lambda k, i, tr, te: pairs.append((tr, te)))
        for tr, te in pairs:
            for a in tr:
                for b in te:
                    assert not spans_overlap(ws[a].start_row, ws[a].end_row, ws[b].start_row, ws[b].end_row)

    def test_selection_by_validation(self):
        ws = flat_windows(([0] * 4 + [1]) * 30)
        grid = {"logreg": [{"C": 1e-6}, {"C": 1.0}]}
        cell = run_holdout_cell(ws, ["logreg"], grid, ProtocolConfig(kind="holdout_weighted"))
        scored = [s for s in cell.settings if s.mean is not None]
        assert len(scored) == 1
        assert all(s.validation is not None for s in cell.settings)

    def test_random_search_subset(self):
        cfg = ProtocolConfig(kind="holdout_weighted", search="random", search_n=3, seed=2)
        chosen = select_settings(10, cfg, "k")
        assert len(chosen) == 3 and chosen == sorted(set(chosen))
        assert chosen == select_settings(10, cfg, "k")
        assert select_settings(2, cfg, "k") == [0, 1]


class TestGrid:
    def test_reference_grid_sizes(self):
        sizes = {k: len(v["rw"]) * len(v["pw"]) for k, v in REFERENCE_GRIDS.items()}
        assert sizes == {"wrapping_machine": 54, "blood_refrigerator": 20, "nitrogen_generator": 30}

    def test_single_cell_matches_run_cell(self, small_synth):
        ds = small_synth[0]
        cfg = ProtocolConfig(k=3, rus_repeats=1)
        table = run_grid(ds, [600], [900], cfg, LR)
        assert len(table.cells) == 1
        assert table.cells[0].to_dict() == run_cell(ds, 600, 900, LR, cfg).to_dict()

    def test_order_and_manifest(self, small_synth):
        ds = small_synth[0]
        events = []
        table = run_grid(ds, [300, 600], [600, 1200], ProtocolConfig(k=3, rus_repeats=1), LR,
                         progress=events.append)
        assert [(c.rw_s, c.pw_s) for c in table.cells] == [(300, 600), (300, 1200), (600, 600), (600, 1200)]
        assert len(events) == 8
        m = table.manifest
        assert m["rw_s"] == [300, 600] and m["pw_s"] == [600, 1200] and len(m["config_hash"]) == 64

    def test_infeasible_cell_undefined(self, small_synth):
        ds = small_synth[0]
        table = run_grid(ds, [600], [6 * 3600], ProtocolConfig(k=3, rus_repeats=1), LR)
        cell = table.cells[0]
        assert cell.status == UNDEFINED and cell.n_windows == 0

    def test_rejects_unknown_algorithm(self, small_synth):
        with pytest.raises(ValidationError):
            run_grid(small_synth[0], [600], [600], ProtocolConfig(), {"xgboost": [{}]})

    def test_rejects_non_multiple_duration(self, small_synth):
        with pytest.raises(ValidationError):
            run_grid(small_synth[0], [90], [600], ProtocolConfig(), LR)

"""Evaluation protocols over labeled windows and the RW x PW grid runner.

Two protocols are provided:

``kfold_rus``
    Contiguous time-ordered folds. For every fold the training windows that
    overlap a test window are dropped, ``rus_repeats`` undersampled train and
    test instances are drawn, every (algorithm, setting) is trained on each
    train instance and scored on its paired test instance (or on all of them
    with ``rus_pairing="crossed"``). Scores are averaged per setting, then
    maximized per algorithm and across algorithms.

``holdout_weighted``
    Time-ordered train/validation/test split. Train and validation are
    undersampled; the best setting per algorithm is chosen on validation macro
    F1 (random or exhaustive search); the chosen model is scored on the
    untouched test split with class-weighted macro F1.

Every random draw is seeded by :func:`derive_seed`, a BLAKE2b hash of the
global seed and the draw's coordinates, so results do not depend on the order
or process in which cells run.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .balance import class_weights, exclude_overlap, random_undersample
from .errors import FailbenchError, TooFewWindows, ValidationError
from .metrics import confusion, report
from .models import ModelSpec, fit, get_algorithm, predict
from .windows import FAILURE, WindowSpec, count_support, extract_windows, labels_of, stack_features

log = logging.getLogger(__name__)

OK = "ok"
UNDEFINED = "undefined"

#: Grids used for the three industrial data sets, in seconds.
REFERENCE_GRIDS = {
    "wrapping_machine": {
        "rw": [m * 60 for m in (10, 15, 20, 25, 30, 35)],
        "pw": [int(h * 3600) for h in (0.25, 0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4)],
    },
    "blood_refrigerator": {
        "rw": [m * 60 for m in (10, 15, 20, 25, 30)],
        "pw": [int(h * 3600) for h in (0.5, 1, 1.5, 2)],
    },
    "nitrogen_generator": {
        "rw": [m * 60 for m in (10, 15, 20, 25, 30)],
        "pw": [int(h * 3600) for h in (0.5, 1, 1.5, 2, 3, 5)],
    },
}


def derive_seed(*parts):
    """Stable 63-bit seed: BLAKE2b-64 of the JSON encoding of ``parts``."""
    digest = hashlib.blake2b(json.dumps(parts, separators=(",", ":")).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") & (2 ** 63 - 1)


@dataclass(frozen=True)
class ProtocolConfig:
    kind: str = "kfold_rus"
    k: int = 5
    rus_repeats: int = 10
    rus_pairing: str = "paired"
    split: tuple = (0.6, 0.2, 0.2)
    search: str = "grid"
    search_n: int = 10
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "split", tuple(float(f) for f in self.split))
        if self.kind not in ("kfold_rus", "holdout_weighted"):
            raise ValidationError(f"unknown protocol {self.kind!r}")
        if self.rus_repeats < 1:
            raise ValidationError("rus_repeats must be >= 1")
        if self.rus_pairing not in ("paired", "crossed"):
            raise ValidationError("rus_pairing must be 'paired' or 'crossed'")
        if self.k < 2:
            raise ValidationError("k must be >= 2")
        if len(self.split) != 3 or any(f <= 0 for f in self.split) or not math.isclose(sum(self.split), 1.0):
            raise ValidationError("split must be three positive fractions summing to 1")
        if self.search not in ("grid", "random") or self.search_n < 1:
            raise ValidationError("search must be 'grid' or 'random' with search_n >= 1")


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: np.ndarray

    def fold(self, k):
        return np.flatnonzero(self.assignment == k)


def plan_folds(windows, k, seed=0):
    """Contiguous time-ordered folds, remainder spread over the earliest folds.

    ``seed`` is accepted for interface symmetry; the plan is deterministic.
    """
    if k < 2:
        raise ValidationError("k must be >= 2")
    n = len(windows)
    if n < k:
        raise TooFewWindows(f"{n} windows cannot fill {k} folds")
    order = np.argsort([w.start_row for w in windows], kind="stable")
    sizes = [n // k + (1 if f < n % k else 0) for f in range(k)]
    assignment = np.empty(n, dtype=np.int64)
    assignment[order] = np.repeat(np.arange(k), sizes)
    return FoldPlan(k, assignment)


@dataclass
class SettingResult:
    algorithm: str
    setting: int
    hyperparams: dict
    mean: float = None
    std: float = None
    precision: float = None
    recall: float = None
    n_scores: int = 0
    n_failed: int = 0
    validation: float = None


@dataclass
class CellResult:
    rw_s: int
    pw_s: int
    status: str
    support: int = 0
    n_windows: int = 0
    settings: list = field(default_factory=list)
    best: dict = field(default_factory=dict)
    best_score: float = None
    best_algorithm: str = None
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["settings"] = [SettingResult(**s) for s in d.get("settings", [])]
        return cls(**d)


@dataclass
class ResultTable:
    cells: list
    manifest: dict = field(default_factory=dict)

    def records(self):
        """Deterministic content of the table (everything except timings)."""
        return [c.to_dict() for c in self.cells]

    def cell(self, rw_s, pw_s):
        for c in self.cells:
            if c.rw_s == rw_s and c.pw_s == pw_s:
                return c
        raise KeyError((rw_s, pw_s))


def summarize(algorithms, hypergrid, scores):
    """Collapse per-setting score lists into ``m_jl``, ``b_j``, ``B_s`` and ``B_a``.

    ``scores`` maps ``(algorithm, setting_index)`` to a list of macro F1 values
    where ``None`` marks a failed training run. Ties go to the earliest
    declared setting and algorithm.
    """
    means = {}
    for alg in algorithms:
        for l in range(len(hypergrid[alg])):
            vals = [s for s in scores.get((alg, l), []) if s is not None]
            means[alg, l] = float(np.mean(vals)) if vals else None
    best = {}
    for alg in algorithms:
        b = None
        for l in range(len(hypergrid[alg])):
            m = means[alg, l]
            if m is not None and (b is None or m > b):
                b = m
        best[alg] = b
    best_score, best_alg = None, None
    for alg in algorithms:
        if best[alg] is not None and (best_score is None or best[alg] > best_score):
            best_score, best_alg = best[alg], alg
    return means, best, best_score, best_alg


def _score(model, X, y, weights=None):
    _, yhat = predict(model, X)
    return report(confusion(y, yhat, weights))


def _fit_and_score(spec, X_tr, y_tr, test_sets, warnings, tag):
    """Train once, score on each ``(X, y, weights)``; ``None`` entries on failure."""
    try:
        model = fit(spec, X_tr, y_tr)
        return [_score(model, X, y, w) for X, y, w in test_sets]
    except FailbenchError as exc:
        warnings.append(f"{tag}: {type(exc).__name__}: {exc}")
        log.warning("%s failed: %s", tag, exc)
        return [None] * len(test_sets)


def _undefined(rw_s, pw_s, windows, reason):
    return CellResult(rw_s, pw_s, UNDEFINED, count_support(windows), len(windows), warnings=[reason])


def _has_both(y):
    return bool(np.any(y == FAILURE)) and bool(np.any(y != FAILURE))


def run_kfold_cell(windows, algorithms, hypergrid, config, rw_s=0, pw_s=0, trace=None):
    """k-fold + RUS evaluation of one (RW, PW) cell.

    ``trace``, when given, is called as ``trace(fold, i, train_idx, test_idx)``
    with the window indices behind every trained/scored pair.
    """
    algorithms = list(algorithms)
    y = labels_of(windows)
    try:
        plan = plan_folds(windows, config.k, config.seed)
    except TooFewWindows as exc:
        return _undefined(rw_s, pw_s, windows, str(exc))
    folds = []
    for k in range(config.k):
        test_idx = plan.fold(k)
        test = [windows[i] for i in test_idx]
        kept = {id(w) for w in exclude_overlap([windows[i] for i in np.flatnonzero(plan.assignment != k)], test)}
        train_idx = np.array([i for i in np.flatnonzero(plan.assignment != k) if id(windows[i]) in kept],
                             dtype=np.int64)
        if not np.any(y[test_idx] == FAILURE):
            return _undefined(rw_s, pw_s, windows, f"fold {k} has no failure windows in its test set")
        if not _has_both(y[test_idx]) or not _has_both(y[train_idx]):
            return _undefined(rw_s, pw_s, windows, f"fold {k} lacks one class after overlap exclusion")
        folds.append((train_idx, test_idx))

    X = stack_features(windows)
    scores, precs, recs, failed = {}, {}, {}, {}
    warnings = []
    for k, (train_idx, test_idx) in enumerate(folds):
        R = config.rus_repeats
        p_inst = [train_idx[random_undersample(y[train_idx], derive_seed(config.seed, rw_s, pw_s, "rus-train", k, i)
                                               ).kept_indices] for i in range(R)]
        r_inst = [test_idx[random_undersample(y[test_idx], derive_seed(config.seed, rw_s, pw_s, "rus-test", k, i)
                                              ).kept_indices] for i in range(R)]
        for i in range(R):
            partners = [i] if config.rus_pairing == "paired" else list(range(R))
            if trace is not None:
                for i2 in partners:
                    trace(k, i, p_inst[i], r_inst[i2])
            test_sets = [(X[r_inst[i2]], y[r_inst[i2]], None) for i2 in partners]
            for alg in algorithms:
                for l, hp in enumerate(hypergrid[alg]):
                    spec = ModelSpec(alg, dict(hp), derive_seed(config.seed, rw_s, pw_s, alg, l, k, i))
                    reps = _fit_and_score(spec, X[p_inst[i]], y[p_inst[i]], test_sets, warnings,
                                          f"{alg}[{l}] fold {k} rus {i}")
                    for rep in reps:
                        scores.setdefault((alg, l), []).append(None if rep is None else rep.macro_f1)
                        precs.setdefault((alg, l), []).append(None if rep is None else rep.macro_precision)
                        recs.setdefault((alg, l), []).append(None if rep is None else rep.macro_recall)
                        failed[alg, l] = failed.get((alg, l), 0) + (rep is None)
    return _assemble(rw_s, pw_s, windows, algorithms, hypergrid, scores, precs, recs, failed, warnings)


def _mean_or_none(vals):
    vals = [v for v in vals if v is not None]
    return float(np.mean(vals)) if vals else None


def _assemble(rw_s, pw_s, windows, algorithms, hypergrid, scores, precs, recs, failed, warnings,
              validation=None):
    means, best, best_score, best_alg = summarize(algorithms, hypergrid, scores)
    settings = []
    for alg in algorithms:
        for l, hp in enumerate(hypergrid[alg]):
            vals = [s for s in scores.get((alg, l), []) if s is not None]
            settings.append(SettingResult(
                algorithm=alg, setting=l, hyperparams=dict(hp), mean=means[alg, l],
                std=float(np.std(vals)) if vals else None,
                precision=_mean_or_none(precs.get((alg, l), [])),
                recall=_mean_or_none(recs.get((alg, l), [])),
                n_scores=len(vals), n_failed=failed.get((alg, l), 0),
                validation=None if validation is None else validation.get((alg, l))))
    return CellResult(rw_s, pw_s, OK, count_support(windows), len(windows), settings, best, best_score, best_alg,
                      warnings)


def split_sizes(n, fractions):
    """Train/validation/test sizes for ``n`` time-ordered windows."""
    n_train = int(round(fractions[0] * n))
    n_val = int(round((fractions[0] + fractions[1]) * n)) - n_train
    return n_train, n_val, n - n_train - n_val


def select_settings(n_settings, config, *key):
    """Setting indices to evaluate: all of them, or a seeded random subset."""
    if config.search == "grid" or n_settings <= config.search_n:
        return list(range(n_settings))
    rng = np.random.default_rng(derive_seed(config.seed, "search", *key))
    return sorted(rng.choice(n_settings, size=config.search_n, replace=False).tolist())


def run_holdout_cell(windows, algorithms, hypergrid, config, rw_s=0, pw_s=0, trace=None):
    """Train/validation/test evaluation with class-weighted test scoring."""
    algorithms = list(algorithms)
    n = len(windows)
    order = np.argsort([w.start_row for w in windows], kind="stable")
    n_tr, n_va, n_te = split_sizes(n, config.split)
    if min(n_tr, n_va, n_te) < 1:
        return _undefined(rw_s, pw_s, windows, str(TooFewWindows(f"{n} windows cannot fill three splits")))
    test_idx = order[n_tr + n_va:]
    val_all = order[n_tr:n_tr + n_va]
    test = [windows[i] for i in test_idx]
    val_keep = {id(w) for w in exclude_overlap([windows[i] for i in val_all], test)}
    val_idx = np.array([i for i in val_all if id(windows[i]) in val_keep], dtype=np.int64)
    held = test + [windows[i] for i in val_idx]
    tr_keep = {id(w) for w in exclude_overlap([windows[i] for i in order[:n_tr]], held)}
    train_idx = np.array([i for i in order[:n_tr] if id(windows[i]) in tr_keep], dtype=np.int64)
    y = labels_of(windows)
    if not np.any(y[test_idx] == FAILURE):
        return _undefined(rw_s, pw_s, windows, "test split has no failure windows")
    if not _has_both(y[test_idx]) or not _has_both(y[train_idx]) or not _has_both(y[val_idx]):
        return _undefined(rw_s, pw_s, windows, "a split lacks one class")

    X = stack_features(windows)
    tr = train_idx[random_undersample(y[train_idx], derive_seed(config.seed, rw_s, pw_s, "rus-train")).kept_indices]
    va = val_idx[random_undersample(y[val_idx], derive_seed(config.seed, rw_s, pw_s, "rus-val")).kept_indices]
    weights = class_weights(y[test_idx])
    if trace is not None:
        trace(0, 0, tr, test_idx)
        trace(0, 0, tr, va)
    scores, precs, recs, failed, validation = {}, {}, {}, {}, {}
    warnings = []
    for alg in algorithms:
        chosen, chosen_val, chosen_model = None, None, None
        for l in select_settings(len(hypergrid[alg]), config, rw_s, pw_s, alg):
            spec = ModelSpec(alg, dict(hypergrid[alg][l]), derive_seed(config.seed, rw_s, pw_s, alg, l))
            try:
                model = fit(spec, X[tr], y[tr])
                v = _score(model, X[va], y[va]).macro_f1
            except FailbenchError as exc:
                warnings.append(f"{alg}[{l}]: {type(exc).__name__}: {exc}")
                failed[alg, l] = 1
                continue
            validation[alg, l] = v
            if chosen_val is None or v > chosen_val:
                chosen, chosen_val, chosen_model = l, v, model
        if chosen is None:
            continue
        rep = _score(chosen_model, X[test_idx], y[test_idx], weights)
        scores[alg, chosen] = [rep.macro_f1]
        precs[alg, chosen] = [rep.macro_precision]
        recs[alg, chosen] = [rep.macro_recall]
    return _assemble(rw_s, pw_s, windows, algorithms, hypergrid, scores, precs, recs, failed, warnings,
                     validation)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Grid-aligned inputs of a run: series, session map and target alerts."""

    series: object
    sessions: object
    alerts: object


def run_cell(dataset, rw_s, pw_s, hypergrid, config, trace=None):
    spec = WindowSpec.from_durations(rw_s, pw_s, dataset.series.period_s)
    windows = extract_windows(dataset.series, dataset.sessions, dataset.alerts, spec)
    runner = run_kfold_cell if config.kind == "kfold_rus" else run_holdout_cell
    return runner(windows, list(hypergrid), hypergrid, config, rw_s, pw_s, trace)


def _timed_cell(args):
    dataset, rw_s, pw_s, hypergrid, config = args
    t0 = time.perf_counter()
    cell = run_cell(dataset, rw_s, pw_s, hypergrid, config)
    return cell, time.perf_counter() - t0


def config_hash(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()


def run_grid(dataset, rw_list, pw_list, protocol, hypergrid, jobs=1, progress=None):
    """Evaluate every (RW, PW) pair; cells come back in row-major grid order.

    ``progress`` receives dict events (``cell_started`` / ``cell_finished``).
    Results are identical for any ``jobs`` value.
    """
    for name, settings in hypergrid.items():
        get_algorithm(name)
        if not settings:
            raise ValidationError(f"hypergrid for {name!r} is empty")
    pairs = [(int(r), int(p)) for r in rw_list for p in pw_list]
    for r, p in pairs:
        WindowSpec.from_durations(r, p, dataset.series.period_s)
    emit = progress or (lambda event: None)
    t_start = time.perf_counter()
    tasks = [(dataset, r, p, hypergrid, protocol) for r, p in pairs]
    results = [None] * len(tasks)
    if jobs <= 1:
        for n, task in enumerate(tasks):
            emit({"event": "cell_started", "rw_s": task[1], "pw_s": task[2]})
            results[n] = _timed_cell(task)
            emit({"event": "cell_finished", "rw_s": task[1], "pw_s": task[2], "status": results[n][0].status})
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = []
            for task in tasks:
                emit({"event": "cell_started", "rw_s": task[1], "pw_s": task[2]})
                futures.append(pool.submit(_timed_cell, task))
            for n, fut in enumerate(futures):
                results[n] = fut.result()
                emit({"event": "cell_finished", "rw_s": tasks[n][1], "pw_s": tasks[n][2],
                      "status": results[n][0].status})
    cells = [c for c, _ in results]
    manifest = {
        "version": __version__,
        "protocol": asdict(protocol),
        "hypergrid": hypergrid,
        "rw_s": [int(r) for r in rw_list],
        "pw_s": [int(p) for p in pw_list],
        "seed": protocol.seed,
        "seed_derivation": "blake2b-64 of JSON [seed, rw_s, pw_s, tag...]",
        "config_hash": config_hash({"protocol": asdict(protocol), "hypergrid": hypergrid,
                                    "rw": list(rw_list), "pw": list(pw_list)}),
        "timings": {"total_s": time.perf_counter() - t_start,
                    "cells": [{"rw_s": c.rw_s, "pw_s": c.pw_s, "seconds": t} for c, t in results]},
        "jobs": jobs,
    }
    return ResultTable(cells, manifest)

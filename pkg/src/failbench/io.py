"""CSV ingestion and export, duration strings and run-configuration loading.

Telemetry is wide-format CSV: a ``timestamp`` column followed by one column
per variable, a blank cell meaning "no observation at this instant". Alerts
are a two-column ``timestamp,code`` CSV. Timestamps are ISO-8601 UTC
(``2021-06-15T10:00:00Z``) or integer epoch seconds; fractional seconds are
floored. Files are written as UTF-8 without BOM, LF line endings, RFC 4180
quoting.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from .errors import InvalidConfig, NonMonotonicTimestamps, SchemaError, UnknownVariableColumn, ValidationError
from .timeseries import AlertLog, RawSeries

_UNITS = {"s": 1, "m": 60, "h": 3600, "d": 86400}
_DURATION = re.compile(r"^\s*(\d+(?:\.\d+)?|\.\d+)\s*([smhd])\s*$")


def parse_duration(text):
    """``"15m"`` -> 900. The result must be a whole number of seconds."""
    if not isinstance(text, str):
        raise InvalidConfig(f"duration must be a string with a unit suffix, got {text!r}")
    m = _DURATION.match(text)
    if not m:
        raise InvalidConfig(f"bad duration {text!r}; expected e.g. '34s', '15m', '0.25h'")
    seconds = Decimal(m.group(1)) * _UNITS[m.group(2)]
    if seconds != seconds.to_integral_value() or seconds <= 0:
        raise InvalidConfig(f"duration {text!r} is not a positive whole number of seconds")
    return int(seconds)


def format_duration(seconds):
    seconds = int(seconds)
    for unit, size in (("h", 3600), ("m", 60)):
        if seconds % size == 0:
            return f"{seconds // size}{unit}"
    if seconds >= 3600 and (seconds * 100) % 3600 == 0:
        return f"{seconds / 3600:g}h"
    return f"{seconds}s"


def parse_timestamp(text):
    text = text.strip()
    if re.fullmatch(r"-?\d+", text):
        return int(text)
    iso = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
    # fromisoformat on older interpreters wants exactly 3 or 6 fraction digits
    iso = re.sub(r"\.(\d+)", lambda m: "." + m.group(1)[:6].ljust(6, "0"), iso, count=1)
    try:
        dt = datetime.fromisoformat(iso)
    except ValueError:
        raise ValueError(f"unparseable timestamp {text!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return math.floor(dt.timestamp())


def format_timestamp(t):
    return datetime.fromtimestamp(int(t), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class ValidationReport:
    rows: int = 0
    empty_rows: int = 0
    out_of_order_rows: int = 0
    duplicate_observations: int = 0
    observations: dict = field(default_factory=dict)
    alerts: int = 0
    alert_codes: dict = field(default_factory=dict)

    def as_dict(self):
        return dict(self.__dict__)


def _reader(path):
    f = open(path, newline="", encoding="utf-8-sig")
    return f, csv.reader(f)


def read_telemetry(path, variables=None, strict=False, report=None):
    """Parse a wide telemetry CSV into a :class:`RawSeries`.

    Duplicate ``(timestamp, variable)`` observations keep the row that comes
    later in the file. Out-of-order rows are sorted, or rejected with
    ``strict=True``. ``variables``, when given, lists the allowed columns.
    """
    rep = report if report is not None else ValidationReport()
    f, rows = _reader(path)
    with f:
        try:
            header = next(rows)
        except StopIteration:
            raise SchemaError(1, "empty file") from None
        if not header or header[0].strip().lower() != "timestamp":
            raise SchemaError(1, "first column must be 'timestamp'")
        names = [h.strip() for h in header[1:]]
        if not names or any(not n for n in names):
            raise SchemaError(1, "blank or missing variable column name")
        if len(set(names)) != len(names):
            raise SchemaError(1, "duplicate variable column")
        if variables is not None:
            extra = [n for n in names if n not in set(variables)]
            if extra:
                raise UnknownVariableColumn(f"unexpected variable column {extra[0]!r}")
        records = []
        last_t = None
        for lineno, row in enumerate(rows, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise SchemaError(lineno, f"expected {len(header)} fields, got {len(row)}")
            try:
                t = parse_timestamp(row[0])
            except ValueError as exc:
                raise SchemaError(lineno, str(exc)) from None
            if last_t is not None and t < last_t:
                if strict:
                    raise NonMonotonicTimestamps(f"line {lineno}: timestamp goes backwards")
                rep.out_of_order_rows += 1
            last_t = t if last_t is None else max(last_t, t)
            vals = []
            for j, cell in enumerate(row[1:]):
                cell = cell.strip()
                if not cell:
                    vals.append(None)
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise SchemaError(lineno, f"non-numeric value {cell!r} for {names[j]!r}") from None
                if not math.isfinite(v):
                    raise SchemaError(lineno, f"non-finite value for {names[j]!r}")
                vals.append(v)
            rep.rows += 1
            if all(v is None for v in vals):
                rep.empty_rows += 1
            records.append((t, vals))
    records.sort(key=lambda r: r[0])  # stable: later file rows stay later within a timestamp
    samples = {}
    for j, name in enumerate(names):
        obs = {}
        for t, vals in records:
            if vals[j] is not None:
                if t in obs:
                    rep.duplicate_observations += 1
                obs[t] = vals[j]
        if not obs:
            raise SchemaError(1, f"variable {name!r} has no observations")
        ts = np.fromiter(obs.keys(), dtype=np.int64, count=len(obs))
        samples[name] = (ts, np.fromiter(obs.values(), dtype=float, count=len(obs)))
        rep.observations[name] = len(obs)
    return RawSeries(names, samples)


def read_alerts(path, strict=False, report=None):
    rep = report if report is not None else ValidationReport()
    f, rows = _reader(path)
    events = []
    with f:
        header = next(rows, None)
        if header is None or [h.strip().lower() for h in header] != ["timestamp", "code"]:
            raise SchemaError(1, "alerts header must be 'timestamp,code'")
        last_t = None
        for lineno, row in enumerate(rows, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise SchemaError(lineno, f"expected 2 fields, got {len(row)}")
            try:
                t = parse_timestamp(row[0])
            except ValueError as exc:
                raise SchemaError(lineno, str(exc)) from None
            try:
                code = int(row[1].strip())
            except ValueError:
                raise SchemaError(lineno, f"alert code {row[1]!r} is not an integer") from None
            if code < 0:
                raise SchemaError(lineno, "alert codes must be non-negative")
            if last_t is not None and t < last_t:
                if strict:
                    raise NonMonotonicTimestamps(f"line {lineno}: alert timestamp goes backwards")
                rep.out_of_order_rows += 1
            last_t = t if last_t is None else max(last_t, t)
            events.append((t, code))
    alerts = AlertLog.from_events(events)
    rep.alerts = len(alerts)
    codes, counts = np.unique(alerts.codes, return_counts=True)
    rep.alert_codes = {str(int(c)): int(n) for c, n in zip(codes, counts)}
    return alerts


def ingest(telemetry_csv, alerts_csv, variables=None, strict=False):
    """Read both CSVs; returns ``(RawSeries, AlertLog, ValidationReport)``."""
    rep = ValidationReport()
    raw = read_telemetry(telemetry_csv, variables, strict, rep)
    alerts = read_alerts(alerts_csv, strict, rep)
    return raw, alerts, rep


def _writer(path):
    f = open(path, "w", newline="", encoding="utf-8")
    return f, csv.writer(f, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)


def write_telemetry(raw, path):
    times = np.unique(np.concatenate([raw.samples[n][0] for n in raw.variables]))
    cols = []
    for name in raw.variables:
        t, v = raw.samples[name]
        col = [""] * times.size
        for i, val in zip(np.searchsorted(times, t).tolist(), v.tolist()):
            col[i] = repr(val)
        cols.append(col)
    f, w = _writer(path)
    with f:
        w.writerow(["timestamp", *raw.variables])
        for i, t in enumerate(times.tolist()):
            w.writerow([format_timestamp(t), *(c[i] for c in cols)])


def write_alerts(alerts, path):
    f, w = _writer(path)
    with f:
        w.writerow(["timestamp", "code"])
        for t, c in alerts.events():
            w.writerow([format_timestamp(t), c])


def write_sessions(series, sessions, path_or_file):
    own = isinstance(path_or_file, (str, os.PathLike))
    f = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["timestamp", "session_id"])
        for t, sid in zip(series.timestamps.tolist(), sessions.ids.tolist()):
            w.writerow([format_timestamp(t), sid])
    finally:
        if own:
            f.close()


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


_DURATION_SCHEMA = {"type": "string", "pattern": _DURATION.pattern}

RUN_CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["telemetry", "alerts", "period", "target_code", "rw", "pw", "algorithms"],
    "properties": {
        "telemetry": {"type": "string"},
        "alerts": {"type": "string"},
        "period": _DURATION_SCHEMA,
        "span": {"type": "array", "items": {"type": ["string", "integer"]}, "minItems": 2, "maxItems": 2},
        "movement_variables": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "whole_dataset_session": {"type": "boolean"},
        "inactivity_gap": _DURATION_SCHEMA,
        "target_code": {"type": "integer", "minimum": 0},
        "rw": {"type": "array", "items": _DURATION_SCHEMA, "minItems": 1},
        "pw": {"type": "array", "items": _DURATION_SCHEMA, "minItems": 1},
        "profile_window": _DURATION_SCHEMA,
        "protocol": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["kfold_rus", "holdout_weighted"]},
                "k": {"type": "integer", "minimum": 2},
                "rus_repeats": {"type": "integer", "minimum": 1},
                "rus_pairing": {"enum": ["paired", "crossed"]},
                "split": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                          "minItems": 3, "maxItems": 3},
                "search": {"enum": ["grid", "random"]},
                "search_n": {"type": "integer", "minimum": 1},
            },
        },
        "algorithms": {
            "type": "object",
            "minProperties": 1,
            "additionalProperties": {"type": "array", "minItems": 1, "items": {"type": "object"}},
        },
        "seed": {"type": "integer"},
        "output": {"type": "string"},
    },
    "oneOf": [
        {"required": ["movement_variables"], "not": {"required": ["whole_dataset_session"]}},
        {"required": ["whole_dataset_session"], "not": {"required": ["movement_variables"]}},
    ],
}


@dataclass
class RunConfig:
    telemetry: Path
    alerts: Path
    period_s: int
    target_code: int
    rw_s: list
    pw_s: list
    algorithms: dict
    movement_variables: list = None
    inactivity_gap_s: int = 600
    span: tuple = None
    profile_window_s: int = 900
    protocol: dict = field(default_factory=dict)
    seed: int = 0
    output: Path = Path("results")
    raw: dict = field(default_factory=dict)

    @property
    def whole_dataset_session(self):
        return self.movement_variables is None


def _schema_message(err):
    path = ".".join(str(p) for p in err.absolute_path)
    where = f" at '{path}'" if path else ""
    if err.validator == "oneOf" and not path:
        return "exactly one of 'movement_variables' or 'whole_dataset_session' is required"
    return f"{err.message}{where}"


def parse_run_config(data, base_dir="."):
    """Validate a config mapping against the schema and resolve units and paths."""
    if isinstance(data, dict) and data.get("failbench_manifest"):
        data = data["config"]
    if not isinstance(data, dict):
        raise InvalidConfig("config must be a mapping")
    errors = sorted(jsonschema.Draft7Validator(RUN_CONFIG_SCHEMA).iter_errors(data), key=lambda e: e.path)
    if errors:
        raise InvalidConfig(_schema_message(errors[0]))
    base = Path(base_dir)

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else (base / p)

    span = None
    if "span" in data:
        span = tuple(int(v) if isinstance(v, int) else parse_timestamp(v) for v in data["span"])
    from .models import get_algorithm

    for name in data["algorithms"]:
        try:
            get_algorithm(name)
        except ValidationError as exc:
            raise InvalidConfig(str(exc)) from None
    return RunConfig(
        telemetry=resolve(data["telemetry"]),
        alerts=resolve(data["alerts"]),
        period_s=parse_duration(data["period"]),
        target_code=int(data["target_code"]),
        rw_s=[parse_duration(d) for d in data["rw"]],
        pw_s=[parse_duration(d) for d in data["pw"]],
        algorithms={k: [dict(h) for h in v] for k, v in data["algorithms"].items()},
        movement_variables=list(data["movement_variables"]) if "movement_variables" in data else None,
        inactivity_gap_s=parse_duration(data.get("inactivity_gap", "10m")),
        span=span,
        profile_window_s=parse_duration(data.get("profile_window", "15m")),
        protocol=dict(data.get("protocol", {})),
        seed=int(data.get("seed", 0)),
        output=resolve(data.get("output", "results")),
        raw=data,
    )


def load_run_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InvalidConfig(f"config {path} is not valid YAML/JSON: {exc}") from None
    return parse_run_config(data, path.parent)


def dump_json(obj, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


__all__ = [
    "ValidationError", "parse_duration", "format_duration", "parse_timestamp", "format_timestamp",
    "ingest", "read_telemetry", "read_alerts", "write_telemetry", "write_alerts", "write_sessions",
    "RunConfig", "load_run_config", "parse_run_config", "dump_json", "file_sha256",
]

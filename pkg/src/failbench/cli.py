"""Command-line entry point: ``failbench <subcommand> [options]``.

Subcommands ``validate``, ``sessionize``, ``profile``, ``run``, ``report`` and
``synth``. Exit status is 0 on success, 1 on invalid input or configuration
and 2 on any other failure. Errors are written to stderr as one JSON object
per line; ``run`` also streams progress events there. ``FAILBENCH_LOG`` sets
the logging level (``DEBUG``, ``INFO``, ...).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import yaml

from . import __version__
from .errors import FailbenchError, InvalidConfig, ValidationError
from .io import (dump_json, file_sha256, format_duration, ingest, load_run_config, write_alerts,
                 write_sessions, write_telemetry)
from .protocol import Dataset, ProtocolConfig, run_grid
from .report import emit_results, load_manifest, render
from .sessions import MovementSpec, compute_sessions, whole_dataset_session
from .synth import SynthConfig, generate
from .timeseries import profile_dataset, resample_locf
from .windows import WindowSpec

log = logging.getLogger("failbench")


def _emit(stream, **event):
    stream.write(json.dumps(event, sort_keys=True) + "\n")
    stream.flush()


def _load(cfg, strict=False):
    for path in (cfg.telemetry, cfg.alerts):
        if not Path(path).is_file():
            raise InvalidConfig(f"data file not found: {path}")
    raw, alerts, rep = ingest(cfg.telemetry, cfg.alerts, strict=strict)
    series = resample_locf(raw, cfg.period_s, cfg.span)
    if cfg.whole_dataset_session:
        sessions = whole_dataset_session(series)
    else:
        sessions = compute_sessions(series, MovementSpec(cfg.movement_variables, cfg.inactivity_gap_s))
    return series, sessions, alerts, rep


def cmd_validate(args):
    cfg = load_run_config(args.config)
    series, sessions, alerts, rep = _load(cfg, args.strict)
    target = alerts.select(cfg.target_code)
    for rw in cfg.rw_s:
        for pw in cfg.pw_s:
            WindowSpec.from_durations(rw, pw, cfg.period_s)
    out = {"ok": True, "rows": len(series), "variables": list(series.variables),
           "sessions": int(len(set(sessions.ids.tolist()) - {-1})), "target_alerts": len(target),
           "report": rep.as_dict()}
    print(json.dumps(out, sort_keys=True))
    return 0


def cmd_sessionize(args):
    cfg = load_run_config(args.config)
    series, sessions, _, _ = _load(cfg)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        write_sessions(series, sessions, args.out)
    else:
        write_sessions(series, sessions, sys.stdout)
    return 0


def cmd_profile(args):
    cfg = load_run_config(args.config)
    series, _, alerts, _ = _load(cfg)
    prof = profile_dataset(series, alerts.select(cfg.target_code), cfg.profile_window_s)
    print(json.dumps(prof.as_dict(), sort_keys=True))
    return 0


def _manifest_config(cfg, seed, outdir):
    data = dict(cfg.raw)
    data["telemetry"] = str(Path(cfg.telemetry).resolve())
    data["alerts"] = str(Path(cfg.alerts).resolve())
    data["seed"] = seed
    data["output"] = str(Path(outdir).resolve())
    return data


def cmd_run(args):
    cfg = load_run_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    outdir = Path(args.out) if args.out else cfg.output
    protocol = ProtocolConfig(**{**cfg.protocol, "seed": seed})
    series, sessions, alerts, rep = _load(cfg)
    dataset = Dataset(series, sessions, alerts.select(cfg.target_code))

    def progress(event):
        _emit(sys.stderr, **event)

    table = run_grid(dataset, cfg.rw_s, cfg.pw_s, protocol, cfg.algorithms, jobs=args.jobs, progress=progress)
    table.manifest["data"] = {"telemetry_sha256": file_sha256(cfg.telemetry),
                              "alerts_sha256": file_sha256(cfg.alerts), "validation": rep.as_dict()}
    emit_results(table, outdir, _manifest_config(cfg, seed, outdir))
    _emit(sys.stderr, event="run_finished", out=str(outdir), cells=len(table.cells))
    return 0


def cmd_report(args):
    path = Path(args.config)
    if path.is_dir():
        path = path / "manifest.json"
    table, _ = load_manifest(path)
    render(table, Path(args.out) if args.out else path.parent)
    return 0


def _starter_config(cfg):
    lead = cfg.precursor.lead_time_s
    return {
        "telemetry": "telemetry.csv",
        "alerts": "alerts.csv",
        "period": format_duration(cfg.period_s),
        "movement_variables": [f"move_{i}" for i in range(cfg.n_movement)],
        "inactivity_gap": format_duration(cfg.inactivity_gap_s),
        "target_code": cfg.target_code,
        "rw": [format_duration(10 * cfg.period_s), format_duration(15 * cfg.period_s)],
        "pw": [format_duration(lead), format_duration(4 * lead)],
        "profile_window": format_duration(lead),
        "protocol": {"kind": "kfold_rus", "k": 5, "rus_repeats": 2, "rus_pairing": "paired"},
        "algorithms": {"logreg": [{"C": 0.1}, {"C": 1.0}], "random_forest": [{"n_estimators": 10}]},
        "seed": cfg.seed,
        "output": "results",
    }


def cmd_synth(args):
    data = {}
    if args.config:
        try:
            data = yaml.safe_load(Path(args.config).read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise InvalidConfig(f"cannot read synth config: {exc}") from None
        if not isinstance(data, dict):
            raise InvalidConfig("synth config must be a mapping")
    if args.seed is not None:
        data["seed"] = args.seed
    cfg = SynthConfig.from_dict(data)
    raw, alerts, truth = generate(cfg)
    out = Path(args.out or "synth")
    out.mkdir(parents=True, exist_ok=True)
    write_telemetry(raw, out / "telemetry.csv")
    write_alerts(alerts, out / "alerts.csv")
    dump_json(truth.as_dict(), out / "ground_truth.json")
    dump_json(cfg.as_dict(), out / "synth_config.json")
    dump_json(_starter_config(cfg), out / "config.json")
    _emit(sys.stderr, event="synth_finished", out=str(out), alerts=len(alerts))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="failbench", description="Failure-prediction window-grid benchmark.")
    p.add_argument("--version", action="version", version=f"failbench {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a run config and its data files")
    s.add_argument("--config", required=True)
    s.add_argument("--strict", action="store_true", help="reject out-of-order timestamps")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("sessionize", help="write the per-row session map as CSV")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output CSV (default: stdout)")
    s.set_defaults(func=cmd_sessionize)

    s = sub.add_parser("profile", help="print precursor diversity and spectral entropy")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("run", help="evaluate the full RW x PW grid")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("report", help="re-render CSVs and heatmap from a manifest")
    s.add_argument("--config", "--manifest", dest="config", required=True,
                   help="manifest.json or the run directory holding it")
    s.add_argument("--out", help="output directory (default: next to the manifest)")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("synth", help="generate a synthetic data set and starter config")
    s.add_argument("--config", help="synth parameters (YAML or JSON)")
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    level = os.environ.get("FAILBENCH_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except ValidationError as exc:
        _emit(sys.stderr, error=type(exc).__name__, message=str(exc), exit=1)
        return 1
    except (FailbenchError, OSError) as exc:
        _emit(sys.stderr, error=type(exc).__name__, message=str(exc), exit=2)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort structured report
        log.debug("unhandled error", exc_info=True)
        _emit(sys.stderr, error=type(exc).__name__, message=str(exc), exit=2)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Result emission: CSV tables, an SVG heatmap and the run manifest.

``results.csv`` holds one row per (RW, PW, algorithm, setting), ``best.csv``
one row per cell, and ``heatmap.svg`` an RW x PW grid whose cell lightness
grows with the best score (blank for undefined cells). ``manifest.json``
stores the configuration and every cell so :func:`render` can rebuild the
other three files byte for byte.
"""
from __future__ import annotations

import colorsys
import csv
import io
import json
import os
from pathlib import Path
from xml.sax.saxutils import escape

from .errors import OutputUnwritable
from .io import format_duration
from .protocol import OK, CellResult, ResultTable

RESULT_COLUMNS = ["rw", "pw", "rw_s", "pw_s", "algorithm", "setting", "hyperparams", "status", "support",
                  "n_windows", "mean_macro_f1", "std_macro_f1", "macro_precision", "macro_recall",
                  "validation_macro_f1", "n_scores", "n_failed"]
BEST_COLUMNS = ["rw", "pw", "rw_s", "pw_s", "status", "support", "n_windows", "best_algorithm", "best_macro_f1"]


def _num(v):
    return "" if v is None else repr(float(v))


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def results_csv(table):
    hypergrid = table.manifest.get("hypergrid", {})
    rows = []
    for c in table.cells:
        if c.settings:
            entries = [(s.algorithm, s.setting, s.hyperparams, s) for s in c.settings]
        else:
            entries = [(a, l, hp, None) for a, grid in hypergrid.items() for l, hp in enumerate(grid)]
        for alg, l, hp, s in entries:
            rows.append(((c.rw_s, c.pw_s, alg, l), [
                format_duration(c.rw_s), format_duration(c.pw_s), c.rw_s, c.pw_s, alg, l,
                json.dumps(hp, sort_keys=True), c.status, c.support, c.n_windows,
                _num(s and s.mean), _num(s and s.std), _num(s and s.precision), _num(s and s.recall),
                _num(s and s.validation), s.n_scores if s else 0, s.n_failed if s else 0]))
    rows.sort(key=lambda r: r[0])
    return _csv_text(RESULT_COLUMNS, [r for _, r in rows])


def best_csv(table):
    algs = sorted({a for c in table.cells for a in c.best} | set(table.manifest.get("hypergrid", {})))
    header = BEST_COLUMNS + [f"best_{a}" for a in algs]
    rows = []
    for c in sorted(table.cells, key=lambda c: (c.rw_s, c.pw_s)):
        rows.append([format_duration(c.rw_s), format_duration(c.pw_s), c.rw_s, c.pw_s, c.status, c.support,
                     c.n_windows, c.best_algorithm or "", _num(c.best_score)]
                    + [_num(c.best.get(a)) for a in algs])
    return _csv_text(header, rows)


def score_fill(score):
    """Fill colour whose HLS lightness rises linearly with ``score`` in [0, 1]."""
    score = min(max(float(score), 0.0), 1.0)
    r, g, b = colorsys.hls_to_rgb(0.58, 0.18 + 0.74 * score, 0.55)
    return "#{:02x}{:02x}{:02x}".format(*(round(255 * v) for v in (r, g, b)))


def fill_lightness(fill):
    """HLS lightness of a ``#rrggbb`` colour."""
    r, g, b = (int(fill[i:i + 2], 16) / 255 for i in (1, 3, 5))
    return colorsys.rgb_to_hls(r, g, b)[1]


def heatmap_svg(table, title="Best macro F1 per (RW, PW)"):
    rws = sorted({c.rw_s for c in table.cells})
    pws = sorted({c.pw_s for c in table.cells})
    cw, ch, left, top = 96, 44, 70, 56
    width, height = left + cw * len(pws) + 20, top + ch * len(rws) + 46
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<title>{escape(title)}</title>',
           f'<rect x="0" y="0" width="{width}" height="{height}" style="fill:#ffffff"/>',
           f'<text x="{left}" y="18" style="font-size:13px;font-weight:bold">{escape(title)}</text>',
           f'<text x="{left + cw * len(pws) / 2}" y="40" style="text-anchor:middle">PW</text>',
           f'<text x="14" y="{top + ch * len(rws) / 2}" style="text-anchor:middle" '
           f'transform="rotate(-90 14 {top + ch * len(rws) / 2})">RW</text>']
    for j, p in enumerate(pws):
        out.append(f'<text x="{left + cw * j + cw / 2}" y="{top - 4}" style="text-anchor:middle">'
                   f'{format_duration(p)}</text>')
    for i, r in enumerate(rws):
        out.append(f'<text x="{left - 6}" y="{top + ch * i + ch / 2 + 4}" style="text-anchor:end">'
                   f'{format_duration(r)}</text>')
    cells = {(c.rw_s, c.pw_s): c for c in table.cells}
    for i, r in enumerate(rws):
        for j, p in enumerate(pws):
            c = cells.get((r, p))
            x, y = left + cw * j, top + ch * i
            if c is None or c.status != OK or c.best_score is None:
                out.append(f'<rect class="cell undefined" x="{x}" y="{y}" width="{cw}" height="{ch}" '
                           f'data-rw="{r}" data-pw="{p}" style="fill:none;stroke:#999999"/>')
                continue
            fill = score_fill(c.best_score)
            ink = "#000000" if fill_lightness(fill) > 0.55 else "#ffffff"
            out.append(f'<rect class="cell" x="{x}" y="{y}" width="{cw}" height="{ch}" data-rw="{r}" '
                       f'data-pw="{p}" data-score="{c.best_score!r}" style="fill:{fill};stroke:#999999"/>')
            out.append(f'<text x="{x + cw / 2}" y="{y + 18}" style="text-anchor:middle;fill:{ink}">'
                       f'{escape(c.best_algorithm)}</text>')
            out.append(f'<text x="{x + cw / 2}" y="{y + 34}" style="text-anchor:middle;fill:{ink}">'
                       f'{c.best_score:.3f}</text>')
    ly = top + ch * len(rws) + 14
    for k in range(11):
        out.append(f'<rect x="{left + 18 * k}" y="{ly}" width="18" height="12" '
                   f'style="fill:{score_fill(k / 10)};stroke:none"/>')
    out.append(f'<text x="{left + 200}" y="{ly + 10}">0 to 1 (lighter is better)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as exc:
        raise OutputUnwritable(f"cannot write {path}: {exc}") from None


def _prepare(outdir):
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputUnwritable(f"cannot create {outdir}: {exc}") from None
    if not os.access(outdir, os.W_OK):
        raise OutputUnwritable(f"{outdir} is not writable")
    return outdir


def render(table, outdir):
    """Write ``results.csv``, ``best.csv`` and ``heatmap.svg``; returns their paths."""
    outdir = _prepare(outdir)
    files = {"results.csv": results_csv(table), "best.csv": best_csv(table), "heatmap.svg": heatmap_svg(table)}
    for name, text in files.items():
        _write(outdir / name, text)
    return [outdir / n for n in files]


def manifest_dict(table, config=None):
    return {"failbench_manifest": True, "config": config, "run": table.manifest, "cells": table.records()}


def emit_results(table, outdir, config=None):
    """Write the three report files plus ``manifest.json``."""
    paths = render(table, outdir)
    path = Path(outdir) / "manifest.json"
    _write(path, json.dumps(manifest_dict(table, config), indent=2, sort_keys=True) + "\n")
    return paths + [path]


def load_manifest(path):
    """Rebuild the :class:`ResultTable` and stored config from ``manifest.json``."""
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if not data.get("failbench_manifest"):
        from .errors import InvalidConfig

        raise InvalidConfig(f"{path} is not a run manifest")
    table = ResultTable([CellResult.from_dict(c) for c in data["cells"]], data.get("run", {}))
    return table, data.get("config")

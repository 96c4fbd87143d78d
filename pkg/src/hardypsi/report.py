"""Deterministic emitters: CSV tables, JSON documents and static SVG plots.

Numbers are written with ``repr``-exact ``%.17g`` formatting so repeated
runs produce byte-identical files.  Every write goes through a temporary
file in the target directory followed by an atomic rename.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

REPORT_VERSION = 1


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return "%.17g" % x
    return str(x)


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(columns, rows, notes=()):
    """CSV with a leading ``#`` line documenting the columns (and optional notes)."""
    lines = ["# columns: " + ", ".join(f"{name} ({desc})" for name, desc in columns)]
    lines += [f"# {n}" for n in notes]
    lines.append(",".join(name for name, _ in columns))
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def read_csv_rows(text):
    """Inverse of :func:`csv_text` for tests: header names and string rows."""
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return body[0].split(","), [ln.split(",") for ln in body[1:]]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def json_text(doc):
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# essential spectrum and spectrum reports

ESSENTIAL_COLUMNS = (
    ("re", "real part"),
    ("im", "imaginary part"),
    ("curve", "whisker | circle"),
    ("parameter", "t for the whisker, angle for the circle"),
    ("uncertainty", "tail bound of the element"),
    ("resolution_bound", "half the largest sample gap plus whisker tail error"),
)


def essential_rows(es):
    rows = []
    for p, z in zip(es.whisker_params, es.whisker):
        rows.append((z.real, z.imag, "whisker", p, es.tail_bound, es.resolution_bound))
    for p, z in zip(es.circle_params, es.circle):
        rows.append((z.real, z.imag, "circle", p, es.tail_bound, es.resolution_bound))
    return rows


def essential_csv(es):
    return csv_text(ESSENTIAL_COLUMNS, essential_rows(es))


def spectrum_document(report, verdicts=()):
    """Versioned structured form of a SpectrumReport."""
    es = report.essential
    return {
        "report_version": REPORT_VERSION,
        "kind": "spectrum",
        "bounding_box": list(report.bounding_box),
        "grid_resolution": report.resolution,
        "cell_size": report.cell_size,
        "tail_bound": es.tail_bound,
        "resolution_bound": es.resolution_bound,
        "threshold": es.threshold,
        "essential_points": [[z.real, z.imag, lab, es.tail_bound]
                             for z, lab in zip(es.points, es.labels)],
        "components": [{"label": c.label, "representative": c.representative,
                        "index": c.index, "cells": c.cells, "unbounded": c.unbounded,
                        "distance": c.distance} for c in report.components],
        "filled_points": [[z.real, z.imag] for z in report.filled_points],
        "sigma_equals_sigma_e": report.sigma_equals_sigma_e,
        "verdicts": [dict(lam=lam, **v.as_dict()) for lam, v in verdicts],
    }


COMPONENT_COLUMNS = (
    ("label", "component label"),
    ("re", "representative real part"),
    ("im", "representative imaginary part"),
    ("index", "Fredholm index at the representative"),
    ("cells", "grid cells in the component"),
    ("unbounded", "touches the bounding box"),
    ("distance", "distance of the representative to sigma_e"),
    ("threshold", "Fredholm threshold: tail + resolution bound + margin"),
)


def components_csv(report):
    th = report.essential.threshold
    rows = [(c.label, c.representative.real, c.representative.imag, c.index, c.cells,
             c.unbounded, c.distance, th) for c in report.components]
    return csv_text(COMPONENT_COLUMNS, rows)


# ---------------------------------------------------------------------------
# SVG

_COLOURS = {"whisker": "#c0392b", "circle": "#1f4e9c"}


def svg_plot(curves, filled=None, markers=(), size=480, title=""):
    """Static SVG of polylines ``{label: complex array}``, filled cells and markers."""
    arrays = [np.asarray(v, dtype=complex) for v in curves.values() if len(v)]
    if filled is not None and len(filled):
        arrays.append(np.asarray(filled, dtype=complex))
    if markers:
        arrays.append(np.array([complex(m) for m, _ in markers]))
    allp = np.concatenate(arrays) if arrays else np.zeros(1, dtype=complex)
    allp = allp[np.isfinite(allp)]
    x0, x1 = float(allp.real.min()), float(allp.real.max())
    y0, y1 = float(allp.imag.min()), float(allp.imag.max())
    span = max(x1 - x0, y1 - y0, 1e-9)
    pad = 0.08 * span
    x0, y0 = x0 - pad, y0 - pad
    span += 2 * pad
    scale = size / span

    def xy(z):
        return (z.real - x0) * scale, size - (z.imag - y0) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    if title:
        out.append(f'<title>{title}</title>')
    for axis in (complex(0, 0),):
        ax, ay = xy(axis)
        out.append(f'<line x1="0" y1="{ay:.3f}" x2="{size}" y2="{ay:.3f}" '
                   'stroke="#bbbbbb" stroke-width="0.5"/>')
        out.append(f'<line x1="{ax:.3f}" y1="0" x2="{ax:.3f}" y2="{size}" '
                   'stroke="#bbbbbb" stroke-width="0.5"/>')
    if filled is not None and len(filled):
        for z in np.asarray(filled, dtype=complex)[:: max(1, len(filled) // 4000)]:
            px, py = xy(z)
            out.append(f'<circle cx="{px:.3f}" cy="{py:.3f}" r="1" fill="#f5b041"/>')
    for label, pts in curves.items():
        pts = np.asarray(pts, dtype=complex)
        pts = pts[np.isfinite(pts)]
        if not pts.size:
            continue
        step = max(1, pts.size // 5000)
        sel = np.append(pts[::step], pts[-1])
        coords = " ".join("%.3f,%.3f" % xy(z) for z in sel)
        colour = _COLOURS.get(label, "#333333")
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.2" '
                   f'points="{coords}"/>')
    for z, text in markers:
        px, py = xy(complex(z))
        out.append(f'<circle cx="{px:.3f}" cy="{py:.3f}" r="2.5" fill="black"/>')
        if text:
            out.append(f'<text x="{px + 4:.3f}" y="{py - 4:.3f}" font-size="10">{text}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

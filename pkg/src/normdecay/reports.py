"""Deterministic JSON, CSV and SVG output.

Floats are written in shortest round-trip form. Non-finite values become the
strings ``"inf"``, ``"-inf"`` and ``"nan"`` so that every document is valid
JSON. Nothing time- or host-dependent is ever written.
"""

from __future__ import annotations

import dataclasses
import io
import json
import math
from typing import Iterable, Sequence

import numpy as np

SCHEMA_VERSION = 1


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.repr}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps_json(doc) -> str:
    return json.dumps(to_jsonable(doc), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_cell(x) for x in row) + "\n")
    return out.getvalue()


def svg_decay_plot(
    t: Sequence[float],
    log_norm: Sequence[float],
    markers: Sequence[tuple[float, float, str]] = (),
    title: str = "",
    width: int = 720,
    height: int = 440,
) -> str:
    """Static SVG of ``ln ||e^{tN}x||`` against ``log10 t``.

    ``markers`` holds ``(t, value, label)`` triples drawn as labelled dots.
    """
    xs = [math.log10(v) for v in t]
    ys = list(log_norm)
    mx = [math.log10(m[0]) for m in markers]
    my = [m[1] for m in markers]
    x0, x1 = min(xs + mx), max(xs + mx)
    y0, y1 = min(ys + my), max(ys + my)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    left, right, top, bottom = 70, 20, 40, 50
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (y1 - y) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    if title:
        parts.append(f'<text x="{left}" y="{top - 14}" font-size="13">{_esc(title)}</text>')
    for i in range(6):
        xv = x0 + (x1 - x0) * i / 5
        yv = y0 + (y1 - y0) * i / 5
        parts.append(f'<text x="{px(xv):.2f}" y="{top + ph + 16}" text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<text x="{left - 6}" y="{py(yv) + 4:.2f}" text-anchor="end">{yv:.3g}</text>')
    parts.append(f'<text x="{left + pw / 2:.2f}" y="{height - 12}" text-anchor="middle">log10 t</text>')
    parts.append(
        f'<text x="16" y="{top + ph / 2:.2f}" transform="rotate(-90 16 {top + ph / 2:.2f})" '
        f'text-anchor="middle">ln norm</text>'
    )
    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f5fbf" stroke-width="1.5"/>')
    for (tm, val, label), x in zip(markers, mx):
        colour = "#c0392b" if label.startswith("t") else "#27ae60"
        parts.append(f'<circle cx="{px(x):.2f}" cy="{py(val):.2f}" r="3.5" fill="{colour}"/>')
        parts.append(f'<text x="{px(x) + 5:.2f}" y="{py(val) - 5:.2f}" fill="{colour}">{_esc(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")

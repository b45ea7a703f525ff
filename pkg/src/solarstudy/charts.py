"""SVG line charts of actual vs forecast monthly means.

Hand-written SVG 1.1: one file per series, a 12-point month axis, the
actual means as a solid polyline and the forecast means dashed, with axis
labels and a legend.  Output bytes depend only on the inputs.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

from .errors import MONTH_ABBR, IoFailure, MissingSeries
from .ingest import table_name
from .timeseries import ParameterKind

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 80, 150, 50, 60
ACTUAL_STYLE = 'stroke="#1f4e99" stroke-width="2"'
FORECAST_STYLE = 'stroke="#c0392b" stroke-width="2" stroke-dasharray="6,4"'


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if raw <= m * mag:
            return m * mag
    return 10 * mag


def _ticks(lo: float, hi: float):
    if hi - lo < 1e-12:
        pad = max(abs(lo) * 0.01, 1.0)
        lo, hi = lo - pad, hi + pad
    step = _nice_step(hi - lo)
    start = math.floor(lo / step) * step
    stop = math.ceil(hi / step) * step
    n = int(round((stop - start) / step))
    return start, stop, [start + i * step for i in range(n + 1)]


def _fmt(v: float) -> str:
    # coordinates rounded to 0.01 px keep the files short and stable
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _tick_label(v: float, step: float) -> str:
    decimals = max(0, -int(math.floor(math.log10(step)))) if step < 1 else 0
    if step < 1 and abs(step * 10 ** decimals - round(step * 10 ** decimals)) > 1e-9:
        decimals += 1
    s = f"{v:.{decimals}f}"
    return "0" if s.strip("-0.") == "" else s


def render_chart(label: str, actual: Sequence[float], forecast: Sequence[float],
                 station_name: str = "") -> str:
    """SVG document comparing two 12-value monthly series."""
    if len(actual) != 12 or len(forecast) != 12:
        raise ValueError(f"{label}: need 12 actual and 12 forecast values")
    param = ParameterKind(label.split("_", 1)[0])
    ma, mf = table_name(label, "MA"), table_name(label, "MF")
    lo, hi, ticks = _ticks(min(min(actual), min(forecast)), max(max(actual), max(forecast)))
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(i):
        return LEFT + pw * i / 11.0

    def sy(v):
        return TOP + ph * (hi - v) / (hi - lo)

    out = ['<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
           f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" '
           'font-size="12">',
           f'<title>{escape(f"Time series plot of {ma} vs. {mf}")}</title>',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
           f'<text x="{WIDTH / 2 - RIGHT / 2:g}" y="28" text-anchor="middle" font-size="15">'
           f'{escape(f"{ma} vs. {mf}")}</text>']

    # grid and y ticks
    step = ticks[1] - ticks[0] if len(ticks) > 1 else 1.0
    for t in ticks:
        y = _fmt(sy(t))
        out.append(f'<line x1="{LEFT}" y1="{y}" x2="{LEFT + pw}" y2="{y}" stroke="#dddddd"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y}" text-anchor="end" dominant-baseline="middle">'
                   f'{_tick_label(t, step)}</text>')
    for i, name in enumerate(MONTH_ABBR):
        x = _fmt(sx(i))
        out.append(f'<line x1="{x}" y1="{TOP + ph}" x2="{x}" y2="{TOP + ph + 5}" stroke="#000000"/>')
        out.append(f'<text x="{x}" y="{TOP + ph + 18}" text-anchor="middle">{name}</text>')
    out.append(f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="#000000"/>')
    out.append(f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="#000000"/>')

    # axis labels
    out.append(f'<text x="{LEFT + pw / 2:g}" y="{HEIGHT - 15}" text-anchor="middle">Month</text>')
    ylab = param.long_name + (f" ({param.unit})" if param.unit else "")
    if station_name:
        ylab += f", {station_name}"
    cy = TOP + ph / 2
    out.append(f'<text x="20" y="{cy:g}" text-anchor="middle" '
               f'transform="rotate(-90 20 {cy:g})">{escape(ylab)}</text>')

    # series
    for vals, style in ((actual, ACTUAL_STYLE), (forecast, FORECAST_STYLE)):
        pts = " ".join(f"{_fmt(sx(i))},{_fmt(sy(v))}" for i, v in enumerate(vals))
        out.append(f'<polyline fill="none" {style} points="{pts}"/>')

    # legend
    lx, ly = LEFT + pw + 20, TOP + 10
    for k, (name, style) in enumerate(((ma, ACTUAL_STYLE), (mf, FORECAST_STYLE))):
        y = ly + 22 * k
        out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 30}" y2="{y}" {style}/>')
        out.append(f'<text x="{lx + 38}" y="{y}" dominant-baseline="middle">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_charts(actual: Mapping[str, Sequence[float]],
                    forecast: Mapping[str, Sequence[float]], directory,
                    station_names: Mapping[str, str] | None = None) -> list[Path]:
    """Write ``fig_<label>.svg`` for every series in ``actual``.

    Raises :class:`MissingSeries` naming a series without forecast means.
    """
    names = station_names or {}
    d = Path(directory)
    for label in actual:
        if label not in forecast:
            raise MissingSeries(f"series {table_name(label, 'MF')} has no forecast means to plot")
    written = []
    try:
        d.mkdir(parents=True, exist_ok=True)
        for label in actual:
            sid = label.split("_", 1)[1] if "_" in label else ""
            svg = render_chart(label, list(actual[label]), list(forecast[label]),
                               names.get(sid, sid))
            path = d / f"fig_{label}.svg"
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(svg)
            written.append(path)
    except OSError as exc:
        raise IoFailure(getattr(exc, "filename", None) or d, exc.strerror or str(exc)) from None
    return written

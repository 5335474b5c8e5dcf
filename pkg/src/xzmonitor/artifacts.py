"""CSV and SVG writers shared by all modules.

CSV files start with ``#`` header lines (provenance) followed by a column
row.  Floats are written with 17 significant digits so that equal inputs
always give byte-identical files.
"""
from __future__ import annotations

import io
import os
from html import escape

import numpy as np

__all__ = ["csv_text", "read_csv", "svg_line_plot", "write_text"]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#7f7f7f")


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def csv_text(columns, data, header=()) -> str:
    """Render a CSV table.

    Parameters
    ----------
    columns : sequence of str
        Column names.
    data : sequence of arrays
        One array per column, all of equal length.  Purely numeric tables are
        formatted through :func:`numpy.savetxt`; mixed tables row by row.
    header : iterable of str
        Provenance lines, written with a leading ``# ``.
    """
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    buf.write(",".join(columns) + "\n")
    arrays = [np.asarray(col) for col in data]
    if arrays and len({len(a) for a in arrays}) != 1:
        raise ValueError("all CSV columns must have the same length")
    if arrays and all(a.dtype.kind == "f" for a in arrays):
        np.savetxt(buf, np.column_stack(arrays), delimiter=",", fmt="%.17g")
    elif arrays:
        for row in zip(*arrays):
            buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_text(path, text: str):
    """Write ``text`` to ``path``, creating parent directories."""
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_csv(path):
    """Read a CSV written by :func:`csv_text`; returns ``(header_lines, columns, rows)``."""
    header, rows, columns = [], [], None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                header.append(line[1:].strip())
            elif columns is None:
                columns = line.split(",")
            elif line:
                rows.append(line.split(","))
    return header, columns, rows


def svg_line_plot(series, title="", xlabel="", ylabel="", width=640, height=400) -> str:
    """Minimal line chart.

    ``series`` maps a label to ``(x, y)`` arrays.  Labels whose name ends in
    ``"(dashed)"`` are drawn dashed.
    """
    left, right, top, bottom = 64, 16, 32, 48
    xs = [np.asarray(x, float) for x, _ in series.values()]
    ys = [np.asarray(y, float) for _, y in series.values()]
    xmin = min(float(np.nanmin(x)) for x in xs)
    xmax = max(float(np.nanmax(x)) for x in xs)
    ymin = min(float(np.nanmin(y)) for y in ys)
    ymax = max(float(np.nanmax(y)) for y in ys)
    if xmax == xmin:
        xmax = xmin + 1.0
    if ymax == ymin:
        ymax = ymin + 1.0
    pad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - pad, ymax + pad
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - xmin) / (xmax - xmin) * pw

    def py(y):
        return top + (ymax - y) / (ymax - ymin) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{width / 2:.1f}" y="{height - 8}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="14" y="{height / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {height / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for i in range(5):
        xv = xmin + i * (xmax - xmin) / 4
        yv = ymin + i * (ymax - ymin) / 4
        out.append(f'<text x="{px(xv):.1f}" y="{top + ph + 16}" text-anchor="middle" font-size="10">{xv:.3g}</text>')
        out.append(f'<text x="{left - 6}" y="{py(yv) + 3:.1f}" text-anchor="end" font-size="10">{yv:.3g}</text>')
    if ymin < 0 < ymax:
        out.append(f'<line x1="{left}" x2="{left + pw}" y1="{py(0):.1f}" y2="{py(0):.1f}" stroke="#bbbbbb"/>')
    for i, (label, (x, y)) in enumerate(series.items()):
        x, y = np.asarray(x, float), np.asarray(y, float)
        if x.size > 2000:
            step = int(np.ceil(x.size / 2000))
            x, y = x[::step], y[::step]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y) if np.isfinite(b))
        colour = _PALETTE[i % len(_PALETTE)]
        dash = ' stroke-dasharray="6,4"' if label.endswith("(dashed)") else ""
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash} points="{pts}"/>')
        out.append(f'<text x="{left + 8}" y="{top + 14 + 14 * i}" font-size="11" fill="{colour}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

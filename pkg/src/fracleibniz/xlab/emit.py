"""Write probe records as CSV, JSON or a log-log SVG."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from pathlib import Path
from typing import Sequence

from .fit import SlopeFit, fit_slope
from .probes import ProbeRecord

__all__ = ["COLUMNS", "emit", "read_csv", "svg_plot"]

COLUMNS = ("probe", "param", "lhs", "rhs", "ratio", "grid_n", "grid_L", "seed", "wall_ms")


def _row(r: ProbeRecord) -> dict:
    return {c: getattr(r, c) for c in COLUMNS}


def _csv_text(records: Sequence[ProbeRecord]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        row = _row(r)
        for key in ("param", "lhs", "rhs", "ratio", "grid_L"):
            row[key] = repr(float(row[key]))
        row["wall_ms"] = f"{row['wall_ms']:.1f}"
        w.writerow(row)
    return buf.getvalue()


def read_csv(path: str | os.PathLike) -> list[ProbeRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        return [
            ProbeRecord(
                row["probe"], float(row["param"]), float(row["lhs"]), float(row["rhs"]),
                float(row["ratio"]), int(row["grid_n"]), float(row["grid_L"]),
                int(row["seed"]), float(row["wall_ms"]),
            )
            for row in reader
        ]


def svg_plot(records: Sequence[ProbeRecord], fit: SlopeFit | None = None, title: str = "") -> str:
    """Log-log plot of ratio against parameter: one polyline and one slope label."""
    width, height, pad = 480, 320, 50
    pts = [(r.param, r.ratio) for r in records if r.param > 0 and r.ratio > 0]
    if fit is None and len(pts) >= 3:
        fit = fit_slope([r for r in records if r.param > 0 and r.ratio > 0])
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="12">log param</text>',
        f'<text x="14" y="{height / 2}" font-size="12" transform="rotate(-90 14 {height / 2})" '
        f'text-anchor="middle">log ratio</text>',
    ]
    if pts:
        lx = [math.log(x) for x, _ in pts]
        ly = [math.log(y) for _, y in pts]
        x0, x1 = min(lx), max(lx)
        y0, y1 = min(ly), max(ly)
        sx = (width - 2 * pad) / (x1 - x0 or 1.0)
        sy = (height - 2 * pad) / (y1 - y0 or 1.0)
        coords = " ".join(
            f"{pad + (a - x0) * sx:.2f},{height - pad - (b - y0) * sy:.2f}" for a, b in zip(lx, ly)
        )
        out.append(f'<polyline points="{coords}" fill="none" stroke="steelblue" stroke-width="2"/>')
    label = "slope: n/a (fewer than 3 points)" if fit is None else f"slope = {fit.slope:.4g}"
    out.append(f'<text class="slope" x="{width - pad}" y="{pad}" text-anchor="end" font-size="12">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit(records: Sequence[ProbeRecord], fmt: str, path: str | os.PathLike) -> Path:
    """Write ``records`` to ``path`` as ``csv``, ``json`` or ``svg``.

    Raises
    ------
    OSError
        If the path cannot be written.
    """
    path = Path(path)
    if fmt == "csv":
        text = _csv_text(records)
    elif fmt == "json":
        text = json.dumps([_row(r) for r in records], indent=2) + "\n"
    elif fmt == "svg":
        title = records[0].probe if records else ""
        text = svg_plot(records, title=title)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    path.write_text(text)
    return path

"""CSV tables and self-contained SVG charts for study results.

The SVG writer is deliberately small: fixed canvas, inline styles, numbers
formatted with a fixed precision so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .studies import SweepResult, grid_values

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 30, 40, 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_csv(result: SweepResult, path: str | Path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(result.columns)
            for cell in result.cells:
                w.writerow([_fmt_cell(cell.get(c)) for c in result.columns])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _n(x: float) -> str:
    return f"{x:.2f}"


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str, xr, yr):
        self.parts: list[str] = []
        self.xr = xr if xr[1] > xr[0] else (xr[0] - 1, xr[0] + 1)
        self.yr = yr if yr[1] > yr[0] else (yr[0] - 1, yr[0] + 1)
        self.parts.append(
            f'<text x="{W / 2}" y="22" text-anchor="middle" style="font:bold 14px sans-serif">'
            f"{escape(title)}</text>"
        )
        self.parts.append(
            f'<rect x="{LEFT}" y="{TOP}" width="{W - LEFT - RIGHT}" height="{H - TOP - BOTTOM}" '
            'style="fill:none;stroke:#333;stroke-width:1"/>'
        )
        self.parts.append(
            f'<text x="{(LEFT + W - RIGHT) / 2}" y="{H - 15}" text-anchor="middle" '
            f'style="font:12px sans-serif">{escape(xlabel)}</text>'
        )
        self.parts.append(
            f'<text x="18" y="{(TOP + H - BOTTOM) / 2}" text-anchor="middle" '
            f'transform="rotate(-90 18 {(TOP + H - BOTTOM) / 2})" style="font:12px sans-serif">'
            f"{escape(ylabel)}</text>"
        )
        self._ticks()

    def x(self, v: float) -> float:
        lo, hi = self.xr
        return LEFT + (v - lo) / (hi - lo) * (W - LEFT - RIGHT)

    def y(self, v: float) -> float:
        lo, hi = self.yr
        return H - BOTTOM - (v - lo) / (hi - lo) * (H - TOP - BOTTOM)

    def _ticks(self) -> None:
        for k in range(6):
            xv = self.xr[0] + k * (self.xr[1] - self.xr[0]) / 5
            yv = self.yr[0] + k * (self.yr[1] - self.yr[0]) / 5
            self.parts.append(
                f'<text x="{_n(self.x(xv))}" y="{H - BOTTOM + 16}" text-anchor="middle" '
                f'style="font:10px sans-serif">{xv:.4g}</text>'
            )
            self.parts.append(
                f'<text x="{LEFT - 6}" y="{_n(self.y(yv) + 3)}" text-anchor="end" '
                f'style="font:10px sans-serif">{yv:.4g}</text>'
            )

    def polyline(self, xs, ys, color: str, label: str | None = None, slot: int = 0) -> None:
        pts = " ".join(f"{_n(self.x(a))},{_n(self.y(b))}" for a, b in zip(xs, ys) if b is not None)
        self.parts.append(
            f'<polyline points="{pts}" style="fill:none;stroke:{color};stroke-width:2"/>'
        )
        for a, b in zip(xs, ys):
            if b is not None:
                self.parts.append(
                    f'<circle cx="{_n(self.x(a))}" cy="{_n(self.y(b))}" r="3" style="fill:{color}"/>'
                )
        if label:
            ly = TOP + 14 + 16 * slot
            self.parts.append(
                f'<line x1="{W - RIGHT - 150}" y1="{ly - 4}" x2="{W - RIGHT - 130}" y2="{ly - 4}" '
                f'style="stroke:{color};stroke-width:2"/>'
            )
            self.parts.append(
                f'<text x="{W - RIGHT - 125}" y="{ly}" style="font:11px sans-serif">{escape(label)}</text>'
            )

    def segment(self, x1, y1, x2, y2, color: str) -> None:
        self.parts.append(
            f'<line x1="{_n(self.x(x1))}" y1="{_n(self.y(y1))}" x2="{_n(self.x(x2))}" '
            f'y2="{_n(self.y(y2))}" style="stroke:{color};stroke-width:1.5"/>'
        )

    def label(self, xv, yv, text: str, color: str) -> None:
        self.parts.append(
            f'<text x="{_n(self.x(xv))}" y="{_n(self.y(yv))}" style="font:10px sans-serif;fill:{color}">'
            f"{escape(text)}</text>"
        )

    def svg(self) -> str:
        body = "\n".join(self.parts)
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}">\n<rect width="{W}" height="{H}" style="fill:#fff"/>\n'
            f"{body}\n</svg>\n"
        )


def _range(values) -> tuple[float, float]:
    vals = [v for v in values if v is not None and math.isfinite(v)]
    if not vals:
        return (0.0, 1.0)
    return (min(vals), max(vals))


def _om_chart(result: SweepResult) -> _Canvas:
    xs = result.axes["om_usd_per_kw_yr"]
    econ = [c["econ_eol_yr"] if c["econ_eol_yr"] is not None else c["phys_eol_yr"] for c in result.cells]
    phys = [c["phys_eol_yr"] for c in result.cells]
    lo, hi = _range(econ + phys)
    cv = _Canvas("End of life vs fixed O&M", "fixed O&M ($/kW-yr)", "year", _range(xs), (0.0, hi + 1))
    cv.polyline(xs, econ, PALETTE[0], "economic EOL", 0)
    cv.polyline(xs, phys, PALETTE[1], "physical EOL", 1)
    return cv


def _soh_chart(result: SweepResult) -> _Canvas:
    xs = [c["soh"] for c in result.cells]
    gross = [c["gross_usd_per_kw_yr"] for c in result.cells]
    top = max(gross) if gross else 1.0
    cv = _Canvas(
        "Profitability and functionality vs SOH", "SOH", "fraction of fresh value", _range(xs), (0.0, 1.05)
    )
    cv.polyline(xs, [g / top if top else 0.0 for g in gross], PALETTE[0], "gross revenue", 0)
    cv.polyline(xs, [c["pmax_frac"] for c in result.cells], PALETTE[1], "power capacity", 1)
    cv.polyline(xs, [c["emax_frac"] for c in result.cells], PALETTE[2], "energy capacity", 2)
    cv.polyline(xs, [c["eta"] for c in result.cells], PALETTE[3], "efficiency", 3)
    return cv


def contour_segments(xs, ys, z: np.ndarray, level: float) -> list[tuple[float, float, float, float]]:
    """Marching-squares line segments of ``z`` (shape len(xs) x len(ys)) at ``level``."""
    segs = []
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            corners = [
                (xs[i], ys[j], z[i, j]),
                (xs[i + 1], ys[j], z[i + 1, j]),
                (xs[i + 1], ys[j + 1], z[i + 1, j + 1]),
                (xs[i], ys[j + 1], z[i, j + 1]),
            ]
            pts = []
            for k in range(4):
                (x1, y1, z1), (x2, y2, z2) = corners[k], corners[(k + 1) % 4]
                if (z1 - level) * (z2 - level) < 0 or (z1 == level and z2 != level):
                    t = (level - z1) / (z2 - z1)
                    pts.append((x1 + t * (x2 - x1), y1 + t * (y2 - y1)))
            for p in range(0, len(pts) - 1, 2):
                segs.append((*pts[p], *pts[p + 1]))
    return segs


def _deg_chart(result: SweepResult, column: str) -> _Canvas:
    xs = result.axes["n100"]
    ys = result.axes["cal_rate_per_yr"]
    cv = _Canvas(f"{column} vs degradation rates", "cycles to EOL at 100% DOD", "calendar fade (1/yr)",
                 _range(xs), _range(ys))
    if len(xs) < 2 or len(ys) < 2:
        return cv
    z = grid_values(result, column)
    lo, hi = float(np.min(z)), float(np.max(z))
    for k, level in enumerate(np.linspace(lo, hi, 7)[1:-1]):
        color = PALETTE[k % len(PALETTE)]
        segs = contour_segments(xs, ys, z, float(level))
        for s in segs:
            cv.segment(*s, color)
        if segs:
            cv.label(segs[0][0], segs[0][1], f"{level:.4g}", color)
    return cv


def render_svg(result: SweepResult, path: str | Path, column: str | None = None) -> Path:
    if result.kind == "om":
        cv = _om_chart(result)
    elif result.kind == "soh":
        cv = _soh_chart(result)
    else:
        cv = _deg_chart(result, column or "lb_usd_per_kw")
    path = Path(path)
    try:
        path.write_text(cv.svg(), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path

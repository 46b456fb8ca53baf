"""Minimal standalone SVG plots: line series, predictive bands, heatmaps.

Output bytes depend only on the input data. Heatmaps use the fixed
five-stop ramp ``RAMP`` (dark blue, blue, teal, yellow-green, yellow),
interpolated linearly in RGB between the grid minimum and maximum.
"""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

RAMP = ((0.0, (68, 1, 84)), (0.25, (59, 82, 139)), (0.5, (33, 145, 140)),
        (0.75, (94, 201, 98)), (1.0, (253, 231, 37)))
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

WIDTH, HEIGHT = 720, 420
MARGIN = dict(left=70, right=80, top=40, bottom=55)


def ramp_color(u: float) -> str:
    """Hex colour for ``u`` in [0, 1] on the fixed ramp."""
    u = min(max(float(u), 0.0), 1.0)
    for (u0, c0), (u1, c1) in zip(RAMP, RAMP[1:]):
        if u <= u1:
            w = 0.0 if u1 == u0 else (u - u0) / (u1 - u0)
            rgb = [round(a + w * (b - a)) for a, b in zip(c0, c1)]
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#{:02x}{:02x}{:02x}".format(*RAMP[-1][1])


def _n(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = np.ceil(lo / step) * step
    return [float(t) for t in np.arange(start, hi + step * 1e-9, step)]


def _label(v: float) -> str:
    return f"{v:.4g}"


class _Canvas:
    def __init__(self, title: str):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">'
            f'{escape(title)}</text>',
        ]
        self.x0, self.x1 = MARGIN["left"], WIDTH - MARGIN["right"]
        self.y0, self.y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]

    def add(self, s: str):
        self.parts.append(s)

    def sx(self, v, lo, hi):
        return self.x0 + (v - lo) / (hi - lo) * (self.x1 - self.x0)

    def sy(self, v, lo, hi):
        return self.y0 - (v - lo) / (hi - lo) * (self.y0 - self.y1)

    def frame(self, xr, yr, xlabel, ylabel, x_ticks=True):
        self.add(f'<g class="axes" stroke="black" fill="none">'
                 f'<line x1="{self.x0}" y1="{self.y0}" x2="{self.x1}" y2="{self.y0}"/>'
                 f'<line x1="{self.x0}" y1="{self.y0}" x2="{self.x0}" y2="{self.y1}"/></g>')
        if x_ticks:
            for t in _ticks(*xr):
                x = self.sx(t, *xr)
                self.add(f'<line x1="{_n(x)}" y1="{self.y0}" x2="{_n(x)}" y2="{self.y0 + 5}" '
                         f'stroke="black"/><text x="{_n(x)}" y="{self.y0 + 18}" '
                         f'text-anchor="middle">{_label(t)}</text>')
        for t in _ticks(*yr):
            y = self.sy(t, *yr)
            self.add(f'<line x1="{self.x0 - 5}" y1="{_n(y)}" x2="{self.x0}" y2="{_n(y)}" '
                     f'stroke="black"/><text x="{self.x0 - 8}" y="{_n(y + 4)}" '
                     f'text-anchor="end">{_label(t)}</text>')
        self.add(f'<text x="{(self.x0 + self.x1) / 2}" y="{HEIGHT - 12}" '
                 f'text-anchor="middle">{escape(xlabel)}</text>')
        self.add(f'<text x="16" y="{(self.y0 + self.y1) / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {(self.y0 + self.y1) / 2})">{escape(ylabel)}</text>')

    def right_axis(self, yr, ylabel):
        self.add(f'<line x1="{self.x1}" y1="{self.y0}" x2="{self.x1}" y2="{self.y1}" '
                 f'stroke="black"/>')
        for t in _ticks(*yr):
            y = self.sy(t, *yr)
            self.add(f'<line x1="{self.x1}" y1="{_n(y)}" x2="{self.x1 + 5}" y2="{_n(y)}" '
                     f'stroke="black"/><text x="{self.x1 + 8}" y="{_n(y + 4)}">{_label(t)}</text>')
        xm, ym = WIDTH - 14, (self.y0 + self.y1) / 2
        self.add(f'<text x="{xm}" y="{ym}" text-anchor="middle" '
                 f'transform="rotate(90 {xm} {ym})">{escape(ylabel)}</text>')

    def legend(self, entries):
        """``entries`` are (label, colour, kind) with kind 'line', 'rect' or 'dot'."""
        x, y = self.x0 + 12, self.y1 + 8
        self.add('<g class="legend">')
        for k, (label, color, kind) in enumerate(entries):
            yy = y + 16 * k
            if kind == "line":
                self.add(f'<line x1="{x}" y1="{yy + 5}" x2="{x + 18}" y2="{yy + 5}" '
                         f'stroke="{color}" stroke-width="2"/>')
            elif kind == "dot":
                self.add(f'<circle cx="{x + 9}" cy="{yy + 5}" r="2.5" fill="{color}"/>')
            else:
                self.add(f'<rect x="{x}" y="{yy}" width="18" height="10" fill="{color}" '
                         f'fill-opacity="0.5"/>')
            self.add(f'<text x="{x + 24}" y="{yy + 9}">{escape(label)}</text>')
        self.add('</g>')

    def polyline(self, xs, ys, xr, yr, color, width=1.5):
        pts = " ".join(f"{_n(self.sx(a, *xr))},{_n(self.sy(b, *yr))}" for a, b in zip(xs, ys))
        self.add(f'<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{pts}"/>')

    def text(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _range(*arrays):
    lo = min(float(np.min(a)) for a in arrays)
    hi = max(float(np.max(a)) for a in arrays)
    if hi == lo:
        hi = lo + (abs(lo) or 1.0)
    return lo, hi


def _timeseries(data, title):
    x = np.asarray(data["x"], dtype=float)
    series = {k: np.asarray(v, dtype=float) for k, v in data["series"].items()}
    if x.size == 0 or not series:
        raise ValueError("empty data")
    if any(v.shape != x.shape for v in series.values()):
        raise ValueError("every series must match x in length")
    c = _Canvas(title)
    xr = _range(x)
    entries = []
    bars = data.get("bars")
    if bars is not None:
        bx = np.asarray(bars["x"], dtype=float)
        bv = np.asarray(bars["values"], dtype=float)
        xr = _range(x, bx - bars.get("width", 0) / 2, bx + bars.get("width", 0) / 2)
        br = (0.0, max(float(bv.max()), 1e-12) * 1.1)
        bw = bars.get("width", (xr[1] - xr[0]) / max(len(bx), 1))
        c.add('<g class="bars">')
        for a, v in zip(bx, bv):
            left = c.sx(a - bw / 2, *xr)
            right = c.sx(a + bw / 2, *xr)
            top = c.sy(v, *br)
            c.add(f'<rect x="{_n(left)}" y="{_n(top)}" width="{_n(right - left)}" '
                  f'height="{_n(c.y0 - top)}" fill="#9ecae1" fill-opacity="0.5"/>')
        c.add('</g>')
        c.right_axis(br, bars.get("label", "bars"))
        entries.append((bars.get("label", "bars"), "#9ecae1", "rect"))
    yr = _range(*series.values())
    yr = (min(yr[0], 0.0), yr[1] * 1.05 if yr[1] > 0 else yr[1])
    c.frame(xr, yr, data.get("xlabel", "day"), data.get("ylabel", "value"))
    for k, (label, y) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        c.polyline(x, y, xr, yr, color)
        entries.append((label, color, "line"))
    c.legend(entries)
    return c.text()


def _band(data, title):
    x = np.asarray(data["x"], dtype=float)
    lower = np.asarray(data["lower"], dtype=float)
    upper = np.asarray(data["upper"], dtype=float)
    mean = np.asarray(data["mean"], dtype=float)
    if x.size == 0:
        raise ValueError("empty data")
    if not (lower.shape == upper.shape == mean.shape == x.shape):
        raise ValueError("band arrays must match x in length")
    obs = data.get("observed")
    arrays = [lower, upper, mean] + ([np.asarray(obs, dtype=float)] if obs is not None else [])
    c = _Canvas(title)
    xr = _range(x)
    yr = _range(*arrays)
    yr = (min(yr[0], 0.0), yr[1] * 1.05)
    c.frame(xr, yr, data.get("xlabel", "day"), data.get("ylabel", "cases"))
    up = [f"{_n(c.sx(a, *xr))},{_n(c.sy(b, *yr))}" for a, b in zip(x, upper)]
    down = [f"{_n(c.sx(a, *xr))},{_n(c.sy(b, *yr))}" for a, b in zip(x[::-1], lower[::-1])]
    c.add(f'<polygon class="band" fill="#1f77b4" fill-opacity="0.25" stroke="none" '
          f'points="{" ".join(up + down)}"/>')
    c.polyline(x, mean, xr, yr, PALETTE[0], 2)
    entries = [("95% predictive band", "#1f77b4", "rect"), ("predictive mean", PALETTE[0], "line")]
    if obs is not None:
        c.add('<g class="observed">')
        for a, b in zip(x, np.asarray(obs, dtype=float)):
            c.add(f'<circle cx="{_n(c.sx(a, *xr))}" cy="{_n(c.sy(b, *yr))}" r="1.8" '
                  f'fill="black"/>')
        c.add('</g>')
        entries.append(("observed", "black", "dot"))
    c.legend(entries)
    return c.text()


def _heatmap(data, title):
    z = np.asarray(data["z"], dtype=float)
    if z.size == 0 or z.ndim != 2:
        raise ValueError("heatmap needs a non-empty 2-D grid")
    xv = np.asarray(data.get("x", np.arange(z.shape[1])), dtype=float)
    yv = np.asarray(data.get("y", np.arange(z.shape[0])), dtype=float)
    if xv.size != z.shape[1] or yv.size != z.shape[0]:
        raise ValueError("axis lengths must match the grid shape")
    c = _Canvas(title)
    finite = z[np.isfinite(z)]
    zlo, zhi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    span = zhi - zlo if zhi > zlo else 1.0
    ny, nx = z.shape
    cw = (c.x1 - c.x0) / nx
    ch = (c.y0 - c.y1) / ny
    c.add('<g class="cells">')
    for i in range(ny):
        for j in range(nx):
            color = ramp_color((z[i, j] - zlo) / span) if np.isfinite(z[i, j]) else "#cccccc"
            # row 0 at the bottom
            c.add(f'<rect x="{_n(c.x0 + j * cw)}" y="{_n(c.y0 - (i + 1) * ch)}" '
                  f'width="{_n(cw)}" height="{_n(ch)}" fill="{color}"/>')
    c.add('</g>')
    c.add(f'<g class="axes" stroke="black" fill="none"><rect x="{c.x0}" y="{c.y1}" '
          f'width="{c.x1 - c.x0}" height="{c.y0 - c.y1}"/></g>')
    for j in sorted({0, nx // 2, nx - 1}):
        x = c.x0 + (j + 0.5) * cw
        c.add(f'<text x="{_n(x)}" y="{c.y0 + 18}" text-anchor="middle">{_label(xv[j])}</text>')
    for i in sorted({0, ny // 2, ny - 1}):
        y = c.y0 - (i + 0.5) * ch
        c.add(f'<text x="{c.x0 - 8}" y="{_n(y + 4)}" text-anchor="end">{_label(yv[i])}</text>')
    c.add(f'<text x="{(c.x0 + c.x1) / 2}" y="{HEIGHT - 12}" text-anchor="middle">'
          f'{escape(data.get("xlabel", "x"))}</text>')
    ym = (c.y0 + c.y1) / 2
    c.add(f'<text x="16" y="{ym}" text-anchor="middle" transform="rotate(-90 16 {ym})">'
          f'{escape(data.get("ylabel", "y"))}</text>')
    # colour bar doubles as the legend
    bx = c.x1 + 15
    c.add('<g class="legend">')
    steps = 50
    for k in range(steps):
        y = c.y0 - (k + 1) * (c.y0 - c.y1) / steps
        c.add(f'<rect x="{bx}" y="{_n(y)}" width="14" height="{_n((c.y0 - c.y1) / steps + 0.5)}" '
              f'fill="{ramp_color((k + 0.5) / steps)}"/>')
    c.add(f'<text x="{bx + 18}" y="{c.y0}">{_label(zlo)}</text>')
    c.add(f'<text x="{bx + 18}" y="{c.y1 + 10}">{_label(zhi)}</text>')
    c.add(f'<text x="{bx}" y="{c.y1 - 6}">{escape(data.get("zlabel", "value"))}</text>')
    c.add('</g>')
    return c.text()


_KINDS = {"timeseries": _timeseries, "band": _band, "heatmap": _heatmap}


def render_plot(kind: str, data: dict, title: str = "") -> str:
    """SVG text for ``kind`` in {timeseries, band, heatmap}.

    timeseries: ``x``, ``series`` ({label: y}); optional ``bars`` dict with
    ``x``, ``values``, ``label`` drawn against a right-hand axis.
    band: ``x``, ``mean``, ``lower``, ``upper``; optional ``observed``.
    heatmap: ``z`` (rows along ``y``), optional ``x``, ``y`` axis values.
    """
    if kind not in _KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {sorted(_KINDS)}")
    return _KINDS[kind](data, title)


def emit_plot(kind: str, data: dict, path, title: str = "") -> Path:
    text = render_plot(kind, data, title)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path

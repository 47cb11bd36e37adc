"""Minimal SVG line plots.

Self-contained polyline renderings with fixed-precision coordinates so a
rerun with identical data produces byte-identical files.  Not a plotting
library; just enough to eyeball sweeps and trace overlays.
"""

import math

__all__ = ["line_plot"]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

WIDTH = 640
HEIGHT = 400
MARGIN_L = 64
MARGIN_R = 16
MARGIN_T = 28
MARGIN_B = 44


def _finite_range(values):
    lo = math.inf
    hi = -math.inf
    for v in values:
        if math.isfinite(v):
            lo = min(lo, v)
            hi = max(hi, v)
    if lo > hi:
        lo, hi = 0.0, 1.0
    if lo == hi:
        lo -= 0.5
        hi += 0.5
    return lo, hi


def _fmt(v):
    return f"{v:.2f}"


def line_plot(path, series, title="", x_label="", y_label=""):
    """Write an SVG of one or more (label, x, y) series as polylines."""
    if not series:
        raise ValueError("need at least one series")
    x_lo, x_hi = _finite_range([v for _, xs, _ in series for v in xs])
    y_lo, y_hi = _finite_range([v for _, _, ys in series for v in ys])
    px_w = WIDTH - MARGIN_L - MARGIN_R
    px_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v):
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo) * px_w

    def sy(v):
        return MARGIN_T + (1.0 - (v - y_lo) / (y_hi - y_lo)) * px_h

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">'
    )
    out.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    out.append(
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{px_w}" height="{px_h}" '
        f'fill="none" stroke="#333" stroke-width="1"/>'
    )
    if title:
        out.append(
            f'<text x="{WIDTH // 2}" y="18" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{title}</text>'
        )
    if x_label:
        out.append(
            f'<text x="{MARGIN_L + px_w // 2}" y="{HEIGHT - 8}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{x_label}</text>'
        )
    if y_label:
        cy = MARGIN_T + px_h // 2
        out.append(
            f'<text x="14" y="{cy}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="11" transform="rotate(-90 14 {cy})">{y_label}</text>'
        )
    # range labels at the frame corners
    out.append(
        f'<text x="{MARGIN_L}" y="{HEIGHT - MARGIN_B + 14}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="10">{x_lo:.4g}</text>'
    )
    out.append(
        f'<text x="{MARGIN_L + px_w}" y="{HEIGHT - MARGIN_B + 14}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="10">{x_hi:.4g}</text>'
    )
    out.append(
        f'<text x="{MARGIN_L - 6}" y="{MARGIN_T + px_h}" text-anchor="end" '
        f'font-family="sans-serif" font-size="10">{y_lo:.4g}</text>'
    )
    out.append(
        f'<text x="{MARGIN_L - 6}" y="{MARGIN_T + 8}" text-anchor="end" '
        f'font-family="sans-serif" font-size="10">{y_hi:.4g}</text>'
    )
    for idx, (label, xs, ys) in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        pts = " ".join(
            f"{_fmt(sx(x))},{_fmt(sy(y))}"
            for x, y in zip(xs, ys)
            if math.isfinite(x) and math.isfinite(y)
        )
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        if label:
            ly = MARGIN_T + 14 + 14 * idx
            out.append(
                f'<line x1="{MARGIN_L + 8}" y1="{ly - 4}" x2="{MARGIN_L + 28}" y2="{ly - 4}" '
                f'stroke="{color}" stroke-width="1.5"/>'
            )
            out.append(
                f'<text x="{MARGIN_L + 34}" y="{ly}" font-family="sans-serif" '
                f'font-size="11">{label}</text>'
            )
    out.append("</svg>")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")

"""Minimal deterministic SVG line plots (no plotting dependency)."""

import math

PALETTE = ["#3355cc", "#cc3333", "#33aa55", "#aa7722", "#8833aa", "#118899"]


def _finite(values):
    return [v for v in values if v is not None and math.isfinite(v)]


def line_plot(series, path, width=720, height=400, title="", xlabel="", ylabel=""):
    """Write polyline series as an SVG file.

    series: iterable of (label, xs, ys) or (label, xs, ys, color); label None
    suppresses the legend entry. NaNs break the line.
    """
    margin = 54
    all_x, all_y = [], []
    for item in series:
        xs, ys = item[1], item[2]
        all_x += _finite(xs)
        all_y += _finite(ys)
    if not all_x or not all_y:
        all_x, all_y = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(all_x), max(all_x)
    y0, y1 = min(all_y), max(all_y)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
            f'font-size="14">{title}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" '
            f'font-size="12">{xlabel}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="16" y="{height / 2:.1f}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 16 {height / 2:.1f})">{ylabel}</text>'
        )
    for tick in (x0, (x0 + x1) / 2, x1):
        parts.append(
            f'<text x="{ sx(tick):.1f}" y="{height - margin + 16}" '
            f'text-anchor="middle" font-size="10">{tick:.4g}</text>'
        )
    for tick in (y0, (y0 + y1) / 2, y1):
        parts.append(
            f'<text x="{margin - 6}" y="{sy(tick):.1f}" text-anchor="end" '
            f'font-size="10">{tick:.4g}</text>'
        )
    legend_y = margin
    for i, item in enumerate(series):
        label, xs, ys = item[0], item[1], item[2]
        color = item[3] if len(item) > 3 else PALETTE[i % len(PALETTE)]
        segment = []
        for x, y in zip(xs, ys):
            if y is None or not math.isfinite(y) or not math.isfinite(x):
                if len(segment) > 1:
                    pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in segment)
                    parts.append(
                        f'<polyline fill="none" stroke="{color}" points="{pts}"/>'
                    )
                segment = []
            else:
                segment.append((x, y))
        if len(segment) > 1:
            pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in segment)
            parts.append(f'<polyline fill="none" stroke="{color}" points="{pts}"/>')
        elif len(segment) == 1:
            a, b = segment[0]
            parts.append(f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="2" fill="{color}"/>')
        if label:
            parts.append(
                f'<text x="{width - margin + 4}" y="{legend_y}" font-size="10" '
                f'fill="{color}">{label}</text>'
            )
            legend_y += 14
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
    return path

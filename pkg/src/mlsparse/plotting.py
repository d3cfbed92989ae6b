"""Self-contained SVG box and line plots for experiment CSVs.

Box plots show the minimum, the interquartile range and the maximum of
a column per group; line plots show group means.  Output is a pure
function of the rows, so equal input gives byte-identical files.
"""

from __future__ import annotations

import statistics
from fractions import Fraction
from xml.sax.saxutils import escape

from ._io import atomic_write_text

__all__ = ["quartiles", "box_svg", "line_svg", "plot_csv", "GROUP_COLUMNS"]

GROUP_COLUMNS = {"n": "n", "ell": "ell", "t": "t"}
WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 60
SERIES_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def quartiles(values):
    """``(min, q1, median, q3, max)`` with inclusive quartiles.

    >>> quartiles([1, 2, 3, 4, 5])
    (1.0, 2.0, 3.0, 4.0, 5.0)
    """
    v = sorted(float(x) for x in values)
    if not v:
        raise ValueError("no data")
    if len(v) == 1:
        return (v[0],) * 5
    q1, q2, q3 = statistics.quantiles(v, n=4, method="inclusive")
    return (v[0], q1, q2, q3, v[-1])


def _group_key(col, value):
    if col == "t":
        return Fraction(value)
    return int(value)


def _groups(rows, group_by, metric, subroutine=None):
    if group_by not in GROUP_COLUMNS:
        raise ValueError(f"cannot group by {group_by!r}")
    out = {}
    for r in rows:
        if subroutine is not None and r["subroutine"] != subroutine:
            continue
        out.setdefault(_group_key(group_by, r[group_by]), []).append(float(r[metric]))
    if not out:
        raise ValueError("no data to plot")
    return dict(sorted(out.items()))


def _num(x):
    s = f"{x:.2f}"
    return s.rstrip("0").rstrip(".") if "." in s else s


def _frame(title, xlabel, ylabel, lo, hi):
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">'
        f"{escape(title)}</text>",
        f'<line x1="{LEFT}" y1="{HEIGHT - BOTTOM}" x2="{WIDTH - RIGHT}" y2="{HEIGHT - BOTTOM}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{HEIGHT - BOTTOM}" stroke="black"/>',
        f'<text x="{(LEFT + WIDTH - RIGHT) / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{escape(xlabel)}</text>',
        f'<text x="18" y="{(TOP + HEIGHT - BOTTOM) / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 18 {(TOP + HEIGHT - BOTTOM) / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for k in range(5):
        v = lo + (hi - lo) * k / 4
        y = _y(v, lo, hi)
        parts.append(f'<line x1="{LEFT - 4}" y1="{y:.2f}" x2="{LEFT}" y2="{y:.2f}" stroke="black"/>')
        parts.append(
            f'<text x="{LEFT - 7}" y="{y + 4:.2f}" text-anchor="end" font-family="sans-serif" '
            f'font-size="11">{_num(v)}</text>'
        )
    return parts


def _range(values):
    lo, hi = min(values), max(values)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


def _y(v, lo, hi):
    return TOP + (HEIGHT - TOP - BOTTOM) * (1 - (v - lo) / (hi - lo))


def _slots(k):
    span = WIDTH - LEFT - RIGHT
    return [LEFT + span * (j + 0.5) / k for j in range(k)], span / k


def box_svg(rows, group_by="ell", metric="ratio_cmp", title=None, subroutine=None):
    groups = _groups(rows, group_by, metric, subroutine)
    stats = {k: quartiles(v) for k, v in groups.items()}
    lo, hi = _range([s for st in stats.values() for s in st])
    parts = _frame(title or f"{metric} by {group_by}", group_by, metric, lo, hi)
    xs, slot = _slots(len(stats))
    half = min(30.0, slot * 0.3)
    for x, (key, (mn, q1, med, q3, mx)) in zip(xs, stats.items()):
        parts.append(f'<g class="box" data-group="{escape(str(key))}">')
        parts.append(
            f'<line x1="{x:.2f}" y1="{_y(mx, lo, hi):.2f}" x2="{x:.2f}" y2="{_y(q3, lo, hi):.2f}" stroke="black"/>'
        )
        parts.append(
            f'<line x1="{x:.2f}" y1="{_y(q1, lo, hi):.2f}" x2="{x:.2f}" y2="{_y(mn, lo, hi):.2f}" stroke="black"/>'
        )
        for v in (mn, mx):
            parts.append(
                f'<line x1="{x - half / 2:.2f}" y1="{_y(v, lo, hi):.2f}" x2="{x + half / 2:.2f}" '
                f'y2="{_y(v, lo, hi):.2f}" stroke="black"/>'
            )
        top, bot = _y(q3, lo, hi), _y(q1, lo, hi)
        parts.append(
            f'<rect x="{x - half:.2f}" y="{top:.2f}" width="{2 * half:.2f}" height="{max(bot - top, 0.5):.2f}" '
            f'fill="#9ecae1" stroke="black"/>'
        )
        parts.append(
            f'<line x1="{x - half:.2f}" y1="{_y(med, lo, hi):.2f}" x2="{x + half:.2f}" '
            f'y2="{_y(med, lo, hi):.2f}" stroke="black" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{HEIGHT - BOTTOM + 18}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="12">{escape(str(key))}</text>'
        )
        parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def line_svg(rows, group_by="ell", metrics=("ratio_bu", "ratio_td", "ratio_cmp"), title=None, subroutine=None):
    series = {m: _groups(rows, group_by, m, subroutine) for m in metrics}
    keys = sorted({k for s in series.values() for k in s})
    means = {m: {k: sum(v) / len(v) for k, v in s.items()} for m, s in series.items()}
    lo, hi = _range([v for s in means.values() for v in s.values()])
    parts = _frame(title or f"mean by {group_by}", group_by, "mean", lo, hi)
    xs, _ = _slots(len(keys))
    pos = dict(zip(keys, xs))
    for key, x in pos.items():
        parts.append(
            f'<text x="{x:.2f}" y="{HEIGHT - BOTTOM + 18}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="12">{escape(str(key))}</text>'
        )
    for j, m in enumerate(metrics):
        color = SERIES_COLORS[j % len(SERIES_COLORS)]
        pts = " ".join(f"{pos[k]:.2f},{_y(v, lo, hi):.2f}" for k, v in sorted(means[m].items()))
        parts.append(f'<polyline class="series" data-metric="{m}" points="{pts}" fill="none" stroke="{color}"/>')
        for k, v in sorted(means[m].items()):
            parts.append(f'<circle cx="{pos[k]:.2f}" cy="{_y(v, lo, hi):.2f}" r="3" fill="{color}"/>')
        parts.append(
            f'<text x="{WIDTH - RIGHT - 5}" y="{TOP + 15 * (j + 1)}" text-anchor="end" font-family="sans-serif" '
            f'font-size="12" fill="{color}">{escape(m)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_csv(rows, path, kind="box", group_by="ell", metric="ratio_cmp", subroutine=None):
    if kind == "box":
        svg = box_svg(rows, group_by, metric, subroutine=subroutine)
    elif kind == "line":
        svg = line_svg(rows, group_by, subroutine=subroutine)
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    atomic_write_text(path, svg)
    return svg

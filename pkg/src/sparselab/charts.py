"""Scaling-curve charts from sweep CSVs.

The primary output is a self-contained SVG (no fonts, scripts, or external
assets): one polyline per (model_kind, sparsity) series on a log2 x-axis and
log10 y-axis.  A matplotlib PNG sibling is rendered next to it for quick
viewing; the SVG is the artifact of record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_WIDTH = 720
_HEIGHT = 480
_MARGIN_LEFT = 70
_MARGIN_RIGHT = 160  # legend gutter
_MARGIN_TOP = 40
_MARGIN_BOTTOM = 50

_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
)

X_COLUMNS = ("activated_units", "width", "ideal_flops")
Y_COLUMNS = ("eval_mse", "sup_error")


@dataclass(frozen=True)
class Series:
    label: str
    xs: tuple[float, ...]
    ys: tuple[float, ...]


def build_series(rows, x_column: str, y_column: str) -> list[Series]:
    """One series per (model_kind, sparsity); y is the median across seeds."""
    if x_column not in X_COLUMNS:
        raise ValueError(f"x must be one of {X_COLUMNS}, got {x_column!r}")
    if y_column not in Y_COLUMNS:
        raise ValueError(f"y must be one of {Y_COLUMNS}, got {y_column!r}")
    groups: dict[tuple, dict[float, list[float]]] = {}
    for row in rows:
        if row.get("error"):
            continue  # failed runs carry no measurements
        x, y = row.get(x_column), row.get(y_column)
        if x is None or y is None:
            raise ValueError(f"row missing {x_column}/{y_column}")
        key = (row["model_kind"], row["sparsity"])
        groups.setdefault(key, {}).setdefault(float(x), []).append(float(y))
    series = []
    ordering = lambda kv: (kv[0][0], -1.0 if kv[0][1] is None else kv[0][1])  # noqa: E731
    for (kind, sparsity), points in sorted(groups.items(), key=ordering):
        label = kind if sparsity in (None, 1.0) else f"{kind} {100 * sparsity:g}%"
        xs = tuple(sorted(points))
        ys = tuple(float(np.median(points[x])) for x in xs)
        series.append(Series(label=label, xs=xs, ys=ys))
    if not series:
        raise ValueError("no plottable rows")
    return series


def _padded_range(lo: float, hi: float, frac: float = 0.05) -> tuple[float, float]:
    """Widen [lo, hi] by frac on each side (unit stretch when degenerate)."""
    if hi < lo:
        raise ValueError(f"empty range [{lo}, {hi}]")
    span = hi - lo
    if span == 0.0:
        return lo - 0.5, hi + 0.5
    return lo - frac * span, hi + frac * span


def _log_ticks(lo: float, hi: float) -> list[float]:
    first = math.ceil(lo - 1e-9)
    last = math.floor(hi + 1e-9)
    ticks = list(range(first, last + 1))
    while len(ticks) > 8:  # thin out dense ranges
        ticks = ticks[::2]
    return ticks or [lo, hi]


def _tick_label(exponent: float, base: int) -> str:
    value = base**exponent
    if base == 10:
        return f"1e{int(exponent)}"
    if value == int(value):
        return f"{int(value)}"
    return f"{value:g}"


def render_line_chart_svg(series: list[Series], x_label: str, y_label: str) -> str:
    """Self-contained SVG; exactly one <polyline> per series."""
    if not series:
        raise ValueError("no series to plot")
    for s in series:
        if len(s.xs) < 1:
            raise ValueError(f"series {s.label!r} is empty")
        if any(v <= 0 for v in s.xs) or any(v <= 0 for v in s.ys):
            raise ValueError(f"series {s.label!r} has non-positive values; log axes need > 0")

    log_x = [[math.log2(v) for v in s.xs] for s in series]
    log_y = [[math.log10(v) for v in s.ys] for s in series]
    x_lo, x_hi = _padded_range(min(min(v) for v in log_x), max(max(v) for v in log_x))
    y_lo, y_hi = _padded_range(min(min(v) for v in log_y), max(max(v) for v in log_y))

    plot_w = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = _HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM

    def px(lx: float) -> float:
        return _MARGIN_LEFT + (lx - x_lo) / (x_hi - x_lo) * plot_w

    def py(ly: float) -> float:
        return _MARGIN_TOP + (y_hi - ly) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN_LEFT}" y="{_MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333" stroke-width="1"/>',
    ]

    for tick in _log_ticks(x_lo, x_hi):
        x = px(tick)
        parts.append(
            f'<path d="M {x:.2f} {_MARGIN_TOP} V {_MARGIN_TOP + plot_h}" '
            f'stroke="#ddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{_MARGIN_TOP + plot_h + 18}" font-size="11" '
            f'text-anchor="middle" font-family="sans-serif">{_tick_label(tick, 2)}</text>'
        )
    for tick in _log_ticks(y_lo, y_hi):
        y = py(tick)
        parts.append(
            f'<path d="M {_MARGIN_LEFT} {y:.2f} H {_MARGIN_LEFT + plot_w}" '
            f'stroke="#ddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_LEFT - 6}" y="{y + 4:.2f}" font-size="11" '
            f'text-anchor="end" font-family="sans-serif">{_tick_label(tick, 10)}</text>'
        )

    parts.append(
        f'<text x="{_MARGIN_LEFT + plot_w / 2}" y="{_HEIGHT - 12}" font-size="13" '
        f'text-anchor="middle" font-family="sans-serif">{x_label} (log2)</text>'
    )
    parts.append(
        f'<text x="18" y="{_MARGIN_TOP + plot_h / 2}" font-size="13" text-anchor="middle" '
        f'font-family="sans-serif" transform="rotate(-90 18 {_MARGIN_TOP + plot_h / 2})">'
        f"{y_label} (log10)</text>"
    )

    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(lx):.2f},{py(ly):.2f}" for lx, ly in zip(log_x[i], log_y[i]))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        for lx, ly in zip(log_x[i], log_y[i]):
            parts.append(f'<circle cx="{px(lx):.2f}" cy="{py(ly):.2f}" r="3" fill="{color}"/>')
        # legend swatches are <line> elements so the polyline count stays one per series
        ly0 = _MARGIN_TOP + 12 + i * 18
        lx0 = _WIDTH - _MARGIN_RIGHT + 12
        parts.append(
            f'<line x1="{lx0}" y1="{ly0}" x2="{lx0 + 22}" y2="{ly0}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{lx0 + 28}" y="{ly0 + 4}" font-size="12" '
            f'font-family="sans-serif">{s.label}</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts)


def render_line_chart_png(series: list[Series], x_label: str, y_label: str, path) -> None:
    """Matplotlib rendering of the same chart, for quick human viewing."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.2, 4.8))
    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        ax.plot(s.xs, s.ys, marker="o", color=color, label=s.label)
    ax.set_xscale("log", base=2)
    ax.set_yscale("log", base=10)
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)

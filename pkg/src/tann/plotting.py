"""Self-contained SVG line plots for loss traces.

No plotting dependency: the output is a small hand-assembled SVG with one
polyline per trace, axes labeled epoch / mean_loss.  All numbers are
formatted with fixed precision so identical inputs give identical bytes.
"""

from __future__ import annotations

from .exceptions import ContractError

_WIDTH, _HEIGHT = 640, 400
_MARGIN = 50
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def parse_trace_csv(text: str) -> list[tuple[float, float]]:
    """(epoch, mean_loss) pairs from an ``epoch,mean_loss,last_loss`` CSV."""
    lines = [ln for ln in text.strip().split("\n") if ln]
    if not lines or not lines[0].startswith("epoch,"):
        raise ContractError("not a trace CSV (missing epoch header)")
    points = []
    for ln in lines[1:]:
        cols = ln.split(",")
        points.append((float(cols[0]), float(cols[1])))
    if not points:
        raise ContractError("trace CSV has no data rows")
    return points


def render_traces_svg(traces: list[tuple[str, list[tuple[float, float]]]]) -> str:
    """SVG text for named (epoch, loss) series; one polyline each."""
    if not traces:
        raise ContractError("need at least one trace to plot")
    xs = [p[0] for _, pts in traces for p in pts]
    ys = [p[1] for _, pts in traces for p in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    plot_w = _WIDTH - 2 * _MARGIN
    plot_h = _HEIGHT - 2 * _MARGIN

    def sx(x):
        return _MARGIN + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y):
        return _HEIGHT - _MARGIN - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        # axes
        f'<line x1="{_MARGIN}" y1="{_HEIGHT - _MARGIN}" x2="{_WIDTH - _MARGIN}" '
        f'y2="{_HEIGHT - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
        f'y2="{_HEIGHT - _MARGIN}" stroke="black"/>',
        f'<text x="{_WIDTH // 2}" y="{_HEIGHT - 10}" text-anchor="middle" '
        f'font-size="14">epoch</text>',
        f'<text x="15" y="{_HEIGHT // 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 15 {_HEIGHT // 2})">mean_loss</text>',
        # axis extents
        f'<text x="{_MARGIN}" y="{_HEIGHT - _MARGIN + 18}" text-anchor="middle" '
        f'font-size="11">{_fmt(x_lo)}</text>',
        f'<text x="{_WIDTH - _MARGIN}" y="{_HEIGHT - _MARGIN + 18}" '
        f'text-anchor="middle" font-size="11">{_fmt(x_hi)}</text>',
        f'<text x="{_MARGIN - 6}" y="{_HEIGHT - _MARGIN}" text-anchor="end" '
        f'font-size="11">{_fmt(y_lo)}</text>',
        f'<text x="{_MARGIN - 6}" y="{_MARGIN + 4}" text-anchor="end" '
        f'font-size="11">{_fmt(y_hi)}</text>',
    ]
    for i, (name, pts) in enumerate(traces):
        color = _COLORS[i % len(_COLORS)]
        coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts)
        if len(pts) == 1:
            x, y = pts[0]
            parts.append(
                f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="3" '
                f'fill="{color}"/>'
            )
        else:
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"/>'
            )
        parts.append(
            f'<text x="{_WIDTH - _MARGIN + 4}" y="{_MARGIN + 16 * i + 4}" '
            f'font-size="11" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

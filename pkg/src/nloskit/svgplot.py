"""Static SVG rendering of a scenario run: truth path, estimated paths,
anchors and walls. Hand-rolled so the output is byte-deterministic."""

from __future__ import annotations

import math
from pathlib import Path

from .geometry import Point2, Wall
from .rangesim import Anchor

_COLORS = {
    "LS": "#ff7f0e",
    "RKF": "#2ca02c",
    "WLS-RKF": "#1f77b4",
}
_FALLBACK_COLOR = "#9467bd"
_SCALE = 48.0  # px per meter
_MARGIN = 40.0  # px


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_scene_svg(
    anchors: list[Anchor],
    walls: list[Wall],
    truth: list[Point2],
    paths: dict[str, list[Point2]],
) -> str:
    """SVG document overlaying the truth path and each estimator's path."""
    xs = [a.position.x for a in anchors] + [p.x for p in truth]
    ys = [a.position.y for a in anchors] + [p.y for p in truth]
    for pts in paths.values():
        xs += [p.x for p in pts]
        ys += [p.y for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    width = (x1 - x0) * _SCALE + 2 * _MARGIN
    height = (y1 - y0) * _SCALE + 2 * _MARGIN

    def px(p: Point2) -> tuple[float, float]:
        return (_MARGIN + (p.x - x0) * _SCALE, height - _MARGIN - (p.y - y0) * _SCALE)

    def polyline(pts: list[Point2], color: str, dash: str = "") -> str:
        coords = " ".join(f"{_fmt(u)},{_fmt(v)}" for u, v in map(px, pts))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        return (
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"{dash_attr}/>'
        )

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="white"/>',
    ]

    for wall in walls:
        cx, cy = px(wall.center)
        w_px = wall.length * _SCALE
        t_px = wall.thickness * _SCALE
        deg = -math.degrees(wall.orientation)  # svg y grows downward
        parts.append(
            f'<rect x="{_fmt(cx - w_px / 2)}" y="{_fmt(cy - t_px / 2)}" '
            f'width="{_fmt(w_px)}" height="{_fmt(t_px)}" fill="#bbbbbb" '
            f'transform="rotate({_fmt(deg)} {_fmt(cx)} {_fmt(cy)})"/>'
        )

    if truth:
        parts.append(polyline(truth, "#000000", dash="6,4"))
    for name, pts in paths.items():
        if pts:
            parts.append(polyline(pts, _COLORS.get(name, _FALLBACK_COLOR)))

    for anchor in anchors:
        ax, ay = px(anchor.position)
        parts.append(f'<circle cx="{_fmt(ax)}" cy="{_fmt(ay)}" r="5" fill="#d62728"/>')
        parts.append(
            f'<text x="{_fmt(ax + 8)}" y="{_fmt(ay - 8)}" font-size="12" '
            f'font-family="sans-serif">{anchor.name}</text>'
        )

    legend_y = 18.0
    parts.append(
        f'<text x="12" y="{_fmt(legend_y)}" font-size="12" font-family="sans-serif">'
        "truth (dashed)</text>"
    )
    for i, name in enumerate(paths):
        color = _COLORS.get(name, _FALLBACK_COLOR)
        parts.append(
            f'<text x="12" y="{_fmt(legend_y + 14 * (i + 1))}" font-size="12" '
            f'font-family="sans-serif" fill="{color}">{name}</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_scene_svg(
    path: str | Path,
    anchors: list[Anchor],
    walls: list[Wall],
    truth: list[Point2],
    paths: dict[str, list[Point2]],
) -> None:
    Path(path).write_text(render_scene_svg(anchors, walls, truth, paths), encoding="utf-8")

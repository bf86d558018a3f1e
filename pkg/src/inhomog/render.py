"""Raster (PNG) and vector (SVG) drawings of orbital approximations and disk orbits."""

from __future__ import annotations

import colorsys
import os

import numpy as np

from .errors import DomainError
from .ifs_core import Point, Rect, Segment
from .orbital import OrbitalApprox, homogeneous_approx, orbital_to_depth

MAX_SIDE = 8192
BACKGROUND = (255, 255, 255)


def depth_color(depth: int, max_depth: int) -> tuple:
    """Hue runs from red at depth 0 to blue at ``max_depth``."""
    frac = 0.0 if max_depth <= 0 else min(depth, max_depth) / max_depth
    r, g, b = colorsys.hsv_to_rgb(0.7 * frac, 0.85, 0.8)
    return int(round(255 * r)), int(round(255 * g)), int(round(255 * b))


def _hex(rgb) -> str:
    return "#%02x%02x%02x" % rgb


def _check_size(width, height):
    if not (1 <= width <= MAX_SIDE and 1 <= height <= MAX_SIDE):
        raise DomainError(f"image size must be between 1 and {MAX_SIDE} pixels per side")


def _format(path) -> str:
    ext = os.path.splitext(str(path))[1].lower()
    if ext not in (".png", ".svg"):
        raise DomainError(f"unsupported image format {ext!r}; use .png or .svg")
    return ext[1:]


def scene_items(ifs, C, depth: int):
    """``(primitive, depth)`` pairs to draw for ``F_C`` at the given depth.

    Orbital pieces up to ``depth``; with an empty condensation set the
    homogeneous cylinders at scale ``(max Lip)**depth`` are drawn instead.
    """
    if C.is_empty:
        r = max(m.lip for m in ifs)
        return [(p, depth) for p in homogeneous_approx(ifs, r ** depth * (1 + 1e-9))]
    approx: OrbitalApprox = orbital_to_depth(ifs, C, depth)
    return [(pc.primitive, len(pc.word)) for pc in approx.pieces]


def _unit_to_px(x, y, width, height):
    return x * (width - 1), (1 - y) * (height - 1)


def _fmt(v: float) -> str:
    return f"{v:.4f}".rstrip("0").rstrip(".")


def render_items(items, path, width: int = 800, height: int = 800) -> str:
    """Draw ``(primitive, depth)`` pairs inside the unit square; returns the format written."""
    _check_size(width, height)
    fmt = _format(path)
    max_depth = max((d for _, d in items), default=0)
    if fmt == "svg":
        _write_svg_items(items, path, width, height, max_depth)
    else:
        _write_png_items(items, path, width, height, max_depth)
    return fmt


def _write_svg_items(items, path, width, height, max_depth):
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']
    for p, d in items:
        col = _hex(depth_color(d, max_depth))
        if isinstance(p, Point):
            x, y = _unit_to_px(p.x, p.y, width, height)
            out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="1" fill="{col}"/>')
        elif isinstance(p, Segment):
            x0, y0 = _unit_to_px(*p.a, width, height)
            x1, y1 = _unit_to_px(*p.b, width, height)
            out.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" '
                       f'stroke="{col}" stroke-width="1"/>')
        elif isinstance(p, Rect):
            x0, y1 = _unit_to_px(p.lo[0], p.lo[1], width, height)
            x1, y0 = _unit_to_px(p.hi[0], p.hi[1], width, height)
            out.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" '
                       f'height="{_fmt(y1 - y0)}" fill="{col}"/>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def _write_png_items(items, path, width, height, max_depth):
    from PIL import Image, ImageDraw

    img = Image.new("RGB", (width, height), BACKGROUND)
    draw = ImageDraw.Draw(img)
    for p, d in items:
        col = depth_color(d, max_depth)
        if isinstance(p, Point):
            x, y = _unit_to_px(p.x, p.y, width, height)
            draw.point((round(x), round(y)), fill=col)
        elif isinstance(p, Segment):
            a = _unit_to_px(*p.a, width, height)
            b = _unit_to_px(*p.b, width, height)
            draw.line([a, b], fill=col, width=1)
        elif isinstance(p, Rect):
            x0, y1 = _unit_to_px(p.lo[0], p.lo[1], width, height)
            x1, y0 = _unit_to_px(p.hi[0], p.hi[1], width, height)
            draw.rectangle([x0, y0, x1, y1], fill=col)
    img.save(path, format="PNG")


def render_disk(points, path, size: int = 800, eps: float = 1e-3) -> str:
    """Draw points of the unit disk with the boundary circle.

    Points within ``eps`` of the boundary are projected onto it.
    """
    from .hyperbolic import limit_projection

    _check_size(size, size)
    fmt = _format(path)
    pts = limit_projection(np.asarray(points, dtype=complex), eps)
    half = (size - 1) / 2
    px = half + pts.real * half
    py = half - pts.imag * half
    if fmt == "svg":
        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
               f'viewBox="0 0 {size} {size}">',
               f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
               f'<circle cx="{_fmt(half)}" cy="{_fmt(half)}" r="{_fmt(half)}" fill="none" '
               f'stroke="black" stroke-width="1"/>']
        for x, y in zip(px.tolist(), py.tolist()):
            out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="1" fill="#1f4fb4"/>')
        out.append("</svg>")
        with open(path, "w") as fh:
            fh.write("\n".join(out) + "\n")
    else:
        from PIL import Image, ImageDraw

        img = Image.new("RGB", (size, size), BACKGROUND)
        draw = ImageDraw.Draw(img)
        draw.ellipse([0, 0, size - 1, size - 1], outline=(0, 0, 0))
        draw.point(list(zip(np.rint(px).astype(int).tolist(), np.rint(py).astype(int).tolist())),
                   fill=(31, 79, 180))
        img.save(path, format="PNG")
    return fmt

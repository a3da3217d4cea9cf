"""Minimal SVG rendering of a Bloch-sphere ellipsoid frame.

Orthographic projection; the unit sphere outline and its equator are drawn
for reference, the ellipsoid as its three principal cross-sections.
"""

from __future__ import annotations

import numpy as np

SIZE = 320
RADIUS = 130.0
COLORS = ("#d62728", "#2ca02c", "#1f77b4")


def _view_basis(azimuth_deg, elevation_deg):
    az, el = np.radians(azimuth_deg), np.radians(elevation_deg)
    right = np.array([-np.sin(az), np.cos(az), 0.0])
    up = np.array([-np.sin(el) * np.cos(az), -np.sin(el) * np.sin(az), np.cos(el)])
    return right, up


def _to_screen(points, right, up):
    c = SIZE / 2
    return np.column_stack([c + RADIUS * points @ right, c - RADIUS * points @ up])


def _polyline(xy, color, width=1.5, dash=None):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in xy)
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>'


def frame_svg(frame, azimuth=-60.0, elevation=25.0, samples=96):
    """SVG document (string) for one frame dict as produced by ``io.bloch_frame``."""
    right, up = _view_basis(azimuth, elevation)
    theta = np.linspace(0.0, 2 * np.pi, samples + 1)
    cos, sin = np.cos(theta)[:, None], np.sin(theta)[:, None]
    c = SIZE / 2
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
        f'<circle cx="{c:.2f}" cy="{c:.2f}" r="{RADIUS:.2f}" fill="none" stroke="#999" stroke-width="1"/>',
    ]
    equator = cos * np.array([1.0, 0, 0]) + sin * np.array([0, 1.0, 0])
    parts.append(_polyline(_to_screen(equator, right, up), "#bbb", 1.0, "4,3"))
    for axis, label in zip(np.eye(3), "xyz"):
        tip = _to_screen(np.array([axis * 1.12]), right, up)[0]
        parts.append(
            f'<line x1="{c:.2f}" y1="{c:.2f}" x2="{tip[0]:.2f}" y2="{tip[1]:.2f}" stroke="#666" stroke-width="0.8"/>'
        )
        parts.append(f'<text x="{tip[0]:.2f}" y="{tip[1]:.2f}" font-size="12" fill="#333">{label}</text>')

    center = np.asarray(frame["center"], dtype=float)
    axes = np.asarray(frame["principal_directions"], dtype=float)
    semi = np.asarray(frame["semi_axes"], dtype=float)
    for n, (i, j) in enumerate(((0, 1), (1, 2), (0, 2))):
        ring = center + cos * (semi[i] * axes[i]) + sin * (semi[j] * axes[j])
        parts.append(_polyline(_to_screen(ring, right, up), COLORS[n]))
    cxy = _to_screen(center[None, :], right, up)[0]
    parts.append(f'<circle cx="{cxy[0]:.2f}" cy="{cxy[1]:.2f}" r="2.5" fill="black"/>')
    parts.append(f'<text x="8" y="18" font-size="13" fill="black">t = {frame["time"]:g} us</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

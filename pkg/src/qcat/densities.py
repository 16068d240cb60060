"""Initial phase-space densities: point, line, and the smile test image.

The smile is drawn procedurally with soft Gaussian brushes so it exists at any
lattice size; the bundled PGM asset is a 128x128 render of the same function.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .lattice import DensityGrid, LatticeSpec


def point_density(spec: LatticeSpec, i: int, j: int) -> DensityGrid:
    return DensityGrid.point(spec, i, j)


def line_density(spec: LatticeSpec, i: int | None = None) -> DensityGrid:
    """All mass on one position column (default x = 1/2), uniform in momentum."""
    n = spec.n
    if i is None:
        i = n // 2
    if not (0 <= i < n):
        raise ValueError(f"line position {i} outside lattice")
    w = np.zeros((n, n))
    w[i, :] = 1.0 / n
    return DensityGrid(spec, w)


def uniform_density(spec: LatticeSpec) -> DensityGrid:
    return DensityGrid.uniform(spec)


def _blob(xx, yy, cx, cy, sigma, amplitude=1.0):
    return amplitude * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * sigma**2))


def _arc(xx, yy, cx, cy, radius, sigma, deg0, deg1, amplitude=1.0):
    """Soft ring segment between polar angles deg0..deg1 (degrees, CCW from +x)."""
    dx = xx - cx
    dy = yy - cy
    r = np.hypot(dx, dy)
    band = np.exp(-((r - radius) ** 2) / (2.0 * sigma**2))
    ang = np.degrees(np.arctan2(dy, dx)) % 360.0
    lo, hi = deg0 % 360.0, deg1 % 360.0
    if lo <= hi:
        mask = (ang >= lo) & (ang <= hi)
    else:
        mask = (ang >= lo) | (ang <= hi)
    return amplitude * band * mask


def smile_density(spec: LatticeSpec) -> DensityGrid:
    """Soft-brush smiley: two eyes and a mouth arc, features scaled to the lattice.

    Brush widths are a fixed fraction of n so the image has the same
    phase-space correlation length at every lattice size.
    """
    n = spec.n
    coords = (np.arange(n) + 0.5) / n
    xx = coords[:, None] * np.ones(n)[None, :]
    yy = np.ones(n)[:, None] * coords[None, :]

    sigma = 0.05  # brush width, fraction of the torus
    w = _arc(xx, yy, 0.5, 0.52, 0.24, sigma, 195.0, 345.0, amplitude=1.0)
    w += _blob(xx, yy, 0.36, 0.70, 0.8 * sigma, amplitude=0.85)
    w += _blob(xx, yy, 0.64, 0.70, 0.8 * sigma, amplitude=0.85)
    return DensityGrid.normalized(spec, (w * n * n).astype(np.float64))


def cosine_density(spec: LatticeSpec, period_cells: int, axis: str = "x") -> DensityGrid:
    """Density modulated as cos^2 with the given cell period along one axis."""
    n = spec.n
    if period_cells <= 0 or n % period_cells:
        raise ValueError("period must divide the lattice size")
    t = np.arange(n)
    profile = np.cos(np.pi * t / period_cells) ** 2
    if axis == "x":
        w = profile[:, None] * np.ones(n)[None, :]
    elif axis == "y":
        w = np.ones(n)[:, None] * profile[None, :]
    else:
        raise ValueError("axis must be 'x' or 'y'")
    return DensityGrid.normalized(spec, w)


def smile_asset_path():
    """Path of the bundled 128x128 smile PGM."""
    return resources.files("qcat") / "assets" / "smile_128.pgm"

"""Images: basins of attraction, Julia-set proxies, Newton basins and orbit scatters.

PPM (P6) is the byte-exact output format; PNG is written through Pillow when it
is installed.  Work is split into fixed row tiles, so the pixels do not depend on
the number of threads.
"""

from __future__ import annotations

import colorsys
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import CycleSet, converge_many
from .equivariants import EquivariantMap
from .group import IcosaGroup, Orbit, homogeneous_to_sphere, normalize, sphere_to_homogeneous

TILE_ROWS = 16


@dataclass(frozen=True)
class Viewport:
    """Rectangle [x0, x1] x [y0, y1] of the affine chart."""

    x0: float = -2.0
    y0: float = -2.0
    x1: float = 2.0
    y1: float = 2.0

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("viewport must have positive area")

    @classmethod
    def parse(cls, text: str) -> Viewport:
        return cls(*(float(v) for v in text.split(",")))

    def grid(self, width: int, height: int, rows=None) -> np.ndarray:
        """Affine coordinates of pixel centers; row 0 is the top (largest imaginary part)."""
        rows = np.arange(height) if rows is None else np.asarray(rows)
        xs = self.x0 + (np.arange(width) + 0.5) * (self.x1 - self.x0) / width
        ys = self.y1 - (rows + 0.5) * (self.y1 - self.y0) / height
        return xs[None, :] + 1j * ys[:, None]

    def pixel(self, z, width: int, height: int):
        """(row, col) of the pixel containing z, or None when outside."""
        z = np.asarray(z, dtype=np.complex128)
        col = np.floor((z.real - self.x0) / (self.x1 - self.x0) * width).astype(int)
        row = np.floor((self.y1 - z.imag) / (self.y1 - self.y0) * height).astype(int)
        inside = (col >= 0) & (col < width) & (row >= 0) & (row < height) & np.isfinite(z)
        return row, col, inside

    def as_tuple(self):
        return (self.x0, self.y0, self.x1, self.y1)


@dataclass(frozen=True)
class SphereView:
    """Orthographic view of the unit sphere after a rotation (3x3 matrix)."""

    rotation: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

    def project(self, P):
        """Image-plane coordinates in [-1, 1]^2 and a front-facing flag."""
        v = homogeneous_to_sphere(P) @ np.asarray(self.rotation).T
        return v[..., 0], v[..., 1], v[..., 2] >= 0

    def grid_points(self, width: int, height: int):
        u = -1 + (np.arange(width) + 0.5) * 2 / width
        v = 1 - (np.arange(height) + 0.5) * 2 / height
        U, V = np.meshgrid(u, v)
        r2 = U ** 2 + V ** 2
        disk = r2 <= 1
        W = np.sqrt(np.clip(1 - r2, 0, None))
        pts = np.stack([U, V, W], axis=-1) @ np.asarray(self.rotation)
        return sphere_to_homogeneous(pts), disk


@dataclass
class Raster:
    width: int
    height: int
    pixels: np.ndarray                       # (height, width, 3) uint8
    viewport: Viewport | SphereView = field(default_factory=Viewport)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width, 3):
            raise ValueError("pixel array does not match the raster size")
        self.pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)

    @classmethod
    def blank(cls, width, height, color=(0, 0, 0), **kw) -> Raster:
        px = np.empty((height, width, 3), dtype=np.uint8)
        px[:] = color
        return cls(width, height, px, **kw)

    def ppm_bytes(self) -> bytes:
        comment = "".join(f"# {k}={v}\n" for k, v in sorted(self.meta.items()))
        header = f"P6\n{comment}{self.width} {self.height}\n255\n".encode("ascii")
        return header + self.pixels.tobytes()

    def save(self, path) -> Path:
        path = Path(path)
        if path.suffix.lower() == ".png":
            try:
                from PIL import Image
                from PIL.PngImagePlugin import PngInfo
            except ImportError as exc:  # pragma: no cover - depends on the install
                raise RuntimeError("PNG output needs Pillow (pip install artifact[png])") from exc
            info = PngInfo()
            for k, v in sorted(self.meta.items()):
                info.add_text(str(k), str(v))
            Image.fromarray(self.pixels, "RGB").save(path, pnginfo=info)
        else:
            path.write_bytes(self.ppm_bytes())
        return path

    def draw_points(self, z, color):
        if not isinstance(self.viewport, Viewport):
            raise TypeError("point drawing needs a chart viewport")
        row, col, inside = self.viewport.pixel(z, self.width, self.height)
        self.pixels[row[inside], col[inside]] = color

    def draw_polyline(self, z, color, step: float | None = None):
        """Rasterize a chart polyline by sampling each segment at sub-pixel spacing."""
        z = np.asarray(z, dtype=np.complex128)
        z = z[np.isfinite(z)]
        if z.size < 2:
            self.draw_points(z, color)
            return
        vp = self.viewport
        step = step or 0.5 * min((vp.x1 - vp.x0) / self.width, (vp.y1 - vp.y0) / self.height)
        pts = []
        for a, b in zip(z[:-1], z[1:]):
            n = min(int(abs(b - a) / step) + 1, 4 * (self.width + self.height))
            pts.append(a + (b - a) * np.linspace(0, 1, n + 1))
        self.draw_points(np.concatenate(pts), color)


# -- palettes --------------------------------------------------------------------------

NEWTON_PALETTE = {
    "vertex": (220, 30, 30),      # red
    "face": (30, 170, 60),        # green
    "edge": (40, 70, 220),        # blue
    "O1": (128, 128, 0),          # olive
    "O2": (140, 50, 200),         # violet
}


@dataclass(frozen=True)
class Palette:
    colors: tuple

    @classmethod
    def spread(cls, n: int) -> Palette:
        """n distinct colors: hues evenly spaced, alternating lightness for neighbours."""
        out = []
        for k in range(n):
            hue = (k * 0.618033988749895) % 1.0
            light = 0.45 if k % 2 else 0.6
            r, g, b = colorsys.hls_to_rgb(hue, light, 0.85)
            out.append((int(round(255 * r)), int(round(255 * g)), int(round(255 * b))))
        if len(set(out)) != n:
            raise ValueError("palette colors collide")
        return cls(tuple(out))

    def __getitem__(self, k):
        return self.colors[k]

    def __len__(self):
        return len(self.colors)

    def lookup(self, ids: np.ndarray, missing=(0, 0, 0)) -> np.ndarray:
        table = np.array(list(self.colors) + [missing], dtype=np.uint8)
        return table[np.where(ids >= 0, ids, len(self.colors))]


# -- basins ----------------------------------------------------------------------------

def _tiles(height: int):
    return [np.arange(r, min(r + TILE_ROWS, height)) for r in range(0, height, TILE_ROWS)]


def basin_data(m: EquivariantMap, cycles: CycleSet, width: int, height: int,
               viewport: Viewport | None = None, max_iter: int = 400, threads: int = 1):
    """Cycle index (or -1) and iteration count for each pixel center."""
    viewport = viewport or Viewport()

    def work(rows):
        z = viewport.grid(width, height, rows).ravel()
        P = np.stack([z, np.ones_like(z)], axis=-1)
        cyc, it, _ = converge_many(m, P, cycles, max_iter)
        return cyc.reshape(len(rows), width), it.reshape(len(rows), width)

    tiles = _tiles(height)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(work, tiles))
    else:
        parts = [work(t) for t in tiles]
    return np.vstack([p[0] for p in parts]), np.vstack([p[1] for p in parts])


def render_basins(m: EquivariantMap, cycles: CycleSet, width: int = 500, height: int = 500,
                  viewport: Viewport | None = None, max_iter: int = 400, threads: int = 1,
                  palette: Palette | None = None, seed=None) -> Raster:
    viewport = viewport or Viewport()
    ids, iters = basin_data(m, cycles, width, height, viewport, max_iter, threads)
    palette = palette or Palette.spread(len(cycles))
    r = Raster(width, height, palette.lookup(ids), viewport,
               {"kind": "basins", "map": m.name, "seed": seed, "max_iter": max_iter})
    r.meta = {k: v for k, v in r.meta.items() if v is not None}
    r.ids, r.iterations = ids, iters
    return r


def basin_stats(raster: Raster, n_cycles: int) -> dict:
    ids = raster.ids
    return {"non_converged": float((ids < 0).mean()),
            "colors_present": int(len(set(ids[ids >= 0].ravel().tolist()))),
            "cycles": n_cycles}


def cycle_permutation(element, cycles: CycleSet, tol: float = 1e-8) -> np.ndarray:
    """Where a group element sends each cycle (as cycle indices)."""
    img = element.apply(cycles.cycles[:, 0])
    idx, dist = cycles.nearest(img)
    if dist.max() > tol:
        raise ValueError("cycle set is not invariant under the element")
    return idx


def basin_symmetry_score(raster: Raster, element, cycles: CycleSet,
                         m: EquivariantMap | None = None, max_iter: int = 400) -> float:
    """Fraction of pixels whose image under ``element`` carries the permuted cycle id.

    With ``m`` the cycle at the exact image of each pixel center is recomputed;
    without it the id is read from the pixel the image falls in, which is only
    meaningful when basins are coarse compared with the pixel size.
    """
    vp = raster.viewport
    z = vp.grid(raster.width, raster.height)
    w = element.mobius(z)
    row, col, inside = vp.pixel(w, raster.width, raster.height)
    perm = cycle_permutation(element, cycles)
    src = raster.ids[inside]
    if m is None:
        dst = raster.ids[row[inside], col[inside]]
    else:
        wi = w[inside]
        dst, _, _ = converge_many(m, np.stack([wi, np.ones_like(wi)], axis=-1), cycles,
                                  max_iter)
    expected = np.where(src >= 0, perm[np.clip(src, 0, None)], -1)
    return float((expected == dst).mean()) if src.size else 1.0


def boundary_mask(ids: np.ndarray) -> np.ndarray:
    """Pixels with a 4-neighbour in a different basin."""
    out = np.zeros(ids.shape, dtype=bool)
    dh = ids[:, 1:] != ids[:, :-1]
    dv = ids[1:] != ids[:-1]
    out[:, 1:] |= dh
    out[:, :-1] |= dh
    out[1:] |= dv
    out[:-1] |= dv
    return out


# -- Julia set proxy -----------------------------------------------------------------

def render_julia(m: EquivariantMap, cycles: CycleSet, width: int = 500, height: int = 500,
                 viewport: Viewport | None = None, max_iter: int = 400, quantile: float = 0.9,
                 overlays=(), threads: int = 1, seed=None, boundary: bool = True) -> Raster:
    """Mark pixels whose convergence time reaches the given quantile (or never converge)
    and, with ``boundary``, pixels bordering a different basin; then draw overlay
    polylines [(points, color), ...] on top."""
    viewport = viewport or Viewport()
    ids, iters = basin_data(m, cycles, width, height, viewport, max_iter, threads)
    threshold = float(np.quantile(iters[ids >= 0], quantile)) if (ids >= 0).any() else 0
    marked = (iters >= threshold) | (ids < 0)
    if boundary:
        marked |= boundary_mask(ids)
    px = np.full((height, width, 3), 255, dtype=np.uint8)
    px[marked] = (0, 0, 0)
    meta = {"kind": "julia", "map": m.name, "quantile": quantile, "threshold": threshold,
            "boundary": boundary, "max_iter": max_iter}
    if seed is not None:
        meta["seed"] = seed
    r = Raster(width, height, px, viewport, meta)
    for pts, color in overlays:
        r.draw_polyline(pts, color)
    r.ids, r.iterations, r.marked = ids, iters, marked
    return r


def reflection_symmetry(mask: np.ndarray) -> float:
    """Agreement of a mask with its flip across the horizontal axis (z -> conj z)."""
    return float((mask == mask[::-1]).mean())


def soccer_edges(group: IcosaGroup, real_edge: np.ndarray, curved_edge: np.ndarray,
                 samples: int = 200):
    """All images of the hexagon-hexagon edge on the real axis and of the
    pentagon-hexagon edge, as chart polylines."""
    out = []
    for base in (real_edge, curved_edge):
        P = normalize(np.stack([base, np.ones_like(base)], axis=-1))
        for g in group:
            Q = g.apply(P)
            with np.errstate(divide="ignore", invalid="ignore"):
                out.append(Q[:, 0] / Q[:, 1])
    return out


# -- Newton basins ------------------------------------------------------------------------

def render_newton(result, width: int = 600, classes=None, seed=None) -> Raster:
    """Paint each fundamental-triangle cell with its Newton class color."""
    from .search import NEWTON_CLASSES
    classes = classes or NEWTON_CLASSES
    z = result.centers
    pad = 0.02 * max(np.ptp(z.real), np.ptp(z.imag))
    vp = Viewport(z.real.min() - pad, z.imag.min() - pad, z.real.max() + pad, z.imag.max() + pad)
    height = max(1, int(round(width * (vp.y1 - vp.y0) / (vp.x1 - vp.x0))))
    r = Raster.blank(width, height, (255, 255, 255), viewport=vp,
                     meta={"kind": "newton", "cells": int(z.size),
                           **({"seed": seed} if seed is not None else {})})
    # paint larger cells first so each pixel takes the color of a nearby center
    row, col, inside = vp.pixel(z, width, height)
    colors = np.array([NEWTON_PALETTE[c] for c in classes] + [(0, 0, 0)], dtype=np.uint8)
    lab = np.where(result.labels >= 0, result.labels, len(classes))
    cell = max(1, int(math.ceil(width / math.sqrt(2 * z.size))))
    for dr in range(cell):
        for dc in range(cell):
            rr, cc = row + dr - cell // 2, col + dc - cell // 2
            ok = inside & (rr >= 0) & (rr < height) & (cc >= 0) & (cc < width)
            r.pixels[rr[ok], cc[ok]] = colors[lab[ok]]
    r.pixels[row[inside], col[inside]] = colors[lab[inside]]
    return r


# -- orbit scatter --------------------------------------------------------------------

def export_orbit_scatter(orbit: Orbit, labels=None, json_path=None, image_path=None,
                         size: int = 400, view: SphereView | None = None, seed=None):
    """Orbit points (and optional group labels) as JSON, plus an orthographic scatter."""
    data = orbit.to_json()
    labels = None if labels is None or len(labels) == 0 else [int(v) for v in labels]
    if labels is not None:
        if len(labels) != orbit.size:
            raise ValueError("one label per orbit point is required")
        data["labels"] = labels
        data["groups"] = {str(a): labels.count(a) for a in sorted(set(labels))}
    if seed is not None:
        data["seed"] = seed
    view = view or SphereView()
    img = Raster.blank(size, size, (255, 255, 255), viewport=view,
                       meta={"kind": "orbit", "size": orbit.size,
                             **({"seed": seed} if seed is not None else {})})
    yy, xx = np.mgrid[0:size, 0:size]
    u = -1 + (xx + 0.5) * 2 / size
    v = 1 - (yy + 0.5) * 2 / size
    img.pixels[u ** 2 + v ** 2 <= 1] = (235, 235, 235)
    pal = Palette.spread(max(labels) + 1) if labels else Palette(((20, 20, 20),))
    U, V, front = view.project(orbit.points)
    rad = max(2, size // 80)
    order = np.argsort(front)          # back first, front drawn over it
    for k in order:
        color = pal[labels[k]] if labels else pal[0]
        if not front[k]:
            color = tuple(int(0.35 * c + 0.65 * 255) for c in color)
        cx = int((U[k] + 1) / 2 * size)
        cy = int((1 - V[k]) / 2 * size)
        ys, xs = np.ogrid[-rad:rad + 1, -rad:rad + 1]
        disk = xs ** 2 + ys ** 2 <= rad ** 2
        r0, c0 = cy - rad, cx - rad
        for dy, dx in zip(*np.nonzero(disk)):
            rr, cc = r0 + dy, c0 + dx
            if 0 <= rr < size and 0 <= cc < size:
                img.pixels[rr, cc] = color
    if json_path is not None:
        Path(json_path).write_text(json.dumps(data, indent=1))
    if image_path is not None:
        img.save(image_path)
    return data, img

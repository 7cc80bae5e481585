"""Escape-to-left-half-plane raster of the Julia set, plus SVG ray overlays.

Pixel ``(i, j)`` samples the plane point

    x_i = (x_min * (W - i) + x_max * i) / W
    y_j = (y_max * (H - j) + y_min * j) / H

i.e. the lattice is anchored at the top-left corner of the viewport.  The
convex-combination form keeps lattice points such as ``0`` exact, which
matters because the parabolic fixed point at ``0`` is Julia but every
nearby point off the real axis is Fatou.  In SVG coordinates the sample
of pixel ``(i, j)`` sits at the pixel center ``(i + 0.5, j + 0.5)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

from .address import ExternalAddress
from .density import PossiblyInfinitePotential
from .model import DivergedBeyond, min_potential
from .plane import DEFAULT_A, BranchCollapse, trace_ray

BLOCK_ROWS = 16
OVERFLOW_RE = 700.0
FORMATS = ("ppm", "svg", "both")

# default view and resolution (our choice; no reference view is given)
DEFAULT_VIEWPORT = (0.0, 4.0, -2 * math.pi, 8 * math.pi)
DEFAULT_SIZE = (800, 800)
DEFAULT_MAX_ITER = 100


def make_palette() -> np.ndarray:
    """256 colours, white at index 0, channels nonincreasing, never black."""
    i = np.arange(256)
    return np.stack([255 - i, 255 - i // 2, np.full(256, 255)], axis=1).astype(np.uint8)


PALETTE = make_palette()
JULIA_COLOUR = np.array([0, 0, 0], dtype=np.uint8)


@dataclass(frozen=True)
class ViewportSpec:
    x_min: float = DEFAULT_VIEWPORT[0]
    x_max: float = DEFAULT_VIEWPORT[1]
    y_min: float = DEFAULT_VIEWPORT[2]
    y_max: float = DEFAULT_VIEWPORT[3]
    width: int = DEFAULT_SIZE[0]
    height: int = DEFAULT_SIZE[1]
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"viewport has zero or negative area: {self}")
        if not all(math.isfinite(v) for v in (self.x_min, self.x_max, self.y_min, self.y_max)):
            raise ValueError("viewport bounds must be finite")
        for name in ("width", "height", "max_iter"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.width

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / self.height

    def xs(self) -> np.ndarray:
        i = np.arange(self.width, dtype=float)
        return (self.x_min * (self.width - i) + self.x_max * i) / self.width

    def ys(self, j0: int = 0, j1: Optional[int] = None) -> np.ndarray:
        j = np.arange(j0, self.height if j1 is None else j1, dtype=float)
        return (self.y_max * (self.height - j) + self.y_min * j) / self.height

    def pixel_to_plane(self, i: float, j: float) -> complex:
        return complex((self.x_min * (self.width - i) + self.x_max * i) / self.width,
                       (self.y_max * (self.height - j) + self.y_min * j) / self.height)

    def plane_to_pixel(self, z: complex) -> tuple[float, float]:
        return (z.real - self.x_min) / self.dx, (self.y_max - z.imag) / self.dy

    def plane_to_svg(self, z: complex) -> tuple[float, float]:
        i, j = self.plane_to_pixel(z)
        return i + 0.5, j + 0.5


@dataclass(frozen=True)
class Overlay:
    address: ExternalAddress
    t_range: tuple[float, float]
    samples: int = 24
    pullback_depth: int = 30

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("overlay sample counts must be at least 2")
        if not self.t_range[0] <= self.t_range[1]:
            raise ValueError(f"bad potential range {self.t_range}")


@dataclass(frozen=True)
class RenderJob:
    viewport: ViewportSpec = field(default_factory=ViewportSpec)
    a: complex = DEFAULT_A
    overlays: tuple[Overlay, ...] = ()
    output_format: str = "ppm"
    workers: int = 1

    def __post_init__(self):
        if self.output_format not in FORMATS:
            raise ValueError(f"output format must be one of {FORMATS}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


# -- raster ------------------------------------------------------------------

def first_entry_block(vp: ViewportSpec, a: complex, j0: int, j1: int) -> np.ndarray:
    """First ``n <= max_iter`` with ``Re(f^n) < 0`` for rows ``j0:j1``; ``-1`` for Julia pixels.

    Points whose real part exceeds 700 are counted as Julia: their next
    image overflows and lies far to the right.
    """
    xs = vp.xs()
    ys = vp.ys(j0, j1)
    x = np.broadcast_to(xs, (len(ys), len(xs))).ravel().copy()
    y = np.broadcast_to(ys[:, None], (len(ys), len(xs))).ravel().copy()
    out = np.full(x.size, -1, dtype=np.int32)
    idx = np.arange(x.size)
    ar, ai = float(a.real), float(a.imag)
    for n in range(vp.max_iter + 1):
        fatou = x < 0
        out[idx[fatou]] = n
        keep = ~fatou & (x <= OVERFLOW_RE)
        idx, x, y = idx[keep], x[keep], y[keep]
        if n == vp.max_iter or idx.size == 0:
            break
        ex = np.exp(x)
        x, y = ex * np.cos(y) + ar, ex * np.sin(y) + ai
    return out.reshape(len(ys), len(xs))


def _block_task(args):
    vp, a, j0, j1 = args
    return first_entry_block(vp, a, j0, j1)


def first_entry_grid(job: RenderJob) -> np.ndarray:
    vp = job.viewport
    a = complex(job.a)
    tasks = [(vp, a, j0, min(j0 + BLOCK_ROWS, vp.height)) for j0 in range(0, vp.height, BLOCK_ROWS)]
    if job.workers == 1 or len(tasks) == 1:
        blocks = [_block_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=job.workers) as pool:
            blocks = list(pool.map(_block_task, tasks))
    return np.vstack(blocks)


def colourize(grid: np.ndarray) -> np.ndarray:
    rgb = PALETTE[np.clip(grid, 0, 255)]
    rgb[grid < 0] = JULIA_COLOUR
    return rgb


def encode_ppm(rgb: np.ndarray) -> bytes:
    h, w, _ = rgb.shape
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(rgb, dtype=np.uint8).tobytes()


def decode_ppm(data: bytes) -> np.ndarray:
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6" or parts[3] != b"255":
        raise ValueError("not an 8-bit binary PPM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4], dtype=np.uint8, count=w * h * 3).reshape(h, w, 3)


def render_julia(job: RenderJob) -> bytes:
    return encode_ppm(colourize(first_entry_grid(job)))


# -- overlays ----------------------------------------------------------------

def overlay_points(ov: Overlay, a: complex = DEFAULT_A):
    """Ray samples from the endpoint up to the top of the potential range."""
    res = min_potential(ov.address)
    if isinstance(res, DivergedBeyond):
        raise PossiblyInfinitePotential(f"possibly infinite potential for {ov.address}")
    lo = res.value
    hi = max(ov.t_range[1], lo)
    pts = []
    for k in range(ov.samples):
        t = lo + (hi - lo) * k / (ov.samples - 1)
        pts.append(trace_ray(ov.address, t, ov.pullback_depth, a, adaptive=True).point)
    return pts


def render_overlay(job: RenderJob, warnings: Optional[list] = None) -> bytes:
    """SVG 1.1 document with one red path per overlay and a label at its endpoint.

    Overlays whose potential looks infinite, or whose tracing collapses onto
    the singular value, are skipped and reported through ``warnings``.
    """
    vp = job.viewport
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{vp.width}" height="{vp.height}" '
        f'viewBox="0 0 {vp.width} {vp.height}">',
    ]
    for k, ov in enumerate(job.overlays):
        try:
            pts = overlay_points(ov, complex(job.a))
        except (PossiblyInfinitePotential, BranchCollapse) as exc:
            if warnings is not None:
                warnings.append({"overlay": k, "address": ov.address.to_json(), "reason": str(exc)})
            continue
        coords = [vp.plane_to_svg(z) for z in pts]
        d = "M " + " L ".join(f"{u:.3f} {v:.3f}" for u, v in coords)
        label = escape(ov.address.dumps())
        lines.append(f'<path id="ray{k}" d="{d}" fill="none" stroke="red" stroke-width="1.5"/>')
        lines.append(f'<text x="{coords[0][0]:.3f}" y="{coords[0][1]:.3f}" fill="red" '
                     f'font-size="10">{label}</text>')
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")

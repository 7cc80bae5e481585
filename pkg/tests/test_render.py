import math
import re

import numpy as np
import pytest

from bouquet.address import linear_address, parse_address, zero_address
from bouquet.model import DivergedBeyond
from bouquet.plane import OkUpTo, julia_membership
from bouquet import render
from bouquet.render import (
    PALETTE,
    Overlay,
    RenderJob,
    ViewportSpec,
    decode_ppm,
    first_entry_grid,
    render_julia,
    render_overlay,
)

SMALL = ViewportSpec(0.0, 4.0, -2 * math.pi, 8 * math.pi, 120, 120, 60)


def test_viewport_validation():
    with pytest.raises(ValueError):
        ViewportSpec(1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        ViewportSpec(0.0, 1.0, 0.0, 1.0, 0, 10)
    with pytest.raises(ValueError):
        RenderJob(output_format="png")
    with pytest.raises(ValueError):
        Overlay(zero_address(), (0.0, 1.0), samples=1)


def test_transform_is_affine_and_invertible():
    vp = ViewportSpec()
    for i, j in ((0, 0), (13.5, 700.25), (799, 799)):
        z = vp.pixel_to_plane(i, j)
        u, v = vp.plane_to_pixel(z)
        assert abs(u - i) < 1e-9 and abs(v - j) < 1e-9
    assert vp.pixel_to_plane(0, 640) == 0j


def test_palette_is_monotone_and_never_black():
    assert PALETTE.shape == (256, 3)
    assert PALETTE[0].tolist() == [255, 255, 255]
    assert (np.diff(PALETTE.astype(int), axis=0) <= 0).all()
    assert (PALETTE.sum(axis=1) > 0).all()


def test_ppm_header_and_round_trip():
    data = render_julia(RenderJob(SMALL))
    assert data.startswith(b"P6\n120 120\n255\n")
    img = decode_ppm(data)
    assert img.shape == (120, 120, 3)


def test_deterministic_across_workers():
    a = render_julia(RenderJob(SMALL, workers=1))
    b = render_julia(RenderJob(SMALL, workers=3))
    assert a == b


def test_origin_is_black_and_left_half_plane_is_not():
    vp = ViewportSpec()
    grid = first_entry_grid(RenderJob(vp))
    assert grid[640, 0] == -1
    left = first_entry_grid(RenderJob(ViewportSpec(-3.0, -0.5, -5.0, 5.0, 64, 64, 20)))
    assert (left == 0).all()


def test_black_pixels_pass_membership():
    grid = first_entry_grid(RenderJob(SMALL))
    js, is_ = np.nonzero(grid < 0)
    assert len(js) > 0
    for j, i in list(zip(js, is_))[::7]:
        assert isinstance(julia_membership(SMALL.pixel_to_plane(i, j), SMALL.max_iter, 0.0), OkUpTo)


def test_empty_overlay_document():
    svg = render_overlay(RenderJob(SMALL)).decode()
    assert svg.count("<path") == 0 and svg.rstrip().endswith("</svg>")
    assert 'version="1.1"' in svg


def _paths(svg):
    return re.findall(r'd="M ([^"]*)"', svg)


def test_three_labelled_rays():
    ovs = tuple(Overlay(parse_address(t), (0.0, 5.0), 12) for t in ("const:0", "0;linear:1,0:+", "0,1;const:1"))
    svg = render_overlay(RenderJob(SMALL, overlays=ovs)).decode()
    assert len(_paths(svg)) == 3 and svg.count("<text") == 3
    for ov in ovs:
        assert ov.address.dumps() in svg


def test_zero_ray_stays_in_its_strip():
    vp = ViewportSpec()
    job = RenderJob(vp, overlays=(Overlay(zero_address(), (0.0, 3.0), 10),))
    (d,) = _paths(render_overlay(job).decode())
    for pair in d.split(" L "):
        u, v = (float(x) for x in pair.split())
        # back to the plane through the SVG offset of half a pixel
        z = vp.pixel_to_plane(u - 0.5, v - 0.5)
        assert abs(z.imag) <= math.pi


def test_overlay_agrees_with_raster_within_half_a_pixel():
    vp = SMALL
    z = vp.pixel_to_plane(37, 81)
    u, v = vp.plane_to_svg(z)
    assert abs(u - 37.5) <= 0.5 and abs(v - 81.5) <= 0.5


def test_divergent_overlay_is_skipped_with_warning(monkeypatch):
    monkeypatch.setattr(render, "min_potential", lambda s: DivergedBeyond(1e6, 2e6, 40))
    warnings = []
    svg = render_overlay(RenderJob(SMALL, overlays=(Overlay(linear_address([0, 5]), (0.0, 2.0)),)), warnings)
    assert b"<path" not in svg
    assert len(warnings) == 1 and "infinite" in warnings[0]["reason"]

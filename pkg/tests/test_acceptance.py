"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line."""

import hashlib
import math
import time

from bouquet.address import ConstantTail, ExternalAddress, zero_address
from bouquet.density import erdos_transform
from bouquet.model import min_potential
from bouquet.render import RenderJob, ViewportSpec, decode_ppm, first_entry_grid, render_julia
from bouquet.verify import (
    Context,
    check_bands,
    check_certificate,
    check_classification,
    check_contraction,
    check_cycles,
    check_monotonicity,
    check_nowhere_dense,
    check_oracle,
    check_self_consistency,
    check_shift,
    check_targeting,
    check_tstar_bound,
)

SEED = 20240601


def _summary(cases):
    bad = [c for c in cases if not c.ok]
    return bad, f"{len(cases) - len(bad)}/{len(cases)} cases"


def test_01_oracle_equivalence(record):
    t0 = time.perf_counter()
    cases = check_oracle(Context(SEED), 100)
    elapsed = time.perf_counter() - t0
    bad, msg = _summary(cases)
    worst = max(abs(c.got - c.expected) for c in cases)
    ok = not bad and elapsed < 1.0
    record(1, ok, f"{msg}, max |diff| {worst:.2e} (tol 1e-8), {elapsed:.3f}s (limit 1s)")
    assert ok


def test_02_tstar_bound(record):
    cases = check_tstar_bound(Context(SEED), 100)
    bad, msg = _summary(cases)
    slack = min(c.expected["at_most"] - c.got for c in cases)
    record(2, not bad, f"{msg}, min slack {slack:.3g}")
    assert not bad


def test_03_spot_values(record):
    one = ExternalAddress((0, 1), ConstantTail(0))
    checks = [
        min_potential(zero_address()).value == 0.0,
        abs(min_potential(one).value - math.log(1 + 2 * math.pi)) <= 1e-12,
        erdos_transform(0.0) == 1.0,
        erdos_transform(math.inf) == 0.0,
        erdos_transform(1.0) == 0.5,
    ]
    record(3, all(checks), f"{sum(checks)}/5 exact values")
    assert all(checks)


def test_04_coordinate_monotonicity(record):
    cases = check_monotonicity(Context(SEED), 200)
    bad, msg = _summary(cases)
    record(4, not bad, f"{msg} dominating pairs")
    assert not bad


def test_05_shift_compatibility(record):
    cases = check_shift(Context(SEED), 100)
    bad, msg = _summary(cases)
    worst = max(c.ratio for c in cases) * 1e-7
    record(5, not bad and len(cases) > 0, f"{msg}, max error {worst:.2e} (tol 1e-7)")
    assert not bad and cases


def test_06_stratification_certificate(record):
    ctx = Context(SEED)
    t0 = time.perf_counter()
    cases = check_certificate(ctx, depth=4, samples=500)
    elapsed = time.perf_counter() - t0
    bad, _ = _summary(cases)
    ok = not bad and elapsed < 10.0
    record(6, ok, f"{len(bad)} violations over S1-S4, C2a-C2c, {elapsed:.2f}s (limit 10s)")
    assert ok


def test_07_density_targeting(record):
    cases = check_targeting(Context(SEED), bases=5, targets=20, budget=64, eps=1e-3)
    bad, msg = _summary(cases)
    record(7, not bad, f"{msg} within 1e-3 at prefix agreement 6"
           + (f"; first failure: {bad[0].got}" if bad else ""))
    assert not bad


def test_08_nowhere_density_approach(record):
    cases = check_nowhere_dense(Context(SEED), count=20, steps=20, settle=12)
    bad, msg = _summary(cases)
    latest = max(c.got["settles_at"] or 99 for c in cases)
    record(8, not bad, f"{msg}, bound holds from step {latest} at the latest")
    assert not bad


def test_09_ray_bands(record):
    cases = check_bands(Context(SEED), 20, depth=30, n_max=8, tol=1e-6)
    bad, msg = _summary(cases)
    record(9, not bad, f"{msg} in band and right half-plane for n <= 8")
    assert not bad


def test_10_tracer_self_consistency(record):
    cases = check_self_consistency(Context(SEED), 20)
    bad, msg = _summary(cases)
    record(10, not bad, f"{msg}, max |z30 - z35| / error_estimate {max(c.ratio for c in cases):.3g}")
    assert not bad


def test_11_left_half_plane_contraction(record):
    (case,) = check_contraction(Context(SEED), 1000)
    record(11, case.ok, f"max |f(z)+1| = {case.got!r} over 1000 points")
    assert case.ok


def test_12_parameter_checks(record):
    cases = check_cycles(Context(SEED))[:2]
    bad, _ = _summary(cases)
    par, att = cases[0].got, cases[1].got
    record(12, not bad, f"a=-1 {par['kind']} multiplier {par['multiplier']}; "
           f"a=-2 {att['kind']} |multiplier| {math.hypot(*att['multiplier']):.6f}")
    assert not bad


def test_13_classification(record):
    cases = check_classification(Context(SEED))
    bad, msg = _summary(cases)
    record(13, not bad, f"{msg} (signed tails exact, z=-2 attracted)")
    assert not bad


def test_14_render_determinism(record):
    job = RenderJob()
    h1 = hashlib.sha256(render_julia(job)).hexdigest()
    h2 = hashlib.sha256(render_julia(job)).hexdigest()
    h8 = hashlib.sha256(render_julia(RenderJob(workers=8))).hexdigest()
    vp = job.viewport
    img = decode_ppm(render_julia(job))
    i, j = (round(c) for c in vp.plane_to_pixel(0j))
    origin_black = vp.pixel_to_plane(i, j) == 0 and img[j, i].tolist() == [0, 0, 0]
    left = first_entry_grid(RenderJob(ViewportSpec(-8.0, -0.01, -2 * math.pi, 8 * math.pi, 200, 200)))
    ok = h1 == h2 == h8 and origin_black and not (left < 0).any()
    record(14, ok, f"sha256 {h1[:12]} (2 runs, 1 vs 8 workers), origin black {origin_black}, "
           f"left viewport black pixels {int((left < 0).sum())}")
    assert ok

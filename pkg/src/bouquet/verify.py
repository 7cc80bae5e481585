"""Property suites behind ``bouquet verify``.

Each check returns a list of :class:`Case` records; a suite is a list of
checks.  Reports follow ``{suite, seed, cases, failures}``.
"""

from __future__ import annotations

import hashlib
import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .address import (
    ConstantTail,
    ExternalAddress,
    LinearTail,
    SIGNS,
    coordinate,
    linear_address,
    zero_address,
)
from .density import (
    BudgetExhausted,
    erdos_transform,
    graph_point,
    in_cone,
    nowhere_dense_approach,
    pair_metric,
    potential_target,
)
from .model import big_f, min_potential, min_potential_oracle, offset, t_star
from .plane import (
    OrbitClass,
    band_check,
    classify_orbit,
    find_attracting_cycle,
    left_halfplane_step,
    trace_ray,
)
from .render import RenderJob, ViewportSpec, decode_ppm, first_entry_grid, render_julia
from .strata import StratumIndex, certify_stratification

SUITES = ("model", "strata", "density", "plane", "render")
BUGS = ("psi", "successor", "band")


@dataclass
class Case:
    id: str
    input: object
    expected: object
    got: object
    ok: bool
    # measured error over tolerance, when the check has one
    ratio: Optional[float] = None

    def failure(self) -> dict:
        return {"id": self.id, "input": self.input, "expected": self.expected, "got": self.got}


@dataclass
class Context:
    seed: int = 0
    bug: Optional[str] = None
    prefix_agree: int = 6
    timings: dict = field(default_factory=dict)

    def psi(self, address: ExternalAddress) -> float:
        v = min_potential(address).value
        return v + 1e-6 if self.bug == "psi" else v


# -- samplers ----------------------------------------------------------------

def sample_address(rng: random.Random, max_prefix: int = 8, max_entry: int = 20, max_slope: int = 3,
                   const_share: float = 0.25) -> ExternalAddress:
    prefix = tuple(rng.randint(-max_entry, max_entry) for _ in range(rng.randint(0, max_prefix)))
    if rng.random() < const_share:
        return ExternalAddress(prefix, ConstantTail(rng.randint(-max_entry, max_entry)))
    return ExternalAddress(prefix, LinearTail(rng.randint(1, max_slope), rng.randint(-5, 5), rng.choice(SIGNS)))


def sample_addresses(seed: int, count: int, **kw) -> list[ExternalAddress]:
    rng = random.Random(seed)
    return [sample_address(rng, **kw) for _ in range(count)]


def dominating_pair(rng: random.Random) -> tuple[ExternalAddress, ExternalAddress]:
    """``(s, s')`` with ``|s_n| >= |s'_n|`` for every ``n``."""
    small = sample_address(rng)
    t = small.tail
    bump = rng.randint(0, 4)
    if isinstance(t, ConstantTail):
        if rng.random() < 0.5:
            tail = ConstantTail(rng.choice((1, -1)) * (abs(t.value) + bump))
        else:
            tail = LinearTail(rng.randint(1, 3), abs(t.value) + bump, rng.choice(SIGNS))
    else:
        tail = LinearTail(t.slope + rng.randint(0, 2), abs(t.intercept) + bump, rng.choice(SIGNS))
    prefix = []
    for n in range(len(small.prefix)):
        v = coordinate(small, n)
        mag = abs(v) + rng.randint(0, 5)
        prefix.append(-mag if v < 0 else mag)
    big = ExternalAddress(tuple(prefix), tail)
    return big, small


def ray_addresses(seed: int, count: int = 20) -> list[ExternalAddress]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        prefix = [rng.randint(-5, 5) for _ in range(rng.randint(0, 4))]
        out.append(linear_address(prefix, rng.randint(1, 3), rng.randint(0, 3), rng.choice(("+", "-", "alt"))))
    return out


# -- model checks --------------------------------------------------------------

def check_oracle(ctx: Context, count: int = 100) -> list[Case]:
    cases = []
    for k, s in enumerate(sample_addresses(ctx.seed, count)):
        got, ref = ctx.psi(s), min_potential_oracle(s)
        err = abs(got - ref)
        cases.append(Case(f"oracle/{k}", s.to_json(), ref, got, err <= 1e-8, err / 1e-8))
    return cases


def check_tstar_bound(ctx: Context, count: int = 100) -> list[Case]:
    cases = []
    for k, s in enumerate(sample_addresses(ctx.seed, count)):
        got = ctx.psi(s)
        bound = t_star(s).value + 1
        cases.append(Case(f"tstar/{k}", s.to_json(), {"at_most": bound}, got, got <= bound + 1e-9))
    return cases


def check_spot_values(ctx: Context) -> list[Case]:
    one = ExternalAddress((0, 1), ConstantTail(0))
    ln = math.log(1 + 2 * math.pi)
    got_one = ctx.psi(one)
    return [
        Case("spot/zero", zero_address().to_json(), 0.0, ctx.psi(zero_address()), ctx.psi(zero_address()) == 0.0),
        Case("spot/s1", one.to_json(), ln, got_one, abs(got_one - ln) <= 1e-12, abs(got_one - ln) / 1e-12),
        Case("spot/erdos0", 0.0, 1.0, erdos_transform(0.0), erdos_transform(0.0) == 1.0),
        Case("spot/erdos_inf", math.inf, 0.0, erdos_transform(math.inf), erdos_transform(math.inf) == 0.0),
        Case("spot/erdos1", 1.0, 0.5, erdos_transform(1.0), erdos_transform(1.0) == 0.5),
    ]


def check_monotonicity(ctx: Context, count: int = 200) -> list[Case]:
    rng = random.Random(ctx.seed + 1)
    cases = []
    for k in range(count):
        big, small = dominating_pair(rng)
        pb, ps = ctx.psi(big), ctx.psi(small)
        cases.append(Case(f"monotone/{k}", {"big": big.to_json(), "small": small.to_json()},
                          {"at_least": ps}, pb, pb >= ps - 1e-10))
    return cases


def check_shift(ctx: Context, count: int = 100) -> list[Case]:
    cases = []
    for k, s in enumerate(sample_addresses(ctx.seed, count)):
        res = min_potential(s)
        if not res.is_finite:
            continue
        shifted = s.shift(1)
        lhs = big_f(ctx.psi(s)) - offset(coordinate(s, 1))
        rhs = ctx.psi(shifted)
        oracle = min_potential_oracle(shifted)
        err = max(abs(lhs - rhs), abs(lhs - oracle))
        cases.append(Case(f"shift/{k}", s.to_json(), rhs, lhs, err <= 1e-7, err / 1e-7))
    return cases


# -- strata ------------------------------------------------------------------

def corrupted_successor(address, alpha):
    return StratumIndex(alpha.pairs + ((alpha.dom, coordinate(address, alpha.dom)),))


def check_certificate(ctx: Context, depth: int = 4, samples: int = 500, workers: int = 1) -> list[Case]:
    kw = {"successor": corrupted_successor} if ctx.bug == "successor" else {}
    t0 = time.perf_counter()
    cert = certify_stratification(depth, ctx.seed, samples, workers=workers, **kw)
    ctx.timings["certificate"] = time.perf_counter() - t0
    cases = [Case(f"strata/{c}", {"depth": depth, "samples": samples}, 0,
                  sum(v["condition"] == c for v in cert.violations),
                  not any(v["condition"] == c for v in cert.violations))
             for c in cert.checks]
    for i, v in enumerate(cert.violations[:50]):
        cases.append(Case(f"strata/violation/{i}", v, "no violation", v["detail"], False))
    return cases


# -- density -----------------------------------------------------------------

def check_targeting(ctx: Context, bases: int = 5, targets: int = 20, budget: int = 64,
                    eps: float = 1e-3) -> list[Case]:
    prefix_agree = ctx.prefix_agree
    rng = random.Random(ctx.seed + 7)
    cases = []
    for b in range(bases):
        base = sample_address(rng, const_share=0.0)
        psi0 = ctx.psi(base)
        for k in range(targets):
            target = psi0 + rng.uniform(0.1, 3.0)
            inp = {"base": base.to_json(), "prefix_agree": prefix_agree, "target": target}
            try:
                res = potential_target(base, prefix_agree, target, eps, budget)
            except BudgetExhausted as exc:
                cases.append(Case(f"target/{b}/{k}", inp, target, str(exc), False))
                continue
            got = ctx.psi(res)
            ok = abs(got - target) <= eps and in_cone(res, base, prefix_agree)
            cases.append(Case(f"target/{b}/{k}", inp, target, got, ok, abs(got - target) / eps))
    return cases


def check_nowhere_dense(ctx: Context, count: int = 20, steps: int = 20, settle: int = 12) -> list[Case]:
    """Capped witnesses approach the base graph point and never raise the potential.

    The pair-metric bound ``2**-n + 1e-6`` is required from some step
    ``n0 <= settle`` onward, up to ``steps``.
    """
    rng = random.Random(ctx.seed + 11)
    cases = []
    for k in range(count):
        s = sample_address(rng, const_share=0.0)
        dom = rng.randint(1, 4)
        base = graph_point(s)
        pts = nowhere_dense_approach(s, dom, steps)
        gaps = [pair_metric(base, q) for q in pts]
        ok_n = [g <= math.ldexp(1.0, -(n + 1)) + 1e-6 for n, g in enumerate(gaps)]
        n0 = next((n + 1 for n in range(steps) if all(ok_n[n:])), None)
        above = max(q.potential - base.potential for q in pts)
        ok = n0 is not None and n0 <= settle and above <= 0.0
        cases.append(Case(f"nowhere/{k}", {"address": s.to_json(), "dom_alpha": dom},
                          {"settles_by": settle, "max_rise": 0.0}, {"settles_at": n0, "max_rise": above}, ok))
    return cases


# -- plane -------------------------------------------------------------------

def check_bands(ctx: Context, count: int = 20, depth: int = 30, n_max: int = 8, tol: float = 1e-6) -> list[Case]:
    cases = []
    for k, s in enumerate(ray_addresses(ctx.seed, count)):
        t = ctx.psi(s) + 0.5
        ray = trace_ray(s, t, depth, dps=50)
        rep = band_check(ray, n_max, tol)
        band_ok, julia_ok = rep.band_ok, rep.julia_ok
        if ctx.bug == "band":
            band_ok = False
        cases.append(Case(f"band/{k}", {"address": s.to_json(), "t": t}, {"band": True, "julia": True},
                          {"band": band_ok, "julia": julia_ok, "verified_depth": rep.verified_depth},
                          band_ok and julia_ok))
    return cases


def check_self_consistency(ctx: Context, count: int = 20) -> list[Case]:
    cases = []
    for k, s in enumerate(ray_addresses(ctx.seed, count)):
        t = ctx.psi(s) + 0.5
        r30, r35 = trace_ray(s, t, 30), trace_ray(s, t, 35)
        d = abs(r30.point - r35.point)
        cases.append(Case(f"depth/{k}", {"address": s.to_json(), "t": t}, {"at_most": r30.error_estimate},
                          d, d <= r30.error_estimate, d / r30.error_estimate))
    return cases


def check_contraction(ctx: Context, count: int = 1000) -> list[Case]:
    rng = random.Random(ctx.seed + 3)
    worst, worst_z = 0.0, 0j
    for k in range(count):
        re = 0.0 if k % 10 == 0 else -rng.expovariate(0.2)
        z = complex(re, rng.uniform(-100, 100))
        v = left_halfplane_step(z)
        if v > worst:
            worst, worst_z = v, z
    return [Case("contraction", {"points": count, "worst_z": worst_z}, {"at_most": 1 + 1e-12}, worst,
                 worst <= 1 + 1e-12)]


def check_cycles(ctx: Context) -> list[Case]:
    par = find_attracting_cycle(complex(-1, 0))
    att = find_attracting_cycle(complex(-2, 0))
    none = find_attracting_cycle(complex(1, 0))
    return [
        Case("cycle/a=-1", [-1.0, 0.0], {"kind": "parabolic", "multiplier": [1.0, 0.0]}, par.to_json(),
             par.kind == "parabolic" and abs(par.multiplier - 1) <= 1e-9),
        Case("cycle/a=-2", [-2.0, 0.0], {"kind": "attracting"}, att.to_json(),
             att.kind == "attracting" and abs(att.multiplier) < 1),
        Case("cycle/a=1", [1.0, 0.0], {"kind": "none"}, none.to_json(), none.kind == "none"),
    ]


def check_classification(ctx: Context) -> list[Case]:
    rng = random.Random(ctx.seed + 5)
    expect = {"+": OrbitClass.IMAG_PLUS, "-": OrbitClass.IMAG_MINUS,
              "alt": OrbitClass.IMAG_UNSIGNED, "-alt": OrbitClass.IMAG_UNSIGNED}
    cases = []
    for k in range(20):
        sign = SIGNS[k % 4]
        s = linear_address([rng.randint(-5, 5) for _ in range(rng.randint(0, 4))],
                           rng.randint(1, 3), rng.randint(0, 3), sign)
        got = classify_orbit(s)
        cases.append(Case(f"classify/{k}", s.to_json(), expect[sign].value, got.kind.value,
                          got.kind is expect[sign]))
    attracted = classify_orbit(complex(-2, 0), depth=50)
    cases.append(Case("classify/z=-2", {"z": [-2.0, 0.0], "depth": 50}, OrbitClass.ATTRACTED.value,
                      attracted.to_json(), attracted.kind is OrbitClass.ATTRACTED))
    return cases


# -- render ------------------------------------------------------------------

def check_render(ctx: Context, workers: int = 8) -> list[Case]:
    job = RenderJob()
    first = hashlib.sha256(render_julia(job)).hexdigest()
    second = hashlib.sha256(render_julia(job)).hexdigest()
    parallel = hashlib.sha256(render_julia(RenderJob(workers=workers))).hexdigest()
    img = decode_ppm(render_julia(job))
    vp = job.viewport
    i, j = (round(c) for c in vp.plane_to_pixel(0j))
    origin = vp.pixel_to_plane(i, j)
    left = RenderJob(ViewportSpec(-6.0, -0.05, -10.0, 10.0, 200, 200))
    left_black = int((first_entry_grid(left) < 0).sum())
    return [
        Case("render/repeat", "default job", first, second, first == second),
        Case("render/workers", {"workers": [1, workers]}, first, parallel, first == parallel),
        Case("render/origin", {"pixel": [i, j], "z": origin}, [0, 0, 0], img[j, i].tolist(),
             origin == 0 and img[j, i].tolist() == [0, 0, 0]),
        Case("render/left", "[-6,-0.05]x[-10,10]", 0, left_black, left_black == 0),
    ]


SUITE_CHECKS: dict[str, list[Callable]] = {
    "model": [check_oracle, check_tstar_bound, check_spot_values, check_monotonicity, check_shift],
    "strata": [check_certificate],
    "density": [check_targeting, check_nowhere_dense],
    "plane": [check_bands, check_self_consistency, check_contraction, check_cycles, check_classification],
    "render": [check_render],
}


@dataclass
class SuiteReport:
    suite: str
    seed: int
    cases: dict[str, list[Case]]

    @property
    def all_cases(self) -> list[Case]:
        return [c for cs in self.cases.values() for c in cs]

    @property
    def failures(self) -> list[Case]:
        return [c for c in self.all_cases if not c.ok]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "cases": len(self.all_cases),
            "failures": [c.failure() for c in self.failures],
        }


class InvalidRequest(ValueError):
    pass


class UnknownSuite(InvalidRequest):
    pass


def run_suite(suite: str, seed: int = 0, inject_bug: Optional[str] = None, prefix_agree: int = 6) -> SuiteReport:
    if suite != "all" and suite not in SUITES:
        raise UnknownSuite(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")
    if inject_bug is not None and inject_bug not in BUGS:
        raise InvalidRequest(f"unknown bug hook {inject_bug!r}; choose from {BUGS}")
    if prefix_agree < 0:
        raise InvalidRequest("prefix_agree must be nonnegative")
    ctx = Context(seed, inject_bug, prefix_agree)
    names = SUITES if suite == "all" else (suite,)
    cases = {}
    for name in names:
        for check in SUITE_CHECKS[name]:
            cases[f"{name}/{check.__name__[len('check_'):]}"] = check(ctx)
    return SuiteReport(suite, seed, cases)


def run_verify(suite: str, seed: int = 0, inject_bug: Optional[str] = None,
               prefix_agree: int = 6) -> tuple[int, Optional[SuiteReport]]:
    """Exit status (0 pass, 1 violation, 2 unknown suite) and the report."""
    try:
        report = run_suite(suite, seed, inject_bug, prefix_agree)
    except InvalidRequest:
        return 2, None
    return (0 if report.passed else 1), report

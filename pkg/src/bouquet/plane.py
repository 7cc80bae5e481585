"""Plane dynamics of ``f_a(z) = exp(z) + a`` (``a = -1`` gives ``exp(z) - 1``).

Complex numbers are plain Python ``complex``.  The ray tracer pulls a seed
back through the inverse branches ``log(w - a) + 2*pi*i*s_j`` selected by
the address, so every point of the pulled-back orbit sits in its strip
``((2 s_j - 1) pi, (2 s_j + 1) pi]`` by construction.
"""

from __future__ import annotations

import cmath
import enum
import math
import sys
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Union

import mpmath

from .address import EscapeClass, ExternalAddress, coordinate, in_x
from .density import PossiblyInfinitePotential
from .model import DivergedBeyond, FailsAt, OkUpTo, min_potential, offset, potential_profile

SATURATION_HEIGHT = 50.0
OVERFLOW_RE = 700.0
DEFAULT_A = complex(-1.0, 0.0)
PARABOLIC_WINDOW = 1e-9
TWO_PI_F = 2.0 * math.pi
# a few ulps per log and add, for the double-precision pullback
ROUNDING = 8 * sys.float_info.epsilon


class PotentialBelowMinimum(ValueError):
    pass


class BranchCollapse(ArithmeticError):
    pass


def f_a(z: complex, a: complex = DEFAULT_A) -> complex:
    ex = math.exp(z.real)
    return complex(ex * math.cos(z.imag) + a.real, ex * math.sin(z.imag) + a.imag)


@dataclass(frozen=True)
class Orbit:
    points: tuple[complex, ...]
    overflow_at: Optional[int] = None

    def __len__(self):
        return len(self.points)

    def __getitem__(self, n):
        return self.points[n]


def iterate(z: complex, n: int, a: complex = DEFAULT_A) -> Orbit:
    """``z, f_a(z), ..., f_a^n(z)``; stops at the first point with ``Re > 700``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    pts = [complex(z)]
    for k in range(n):
        if pts[-1].real > OVERFLOW_RE:
            return Orbit(tuple(pts), k)
        pts.append(f_a(pts[-1], a))
    return Orbit(tuple(pts), None)


def julia_membership(z: complex, depth: int, tol: float = 1e-6, a: complex = DEFAULT_A):
    """``FailsAt(n)`` for the first ``n <= depth`` with ``Re(f^n(z)) < -tol``, else ``OkUpTo``."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    z = complex(z)
    for n in range(depth + 1):
        if z.real < -tol:
            return FailsAt(n)
        if n == depth:
            break
        if z.real > OVERFLOW_RE:
            return OkUpTo(n)
        z = f_a(z, a)
    return OkUpTo(depth)


def left_halfplane_step(z: complex) -> float:
    """``|f(z) + 1|``, which equals ``exp(Re z) <= 1`` on the closed left half-plane."""
    z = complex(z)
    if z.real > 0:
        raise ValueError(f"expected Re(z) <= 0, got {z}")
    return abs(f_a(z) + 1.0)


# -- ray tracing -------------------------------------------------------------

@dataclass(frozen=True)
class RayPoint:
    point: complex
    address: ExternalAddress
    potential: float
    pullback_depth: int
    error_estimate: float
    orbit: tuple[complex, ...] = ()
    seed_value: float = 0.0
    saturated: bool = False
    exact: object = field(default=None, compare=False, repr=False)
    dps: Optional[int] = None
    exact_error: float = 0.0

    def to_json(self) -> dict:
        return {
            "re": self.point.real,
            "im": self.point.imag,
            "error_estimate": self.error_estimate,
            "potential": self.potential,
            "pullback_depth": self.pullback_depth,
            "saturated": self.saturated,
            "address": self.address.to_json(),
        }


def _principal_log(u: complex) -> complex:
    w = cmath.log(u)
    if w.imag <= -math.pi:
        # keep the strip half-open at the bottom
        w = complex(w.real, math.pi)
    return w


def _pullback_error(e: float, u: complex, floor: float) -> float:
    """Bound on ``|log(u') - log(u)|`` given ``|u' - u| <= e`` and ``|u'| >= floor``."""
    if e == 0:
        return 0.0
    r = abs(u)
    crosses_cut = u.real < 0 and abs(u.imag) <= e
    if e < r and not crosses_cut:
        return e / (r - e)
    lo = max(r - e, floor)
    if lo <= 0:
        return math.inf
    d_re = max(math.log((r + e) / r), math.log(r / lo))
    d_im = 2 * math.pi if crosses_cut else (math.asin(e / r) if e < r else math.pi)
    return math.hypot(d_re, d_im)


def trace_ray(address: ExternalAddress, t: float, pullback_depth: int = 30, a: complex = DEFAULT_A,
              *, adaptive: bool = False, dps: Optional[int] = None,
              height: float = SATURATION_HEIGHT) -> RayPoint:
    """Approximate the plane point with potential ``t`` on the ray with this address.

    Model potentials ``t_k`` are run forward (clamped below by the minimal
    potentials of the shifted addresses, which keeps the endpoint orbit
    stable) until they reach ``height``.  The seed ``min(t_d, height) +
    2*pi*i*s_d`` at level ``d = pullback_depth`` is pulled back ``d`` times.

    With ``adaptive=True`` the seed level is lowered to the last level whose
    potential is still below ``height``, so the seed carries the true model
    potential and the result moves along the ray as ``t`` grows.  Without
    it, a potential that saturates before level ``d`` is replaced by
    ``height`` at level ``d`` and the traced point sits near the endpoint.

    ``dps`` switches the pullback to mpmath with that many digits; the
    high-precision point is kept in ``exact`` for forward verification.
    """
    if pullback_depth < 1:
        raise ValueError("pullback_depth must be >= 1")
    a = complex(a)
    res = min_potential(address)
    if isinstance(res, DivergedBeyond):
        raise PossiblyInfinitePotential(f"possibly infinite potential for {address}")
    if t < res.value - max(res.error_bound, 1e-12):
        raise PotentialBelowMinimum(f"t={t} is below the minimal potential {res.value} of {address}")

    d = pullback_depth
    profile = potential_profile(address, d)
    ts = [max(t, profile[0])]
    for k in range(1, d + 1):
        if ts[-1] >= height:
            break
        ts.append(max(math.expm1(ts[-1]) - offset(coordinate(address, k)), profile[k]))
    saturated = len(ts) <= d or ts[-1] >= height

    if adaptive:
        m = len(ts) - 1
        while m > 0 and ts[m] >= height:
            m -= 1
        seed_value = ts[m]
    else:
        m = d
        seed_value = height if saturated else ts[d]

    seed_err = abs(seed_value - profile[m]) + math.pi + 1.0 + abs(a + 1)
    floor = 1.0 if a == DEFAULT_A else 0.0
    errs = [0.0] * (m + 1)
    errs[m] = seed_err
    orbit = [0j] * (m + 1)

    if dps is None:
        z = complex(seed_value, TWO_PI_F * coordinate(address, m))
        orbit[m] = z
        for j in range(m - 1, -1, -1):
            u = z - a
            if u == 0:
                raise BranchCollapse(f"pullback hit the singular value at level {j + 1}")
            z = _principal_log(u) + complex(0.0, TWO_PI_F * coordinate(address, j))
            orbit[j] = z
            errs[j] = _pullback_error(errs[j + 1], u, floor) + ROUNDING * (abs(z) + 1)
        exact = None
        exact_error = 0.0
    else:
        with mpmath.workdps(dps):
            two_pi = 2 * mpmath.pi
            am = mpmath.mpc(a.real, a.imag)
            zm = mpmath.mpc(seed_value, two_pi * coordinate(address, m))
            orbit[m] = complex(zm)
            for j in range(m - 1, -1, -1):
                u = zm - am
                if u == 0:
                    raise BranchCollapse(f"pullback hit the singular value at level {j + 1}")
                zm = mpmath.log(u) + mpmath.mpc(0, two_pi * coordinate(address, j))
                orbit[j] = complex(zm)
                errs[j] = (_pullback_error(errs[j + 1], complex(u), floor)
                           + 10.0 ** (2 - dps) * (abs(orbit[j]) + 1))
            exact = zm
        exact_error = errs[0]
        # ``point`` is ``exact`` rounded to doubles
        errs[0] += sys.float_info.epsilon * (abs(orbit[0]) + 1)
    return RayPoint(orbit[0], address, t, m, errs[0], tuple(orbit), seed_value, saturated, exact, dps, exact_error)



def endpoint(address: ExternalAddress, pullback_depth: int = 30, a: complex = DEFAULT_A,
             dps: Optional[int] = None) -> RayPoint:
    res = min_potential(address)
    if isinstance(res, DivergedBeyond):
        raise PossiblyInfinitePotential(f"possibly infinite potential for {address}")
    return trace_ray(address, res.value, pullback_depth, a, dps=dps)


@dataclass(frozen=True)
class BandLevel:
    n: int
    re: float
    im: float
    band: tuple[float, float]
    forward_error: float
    in_band: bool
    in_julia: bool


@dataclass(frozen=True)
class BandReport:
    levels: tuple[BandLevel, ...]
    verified_depth: int
    requested_depth: int

    @property
    def band_ok(self) -> bool:
        return self.verified_depth == self.requested_depth and all(lv.in_band for lv in self.levels)

    @property
    def julia_ok(self) -> bool:
        return self.verified_depth == self.requested_depth and all(lv.in_julia for lv in self.levels)


def band_check(ray: RayPoint, n_max: int = 8, tol: float = 1e-6, a: complex = DEFAULT_A,
               dps: int = 60) -> BandReport:
    """Forward-iterate the traced point and test ``Im(f^n) in [(2s_n-1)pi, (2s_n+1)pi]``.

    Uses the high-precision point when the ray was traced with ``dps``;
    otherwise iterates in doubles and stops where the real part overflows.
    ``forward_error`` is the traced error estimate times the accumulated
    derivative, for information.
    """
    a = complex(a)
    levels = []
    err = ray.error_estimate
    if ray.exact is not None:
        err = ray.exact_error
        with mpmath.workdps(dps):
            am = mpmath.mpc(a.real, a.imag)
            z = mpmath.mpc(ray.exact)
            for n in range(n_max + 1):
                levels.append(_band_level(ray.address, n, float(z.real), float(z.imag), err, tol))
                if n == n_max:
                    break
                ez = mpmath.exp(z)
                err = err * float(abs(ez)) * math.exp(min(err, 700.0))
                z = ez + am
        return BandReport(tuple(levels), n_max, n_max)
    z = ray.point
    for n in range(n_max + 1):
        if z.real > OVERFLOW_RE:
            return BandReport(tuple(levels), n - 1, n_max)
        levels.append(_band_level(ray.address, n, z.real, z.imag, err, tol))
        if n == n_max:
            break
        err = err * math.exp(z.real) * math.exp(min(err, 700.0))
        z = f_a(z, a)
    return BandReport(tuple(levels), n_max, n_max)


def _band_level(address, n, re, im, err, tol) -> BandLevel:
    s = coordinate(address, n)
    lo, hi = (2 * s - 1) * math.pi, (2 * s + 1) * math.pi
    return BandLevel(n, re, im, (lo, hi), err, lo - tol <= im <= hi + tol, re >= -tol)


# -- classification ----------------------------------------------------------

class OrbitClass(enum.Enum):
    IMAG_UNSIGNED = "ImagUnsignedEscape"
    IMAG_PLUS = "ImagPlusEscape"
    IMAG_MINUS = "ImagMinusEscape"
    ATTRACTED = "AttractedToCycle"
    NOT_ESCAPING = "NotEscaping"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class Classification:
    kind: OrbitClass
    depth: Optional[int] = None

    def to_json(self) -> dict:
        return {"class": self.kind.value, "depth": self.depth}


_FROM_ESCAPE = {
    EscapeClass.IMAG_UNSIGNED: OrbitClass.IMAG_UNSIGNED,
    EscapeClass.IMAG_PLUS: OrbitClass.IMAG_PLUS,
    EscapeClass.IMAG_MINUS: OrbitClass.IMAG_MINUS,
    EscapeClass.NOT_ESCAPING: OrbitClass.NOT_ESCAPING,
}


# an orbit point is trusted while its forward error bound stays below this
RELIABLE_ERROR = 1e-3
MIN_RELIABLE = 4


def reliable_orbit(source: Union[RayPoint, complex], depth: int, a: complex = DEFAULT_A) -> list[complex]:
    """Forward orbit truncated where its propagated error bound exceeds ``RELIABLE_ERROR``.

    A ``RayPoint`` starts from its error estimate and, when traced with
    ``dps``, is iterated in mpmath at that precision.  A plain complex number
    is taken as exact and only accumulates rounding.
    """
    a = complex(a)
    if isinstance(source, RayPoint):
        err = source.error_estimate
        if source.exact is not None:
            err = source.exact_error
            with mpmath.workdps(source.dps or 50):
                z = mpmath.mpc(source.exact)
                am = mpmath.mpc(a.real, a.imag)
                ulp = mpmath.mpf(10) ** (2 - mpmath.mp.dps)
                pts = [complex(z)]
                for _ in range(depth):
                    if z.real > OVERFLOW_RE:
                        break
                    ez = mpmath.exp(z)
                    err = err * float(abs(ez)) * math.exp(min(err, OVERFLOW_RE)) + float(ulp * (abs(ez) + 1))
                    z = ez + am
                    if err > RELIABLE_ERROR:
                        break
                    pts.append(complex(z))
                return pts
        z = source.point
    else:
        err = 0.0
        z = complex(source)
    pts = [z]
    for _ in range(depth):
        if z.real > OVERFLOW_RE:
            break
        w = f_a(z, a)
        err = err * math.exp(z.real) * math.exp(min(err, OVERFLOW_RE)) + ROUNDING * (abs(w) + 1)
        if err > RELIABLE_ERROR:
            break
        z = w
        pts.append(z)
    return pts


def classify_orbit(source, depth: int = 50, threshold: float = 100.0,
                   a: complex = DEFAULT_A) -> Classification:
    """Exact for addresses; a depth-qualified reading of the orbit otherwise.

    Plane sources (complex numbers or traced ``RayPoint``s) are iterated only
    as far as the orbit is numerically trustworthy.  The orbit counts as
    attracted when it contracts onto the attracting or parabolic cycle, and as
    escaping when ``|Im|`` exceeds ``threshold`` and keeps growing over the
    last quarter of the trusted orbit.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if isinstance(source, ExternalAddress):
        return Classification(_FROM_ESCAPE[in_x(source)])
    a = complex(a)
    pts = reliable_orbit(source, depth, a)
    if len(pts) < MIN_RELIABLE:
        return Classification(OrbitClass.UNDETERMINED, len(pts) - 1)
    used = len(pts) - 1
    cyc = find_attracting_cycle(a)
    if cyc.kind != "none":
        dist = [min(abs(p - c) for c in cyc.cycle) for p in pts]
        tail = dist[len(dist) - max(2, len(dist) // 4):]
        contracting = all(y <= x + 1e-15 for x, y in zip(tail, tail[1:]))
        entered_left = a != DEFAULT_A or any(p.real < 0 for p in pts)
        if entered_left and contracting and tail[-1] < 0.5:
            return Classification(OrbitClass.ATTRACTED, used)
    last = pts[len(pts) - max(2, len(pts) // 4):]
    ims = [p.imag for p in last]
    if all(abs(y) > threshold for y in ims) and all(abs(y) >= abs(x) for x, y in zip(ims, ims[1:])):
        if all(y > 0 for y in ims):
            return Classification(OrbitClass.IMAG_PLUS, used)
        if all(y < 0 for y in ims):
            return Classification(OrbitClass.IMAG_MINUS, used)
        return Classification(OrbitClass.IMAG_UNSIGNED, used)
    return Classification(OrbitClass.UNDETERMINED, used)


# -- attracting and parabolic cycles -----------------------------------------

@dataclass(frozen=True)
class CycleResult:
    kind: str  # "attracting", "parabolic" or "none"
    cycle: tuple[complex, ...] = ()
    multiplier: complex = 0j
    diagnostic: str = ""

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "cycle": [[z.real, z.imag] for z in self.cycle],
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "diagnostic": self.diagnostic,
        }


def _orbit_and_multiplier(z: complex, p: int, a: complex):
    pts = [z]
    mult = 1.0 + 0j
    for _ in range(p):
        ez = cmath.exp(pts[-1])
        mult *= ez
        pts.append(ez + a)
    return pts, mult


def _newton_periodic(z: complex, p: int, a: complex, iters: int = 200):
    for _ in range(iters):
        try:
            pts, mult = _orbit_and_multiplier(z, p, a)
        except OverflowError:
            return None
        g = pts[-1] - z
        dg = mult - 1
        if dg == 0:
            return z if g == 0 else None
        step = g / dg
        z -= step
        if abs(step) <= 1e-15 * (1 + abs(z)):
            return z
    return z


def _refine_parabolic(z: complex, p: int, a: complex, iters: int = 100) -> complex:
    """Newton on ``multiplier(z) - 1``, which stays well conditioned at a double root."""
    for _ in range(iters):
        pts, mult = _orbit_and_multiplier(z, p, a)
        # d/dz of prod exp(z_i) is mult * sum of (f^i)'(z)
        deriv_sum = 0j
        chain = 1.0 + 0j
        for q in pts[:-1]:
            deriv_sum += chain
            chain *= cmath.exp(q)
        dm = mult * deriv_sum
        if dm == 0:
            break
        step = (mult - 1) / dm
        z -= step
        if abs(step) <= 1e-16 * (1 + abs(z)):
            break
    return z


@lru_cache(maxsize=256)
def find_attracting_cycle(a: complex = DEFAULT_A, max_period: int = 2, tol: float = 1e-6) -> CycleResult:
    """Search for an attracting or parabolic cycle of period 1 or 2.

    Seeds come from the forward orbit of the singular value ``a`` (which any
    attracting or parabolic cycle must attract) plus a few fixed points near
    the origin; each seed is polished by Newton's method on ``f^p(z) - z``.
    """
    if max_period not in (1, 2):
        raise ValueError("max_period must be 1 or 2")
    a = complex(a)
    seeds = [a]
    w = a
    for _ in range(400):
        if w.real > OVERFLOW_RE:
            break
        w = f_a(w, a)
        if w.real <= OVERFLOW_RE:
            seeds.append(w)
    seeds = seeds[-3:] + [0j, -1 + 0j, 1 + 0j, 1j, -1j]
    notes = []
    for p in range(1, max_period + 1):
        for seed in seeds:
            z = _newton_periodic(seed, p, a)
            if z is None or not cmath.isfinite(z):
                notes.append(f"period {p}: Newton diverged from {seed:.4g}")
                continue
            if p == 2 and abs(f_a(z, a) - z) < 1e-8:
                continue
            pts, mult = _orbit_and_multiplier(z, p, a)
            if abs(pts[-1] - z) > 1e-8 * (1 + abs(z)):
                notes.append(f"period {p}: Newton stalled near {z:.4g}")
                continue
            if abs(mult - 1) < 1e-4:
                zr = _refine_parabolic(z, p, a)
                pr, mr = _orbit_and_multiplier(zr, p, a)
                if abs(pr[-1] - zr) <= 1e-10 * (1 + abs(zr)) and abs(mr - 1) <= PARABOLIC_WINDOW:
                    return CycleResult("parabolic", tuple(pr[:-1]), mr)
            if abs(mult) < 1 - tol:
                return CycleResult("attracting", tuple(pts[:-1]), mult)
            notes.append(f"period {p}: cycle at {z:.4g} has |multiplier| {abs(mult):.4g}")
    return CycleResult("none", diagnostic="; ".join(notes[:6]))

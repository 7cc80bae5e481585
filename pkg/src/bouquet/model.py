"""One-dimensional model of the exponential dynamics.

Points are pairs ``(t, s)`` of a potential ``t >= 0`` and an address ``s``.
One step maps ``(t, s)`` to ``(F(t) - 2*pi*|s_1|, shift(s))`` with
``F(t) = exp(t) - 1``.  The minimal potential ``psi(s)`` is the least ``t``
whose orbit never goes negative; it is computed backwards as the limit of
nested pullbacks ``b -> log(1 + b + 2*pi*|s_j|)``, which only ever takes
logarithms and so never overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from .address import ConstantTail, ExternalAddress, coordinate

TWO_PI = 2.0 * math.pi
LOG_TWO_PI = math.log(TWO_PI)
SAFE_EXPONENT = 700.0
DEFAULT_CAP = 1e6
CONVERGENCE_TOL = 1e-12
CONVERGENCE_STREAK = 3
ERROR_SAFETY = 10.0
DOMINANCE_FLOOR = 20.0

ExtendedPotential = float  # math.inf stands for an infinite potential


class SaturationError(OverflowError):
    """F(t) is not representable; use the backward form instead."""


def big_f(t: float) -> float:
    if t < 0:
        raise ValueError(f"F is defined on [0, inf), got {t}")
    if t > SAFE_EXPONENT:
        raise SaturationError(f"F({t}) exceeds the safe exponent bound {SAFE_EXPONENT}")
    return math.expm1(t)


def big_f_inv(t: float) -> float:
    if t < 0:
        raise ValueError(f"inverse of F is defined on [0, inf), got {t}")
    return math.log1p(t)


def offset(s: int) -> float:
    """``2*pi*|s|`` as a float (inf for integers beyond float range)."""
    try:
        return TWO_PI * abs(s)
    except OverflowError:
        return math.inf


def pullback(b: float, s: int) -> float:
    """``log(1 + max(b, 0) + 2*pi*|s|)``, exact for huge integer ``s`` too."""
    b = max(b, 0.0)
    c = offset(s)
    if c < 1e300:
        return math.log1p(b + c)
    # log(2 pi |s|) + log1p((1 + b) / (2 pi |s|)), with |s| kept as an exact int
    return LOG_TWO_PI + math.log(abs(s)) + math.log1p((1.0 + b) / c if c != math.inf else 0.0)


def shift(address: ExternalAddress) -> ExternalAddress:
    return address.shift(1)


@dataclass(frozen=True)
class ModelPoint:
    t: float
    address: ExternalAddress

    def __post_init__(self):
        if not self.t >= 0:
            raise ValueError(f"model potentials are nonnegative, got {self.t}")


def model_step(p: ModelPoint) -> tuple[float, ExternalAddress]:
    return big_f(p.t) - offset(coordinate(p.address, 1)), shift(p.address)


# -- forward feasibility -----------------------------------------------------

@dataclass(frozen=True)
class OkUpTo:
    depth: int


@dataclass(frozen=True)
class OkForever:
    certified_at: int


@dataclass(frozen=True)
class FailsAt:
    n: int


Feasibility = Union[OkUpTo, OkForever, FailsAt]


@lru_cache(maxsize=4096)
def constant_offset_root(s_abs: int) -> float:
    """Positive root of ``exp(r) - 1 - r = 2*pi*s_abs`` (0 for ``s_abs == 0``).

    Potentials strictly above the root increase forever under a constant
    offset.  The returned value is nudged upward so it is a safe upper bound.
    """
    c = offset(s_abs)
    if c == 0:
        return 0.0
    r = math.log1p(c) + 1.0
    for _ in range(100):
        step = (math.expm1(r) - r - c) / math.expm1(r)
        r -= step
        if abs(step) < 1e-15 * r:
            break
    return r * (1 + 1e-12) + 1e-12


def _remaining_abs(address: ExternalAddress, start: int):
    """Set of ``|s_n|`` over the prefix from ``start`` on, plus the tail rule."""
    L = len(address.prefix)
    return {abs(v) for v in address.prefix[start:L]}


def _max_abs_increment(address: ExternalAddress, start: int) -> int:
    """Upper bound on ``|s_{m+1}| - |s_m|`` over ``m >= start``."""
    L = len(address.prefix)
    best = address.tail.max_abs_increment()
    for m in range(start, L):
        best = max(best, abs(coordinate(address, m + 1)) - abs(coordinate(address, m)))
    return best


def dominates(t: float, address: ExternalAddress, n: int) -> bool:
    """Closed-form certificate that the potential ``t`` at step ``n`` never fails.

    Three sufficient conditions are checked:

    * all later offsets vanish, so ``F(t) >= t`` keeps the orbit nonnegative;
    * all later offsets share one magnitude ``c`` and ``t`` exceeds the
      repelling fixed point of ``F(t) - 2*pi*c``;
    * ``t >= 20`` and both the next offset and the largest later increment
      of ``2*pi*|s|`` are at most ``exp(t/2)``.  Then ``t' >= exp(t)/2`` and the
      same inequalities hold one step later, so they hold by induction.
    """
    tail = address.tail
    if isinstance(tail, ConstantTail):
        mags = _remaining_abs(address, n + 1)
        mags.add(abs(tail.value))
        if len(mags) == 1:
            (c,) = mags
            if c == 0 or t >= constant_offset_root(c):
                return True
    if t < DOMINANCE_FLOOR:
        return False
    half = t / 2.0
    nxt = abs(coordinate(address, n + 1))
    if nxt and LOG_TWO_PI + math.log(nxt) > half:
        return False
    inc = _max_abs_increment(address, n + 1)
    return inc <= 0 or LOG_TWO_PI + math.log(inc) <= half


def in_model_julia(p: ModelPoint, depth: int) -> Feasibility:
    """Check ``T(F^n(p)) >= 0`` for ``n <= depth``.

    Returns ``OkUpTo(k)`` with ``k`` the last verified step when neither a
    failure nor a dominance certificate was found (``k < depth`` means the
    forward potential saturated).
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    t = p.t
    address = p.address
    for n in range(depth + 1):
        if t < 0:
            return FailsAt(n)
        if dominates(t, address, n):
            return OkForever(n)
        if n == depth:
            break
        if t > SAFE_EXPONENT:
            return OkUpTo(n)
        t = math.expm1(t) - offset(coordinate(address, n + 1))
    return OkUpTo(depth)


# -- minimal potential -------------------------------------------------------

@dataclass(frozen=True)
class Finite:
    value: float
    error_bound: float
    depth_used: int
    converged: bool = True

    @property
    def is_finite(self) -> bool:
        return True


@dataclass(frozen=True)
class DivergedBeyond:
    cap: float
    lower_bound: float
    depth_used: int

    @property
    def is_finite(self) -> bool:
        return False

    @property
    def value(self) -> float:
        return math.inf


PotentialResult = Union[Finite, DivergedBeyond]


def pullback_to_zero(coords: list[int], k: int) -> float:
    """``t^(k)``: pull 0 back through ``s_k, ..., s_1``."""
    b = 0.0
    for j in range(k, 0, -1):
        b = pullback(b, coords[j])
    return b


def backward_sequence(address: ExternalAddress, depth: int) -> list[float]:
    """``[t^(1), ..., t^(depth)]``; nondecreasing in ``k``."""
    coords = address.coords(depth + 1)
    return [pullback_to_zero(coords, k) for k in range(1, depth + 1)]


def min_potential(address: ExternalAddress, depth: int = 200, cap: float = DEFAULT_CAP) -> PotentialResult:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if not cap > 0:
        raise ValueError("cap must be positive")
    coords = address.coords(depth + 1)
    # inside the prefix a run of zeros gives zero increments without convergence
    settle = address.regular_from()
    prev = 0.0
    inc = 0.0
    streak = 0
    for k in range(1, depth + 1):
        cur = pullback_to_zero(coords, k)
        if cur > cap:
            return DivergedBeyond(cap, cur, k)
        inc = cur - prev
        prev = cur
        streak = streak + 1 if inc < CONVERGENCE_TOL and k > settle else 0
        if streak >= CONVERGENCE_STREAK:
            return Finite(cur, ERROR_SAFETY * inc, k, True)
    return Finite(prev, ERROR_SAFETY * inc, depth, False)


def psi(address: ExternalAddress, depth: int = 200, cap: float = DEFAULT_CAP) -> float:
    """Minimal potential as a plain number (``inf`` when divergence is suspected)."""
    return min_potential(address, depth, cap).value


def potential_profile(address: ExternalAddress, levels: int) -> list[float]:
    """``[psi(s), psi(shift(s)), ..., psi(shift^levels(s))]`` from one deep sweep."""
    deep = min_potential(address.shift(levels))
    if not deep.is_finite:
        raise ValueError(f"potential of {address} looks infinite beyond level {levels}")
    total = levels + deep.depth_used + CONVERGENCE_STREAK
    coords = address.coords(total + 1)
    b = 0.0
    out = [0.0] * (levels + 1)
    for j in range(total, 0, -1):
        b = pullback(b, coords[j])
        if j - 1 <= levels:
            out[j - 1] = b
    return out


def min_potential_oracle(address: ExternalAddress, depth: int = 30, tol: float = 1e-12,
                         cap: float = DEFAULT_CAP) -> ExtendedPotential:
    """Bisection on the forward feasibility predicate.

    Independent of :func:`min_potential`: it only runs the model forward.
    Returns ``inf`` when not even ``cap`` is feasible.
    """
    if depth < 1 or not tol > 0:
        raise ValueError("depth must be >= 1 and tol positive")

    def feasible(t: float) -> bool:
        return not isinstance(in_model_julia(ModelPoint(t, address), depth), FailsAt)

    if feasible(0.0):
        return 0.0
    if not feasible(cap):
        return math.inf
    lo, hi = 0.0, cap
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class TStar:
    value: float
    stable_at: int


def t_star(address: ExternalAddress, depth: int = 64) -> TStar:
    """``max_{1<=k<=depth} F^{-k}(2*pi*|s_k|)`` and the index where the max last grew."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    best = 0.0
    stable_at = 0
    for k in range(1, depth + 1):
        s = coordinate(address, k)
        v = pullback(0.0, s) if s else 0.0
        for _ in range(k - 1):
            v = math.log1p(v)
        if v > best:
            best, stable_at = v, k
    return TStar(best, stable_at)

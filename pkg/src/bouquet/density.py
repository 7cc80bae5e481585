"""Graph points of the minimal potential and constructive density witnesses."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .address import ExternalAddress, claim_cap_witness, coordinate, product_metric
from .model import (
    DivergedBeyond,
    ModelPoint,
    FailsAt,
    in_model_julia,
    min_potential,
    pullback,
)

# coordinates stay below this so that 2*pi*|s| remains a finite double
MAX_COORDINATE = 10 ** 300


class PossiblyInfinitePotential(ValueError):
    pass


class TargetBelowMinimum(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class GraphPoint:
    potential: float
    address: ExternalAddress
    error_bound: float = 0.0

    def to_json(self) -> dict:
        return {"address": self.address.to_json(), "potential": self.potential, "error_bound": self.error_bound}


@dataclass(frozen=True)
class SegmentSample:
    address: ExternalAddress
    t_values: tuple[float, ...]


def graph_point(address: ExternalAddress) -> GraphPoint:
    res = min_potential(address)
    if isinstance(res, DivergedBeyond):
        raise PossiblyInfinitePotential(
            f"possibly infinite potential for {address}: exceeds {res.cap} (lower bound {res.lower_bound})")
    return GraphPoint(res.value, address, res.error_bound)


def erdos_transform(t: float) -> float:
    """``1 / (1 + t)``; sends ``[0, inf]`` onto ``[0, 1]`` reversing order."""
    if not t >= 0:
        raise ValueError(f"potential must be in [0, inf], got {t}")
    if t == math.inf:
        return 0.0
    return 1.0 / (1.0 + t)


def pair_metric(p: GraphPoint, q: GraphPoint) -> float:
    """``max(|dt|, product_metric)`` on ``[0, inf) x Z^omega``."""
    return max(abs(p.potential - q.potential), product_metric(p.address, q.address))


# forward iteration at exactly psi sits on an expanding boundary, so the
# lowest sample is lifted just above the rounding noise
SEGMENT_MARGIN = 1e-9


def segment_sample(address: ExternalAddress, top: float, count: int) -> SegmentSample:
    """``count`` ascending potentials from just above ``psi(address)`` to ``top``."""
    gp = graph_point(address)
    base = gp.potential + max(gp.error_bound, SEGMENT_MARGIN * (1 + gp.potential))
    if count < 2:
        raise ValueError("a segment sample needs at least two values")
    top = max(top, base)
    step = (top - base) / (count - 1)
    return SegmentSample(address, tuple(base + k * step for k in range(count)))


def segment_is_sound(sample: SegmentSample, depth: int = 30) -> bool:
    return not any(isinstance(in_model_julia(ModelPoint(t, sample.address), depth), FailsAt)
                   for t in sample.t_values)


def _chain(coords: list[int], p: int, b_p: float):
    """``v -> psi`` after setting coordinate ``p`` to ``v``, everything else fixed."""
    def value(v: int) -> float:
        b = pullback(b_p, v)
        for j in range(p - 1, 0, -1):
            b = pullback(b, coords[j])
        return b
    return value


def reachable_gain(base: ExternalAddress, prefix_agree: int) -> float:
    """Largest increase of the potential available at the first free position."""
    p = max(prefix_agree, 1)
    coords = base.coords(p + 1)
    b_p = min_potential(base.shift(p)).value
    chain = _chain(coords, p, b_p)
    return chain(MAX_COORDINATE) - chain(abs(coords[p]))


def potential_target(base: ExternalAddress, prefix_agree: int, target: float, eps: float,
                     budget: int = 64) -> ExternalAddress:
    """Raise coordinates past ``prefix_agree`` until the potential is within ``eps`` of ``target``.

    The result agrees with ``base`` on the first ``prefix_agree`` coordinates
    and dominates it coordinatewise in absolute value.  At each position the
    largest magnitude that does not overshoot is chosen; the next position
    then refines the remainder with finer steps.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    psi0 = min_potential(base).value
    if target < psi0 - eps:
        raise TargetBelowMinimum(f"target {target} is below the minimal potential {psi0}")
    if abs(psi0 - target) <= eps:
        return base

    current = base
    used = 0
    p = max(prefix_agree, 1)
    last_p = p + 4 * budget + 8
    while used < budget and p <= last_p:
        coords = current.coords(p + 1)
        b_p = min_potential(current.shift(p)).value
        chain = _chain(coords, p, b_p)
        lo = abs(coords[p])
        if chain(lo) > target:
            break
        hi = lo + 1
        while hi < MAX_COORDINATE and chain(hi) <= target:
            lo, hi = hi, min(2 * hi, MAX_COORDINATE)
        if chain(hi) <= target:
            # the derivative through a coordinate of size 1e300 is below 1e-300,
            # so no deeper position can close the remaining gap
            if target - chain(hi) > eps:
                raise BudgetExhausted(
                    f"target {target!r} is out of double-precision reach: position {p} saturates "
                    f"at {chain(hi)!r} (eps {eps})")
            lo = hi
        else:
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if chain(mid) <= target:
                    lo = mid
                else:
                    hi = mid
            # overshooting by less than eps is as good as undershooting
            if chain(hi) - target < target - chain(lo) and chain(hi) - target <= eps:
                lo = hi
        if lo != abs(coords[p]):
            sign = -1 if coords[p] < 0 else 1
            current = current.with_coordinate(p, sign * lo)
            used += 1
            if abs(min_potential(current).value - target) <= eps:
                return current
        p += 1
    got = min_potential(current).value
    if abs(got - target) <= eps:
        return current
    raise BudgetExhausted(
        f"reached {got!r} for target {target!r} (eps {eps}) after {used} modifications "
        f"of positions {max(prefix_agree, 1)}..{p - 1}")


def nowhere_dense_approach(address: ExternalAddress, dom_alpha: int, count: int) -> list[GraphPoint]:
    """Graph points of the capped witnesses at positions ``1..count``."""
    graph_point(address)
    return [graph_point(claim_cap_witness(address, n, dom_alpha)) for n in range(1, count + 1)]


def in_cone(result: ExternalAddress, base: ExternalAddress, prefix_agree: int) -> bool:
    """``result`` agrees with ``base`` on ``prefix_agree`` coordinates and dominates it in ``|s_n|``.

    Checked exactly: the tails are compared as rules and the prefixes coordinatewise.
    """
    if result.coords(prefix_agree) != base.coords(prefix_agree):
        return False
    n_max = max(len(result.prefix), len(base.prefix)) + 4
    if any(abs(coordinate(result, n)) < abs(coordinate(base, n)) for n in range(n_max)):
        return False
    return result.tail == base.tail

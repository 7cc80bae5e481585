"""The stratification tree over ``N x Z`` and its finite-depth certification.

A node ``alpha = ((N_0, s_0), ..., (N_{d-1}, s_{d-1}))`` selects the closed set
``X_alpha`` of escaping addresses with ``s_j`` fixed for ``j < d`` and
``|s_n| >= j + 1`` for every ``n >= N_j``.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from .address import (
    ExternalAddress,
    LinearTail,
    claim_cap_witness,
    claim_density_witness,
    coordinate,
    in_x,
    last_index_below,
    min_abs_from,
    product_metric,
)
from .model import min_potential, t_star

CONDITIONS = ("S1", "S2", "S3", "S4", "C2a", "C2b", "C2c")


class NotInX(ValueError):
    pass


class BranchLeavesTree(ValueError):
    def __init__(self, level: int, node: "StratumIndex"):
        super().__init__(f"branch leaves the tree at level {level}: {node}")
        self.level = level
        self.node = node


@dataclass(frozen=True)
class StratumIndex:
    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(N), int(s)) for N, s in self.pairs))

    @property
    def dom(self) -> int:
        return len(self.pairs)

    def N(self, i: int) -> int:
        return self.pairs[i][0]

    def extend(self, N: int, s: int) -> "StratumIndex":
        return StratumIndex(self.pairs + ((N, s),))

    def truncate(self, k: int) -> "StratumIndex":
        return StratumIndex(self.pairs[:k])

    def is_admissible(self) -> bool:
        return all(N >= i for i, (N, _) in enumerate(self.pairs))

    def to_json(self) -> list:
        return [list(p) for p in self.pairs]

    def __str__(self) -> str:
        return "<" + ",".join(f"({N},{s})" for N, s in self.pairs) + ">"


def stratum_from_json(obj) -> StratumIndex:
    return StratumIndex(tuple(tuple(p) for p in obj))


def parse_stratum(text: str) -> StratumIndex:
    """``"N:s,N:s"`` (empty string for the root)."""
    pairs = []
    for item in filter(None, (p.strip() for p in text.split(","))):
        N, _, s = item.partition(":")
        pairs.append((int(N), int(s)))
    return StratumIndex(tuple(pairs))


def stratum_membership(address: ExternalAddress, alpha: StratumIndex) -> bool:
    if not alpha.is_admissible():
        raise ValueError(f"stratum index {alpha} is not admissible")
    if not in_x(address).escapes:
        return False
    for j, (N, s) in enumerate(alpha.pairs):
        if coordinate(address, j) != s:
            return False
        if min_abs_from(address, N) < j + 1:
            return False
    return True


def stratum_nonempty(alpha: StratumIndex) -> bool:
    d = alpha.dom
    for j, (N, _) in enumerate(alpha.pairs):
        for i in range(N, d):
            if abs(alpha.pairs[i][1]) < j + 1:
                return False
    return True


def in_tree(alpha: StratumIndex) -> bool:
    return alpha.is_admissible() and stratum_nonempty(alpha)


def minimal_successor_N(address: ExternalAddress, dom: int) -> int:
    last = last_index_below(address, dom + 1, dom)
    if last is None:
        return dom
    if last == math.inf:
        raise NotInX(f"{address} has bounded coordinates")
    return last + 1


def exhibit_successor(address: ExternalAddress, alpha: StratumIndex) -> StratumIndex:
    """The successor ``alpha ^ (N, s_dom)`` with the least admissible ``N`` containing ``address``."""
    if not in_x(address).escapes:
        raise NotInX(f"{address} is not in X")
    if not stratum_membership(address, alpha):
        raise ValueError(f"{address} is not a member of X_{alpha}")
    d = alpha.dom
    return alpha.extend(minimal_successor_N(address, d), coordinate(address, d))


@dataclass(frozen=True)
class BranchProbe:
    limit_prefix: tuple[int, ...]
    diameters: tuple[float, ...]
    constraints_hold: bool


def branch_probe(pair_choices, depth: int) -> BranchProbe:
    """Follow a branch for ``depth`` levels.

    Every truncation must lie in the tree.  The members of ``X_{lambda|k}``
    share their first ``k`` coordinates, so ``2**-k`` bounds its diameter.
    """
    pairs = tuple(tuple(p) for p in pair_choices)
    if len(pairs) < depth:
        raise ValueError(f"need {depth} pair choices, got {len(pairs)}")
    branch = StratumIndex(pairs[:depth])
    for k in range(depth + 1):
        node = branch.truncate(k)
        if not in_tree(node):
            raise BranchLeavesTree(k, node)
    limit = tuple(s for _, s in branch.pairs)
    ok = all(abs(limit[n]) >= k + 1
             for k, (N, _) in enumerate(branch.pairs)
             for n in range(N, depth))
    return BranchProbe(limit, tuple(math.ldexp(1.0, -k) for k in range(depth + 1)), ok)


# -- certification -----------------------------------------------------------

@dataclass
class StratumCertificate:
    depth: int
    samples: int
    seed: int
    violations: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "samples": self.samples,
            "seed": self.seed,
            "passed": self.passed,
            "checks": dict(self.checks),
            "violations": list(self.violations),
        }


def random_x_address(rng: random.Random, max_prefix: int = 6, max_entry: int = 12) -> ExternalAddress:
    prefix = tuple(rng.randint(-max_entry, max_entry) for _ in range(rng.randint(0, max_prefix)))
    tail = LinearTail(rng.randint(1, 3), rng.randint(-4, 6), rng.choice(("+", "-", "alt", "-alt")))
    return ExternalAddress(prefix, tail)


def random_node_for(address: ExternalAddress, dom: int, rng: random.Random) -> StratumIndex:
    """A node of depth ``dom`` containing ``address``, with slack added to each ``N``."""
    alpha = StratumIndex()
    for d in range(dom):
        alpha = alpha.extend(minimal_successor_N(address, d) + rng.randint(0, 2), coordinate(address, d))
    return alpha


def random_member(alpha: StratumIndex, rng: random.Random) -> ExternalAddress:
    """A random element of ``X_alpha`` (requires ``alpha`` in the tree)."""
    d = alpha.dom
    head = [s for _, s in alpha.pairs]
    horizon = max([N for N, _ in alpha.pairs] + [d]) + rng.randint(0, 3)
    for n in range(d, horizon):
        need = max([j + 1 for j, (N, _) in enumerate(alpha.pairs) if N <= n] + [0])
        head.append(rng.choice((-1, 1)) * (need + rng.randint(0, 4)))
    sign = rng.choice(("+", "-", "alt", "-alt"))
    slope = rng.randint(1, 3)
    # intercept large enough that every tail coordinate clears all bounds
    tail = LinearTail(slope, d + 1 + rng.randint(0, 5), sign)
    return ExternalAddress(tuple(head), tail)


def _scan_membership(address: ExternalAddress, alpha: StratumIndex) -> bool:
    """Coordinate-by-coordinate membership, independent of the closed forms."""
    tail = address.tail
    if not isinstance(tail, LinearTail):
        return False
    horizon = max([N for N, _ in alpha.pairs] + [len(address.prefix), alpha.dom])
    # past this index the linear tail exceeds every bound and keeps growing
    horizon += (alpha.dom + 1 + abs(tail.intercept)) // tail.slope + 2
    coords = address.coords(horizon + 1)
    for j, (N, s) in enumerate(alpha.pairs):
        if coords[j] != s:
            return False
        if any(abs(coords[n]) < j + 1 for n in range(N, horizon + 1)):
            return False
    return True


def _violation(cond: str, alpha: StratumIndex, address: ExternalAddress, detail: str, **extra) -> dict:
    out = {"condition": cond, "stratum": alpha.to_json(), "address": address.to_json(), "detail": detail}
    out.update(extra)
    return out


def _check_sample(args) -> tuple[dict, list]:
    """All per-sample checks; pure function of its arguments."""
    index, alpha, address, depth, sample_seed, successor = args
    from .density import BudgetExhausted, potential_target, reachable_gain

    rng = random.Random(sample_seed)
    counts = {c: 0 for c in CONDITIONS}
    bad = []
    d = alpha.dom

    # S1: tree node, closed under initial segments
    counts["S1"] += 1
    if not (in_tree(alpha) and all(in_tree(alpha.truncate(k)) for k in range(d + 1))):
        bad.append(_violation("S1", alpha, address, "node or one of its truncations is not in T"))

    # S2: membership is decided by prefix equalities and per-level bounds
    counts["S2"] += 1
    member = stratum_membership(address, alpha)
    if member != _scan_membership(address, alpha) or not member:
        bad.append(_violation("S2", alpha, address, "closed-form and scanned membership disagree"))
    if d:
        j = rng.randrange(d)
        m = max(alpha.N(j), d) + rng.randint(0, 2)
        outsider = address.with_coordinate(m, 0)
        # the violation sits at coordinate m, so the whole cylinder of depth m+1 is outside
        for _ in range(3):
            other = ExternalAddress(tuple(outsider.coords(m + 1)), random_x_address(rng).tail)
            counts["S2"] += 1
            if stratum_membership(other, alpha):
                bad.append(_violation("S2", alpha, other, "non-member cylinder contains a member",
                                      cylinder_depth=m + 1))

    # S3: the successor covers the address and nests inside the parent
    counts["S3"] += 1
    try:
        beta = successor(address, alpha)
    except Exception as exc:  # a broken rule is data, not a crash
        bad.append(_violation("S3", alpha, address, f"successor rule raised {exc!r}"))
        beta = None
    if beta is not None:
        ok = (beta.dom == d + 1 and beta.truncate(d) == alpha and beta.N(d) >= d
              and in_tree(beta) and stratum_membership(address, beta))
        if not ok:
            bad.append(_violation("S3", alpha, address, "successor does not contain the address",
                                  successor=beta.to_json()))
        elif not stratum_membership(random_member(beta, rng), alpha):
            bad.append(_violation("S3", alpha, address, "member of successor escapes parent",
                                  successor=beta.to_json()))

    # S4: the branch through the address shrinks to it and stays in X
    counts["S4"] += 1
    node = alpha
    try:
        while node.dom < depth:
            node = successor(address, node)
        probe = branch_probe(node.pairs, depth)
        coords = address.coords(depth)
        ok = (probe.constraints_hold and list(probe.limit_prefix) == coords
              and all(product_metric(address, random_member(node.truncate(k), rng)) <= probe.diameters[k]
                      for k in range(depth + 1)))
        if not ok:
            bad.append(_violation("S4", alpha, address, "branch does not converge to the address",
                                  branch=node.to_json()))
    except Exception as exc:
        bad.append(_violation("S4", alpha, address, f"branch construction failed: {exc!r}"))

    # C2a: finite-potential witnesses approach the address inside X_alpha
    for n in range(d, d + 4):
        counts["C2a"] += 1
        w = claim_density_witness(address, n)
        res = min_potential(w)
        bound = t_star(w).value + 1
        ok = (stratum_membership(w, alpha) and product_metric(address, w) <= math.ldexp(1.0, -n)
              and res.is_finite and res.value <= bound + 1e-9)
        if not ok:
            bad.append(_violation("C2a", alpha, address, "density witness failed", n=n))

    # C2b: graph points of X_alpha reach points above the graph
    counts["C2b"] += 1
    base = claim_density_witness(address, d + rng.randint(0, 2))
    psi0 = min_potential(base).value
    agree = max(d, 1)
    window = reachable_gain(base, agree)
    target = psi0 + min(rng.uniform(1e-4, 5e-3), 0.5 * window)
    try:
        hit = potential_target(base, agree, target, 1e-6, 64)
        ok = (stratum_membership(hit, alpha) and hit.coords(agree) == base.coords(agree)
              and abs(min_potential(hit).value - target) <= 1e-6)
        if not ok:
            bad.append(_violation("C2b", alpha, base, "target left X_alpha or missed", target=target))
    except BudgetExhausted as exc:
        bad.append(_violation("C2b", alpha, base, str(exc), target=target))

    # C2c: capped witnesses leave X_beta, stay in X_alpha, and converge from below
    beta = exhibit_successor(address, alpha)
    psi_s = min_potential(address).value
    start = beta.N(d)
    last_gap = None
    for n in range(start, start + 10):
        counts["C2c"] += 1
        w = claim_cap_witness(address, n, d)
        pw = min_potential(w).value
        ok = (stratum_membership(w, alpha) and not stratum_membership(w, beta)
              and pw <= psi_s + 1e-12)
        if not ok:
            bad.append(_violation("C2c", alpha, address, "capped witness misplaced", n=n))
        last_gap = max(abs(psi_s - pw), product_metric(address, w))
    if last_gap is not None and last_gap > math.ldexp(1.0, -(start + 9)) + 1e-6:
        bad.append(_violation("C2c", alpha, address, "capped witnesses do not converge", gap=last_gap))
    return counts, [dict(v, sample=index) for v in bad]


def certify_stratification(depth: int, seed: int = 0, samples: int = 500,
                           successor: Callable = exhibit_successor, workers: int = 1) -> StratumCertificate:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = random.Random(seed)
    jobs = []
    for i in range(samples):
        address = random_x_address(rng)
        alpha = random_node_for(address, rng.randrange(depth), rng)
        member = random_member(alpha, rng)
        jobs.append((i, alpha, member, depth, rng.getrandbits(64), successor))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_check_sample, jobs, chunksize=16))
    else:
        results = [_check_sample(job) for job in jobs]
    cert = StratumCertificate(depth, samples, seed, checks={c: 0 for c in CONDITIONS})
    for counts, bad in results:
        for c, k in counts.items():
            cert.checks[c] += k
        cert.violations.extend(bad)
    cert.violations.sort(key=lambda v: (v["sample"], CONDITIONS.index(v["condition"])))
    return cert

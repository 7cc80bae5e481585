"""Finitely described integer sequences (external addresses).

An address is a finite prefix followed by a tail rule that supplies every
later coordinate.  Tail rules use the *absolute* coordinate index, so the
rule for ``s_n`` does not depend on the prefix length.  Addresses are stored
in canonical form: trailing prefix entries that the tail rule already
produces are dropped, so two addresses describe the same sequence iff they
compare equal.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Union

SIGNS = ("+", "-", "alt", "-alt")


class EscapeClass(enum.Enum):
    IMAG_UNSIGNED = "ImagUnsignedEscape"
    IMAG_PLUS = "ImagPlusEscape"
    IMAG_MINUS = "ImagMinusEscape"
    NOT_ESCAPING = "NotEscaping"

    @property
    def escapes(self) -> bool:
        """True for every class inside X (signed classes imply the unsigned one)."""
        return self is not EscapeClass.NOT_ESCAPING


class AddressFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ConstantTail:
    value: int

    def at(self, n: int) -> int:
        return self.value

    def shifted(self, k: int = 1) -> "ConstantTail":
        return self

    def min_abs_from(self, start: int) -> int:
        return abs(self.value)

    def last_below(self, bound: int, start: int) -> float | int | None:
        # bounded tail: infinitely many small coordinates, or none at all
        return math.inf if abs(self.value) < bound else None

    def max_abs_increment(self) -> int:
        return 0

    def regular_from(self) -> int:
        return 0

    def to_json(self) -> dict:
        return {"kind": "const", "value": self.value}

    def shorthand(self) -> str:
        return f"const:{self.value}"


@dataclass(frozen=True)
class LinearTail:
    """``s_n = sign(n) * (slope * n + intercept)``.

    ``sign`` is ``"+"``, ``"-"``, ``"alt"`` (``(-1)**n``) or ``"-alt"``
    (``-(-1)**n``); the two alternating phases are needed so that shifting an
    alternating tail stays inside the family.
    """

    slope: int
    intercept: int = 0
    sign: str = "+"

    def __post_init__(self):
        if not isinstance(self.slope, int) or self.slope < 1:
            raise AddressFormatError(f"linear slope must be a positive integer, got {self.slope!r}")
        if self.sign not in SIGNS:
            raise AddressFormatError(f"unknown sign {self.sign!r}; expected one of {SIGNS}")

    def _sgn(self, n: int) -> int:
        if self.sign == "+":
            return 1
        if self.sign == "-":
            return -1
        parity = -1 if n % 2 else 1
        return parity if self.sign == "alt" else -parity

    def at(self, n: int) -> int:
        return self._sgn(n) * (self.slope * n + self.intercept)

    def shifted(self, k: int = 1) -> "LinearTail":
        sign = self.sign
        if k % 2 and sign in ("alt", "-alt"):
            sign = "-alt" if sign == "alt" else "alt"
        return LinearTail(self.slope, self.intercept + self.slope * k, sign)

    def min_abs_from(self, start: int) -> int:
        # |slope*n + intercept| is V-shaped in n; the vertex sits at -intercept/slope
        if self.slope * start + self.intercept >= 0:
            return self.slope * start + self.intercept
        lo = max(start, -self.intercept // self.slope)
        return min(abs(self.slope * n + self.intercept) for n in (lo, lo + 1))

    def last_below(self, bound: int, start: int) -> int | None:
        """Largest ``n >= start`` with ``|s_n| < bound``, or None."""
        if bound <= 0:
            return None
        n_hi = (bound - 1 - self.intercept) // self.slope
        if n_hi < start or self.slope * n_hi + self.intercept <= -bound:
            return None
        return n_hi

    def max_abs_increment(self) -> int:
        return self.slope

    def regular_from(self) -> int:
        """First index from which ``|s_n|`` is nondecreasing."""
        return max(0, -(self.intercept // self.slope))

    def to_json(self) -> dict:
        return {"kind": "linear", "slope": self.slope, "intercept": self.intercept, "sign": self.sign}

    def shorthand(self) -> str:
        return f"linear:{self.slope},{self.intercept}:{self.sign}"


TailRule = Union[ConstantTail, LinearTail]


@dataclass(frozen=True)
class ExternalAddress:
    prefix: tuple[int, ...] = ()
    tail: TailRule = ConstantTail(0)

    def __post_init__(self):
        prefix = [int(v) for v in self.prefix]
        while prefix and prefix[-1] == self.tail.at(len(prefix) - 1):
            prefix.pop()
        object.__setattr__(self, "prefix", tuple(prefix))

    def __getitem__(self, n: int) -> int:
        return coordinate(self, n)

    def coords(self, n: int) -> list[int]:
        """The first ``n`` coordinates."""
        return [coordinate(self, k) for k in range(n)]

    def shift(self, k: int = 1) -> "ExternalAddress":
        if k < 0:
            raise ValueError("shift count must be nonnegative")
        if k == 0:
            return self
        return ExternalAddress(self.prefix[k:], self.tail.shifted(k))

    def regular_from(self) -> int:
        """First index from which ``|s_n|`` is constant or nondecreasing."""
        return max(len(self.prefix), self.tail.regular_from())

    def with_coordinate(self, n: int, value: int) -> "ExternalAddress":
        head = self.coords(max(n + 1, len(self.prefix)))
        head[n] = value
        return ExternalAddress(tuple(head), self.tail)

    def to_json(self) -> dict:
        return {"prefix": list(self.prefix), "tail": self.tail.to_json()}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    def shorthand(self) -> str:
        return ",".join(str(v) for v in self.prefix) + ";" + self.tail.shorthand()

    def __str__(self) -> str:
        return self.shorthand()


def coordinate(address: ExternalAddress, n: int) -> int:
    if n < 0:
        raise IndexError(f"coordinate index must be nonnegative, got {n}")
    if n < len(address.prefix):
        return address.prefix[n]
    return address.tail.at(n)


def zero_address() -> ExternalAddress:
    return ExternalAddress((), ConstantTail(0))


def linear_address(prefix=(), slope: int = 1, intercept: int = 0, sign: str = "+") -> ExternalAddress:
    return ExternalAddress(tuple(prefix), LinearTail(slope, intercept, sign))


def in_x(address: ExternalAddress) -> EscapeClass:
    tail = address.tail
    if isinstance(tail, ConstantTail):
        return EscapeClass.NOT_ESCAPING
    return {
        "+": EscapeClass.IMAG_PLUS,
        "-": EscapeClass.IMAG_MINUS,
        "alt": EscapeClass.IMAG_UNSIGNED,
        "-alt": EscapeClass.IMAG_UNSIGNED,
    }[tail.sign]


def min_abs_from(address: ExternalAddress, start: int) -> int:
    """``min |s_n|`` over all ``n >= start``, decided in closed form."""
    start = max(start, 0)
    L = len(address.prefix)
    best = address.tail.min_abs_from(max(start, L))
    for n in range(start, L):
        best = min(best, abs(address.prefix[n]))
    return best


def last_index_below(address: ExternalAddress, bound: int, start: int = 0):
    """Largest ``n >= start`` with ``|s_n| < bound``.

    Returns None when there is no such index and ``math.inf`` when there are
    infinitely many (bounded tails).
    """
    L = len(address.prefix)
    hit = address.tail.last_below(bound, max(start, L))
    if hit is not None:
        return hit
    for n in range(L - 1, start - 1, -1):
        if abs(address.prefix[n]) < bound:
            return n
    return None


def first_difference(a: ExternalAddress, b: ExternalAddress) -> int | None:
    if a == b:
        return None
    # distinct tail rules disagree within four indices past both prefixes
    limit = max(len(a.prefix), len(b.prefix)) + 4
    for n in range(limit + 1):
        if coordinate(a, n) != coordinate(b, n):
            return n
    raise AssertionError(f"no disagreement found between distinct addresses {a} and {b}")


def product_metric(a: ExternalAddress, b: ExternalAddress, horizon: int = 1024) -> float:
    """``2**-m`` for the first disagreeing index ``m``; 0 for equal addresses.

    Disagreements at or beyond ``horizon`` between addresses with identical
    tail rules are below the resolution and count as 0.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    m = first_difference(a, b)
    if m is None or (m >= horizon and a.tail == b.tail):
        return 0.0
    return math.ldexp(1.0, -m)


def claim_density_witness(address: ExternalAddress, n: int) -> ExternalAddress:
    """Keep the first ``n`` coordinates and continue with ``s_k = k``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return ExternalAddress(tuple(address.coords(n)), LinearTail(1, 0, "+"))


def claim_cap_witness(address: ExternalAddress, n: int, dom_alpha: int) -> ExternalAddress:
    """Replace coordinate ``n`` by ``min(|s_n|, dom_alpha)``."""
    if n < 0 or dom_alpha < 0:
        raise ValueError("n and dom_alpha must be nonnegative")
    return address.with_coordinate(n, min(abs(coordinate(address, n)), dom_alpha))


# -- serialization -----------------------------------------------------------

def tail_from_json(obj: dict) -> TailRule:
    try:
        kind = obj["kind"]
        if kind in ("const", "constant"):
            return ConstantTail(_as_int(obj["value"]))
        if kind == "linear":
            return LinearTail(_as_int(obj["slope"]), _as_int(obj.get("intercept", 0)), obj.get("sign", "+"))
    except (KeyError, TypeError) as exc:
        raise AddressFormatError(f"malformed tail rule {obj!r}") from exc
    raise AddressFormatError(f"unknown tail kind {obj.get('kind')!r}")


def from_json(obj) -> ExternalAddress:
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise AddressFormatError(f"invalid address JSON: {exc}") from exc
    if not isinstance(obj, dict) or "tail" not in obj:
        raise AddressFormatError(f"address object needs 'prefix' and 'tail': {obj!r}")
    prefix = obj.get("prefix", [])
    if not isinstance(prefix, list):
        raise AddressFormatError("prefix must be a list of integers")
    return ExternalAddress(tuple(_as_int(v) for v in prefix), tail_from_json(obj["tail"]))


def _as_int(v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise AddressFormatError(f"expected an integer, got {v!r}")
    return v


def _parse_tail(text: str) -> TailRule:
    kind, _, rest = text.strip().partition(":")
    try:
        if kind in ("const", "constant"):
            return ConstantTail(int(rest))
        if kind == "linear":
            nums, _, sign = rest.partition(":")
            parts = [int(p) for p in nums.split(",")]
            slope, intercept = parts[0], (parts[1] if len(parts) > 1 else 0)
            return LinearTail(slope, intercept, sign or "+")
    except ValueError as exc:
        raise AddressFormatError(f"malformed tail {text!r}") from exc
    raise AddressFormatError(f"unknown tail kind in {text!r}")


def parse_address(text: str) -> ExternalAddress:
    """Parse either the JSON form or the shorthand ``"0,2,5;linear:1,0:+"``."""
    text = text.strip()
    if text.startswith("{"):
        return from_json(text)
    if ";" in text:
        head, _, tail_text = text.partition(";")
    elif ":" in text:
        head, tail_text = "", text
    else:
        head, tail_text = text, "const:0"
    try:
        prefix = tuple(int(p) for p in head.split(",") if p.strip())
    except ValueError as exc:
        raise AddressFormatError(f"malformed prefix in {text!r}") from exc
    return ExternalAddress(prefix, _parse_tail(tail_text))

"""External addresses, the growth function F(t) = e^t - 1 and potentials.

An external address is exposed through the total accessor ``entry(n)``; the
three tail rules (zeros, repeated block, generator) are interchangeable
everywhere downstream.

Iterates of F leave double range after a handful of steps.  Values at or
above ``SATURATION`` are never stored; a saturated level only keeps its index
and the last representable value, from which ``log t_n`` is still available
analytically as ``t_{n-1} + log(1 - e^{-t_{n-1}})``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

SATURATION = 1e300
TWO_PI = 2.0 * math.pi


class SaturationError(ArithmeticError):
    """A level of the potential orbit is beyond the representable range."""


class AddressSyntaxError(ValueError):
    pass


def growth(t: float) -> float:
    """F(t) = e^t - 1.  Returns ``math.inf`` as the saturation marker."""
    if t < 0:
        raise ValueError(f"growth is defined for t >= 0, got {t!r}")
    try:
        value = math.expm1(t)
    except OverflowError:
        return math.inf
    return math.inf if value >= SATURATION else value


def inverse_growth(x: float) -> float:
    """F^{-1}(x) = log(1 + x)."""
    return math.log1p(x)


class Saturated(NamedTuple):
    """Marker for a level that exceeds ``SATURATION``."""

    index: int
    last: float


@dataclass(frozen=True)
class PotentialOrbit:
    t: float
    depth: int
    values: tuple[float, ...]

    @property
    def saturation_index(self) -> int | None:
        return len(self.values) if len(self.values) <= self.depth else None

    @property
    def levels(self) -> list[float | Saturated]:
        out: list[float | Saturated] = list(self.values)
        if self.saturation_index is not None:
            last = self.values[-1]
            out.extend(Saturated(n, last) for n in range(len(self.values), self.depth + 1))
        return out

    def is_saturated(self, n: int) -> bool:
        return n >= len(self.values)

    def value(self, n: int) -> float:
        if n > self.depth:
            raise IndexError(f"level {n} beyond orbit depth {self.depth}")
        if n >= len(self.values):
            raise SaturationError(f"level {n} exceeds {SATURATION:g}")
        return self.values[n]

    def log_value(self, n: int) -> float:
        """log t_n, finite one level past saturation, ``inf`` beyond."""
        if n < len(self.values):
            v = self.values[n]
            return math.log(v) if v > 0 else -math.inf
        if n == len(self.values) and n > 0:
            prev = self.values[n - 1]
            return prev + math.log(-math.expm1(-prev))
        return math.inf


def potential_orbit(t: float, depth: int) -> PotentialOrbit:
    if t < 0:
        raise ValueError(f"potential must be non-negative, got {t!r}")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    values = [float(t)]
    for _ in range(depth):
        nxt = growth(values[-1])
        if math.isinf(nxt):
            break
        values.append(nxt)
    return PotentialOrbit(float(t), depth, tuple(values))


def level(t: float, n: int) -> float:
    """F^n(t); raises SaturationError past the representable range."""
    return potential_orbit(t, n).value(n)


# -- named aperiodic generators -------------------------------------------

def _thue_morse(n: int) -> int:
    return bin(n).count("1") % 2


def _fibonacci_word(n: int) -> int:
    # Sturmian word with slope 1/phi^2
    phi = (1 + 5 ** 0.5) / 2
    return int(math.floor((n + 2) / phi) - math.floor((n + 1) / phi)) ^ 1


def _squares(n: int) -> int:
    r = math.isqrt(n)
    return 1 if r * r == n else 0


def _rudin_shapiro(n: int) -> int:
    return bin(n & (n >> 1)).count("1") % 2


def _binary_digit_sum_mod3(n: int) -> int:
    return bin(n).count("1") % 3


def _tribonacci_word(n: int) -> int:
    w = [0]
    while len(w) <= n:
        w = [c for x in w for c in ((0, 1) if x == 0 else (0, 2) if x == 1 else (0,))]
    return w[n]


def _champernowne3(n: int) -> int:
    digits: list[int] = []
    k = 1
    while len(digits) <= n:
        m, ds = k, []
        while m:
            m, r = divmod(m, 3)
            ds.append(r)
        digits.extend(reversed(ds))
        k += 1
    return digits[n]


# name -> (callback, bound on |s_n|, known aperiodic)
NAMED_GENERATORS: dict[str, tuple[Callable[[int], int], int]] = {
    "thue_morse": (_thue_morse, 1),
    "fibonacci": (_fibonacci_word, 1),
    "squares": (_squares, 1),
    "rudin_shapiro": (_rudin_shapiro, 1),
    "digitsum3": (_binary_digit_sum_mod3, 2),
    "tribonacci": (_tribonacci_word, 2),
    "champernowne3": (_champernowne3, 2),
}


def _fiter_generator(u: float) -> Callable[[int], int]:
    """s_n = round(F^n(u)), capped at 10^300 once F^n(u) saturates."""
    cap = 10 ** 300

    def gen(n: int) -> int:
        orbit = potential_orbit(u, n)
        if orbit.is_saturated(n):
            return cap
        return min(round(orbit.value(n)), cap)

    return gen


@dataclass(frozen=True)
class ExternalAddress:
    """Integer sequence s_0 s_1 s_2 ... with a tail rule beyond the prefix.

    ``tail`` is one of ``"zeros"``, ``"repeat"`` or ``"generator"``.  A
    generator is called with the absolute index ``n + offset``.
    """

    prefix: tuple[int, ...] = ()
    tail: str = "zeros"
    block: tuple[int, ...] = ()
    generator: Callable[[int], int] | None = None
    offset: int = 0
    bound: int | None = None
    name: str | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(s) for s in self.prefix))
        object.__setattr__(self, "block", tuple(int(s) for s in self.block))
        if self.tail not in ("zeros", "repeat", "generator"):
            raise ValueError(f"unknown tail rule {self.tail!r}")
        if self.tail == "repeat" and not self.block:
            raise ValueError("repeat tail needs a non-empty block")
        if self.tail == "generator" and self.generator is None:
            raise ValueError("generator tail needs a callback")

    # constructors
    @classmethod
    def zeros(cls, prefix=()) -> "ExternalAddress":
        return cls(tuple(prefix), "zeros")

    @classmethod
    def repeating(cls, prefix, block) -> "ExternalAddress":
        return cls(tuple(prefix), "repeat", tuple(block))

    @classmethod
    def from_generator(cls, fn, prefix=(), bound=None, name=None, offset=0) -> "ExternalAddress":
        return cls(tuple(prefix), "generator", (), fn, offset, bound, name)

    @classmethod
    def named(cls, name: str, prefix=(), offset: int = 0) -> "ExternalAddress":
        if name.startswith("fiter:"):
            u = float(name.split(":", 1)[1])
            return cls.from_generator(_fiter_generator(u), prefix, None, name, offset)
        try:
            fn, bound = NAMED_GENERATORS[name]
        except KeyError:
            raise AddressSyntaxError(f"unknown generator {name!r}") from None
        return cls.from_generator(fn, prefix, bound, name, offset)

    @classmethod
    def parse(cls, literal: str) -> "ExternalAddress":
        return parse_address(literal)

    def entry(self, n: int) -> int:
        if n < 0:
            raise IndexError("address entries are indexed from 0")
        k = len(self.prefix)
        if n < k:
            return self.prefix[n]
        if self.tail == "zeros":
            return 0
        if self.tail == "repeat":
            return self.block[(n - k) % len(self.block)]
        return int(self.generator(n + self.offset))

    __getitem__ = entry

    def entries(self, count: int) -> list[int]:
        return [self.entry(n) for n in range(count)]

    def is_bounded(self) -> bool:
        """True when boundedness of |s_n| is known structurally."""
        return self.tail in ("zeros", "repeat") or self.bound is not None

    def is_preperiodic(self) -> bool | None:
        """True for zeros/repeat tails, False for the named aperiodic
        generators, None when unknown."""
        if self.tail in ("zeros", "repeat"):
            return True
        if self.name in NAMED_GENERATORS:
            return False
        return None

    def to_literal(self) -> str:
        head = ",".join(str(s) for s in self.prefix)
        if self.tail == "zeros":
            return f"{head}|zeros"
        if self.tail == "repeat":
            return f"{head}|rep:" + ",".join(str(b) for b in self.block)
        if self.name is None:
            raise ValueError("anonymous generator addresses have no literal form")
        off = f"@{self.offset}" if self.offset else ""
        return f"{head}|gen:{self.name}{off}"

    def __str__(self) -> str:
        try:
            return self.to_literal()
        except ValueError:
            return "(" + " ".join(map(str, self.entries(8))) + " ...)"


def parse_address(literal: str) -> ExternalAddress:
    """Parse ``"0,1,0,0,1|zeros"``, ``"2,3|rep:2,3"`` or ``"|gen:thue_morse"``."""
    text = literal.strip()
    head, sep, tail = text.partition("|")
    try:
        prefix = tuple(int(x) for x in head.split(",") if x.strip())
    except ValueError:
        raise AddressSyntaxError(f"bad address prefix in {literal!r}") from None
    tail = tail.strip()
    if not sep or tail == "zeros":
        return ExternalAddress.zeros(prefix)
    if tail.startswith("rep:"):
        try:
            block = tuple(int(x) for x in tail[4:].split(",") if x.strip())
        except ValueError:
            raise AddressSyntaxError(f"bad repeat block in {literal!r}") from None
        if not block:
            raise AddressSyntaxError(f"empty repeat block in {literal!r}")
        return ExternalAddress.repeating(prefix, block)
    if tail.startswith("gen:"):
        name, _, off = tail[4:].partition("@")
        try:
            offset = int(off) if off else 0
        except ValueError:
            raise AddressSyntaxError(f"bad generator offset in {literal!r}") from None
        return ExternalAddress.named(name, prefix, offset)
    raise AddressSyntaxError(f"unknown tail rule in {literal!r}")


def shift(addr: ExternalAddress, k: int) -> ExternalAddress:
    """The k-fold shift (s_0 s_1 ...) -> (s_k s_{k+1} ...)."""
    if k < 0:
        raise ValueError("shift count must be >= 0")
    if k == 0:
        return addr
    K = len(addr.prefix)
    prefix = addr.prefix[k:]
    if addr.tail == "zeros":
        return ExternalAddress.zeros(prefix)
    if addr.tail == "repeat":
        block = addr.block
        if k > K:
            r = (k - K) % len(block)
            block = block[r:] + block[:r]
        return ExternalAddress.repeating(prefix, block)
    return ExternalAddress(prefix, "generator", (), addr.generator, addr.offset + k, addr.bound, addr.name)


def anchor(addr: ExternalAddress, t: float, n: int) -> complex:
    """Leading-order position t_n + 2 pi i s_n of the n-th marked point."""
    orbit = potential_orbit(t, n)
    if orbit.is_saturated(n):
        raise SaturationError("anchor beyond representable range")
    return complex(orbit.value(n), TWO_PI * addr.entry(n))


@dataclass(frozen=True)
class BoundednessReport:
    t: float
    ratios: tuple[float, ...]
    verdict: str
    threshold: float
    depth: int

    @property
    def bounded(self) -> bool:
        return self.verdict == "bounded"


def check_exponentially_bounded(addr: ExternalAddress, t: float, depth: int = 12,
                                threshold: float = 1e-6) -> BoundednessReport:
    """Finite-depth heuristic for s_n / F^n(t) -> 0.

    The ratio profile runs over n = 0..depth and stops before the first entry
    with |s_n| >= 10^300.  Verdict is ``"bounded"`` when the last third of the
    profile (at least one entry) lies below ``threshold`` and does not exceed
    the peak of the earlier part.
    """
    if t <= 0:
        raise ValueError("potential must be positive")
    orbit = potential_orbit(t, depth)
    ratios = []
    for n in range(depth + 1):
        s = abs(addr.entry(n))
        if s and math.log10(s) >= 300:
            break
        if s == 0:
            ratios.append(0.0)
            continue
        diff = math.log(s) - orbit.log_value(n)
        ratios.append(math.exp(diff) if diff < 700 else math.inf)
    tail_len = max(1, len(ratios) // 3)
    tail, head = ratios[len(ratios) - tail_len:], ratios[:len(ratios) - tail_len]
    ok = bool(ratios) and max(tail) < threshold
    if ok and head:
        ok = max(tail) <= max(head)
    return BoundednessReport(t, tuple(ratios), "bounded" if ok else "unbounded", threshold, depth)


def estimate_ts(addr: ExternalAddress, depth: int = 12, tol: float = 1e-6,
                threshold: float = 1e-6, cap: float = 50.0) -> float:
    """Bisection estimate of the minimal potential t_s.

    Addresses with structurally bounded entries return 0: bounded numerators
    give s_n / F^n(t) -> 0 for every t > 0.  Otherwise the result depends on
    ``depth`` and ``threshold``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if addr.is_bounded():
        return 0.0
    if not check_exponentially_bounded(addr, cap, depth, threshold).bounded:
        raise ValueError("address not exponentially bounded up to cap")
    lo, hi = 0.0, cap
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid > 0 and check_exponentially_bounded(addr, mid, depth, threshold).bounded:
            hi = mid
        else:
            lo = mid
    return hi

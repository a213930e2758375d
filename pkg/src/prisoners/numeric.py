"""Exact rational scalars and certified brackets for irrational tails.

Everything here is either an exact rational or a pair of rationals that
provably sandwich a real value.  No floats are used anywhere, so comparisons
decided by this module are zero tolerance: they hold as stated or an
UndecidedComparisonError is raised.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Union

from ._backend import BACKEND, Rat
from .errors import DomainError, EmptyRangeError, UndecidedComparisonError

__all__ = [
    "BACKEND", "Rat", "ZERO", "ONE", "rat", "parse_rat", "rat_str",
    "rat_ceil", "rat_floor", "harmonic_sum", "power_sum", "geometric_sum",
    "geometric_tail", "RatInterval", "power_tail_bounds", "Cmp",
    "compare_certified", "PrefixSums", "LN2_LO", "LN2_HI", "ln_bounds",
    "harmonic_upper_ln", "harmonic_range_lower_ln",
]

ZERO = Rat(0)
ONE = Rat(1)

RatLike = Union[int, str, "Rat"]


def rat(numerator: RatLike, denominator: int = 1) -> Rat:
    """Build an exact rational from ints or an "a/b" string."""
    if isinstance(numerator, str):
        value = parse_rat(numerator)
        if denominator != 1:
            value = value / Rat(denominator)
        return value
    return Rat(numerator, denominator)


def parse_rat(text: str) -> Rat:
    body = text.strip()
    if "/" in body:
        num, den = body.split("/", 1)
        return Rat(int(num.strip()), int(den.strip()))
    return Rat(int(body))


def rat_str(value) -> str:
    """Canonical "num/den" form in lowest terms, denominator always shown."""
    q = Rat(value)
    return f"{q.numerator}/{q.denominator}"


def rat_ceil(value) -> int:
    q = Rat(value)
    return -((-q.numerator) // q.denominator)


def rat_floor(value) -> int:
    q = Rat(value)
    return q.numerator // q.denominator


def _check_range(a: int, b: int) -> None:
    if not (isinstance(a, int) and isinstance(b, int)):
        raise DomainError("summation bounds must be integers")
    if a < 1:
        raise DomainError(f"summation starts at index >= 1, got {a}")
    if a > b:
        raise EmptyRangeError(f"empty summation range [{a}, {b}]")


def power_sum(exponent: int, a: int, b: int) -> Rat:
    """Exact sum of 1/i**exponent for i in [a, b], divide and conquer."""
    _check_range(a, b)
    if exponent < 1:
        raise DomainError("exponent must be a positive integer")

    def rec(lo: int, hi: int) -> Rat:
        if hi - lo < 64:
            total = ZERO
            for i in range(lo, hi + 1):
                total += Rat(1, i ** exponent)
            return total
        mid = (lo + hi) // 2
        return rec(lo, mid) + rec(mid + 1, hi)

    return rec(a, b)


def harmonic_sum(a: int, b: int) -> Rat:
    """Exact sum of 1/i for i in [a, b]."""
    return power_sum(1, a, b)


def geometric_sum(ratio, a: int, b: int) -> Rat:
    """Exact sum of ratio**i for i in [a, b], 0 < ratio < 1."""
    r = Rat(ratio)
    if not (ZERO < r < ONE):
        raise DomainError("ratio must satisfy 0 < ratio < 1")
    _check_range(a, b)
    return (r ** a - r ** (b + 1)) / (ONE - r)


def geometric_tail(ratio, n: int) -> Rat:
    """Exact sum of ratio**i for i >= n, 0 < ratio < 1."""
    r = Rat(ratio)
    if not (ZERO < r < ONE):
        raise DomainError("ratio must satisfy 0 < ratio < 1")
    if n < 1:
        raise DomainError("tail index must be >= 1")
    return r ** n / (ONE - r)


@dataclass(frozen=True)
class RatInterval:
    """Closed interval [lo, hi] of rationals enclosing one real value.

    refine, when present, returns a new interval for the same value whose
    endpoints never move outward and whose width shrinks.
    """

    lo: Rat
    hi: Rat
    refine_fn: Optional[Callable[[], "RatInterval"]] = field(
        default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.lo > self.hi:
            raise DomainError("interval endpoints out of order")

    @property
    def width(self) -> Rat:
        return self.hi - self.lo

    @property
    def refinable(self) -> bool:
        return self.refine_fn is not None

    def refine(self) -> "RatInterval":
        if self.refine_fn is None:
            return self
        inner = self.refine_fn()
        # Never let refinement widen the enclosure.
        lo = max(self.lo, inner.lo)
        hi = min(self.hi, inner.hi)
        return RatInterval(lo, hi, inner.refine_fn)

    def contains(self, value) -> bool:
        q = Rat(value)
        return self.lo <= q <= self.hi

    def shift(self, offset) -> "RatInterval":
        q = Rat(offset)
        inner = self.refine_fn
        fn = (lambda: inner().shift(q)) if inner is not None else None
        return RatInterval(self.lo + q, self.hi + q, fn)

    def scale(self, factor) -> "RatInterval":
        q = Rat(factor)
        if q < ZERO:
            raise DomainError("only nonnegative scaling is supported")
        inner = self.refine_fn
        fn = (lambda: inner().scale(q)) if inner is not None else None
        return RatInterval(self.lo * q, self.hi * q, fn)


def _power_tail_width(exponent: int, m: int) -> Rat:
    e1 = exponent - 1
    return (Rat(1, m ** e1) - Rat(1, (m + 1) ** e1)) / e1


def power_tail_bounds(exponent: int, n: int, width) -> RatInterval:
    """Certified bracket for the tail sum of 1/i**exponent from i = n on.

    Uses the integral sandwich: the tail beyond m lies strictly between
    1/((e-1)(m+1)**(e-1)) and 1/((e-1) m**(e-1)).  The split point m is the
    smallest index >= n whose bracket width is at most half the requested
    width, so returned intervals are at least twice as tight as asked and
    refinement (which halves the request) always makes progress.
    """
    if exponent < 2:
        raise DomainError("tail converges only for exponent >= 2")
    if n < 1:
        raise DomainError("tail index must be >= 1")
    goal = Rat(width)
    if goal <= ZERO:
        raise DomainError("width must be positive")
    goal = goal / 2

    lo_m, hi_m = n, n
    while _power_tail_width(exponent, hi_m) > goal:
        lo_m = hi_m + 1
        hi_m *= 2
    while lo_m < hi_m:
        mid = (lo_m + hi_m) // 2
        if _power_tail_width(exponent, mid) <= goal:
            hi_m = mid
        else:
            lo_m = mid + 1
    m = lo_m

    prefix = power_sum(exponent, n, m) if m >= n else ZERO
    e1 = exponent - 1
    lo = prefix + Rat(1, e1 * (m + 1) ** e1)
    hi = prefix + Rat(1, e1 * m ** e1)
    achieved = hi - lo

    def refine() -> RatInterval:
        # Asking for the achieved width targets half of it, so the split
        # point strictly advances and the bracket strictly tightens.
        return power_tail_bounds(exponent, n, achieved)

    return RatInterval(lo, hi, refine)


class Cmp(Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    UNDECIDED = "undecided"


def compare_certified(value, target, max_refinements: int = 64) -> Cmp:
    """Certified comparison of a rational or interval against a rational.

    The verdict describes the enclosed value relative to target.  EQUAL is
    only possible for degenerate intervals; a genuinely irrational value
    always separates from a rational target after finitely many refinements.
    """
    t = Rat(target)
    if not isinstance(value, RatInterval):
        q = Rat(value)
        if q < t:
            return Cmp.LESS
        if q > t:
            return Cmp.GREATER
        return Cmp.EQUAL
    iv = value
    for _ in range(max_refinements + 1):
        if iv.lo == iv.hi:
            if iv.lo == t:
                return Cmp.EQUAL
            return Cmp.LESS if iv.lo < t else Cmp.GREATER
        if t < iv.lo:
            return Cmp.GREATER
        if t > iv.hi:
            return Cmp.LESS
        if not iv.refinable:
            break
        iv = iv.refine()
    return Cmp.UNDECIDED


def require_certified(value, target, max_refinements: int = 64) -> Cmp:
    """Like compare_certified but raises instead of returning UNDECIDED."""
    verdict = compare_certified(value, target, max_refinements)
    if verdict is Cmp.UNDECIDED:
        raise UndecidedComparisonError(
            f"could not separate interval from {rat_str(target)} "
            f"within {max_refinements} refinements")
    return verdict


class PrefixSums:
    """Growable cache of exact prefix sums S(n) = term(1) + ... + term(n).

    Suited to sequences whose partial sums stay small enough to keep in a
    list; heavy ranges should go through power_sum/harmonic_sum instead.
    """

    def __init__(self, term: Callable[[int], "Rat"]):
        self._term = term
        self._sums = [ZERO]

    def prefix(self, n: int) -> Rat:
        if n < 0:
            raise DomainError("prefix length must be >= 0")
        sums = self._sums
        while len(sums) <= n:
            sums.append(sums[-1] + Rat(self._term(len(sums))))
        return sums[n]

    def range_sum(self, a: int, b: int) -> Rat:
        _check_range(a, b)
        return self.prefix(b) - self.prefix(a - 1)


def _atanh_series_bounds(z: Rat, terms: int) -> tuple[Rat, Rat]:
    """Bounds for 2*atanh(z) = ln((1+z)/(1-z)), exact for 0 <= z < 1."""
    partial = ZERO
    zsq = z * z
    power = z
    for i in range(terms):
        partial += power / (2 * i + 1)
        power *= zsq
    partial *= 2
    # power is now z**(2*terms+1); remaining terms are dominated by a
    # geometric series with ratio z**2.
    tail = 2 * power / ((2 * terms + 1) * (ONE - zsq))
    return partial, partial + tail


def _ln_bounds_mantissa(r: Rat, terms: int = 16) -> tuple[Rat, Rat]:
    """Bounds for ln(r) with 1 <= r <= 2."""
    if r == ONE:
        return ZERO, ZERO
    z = (r - ONE) / (r + ONE)
    return _atanh_series_bounds(z, terms)


_LN2_BOUNDS = _atanh_series_bounds(Rat(1, 3), 28)
LN2_LO, LN2_HI = _LN2_BOUNDS

_MANTISSA_BITS = 48


def ln_bounds(n: int) -> tuple[Rat, Rat]:
    """Certified rational bounds for ln(n), n a positive integer.

    Works on arbitrarily large integers: only the exponent and the top
    mantissa bits are used, so the cost does not grow with the magnitude.
    """
    if not isinstance(n, int) or n < 1:
        raise DomainError("ln_bounds needs a positive integer")
    if n == 1:
        return ZERO, ZERO
    e = n.bit_length() - 1
    if e <= _MANTISSA_BITS:
        r = Rat(n, 1 << e)
        m_lo, m_hi = _ln_bounds_mantissa(r)
        return e * LN2_LO + m_lo, e * LN2_HI + m_hi
    shift = e - _MANTISSA_BITS
    top = n >> shift
    r_lo = Rat(top, 1 << _MANTISSA_BITS)
    lo = e * LN2_LO + _ln_bounds_mantissa(r_lo)[0]
    if n == top << shift:
        hi = e * LN2_HI + _ln_bounds_mantissa(r_lo)[1]
    elif (top + 1) >> (_MANTISSA_BITS + 1):
        hi = (e + 1) * LN2_HI
    else:
        r_hi = Rat(top + 1, 1 << _MANTISSA_BITS)
        hi = e * LN2_HI + _ln_bounds_mantissa(r_hi)[1]
    return lo, hi


def harmonic_upper_ln(n: int) -> Rat:
    """Rational upper bound for 1 + 1/2 + ... + 1/n via 1 + ln(n)."""
    if n < 1:
        raise DomainError("harmonic bound needs n >= 1")
    return ONE + ln_bounds(n)[1]


def harmonic_range_lower_ln(a: int, b: int) -> Rat:
    """Rational lower bound for sum of 1/i over [a, b] via ln((b+1)/a).

    The bound is strict: the true range sum always exceeds the returned
    rational.
    """
    _check_range(a, b)
    return ln_bounds(b + 1)[0] - ln_bounds(a)[1]

"""Lazy infinite price sequences, allocation plans, and relabelings.

A price model describes the cost of every box as an exact rational, together
with certificates about its total mass and about the weighted series
sum(n * p_{delta(n)}) under rearrangements.  An allocation plan describes how
much money each prisoner carries.  A relabeling is an explicit bijection of
the positive integers.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, Optional, Union

from .errors import (
    CapabilityError, DomainError, PlanViolationError,
)
from .numeric import (
    ONE, PrefixSums, Rat, RatInterval, ZERO, geometric_sum, geometric_tail,
    harmonic_sum, power_sum, power_tail_bounds, rat, rat_str,
)

__all__ = [
    "ExactTotal", "BracketedTotal", "DivergentTotal", "UnknownTotal",
    "WeightedCert", "ZeroTail", "GeometricTail", "InversePowerTail",
    "PriceModel", "GeometricModel", "InverseSquareModel", "HarmonicModel",
    "CustomModel", "BlackBoxModel", "ScaledModel", "PermutedModel",
    "builtin_model", "load_model", "dump_model",
    "ZeroBeyond", "NonIncreasingBeyond", "Unstructured", "AllocationPlan",
    "TableAllocation", "FnAllocation", "load_allocation", "dump_allocation",
    "Relabeling", "descending_rearrangement",
    "quasi_descending_rearrangement", "omit_zeros", "weighted_partial_sum",
]


# ---------------------------------------------------------------------------
# certificates

@dataclass(frozen=True)
class ExactTotal:
    """The full series sums to this exact rational."""
    value: Rat
    kind = "exact"


class BracketedTotal:
    """The full series is finite; brackets of any width are available."""

    kind = "bracketed"

    def __init__(self, bounds: Callable[[Rat], RatInterval]):
        self.bounds = bounds

    def interval(self, width) -> RatInterval:
        return self.bounds(Rat(width))


class DivergentTotal:
    """The full series diverges to infinity."""
    kind = "divergent"


class UnknownTotal:
    """Nothing is certified about the total."""
    kind = "unknown"


class WeightedCert(Enum):
    """Status of sum(n * p_{delta(n)}) over all rearrangements delta."""

    CONVERGES_SOME = "converges-under-some-rearrangement"
    DIVERGES_ALL = "diverges-under-all-rearrangements"
    UNKNOWN = "unknown"


# ---------------------------------------------------------------------------
# tail rules for table-driven sequences

@dataclass(frozen=True)
class ZeroTail:
    start: int
    label = "zero"

    def term(self, n: int) -> Rat:
        return ZERO


@dataclass(frozen=True)
class GeometricTail:
    ratio: Rat
    start: int
    label = "geometric"

    def term(self, n: int) -> Rat:
        return Rat(self.ratio) ** n


@dataclass(frozen=True)
class InversePowerTail:
    exponent: int
    start: int
    label = "inverse-power"

    def term(self, n: int) -> Rat:
        return Rat(1, n ** self.exponent)


TailRule = Union[ZeroTail, GeometricTail, InversePowerTail]


def _validate_tail_rule(rule: TailRule) -> None:
    if rule.start < 1:
        raise DomainError("tail rule must start at index >= 1")
    if isinstance(rule, GeometricTail):
        r = Rat(rule.ratio)
        if not (ZERO < r < ONE):
            raise DomainError("geometric tail needs 0 < ratio < 1")
    if isinstance(rule, InversePowerTail) and rule.exponent < 2:
        raise DomainError("inverse-power tail needs exponent >= 2")


# ---------------------------------------------------------------------------
# price models

class PriceModel:
    """Base class: exact per-index prices plus structural certificates."""

    name: str = "model"
    kind: str = "abstract"
    # index from which terms are certified non-increasing, None if unknown
    nonincreasing_from: Optional[int] = None

    def term(self, n: int) -> Rat:
        raise NotImplementedError

    @property
    def total_cert(self):
        return UnknownTotal()

    @property
    def weighted_cert(self) -> WeightedCert:
        return WeightedCert.UNKNOWN

    def tail(self, n: int):
        """Sum of term(i) for i >= n: exact rational or certified interval."""
        raise CapabilityError(f"{self.name}: tail sums are not available")

    def second_tail(self, m: int):
        """Sum of tail(n) for n >= m, when it is finite."""
        raise CapabilityError(f"{self.name}: iterated tail sums unavailable")

    def range_sum(self, a: int, b: int) -> Rat:
        """Exact sum of term(i) for i in [a, b]."""
        total = ZERO
        if b - a > 2_000_000:
            raise CapabilityError(
                f"{self.name}: no closed form for a range of {b - a + 1} terms")
        for i in range(a, b + 1):
            total += self.term(i)
        return total

    def prefix_sum(self, n: int) -> Rat:
        if n <= 0:
            return ZERO
        return self.range_sum(1, n)

    _POSITIVE_GAP_SCAN_CAP = 1_000_000

    def positive_indices(self) -> Iterator[int]:
        """Indices with positive price, in increasing order.

        The default scans term by term; a gap of a million consecutive
        zeros aborts with CapabilityError because positivity further out
        cannot be certified without structure.  Structured models override
        this with exact information.
        """
        n = 1
        gap = 0
        while True:
            if self.term(n) > ZERO:
                yield n
                gap = 0
            else:
                gap += 1
                if gap > self._POSITIVE_GAP_SCAN_CAP:
                    raise CapabilityError(
                        f"{self.name}: cannot certify whether positive "
                        f"prices exist beyond index {n}")
            n += 1

    def max_term_in(self, a: int, b: int) -> Rat:
        if self.nonincreasing_from is not None and a >= self.nonincreasing_from:
            return self.term(a)
        return max(self.term(i) for i in range(a, b + 1))

    def scaled(self, factor) -> "ScaledModel":
        return ScaledModel(self, factor)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class GeometricModel(PriceModel):
    """Prices ratio**n; summable, and position-weighted sums can converge."""

    kind = "geometric"
    nonincreasing_from = 1

    def __init__(self, ratio=rat(1, 2)):
        r = Rat(ratio)
        if not (ZERO < r < ONE):
            raise DomainError("ratio must satisfy 0 < ratio < 1")
        self.ratio = r
        self.name = f"geometric:{rat_str(r)}"

    def term(self, n: int) -> Rat:
        if n < 1:
            raise DomainError("indices start at 1")
        return self.ratio ** n

    @property
    def total_cert(self):
        return ExactTotal(geometric_tail(self.ratio, 1))

    @property
    def weighted_cert(self):
        return WeightedCert.CONVERGES_SOME

    def tail(self, n: int) -> Rat:
        return geometric_tail(self.ratio, n)

    def second_tail(self, m: int) -> Rat:
        # sum over n >= m of r**n/(1-r)
        return geometric_tail(self.ratio, m) / (ONE - self.ratio)

    def range_sum(self, a: int, b: int) -> Rat:
        return geometric_sum(self.ratio, a, b)

    def positive_indices(self) -> Iterator[int]:
        n = 1
        while True:
            yield n
            n += 1


class InverseSquareModel(PriceModel):
    """Prices 1/n**2; summable but every rearranged weighted sum diverges."""

    kind = "inverse-square"
    name = "inverse-square"
    nonincreasing_from = 1

    def term(self, n: int) -> Rat:
        if n < 1:
            raise DomainError("indices start at 1")
        return Rat(1, n * n)

    @property
    def total_cert(self):
        return BracketedTotal(lambda w: power_tail_bounds(2, 1, w))

    @property
    def weighted_cert(self):
        return WeightedCert.DIVERGES_ALL

    def tail(self, n: int) -> RatInterval:
        return power_tail_bounds(2, n, Rat(1, 8 * n * n))

    def range_sum(self, a: int, b: int) -> Rat:
        if b - a > 2_000_000:
            raise CapabilityError("inverse-square range too large for exact sum")
        return power_sum(2, a, b)

    def positive_indices(self) -> Iterator[int]:
        n = 1
        while True:
            yield n
            n += 1


class HarmonicModel(PriceModel):
    """Prices 1/n; the total diverges."""

    kind = "harmonic"
    name = "harmonic"
    nonincreasing_from = 1
    _PREFIX_LIST_CAP = 5000

    def __init__(self):
        self._prefix = PrefixSums(lambda i: Rat(1, i))
        self._big_prefix: dict[int, Rat] = {}

    def term(self, n: int) -> Rat:
        if n < 1:
            raise DomainError("indices start at 1")
        return Rat(1, n)

    @property
    def total_cert(self):
        return DivergentTotal()

    @property
    def weighted_cert(self):
        return WeightedCert.DIVERGES_ALL

    def range_sum(self, a: int, b: int) -> Rat:
        if b - a > 20_000_000:
            raise CapabilityError("harmonic range too large for exact sum")
        if b <= self._PREFIX_LIST_CAP:
            return self._prefix.range_sum(a, b)
        return harmonic_sum(a, b)

    def prefix_sum(self, n: int) -> Rat:
        if n <= 0:
            return ZERO
        if n > 20_000_000:
            raise CapabilityError("harmonic prefix too large for exact sum")
        if n <= self._PREFIX_LIST_CAP:
            return self._prefix.prefix(n)
        cached = self._big_prefix.get(n)
        if cached is None:
            cached = harmonic_sum(1, n)
            if len(self._big_prefix) < 4096:
                self._big_prefix[n] = cached
        return cached

    def positive_indices(self) -> Iterator[int]:
        n = 1
        while True:
            yield n
            n += 1


class CustomModel(PriceModel):
    """Finite table of prices followed by a cataloged tail rule.

    Certificates are computed from the structure; callers may declare their
    own only if they agree with the computed ones or weaken them to unknown.
    """

    kind = "custom"

    def __init__(self, entries, tail_rule: TailRule, name: str = "custom",
                 total_cert=None, weighted_cert=None):
        _validate_tail_rule(tail_rule)
        self.rule = tail_rule
        self.name = name
        if not isinstance(entries, dict):
            entries = {i + 1: v for i, v in enumerate(entries)}
        table: dict[int, Rat] = {}
        for idx, value in entries.items():
            if not isinstance(idx, int) or idx < 1:
                raise DomainError(f"bad table index {idx!r}")
            if idx >= tail_rule.start:
                raise DomainError(
                    f"table entry at {idx} collides with tail rule from "
                    f"{tail_rule.start}")
            q = Rat(value)
            if q < ZERO:
                raise DomainError("prices must be nonnegative")
            if q != ZERO:
                table[idx] = q
        self._table = table
        self._zero_prefix = sorted(
            i for i in range(1, tail_rule.start) if i not in table)
        self._check_declared(total_cert, weighted_cert)

    def _check_declared(self, total_cert, weighted_cert) -> None:
        if total_cert is not None and not isinstance(total_cert, UnknownTotal):
            computed = self.total_cert
            same_kind = total_cert.kind == computed.kind
            if not same_kind or (isinstance(total_cert, ExactTotal)
                                 and total_cert.value != computed.value):
                raise DomainError("declared total certificate is inconsistent "
                                  "with the tail rule")
        self._declared_total_unknown = isinstance(total_cert, UnknownTotal)
        if weighted_cert is not None and weighted_cert is not WeightedCert.UNKNOWN:
            if weighted_cert is not self._computed_weighted():
                raise DomainError("declared weighted-sum certificate is "
                                  "inconsistent with the tail rule")
        self._declared_weighted_unknown = weighted_cert is WeightedCert.UNKNOWN

    def term(self, n: int) -> Rat:
        if n < 1:
            raise DomainError("indices start at 1")
        if n >= self.rule.start:
            return self.rule.term(n)
        return self._table.get(n, ZERO)

    @property
    def prefix_total(self) -> Rat:
        total = ZERO
        for v in self._table.values():
            total += v
        return total

    @property
    def total_cert(self):
        if getattr(self, "_declared_total_unknown", False):
            return UnknownTotal()
        rule = self.rule
        if isinstance(rule, ZeroTail):
            return ExactTotal(self.prefix_total)
        if isinstance(rule, GeometricTail):
            return ExactTotal(
                self.prefix_total + geometric_tail(rule.ratio, rule.start))
        prefix = self.prefix_total
        return BracketedTotal(
            lambda w: power_tail_bounds(rule.exponent, rule.start, w)
            .shift(prefix))

    def _computed_weighted(self) -> WeightedCert:
        rule = self.rule
        if isinstance(rule, (ZeroTail, GeometricTail)):
            return WeightedCert.CONVERGES_SOME
        if rule.exponent >= 3:
            return WeightedCert.CONVERGES_SOME
        # Eventually 1/n**2: any bijection keeps cofinitely many of these
        # values at positions n with value >= 1/(n + c)**2, so the weighted
        # series diverges no matter the rearrangement.
        return WeightedCert.DIVERGES_ALL

    @property
    def weighted_cert(self) -> WeightedCert:
        if getattr(self, "_declared_weighted_unknown", False):
            return WeightedCert.UNKNOWN
        return self._computed_weighted()

    @property
    def nonincreasing_from(self) -> int:
        return self.rule.start

    def _table_sum_from(self, n: int) -> Rat:
        total = ZERO
        for idx, v in self._table.items():
            if idx >= n:
                total += v
        return total

    def tail(self, n: int):
        if n < 1:
            raise DomainError("indices start at 1")
        rule = self.rule
        head = self._table_sum_from(n)
        start = max(n, rule.start)
        if isinstance(rule, ZeroTail):
            return head
        if isinstance(rule, GeometricTail):
            return head + geometric_tail(rule.ratio, start)
        return power_tail_bounds(
            rule.exponent, start, Rat(1, 100)).shift(head)

    def second_tail(self, m: int):
        if m < 1:
            raise DomainError("indices start at 1")
        rule = self.rule
        # sum over n >= m of tail(n) equals sum over k >= m of
        # (k - m + 1) * term(k)
        head = ZERO
        for idx, v in self._table.items():
            if idx >= m:
                head += (idx - m + 1) * v
        start = max(m, rule.start)
        if isinstance(rule, ZeroTail):
            return head
        if isinstance(rule, GeometricTail):
            r = Rat(rule.ratio)
            one_minus = ONE - r
            tail_part = r ** start * (
                Rat(start - m + 1) / one_minus + r / (one_minus * one_minus))
            return head + tail_part
        e = rule.exponent
        if e < 3:
            raise CapabilityError(
                f"{self.name}: iterated tails of a 1/n**{e} tail diverge")

        def bracket(width) -> RatInterval:
            w = Rat(width) / (2 * max(1, m))
            t1 = power_tail_bounds(e - 1, start, w)
            t2 = power_tail_bounds(e, start, w)
            c = 1 - m
            if c >= 0:
                lo = t1.lo + c * t2.lo
                hi = t1.hi + c * t2.hi
            else:
                lo = t1.lo + c * t2.hi
                hi = t1.hi + c * t2.lo
            return RatInterval(max(lo, ZERO), hi,
                               lambda: bracket(Rat(width) / 2))

        return bracket(Rat(1, 100)).shift(head)

    def positive_indices(self) -> Iterator[int]:
        for idx in sorted(self._table):
            yield idx
        if isinstance(self.rule, ZeroTail):
            return
        n = self.rule.start
        while True:
            yield n
            n += 1

    def range_sum(self, a: int, b: int) -> Rat:
        rule = self.rule
        total = ZERO
        for idx, v in self._table.items():
            if a <= idx <= b:
                total += v
        start = max(a, rule.start)
        if start > b or isinstance(rule, ZeroTail):
            return total
        if isinstance(rule, GeometricTail):
            return total + geometric_sum(rule.ratio, start, b)
        if b - start > 2_000_000:
            raise CapabilityError("inverse-power range too large")
        return total + power_sum(rule.exponent, start, b)

    def zero_indices_before_tail(self) -> list[int]:
        return list(self._zero_prefix)


class BlackBoxModel(PriceModel):
    """Opaque term function: no certificates, no tails."""

    kind = "blackbox"

    def __init__(self, term_fn: Callable[[int], "Rat"], name: str = "blackbox"):
        self._fn = term_fn
        self.name = name

    def term(self, n: int) -> Rat:
        if n < 1:
            raise DomainError("indices start at 1")
        q = Rat(self._fn(n))
        if q < ZERO:
            raise DomainError("prices must be nonnegative")
        return q


class ScaledModel(PriceModel):
    """A positive rational multiple of another model."""

    def __init__(self, inner: PriceModel, factor):
        f = Rat(factor)
        if f <= ZERO:
            raise DomainError("scale factor must be positive")
        self.inner = inner
        self.factor = f
        self.name = f"{inner.name}*{rat_str(f)}"
        self.kind = inner.kind

    @property
    def nonincreasing_from(self):
        return self.inner.nonincreasing_from

    def term(self, n: int) -> Rat:
        return self.inner.term(n) * self.factor

    @property
    def total_cert(self):
        cert = self.inner.total_cert
        if isinstance(cert, ExactTotal):
            return ExactTotal(cert.value * self.factor)
        if isinstance(cert, BracketedTotal):
            f = self.factor
            return BracketedTotal(lambda w: cert.interval(Rat(w) / f).scale(f))
        return cert

    @property
    def weighted_cert(self):
        # positive scaling preserves both convergence classes
        return self.inner.weighted_cert

    def tail(self, n: int):
        t = self.inner.tail(n)
        if isinstance(t, RatInterval):
            return t.scale(self.factor)
        return t * self.factor

    def second_tail(self, m: int):
        t = self.inner.second_tail(m)
        if isinstance(t, RatInterval):
            return t.scale(self.factor)
        return t * self.factor

    def range_sum(self, a: int, b: int) -> Rat:
        return self.inner.range_sum(a, b) * self.factor

    def positive_indices(self):
        return self.inner.positive_indices()


class PermutedModel(PriceModel):
    """Prices read through a relabeling: term(n) = inner.term(delta(n)).

    Total and weighted certificates survive (both are invariant under
    rearrangement of a nonnegative series); tail structure does not.
    """

    kind = "permuted"

    def __init__(self, inner: PriceModel, delta: "Relabeling"):
        self.inner = inner
        self.delta = delta
        self.name = f"{inner.name}@{delta.name or 'relabeled'}"

    def term(self, n: int) -> Rat:
        return self.inner.term(self.delta(n))

    @property
    def total_cert(self):
        return self.inner.total_cert

    @property
    def weighted_cert(self):
        return self.inner.weighted_cert


def builtin_model(kind: str, **params) -> PriceModel:
    if kind == "geometric":
        return GeometricModel(params.get("ratio", rat(1, 2)))
    if kind == "inverse-square":
        return InverseSquareModel()
    if kind == "harmonic":
        return HarmonicModel()
    raise DomainError(f"unknown builtin model {kind!r}")


# ---------------------------------------------------------------------------
# text format shared by custom models and table allocations
#
#   # comment
#   1 1/2
#   4 3/16
#   tail geometric 1/2 from 11
#   tail zero from 11
#   tail inverse-power 2 from 11

def _parse_table_text(text: str):
    entries: dict[int, Rat] = {}
    rule: Optional[TailRule] = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "tail":
            if rule is not None:
                raise DomainError("multiple tail lines")
            if parts[1] == "zero" and parts[2] == "from":
                rule = ZeroTail(int(parts[3]))
            elif parts[1] == "geometric" and parts[3] == "from":
                rule = GeometricTail(rat(parts[2]), int(parts[4]))
            elif parts[1] == "inverse-power" and parts[3] == "from":
                rule = InversePowerTail(int(parts[2]), int(parts[4]))
            else:
                raise DomainError(f"bad tail line: {raw!r}")
            continue
        if len(parts) != 2:
            raise DomainError(f"bad table line: {raw!r}")
        idx = int(parts[0])
        if idx in entries:
            raise DomainError(f"duplicate table index {idx}")
        entries[idx] = rat(parts[1])
    if rule is None:
        raise DomainError("missing tail line")
    return entries, rule


def _dump_table_text(entries: dict, rule: TailRule) -> str:
    lines = [f"{idx} {rat_str(v)}" for idx, v in sorted(entries.items())]
    if isinstance(rule, ZeroTail):
        lines.append(f"tail zero from {rule.start}")
    elif isinstance(rule, GeometricTail):
        lines.append(f"tail geometric {rat_str(rule.ratio)} from {rule.start}")
    else:
        lines.append(
            f"tail inverse-power {rule.exponent} from {rule.start}")
    return "\n".join(lines) + "\n"


def load_model(text: str, name: str = "custom") -> CustomModel:
    entries, rule = _parse_table_text(text)
    return CustomModel(entries, rule, name=name)


def dump_model(model: CustomModel) -> str:
    if not isinstance(model, CustomModel):
        raise CapabilityError("only table-driven models have a text form")
    entries = dict(model._table)
    for idx in model.zero_indices_before_tail():
        entries[idx] = ZERO
    return _dump_table_text(entries, model.rule)


# ---------------------------------------------------------------------------
# allocation plans

@dataclass(frozen=True)
class ZeroBeyond:
    """amount(n) == 0 for every n > index."""
    index: int


@dataclass(frozen=True)
class NonIncreasingBeyond:
    """Amounts are non-increasing for n >= index; positive means they are
    also strictly positive there."""
    index: int
    positive: bool = False


class Unstructured:
    def __eq__(self, other):
        return isinstance(other, Unstructured)

    def __repr__(self):
        return "Unstructured()"


class AllocationPlan:
    """How much money prisoner n carries."""

    name: str = "allocation"

    def amount(self, n: int) -> Rat:
        raise NotImplementedError

    @property
    def total_cert(self):
        return UnknownTotal()

    @property
    def tail_structure(self):
        return Unstructured()

    def max_in_range(self, a: int, b: int) -> Rat:
        if a > b:
            raise DomainError("empty range")
        structure = self.tail_structure
        if isinstance(structure, ZeroBeyond):
            best = ZERO
            for i in range(a, min(b, structure.index) + 1):
                best = max(best, self.amount(i))
            return best
        if isinstance(structure, NonIncreasingBeyond):
            best = ZERO
            for i in range(a, min(b, structure.index - 1) + 1):
                best = max(best, self.amount(i))
            if b >= structure.index:
                best = max(best, self.amount(max(a, structure.index)))
            return best
        if b - a > 1_000_000:
            raise CapabilityError(
                f"{self.name}: cannot scan {b - a + 1} amounts")
        return max(self.amount(i) for i in range(a, b + 1))

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class TableAllocation(AllocationPlan):
    """Finite table of amounts followed by a zero or geometric tail."""

    def __init__(self, entries, tail_rule: TailRule, name: str = "table"):
        _validate_tail_rule(tail_rule)
        if isinstance(tail_rule, InversePowerTail):
            raise DomainError(
                "allocations support zero or geometric tails only")
        if not isinstance(entries, dict):
            entries = {i + 1: v for i, v in enumerate(entries)}
        table: dict[int, Rat] = {}
        for idx, value in entries.items():
            if not isinstance(idx, int) or idx < 1:
                raise DomainError(f"bad table index {idx!r}")
            if idx >= tail_rule.start:
                raise DomainError("table entry collides with tail rule")
            q = Rat(value)
            if q < ZERO:
                raise DomainError("amounts must be nonnegative")
            table[idx] = q
        self._table = table
        self.rule = tail_rule
        self.name = name

    def amount(self, n: int) -> Rat:
        if n < 1:
            raise DomainError("indices start at 1")
        if n >= self.rule.start:
            return self.rule.term(n)
        return self._table.get(n, ZERO)

    @property
    def total_cert(self):
        total = ZERO
        for v in self._table.values():
            total += v
        if isinstance(self.rule, GeometricTail):
            total += geometric_tail(self.rule.ratio, self.rule.start)
        return ExactTotal(total)

    @property
    def tail_structure(self):
        if isinstance(self.rule, ZeroTail):
            return ZeroBeyond(self.rule.start - 1)
        return NonIncreasingBeyond(self.rule.start, positive=True)


class FnAllocation(AllocationPlan):
    """Allocation given by a closed-form function with declared structure."""

    def __init__(self, name: str, fn: Callable[[int], "Rat"],
                 total_cert=None, tail_structure=None,
                 max_in_range_fn=None):
        self.name = name
        self._fn = fn
        self._total = total_cert if total_cert is not None else UnknownTotal()
        self._structure = (tail_structure if tail_structure is not None
                           else Unstructured())
        self._max_fn = max_in_range_fn
        self._cache: dict[int, Rat] = {}

    def amount(self, n: int) -> Rat:
        if n < 1:
            raise DomainError("indices start at 1")
        v = self._cache.get(n)
        if v is None:
            v = Rat(self._fn(n))
            if v < ZERO:
                raise DomainError("amounts must be nonnegative")
            if len(self._cache) < 200_000:
                self._cache[n] = v
        return v

    @property
    def total_cert(self):
        return self._total

    @property
    def tail_structure(self):
        return self._structure

    def max_in_range(self, a: int, b: int) -> Rat:
        if self._max_fn is not None:
            return self._max_fn(a, b)
        return super().max_in_range(a, b)


def load_allocation(text: str, name: str = "table") -> TableAllocation:
    entries, rule = _parse_table_text(text)
    return TableAllocation(entries, rule, name=name)


def dump_allocation(alloc: TableAllocation) -> str:
    if not isinstance(alloc, TableAllocation):
        raise CapabilityError("only table-driven allocations have a text form")
    return _dump_table_text(alloc._table, alloc.rule)


# ---------------------------------------------------------------------------
# relabelings

class Relabeling:
    """Bijection of the positive integers given by finitely many placements.

    Position n maps to placements[n] when present; every other position
    takes the smallest value not used by any placement, in increasing order
    of position.  With placements drawn from a permutation table this gives
    'identity beyond the table'; with sparse placements it fills the gaps.
    """

    def __init__(self, placements: dict[int, int], name: str = ""):
        positions = sorted(placements)
        values = sorted(placements.values())
        if positions and positions[0] < 1:
            raise PlanViolationError("positions start at 1")
        if values and values[0] < 1:
            raise PlanViolationError("values start at 1")
        if len(set(values)) != len(values):
            raise PlanViolationError("relabeling places one value twice")
        self._map = dict(placements)
        self._positions = positions
        self._values = values
        self._value_to_pos = {v: p for p, v in placements.items()}
        self.name = name

    @classmethod
    def identity(cls) -> "Relabeling":
        return cls({}, name="identity")

    @classmethod
    def from_sequence(cls, seq, name: str = "") -> "Relabeling":
        return cls({i + 1: int(v) for i, v in enumerate(seq)}, name=name)

    @classmethod
    def swap(cls, a: int, b: int) -> "Relabeling":
        return cls({a: b, b: a}, name=f"swap({a},{b})")

    @property
    def is_identity(self) -> bool:
        return all(p == v for p, v in self._map.items())

    @property
    def placements(self) -> dict[int, int]:
        return dict(self._map)

    @staticmethod
    def _kth_free(k: int, used: list[int]) -> int:
        # smallest x with x - (number of used values <= x) == k
        lo, hi = k, k + len(used)
        while lo < hi:
            mid = (lo + hi) // 2
            if mid - bisect.bisect_right(used, mid) >= k:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def __call__(self, n: int) -> int:
        if n < 1:
            raise DomainError("positions start at 1")
        hit = self._map.get(n)
        if hit is not None:
            return hit
        rank = n - bisect.bisect_right(self._positions, n)
        return self._kth_free(rank, self._values)

    def inverse(self, value: int) -> int:
        if value < 1:
            raise DomainError("values start at 1")
        hit = self._value_to_pos.get(value)
        if hit is not None:
            return hit
        rank = value - bisect.bisect_right(self._values, value)
        return self._kth_free(rank, self._positions)

    def prefix(self, m: int) -> list[int]:
        return [self(n) for n in range(1, m + 1)]

    @property
    def support_bound(self) -> int:
        """All positions beyond this map identically in the fill region."""
        top = 0
        if self._positions:
            top = max(top, self._positions[-1])
        if self._values:
            top = max(top, self._values[-1])
        return top

    def __repr__(self):
        label = self.name or f"{len(self._map)} placements"
        return f"<Relabeling {label}>"


def descending_rearrangement(model: PriceModel, horizon: int) -> Relabeling:
    """A bijection reading prices in non-increasing order of value.

    Ties break toward the smaller original index.  Models that are already
    non-increasing from the start yield the identity.  A model with a zero
    price followed by infinitely many positive prices admits no such
    bijection and raises CapabilityError.
    """
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    if model.nonincreasing_from == 1:
        return Relabeling.identity()
    if not isinstance(model, CustomModel):
        raise CapabilityError(
            f"{model.name}: no certified value ordering available")
    zero_tail = isinstance(model.rule, ZeroTail)
    if not zero_tail and model.zero_indices_before_tail():
        raise CapabilityError(
            f"{model.name}: zeros before an infinite positive tail cannot "
            "be placed by any non-increasing ordering")
    return _ordered_relabeling(model, horizon, zero_tail,
                               name=f"descending[{model.name}]")


def quasi_descending_rearrangement(model: PriceModel,
                                   horizon: int) -> Relabeling:
    """Positive prices in non-increasing order; zeros wherever they land.

    Zeros are simply skipped when placing positives, so they end up after
    all positives (finite-positive case) or in the unplaced positions
    beyond the horizon (infinite-positive case).
    """
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    if model.nonincreasing_from == 1:
        return Relabeling.identity()
    if not isinstance(model, CustomModel):
        raise CapabilityError(
            f"{model.name}: no certified value ordering available")
    zero_tail = isinstance(model.rule, ZeroTail)
    return _ordered_relabeling(model, horizon, zero_tail,
                               name=f"quasi-descending[{model.name}]")


def _ordered_relabeling(model: CustomModel, horizon: int,
                        zero_tail: bool, name: str) -> Relabeling:
    prefix = sorted(
        ((idx, model.term(idx)) for idx in model._table),
        key=lambda pair: (-pair[1], pair[0]))
    placements: dict[int, int] = {}
    if zero_tail:
        # all positives live in the table; zeros fill in ascending order
        for pos, (idx, _val) in enumerate(prefix, start=1):
            placements[pos] = idx
        return Relabeling(placements, name=name)
    tail_idx = model.rule.start
    i = 0
    for pos in range(1, horizon + 1):
        tail_val = model.rule.term(tail_idx)
        if i < len(prefix) and prefix[i][1] >= tail_val:
            placements[pos] = prefix[i][0]
            i += 1
        else:
            placements[pos] = tail_idx
            tail_idx += 1
    return Relabeling(placements, name=name)


class OmittedZerosModel(PriceModel):
    """The positive subsequence of another model, indices compressed."""

    kind = "omitted-zeros"

    def __init__(self, inner: PriceModel):
        self.inner = inner
        self.name = f"positives[{inner.name}]"
        self._indices: list[int] = []
        self._source = inner.positive_indices()
        self._exhausted = False

    def _ensure(self, k: int) -> bool:
        while len(self._indices) < k and not self._exhausted:
            try:
                self._indices.append(next(self._source))
            except StopIteration:
                self._exhausted = True
        return len(self._indices) >= k

    def original_index(self, k: int) -> Optional[int]:
        if self._ensure(k):
            return self._indices[k - 1]
        return None

    def term(self, n: int) -> Rat:
        if n < 1:
            raise DomainError("indices start at 1")
        idx = self.original_index(n)
        if idx is None:
            return ZERO
        return self.inner.term(idx)

    @property
    def total_cert(self):
        return self.inner.total_cert

    @property
    def weighted_cert(self):
        return self.inner.weighted_cert

    def tail(self, n: int):
        idx = self.original_index(n)
        if idx is None:
            return ZERO
        return self.inner.tail(idx)


def omit_zeros(model: PriceModel, horizon: int):
    """Compress out zero prices.

    Returns (positives_model, alpha) where alpha maps each original index
    with positive price, up to the horizon, to its compressed position.
    """
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    compressed = OmittedZerosModel(model)
    alpha: dict[int, int] = {}
    k = 1
    while True:
        idx = compressed.original_index(k)
        if idx is None or idx > horizon:
            break
        alpha[idx] = k
        k += 1
    return compressed, alpha


def weighted_partial_sum(model: PriceModel, delta: Relabeling, m: int) -> Rat:
    """Exact sum of n * price(delta(n)) for n = 1..m."""
    if m < 0:
        raise DomainError("length must be >= 0")
    total = ZERO
    for n in range(1, m + 1):
        total += n * model.term(delta(n))
    return total

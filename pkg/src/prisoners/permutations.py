"""Permutations of the positive integers built from finite cycles.

A plan lists explicit cycles and treats every unlisted index as a fixed
point, or pulls cycles lazily from an adversary stream.  Cycles over huge
consecutive blocks are kept as ranges instead of member tuples.
"""
from __future__ import annotations

import random
from typing import Iterable, Iterator, Optional

from .errors import (
    CapabilityError, DomainError, NotMaterializedError, PlanViolationError,
)
from .numeric import Rat, ZERO

__all__ = [
    "Cycle", "CyclePlan", "conjugate_plan", "random_plan",
    "random_bounded_diameter_plan", "validate_plan", "parse_plan",
    "dump_plan",
]

_MATERIALIZE_CAP = 2_000_000


def _index_repr(n: int) -> str:
    # adversary blocks reach indices too large for decimal formatting
    if isinstance(n, int) and n.bit_length() > 1024:
        return f"<{n.bit_length()}-bit index>"
    return str(n)


class Cycle:
    """An ordered cycle of distinct box indices.

    Explicit cycles carry their member tuple in cycle order.  Range cycles
    stand for the ascending consecutive cycle (start, start+1, ..., end)
    and are never materialized, so adversaries can emit blocks with more
    members than would fit in memory.
    """

    __slots__ = ("members", "start", "end")

    def __init__(self, members: Iterable[int]):
        tup = tuple(int(m) for m in members)
        if not tup:
            raise PlanViolationError("empty cycle")
        if any(m < 1 for m in tup):
            raise PlanViolationError("cycle members must be >= 1")
        if len(set(tup)) != len(tup):
            raise PlanViolationError(f"repeated member in cycle {tup}")
        self.members = tup
        self.start = min(tup)
        self.end = max(tup)

    @classmethod
    def of_range(cls, start: int, end: int) -> "Cycle":
        if start < 1 or end < start:
            raise PlanViolationError(f"bad cycle range [{start}, {end}]")
        if end - start < 64:
            return cls(range(start, end + 1))
        obj = object.__new__(cls)
        obj.members = None
        obj.start = start
        obj.end = end
        return obj

    @property
    def is_range(self) -> bool:
        return self.members is None

    @property
    def length(self) -> int:
        if self.members is not None:
            return len(self.members)
        return self.end - self.start + 1

    @property
    def min_member(self) -> int:
        return self.start if self.members is None else min(self.members)

    @property
    def max_member(self) -> int:
        return self.end if self.members is None else max(self.members)

    @property
    def diameter(self) -> int:
        return self.max_member - self.min_member

    def contains(self, n: int) -> bool:
        if self.members is not None:
            return n in self.members
        return self.start <= n <= self.end

    def successor(self, n: int) -> int:
        """The box index written on the slip inside box n, i.e. sigma(n)."""
        if self.members is not None:
            i = self.members.index(n)
            return self.members[(i + 1) % len(self.members)]
        if not self.start <= n <= self.end:
            raise PlanViolationError(f"{n} is not in this cycle")
        return self.start if n == self.end else n + 1

    def predecessor(self, n: int) -> int:
        if self.members is not None:
            i = self.members.index(n)
            return self.members[i - 1]
        if not self.start <= n <= self.end:
            raise PlanViolationError(f"{n} is not in this cycle")
        return self.end if n == self.start else n - 1

    def rotation_from(self, n: int) -> Iterator[int]:
        """Members in walk order starting at n."""
        if not self.contains(n):
            raise PlanViolationError(f"{n} is not in this cycle")
        cur = n
        while True:
            yield cur
            cur = self.successor(cur)
            if cur == n:
                return

    def iter_members(self) -> Iterator[int]:
        if self.members is not None:
            return iter(self.members)
        if self.length > _MATERIALIZE_CAP:
            raise CapabilityError(
                f"cycle range [{_index_repr(self.start)}, "
                f"{_index_repr(self.end)}] is too large to walk")
        return iter(range(self.start, self.end + 1))

    def price(self, model) -> Rat:
        if self.members is not None:
            total = ZERO
            for m in self.members:
                total += model.term(m)
            return total
        return model.range_sum(self.start, self.end)

    def _canonical(self):
        if self.members is None:
            return ("range", self.start, self.end)
        i = self.members.index(self.min_member)
        rotated = self.members[i:] + self.members[:i]
        if rotated == tuple(range(self.start, self.end + 1)):
            return ("range", self.start, self.end)
        return rotated

    def __eq__(self, other):
        if not isinstance(other, Cycle):
            return NotImplemented
        return self._canonical() == other._canonical()

    def __hash__(self):
        return hash(self._canonical())

    def __repr__(self):
        if self.members is None:
            return (f"Cycle.of_range({_index_repr(self.start)}, "
                    f"{_index_repr(self.end)})")
        return f"Cycle({self.members})"


class CyclePlan:
    """A permutation given by disjoint finite cycles.

    Prefix plans hold a finite cycle list and act as the identity on every
    unlisted index.  Lazy plans pull consecutive cycles from a stream and
    only know the portion pulled so far.
    """

    def __init__(self, cycles: Iterable[Cycle] = (), name: str = "plan",
                 source: Optional[Iterator[Cycle]] = None):
        self.name = name
        self._source = source
        self._cycles: list[Cycle] = []
        self._owner: dict[int, Cycle] = {}
        self._ranges: list[Cycle] = []
        self._exhausted = source is None
        # set by stream producers whose coverage stops without implying
        # identity beyond (the stream continues in another representation)
        self.covered_bound: Optional[int] = None
        for c in cycles:
            self._admit(c)

    @classmethod
    def lazy(cls, source: Iterator[Cycle], name: str = "stream") -> "CyclePlan":
        return cls((), name=name, source=source)

    def _admit(self, cycle: Cycle) -> None:
        if not isinstance(cycle, Cycle):
            cycle = Cycle(cycle)
        if cycle.is_range or cycle.length > 4096:
            for other in self._ranges:
                if cycle.start <= other.end and other.start <= cycle.end:
                    raise PlanViolationError(
                        "cycle ranges overlap in this plan")
            self._ranges.append(cycle)
        else:
            for m in cycle.members:
                if m in self._owner:
                    raise PlanViolationError(
                        f"index {m} appears in two cycles")
                self._owner[m] = cycle
        self._cycles.append(cycle)

    @property
    def is_lazy(self) -> bool:
        return self._source is not None

    def materialize(self, count: int) -> list[Cycle]:
        """First count cycles, pulling from the stream as needed."""
        while len(self._cycles) < count and not self._exhausted:
            try:
                self._admit(next(self._source))
            except StopIteration:
                self._exhausted = True
        return self._cycles[:count]

    @property
    def cycles(self) -> list[Cycle]:
        return list(self._cycles)

    @property
    def pulled_bound(self) -> int:
        """Largest index known to be covered by pulled cycles."""
        top = 0
        for c in self._cycles:
            top = max(top, c.max_member)
        return top

    def _lookup(self, n: int) -> Optional[Cycle]:
        hit = self._owner.get(n)
        if hit is not None:
            return hit
        for c in self._ranges:
            if c.start <= n <= c.end:
                return c
        return None

    def cycle_containing(self, n: int) -> Cycle:
        if n < 1:
            raise DomainError("indices start at 1")
        hit = self._lookup(n)
        if hit is not None:
            return hit
        if self.is_lazy and not self._exhausted and n > self.pulled_bound:
            raise NotMaterializedError(
                f"index {_index_repr(n)} lies beyond the "
                f"{len(self._cycles)} cycles pulled so far")
        if self.covered_bound is not None and n > self.covered_bound:
            raise NotMaterializedError(
                f"index {_index_repr(n)} lies beyond the covered bound "
                f"{_index_repr(self.covered_bound)}; the stream continues "
                "in a non-materializable form")
        return Cycle((n,))

    def sigma(self, n: int) -> int:
        return self.cycle_containing(n).successor(n)

    def conjugate(self, delta, name: Optional[str] = None) -> "CyclePlan":
        """The plan with every member relabeled through delta."""
        mapped = []
        for c in self._cycles:
            if c.is_range:
                if c.start > delta.support_bound:
                    mapped.append(c)
                    continue
                raise CapabilityError(
                    "cannot relabel a non-materializable cycle range")
            mapped.append(Cycle(delta(m) for m in c.members))
        return CyclePlan(mapped, name=name or f"{self.name}@{delta.name}")


def conjugate_plan(plan: CyclePlan, delta) -> CyclePlan:
    return plan.conjugate(delta)


def validate_plan(plan: CyclePlan, horizon: int) -> list[str]:
    """Structural violations among members up to the horizon."""
    problems: list[str] = []
    seen: dict[int, int] = {}
    for pos, cycle in enumerate(plan.cycles, start=1):
        if cycle.min_member > horizon:
            continue
        if cycle.is_range:
            for pos2, other in enumerate(plan.cycles, start=1):
                if pos2 >= pos or not other.is_range:
                    continue
                if cycle.start <= other.end and other.start <= cycle.end:
                    problems.append(
                        f"cycles {pos2} and {pos} overlap as ranges")
            continue
        for m in cycle.members:
            if m > horizon:
                continue
            if m in seen:
                problems.append(
                    f"index {m} appears in cycles {seen[m]} and {pos}")
            else:
                seen[m] = pos
    return problems


def random_plan(horizon: int, max_len: int, seed: int,
                name: Optional[str] = None) -> CyclePlan:
    """Random partition of [1, horizon] into cycles of length <= max_len."""
    if horizon < 1 or max_len < 1:
        raise DomainError("horizon and max_len must be >= 1")
    rng = random.Random(("plan", horizon, max_len, seed).__repr__())
    pool = list(range(1, horizon + 1))
    rng.shuffle(pool)
    cycles = []
    i = 0
    while i < len(pool):
        k = rng.randint(1, min(max_len, len(pool) - i))
        cycles.append(Cycle(pool[i:i + k]))
        i += k
    return CyclePlan(cycles, name=name or f"random[{seed}]")


def random_bounded_diameter_plan(horizon: int, diameter: int, seed: int,
                                 name: Optional[str] = None) -> CyclePlan:
    """Random plan whose every cycle has max - min <= diameter."""
    if horizon < 1 or diameter < 0:
        raise DomainError("horizon must be >= 1 and diameter >= 0")
    rng = random.Random(("banded", horizon, diameter, seed).__repr__())
    cycles = []
    n = 1
    while n <= horizon:
        size = rng.randint(1, min(diameter + 1, horizon - n + 1))
        members = list(range(n, n + size))
        rng.shuffle(members)
        cycles.append(Cycle(members))
        n += size
    return CyclePlan(cycles, name=name or f"banded[{seed}]")


def dump_plan(plan: CyclePlan, identity_from: Optional[int] = None) -> str:
    """One cycle per line, members in cycle order."""
    lines = []
    for c in plan.cycles:
        if c.is_range:
            lines.append(f"range {c.start} {c.end}")
        else:
            lines.append(" ".join(str(m) for m in c.members))
    if identity_from is not None:
        lines.append(f"identity-from {identity_from}")
    return "\n".join(lines) + "\n"


def parse_plan(text: str, name: str = "parsed") -> CyclePlan:
    cycles = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "identity-from":
            continue
        try:
            if parts[0] == "range":
                if len(parts) != 3:
                    raise DomainError(f"bad range line: {raw!r}")
                cycles.append(Cycle.of_range(int(parts[1]), int(parts[2])))
            else:
                cycles.append(Cycle(int(p) for p in parts))
        except ValueError:
            raise DomainError(f"bad plan line: {raw!r}")
    return CyclePlan(cycles, name=name)

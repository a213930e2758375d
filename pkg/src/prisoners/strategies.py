"""Allocation builders, one per constructive winning strategy.

Each builder turns a certified hypothesis about the price sequence into an
explicit allocation plan plus the cutoff index it was chosen for, and tags
the plan with a descriptor naming the prisoners it guarantees to succeed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import CapabilityError, DomainError, PlanViolationError
from .numeric import (
    Cmp, LN2_HI, ONE, Rat, RatInterval, ZERO, ln_bounds, rat, rat_str,
    require_certified,
)
from .sequences import (
    AllocationPlan, BracketedTotal, CustomModel, DivergentTotal, ExactTotal,
    FnAllocation, GeometricModel, GeometricTail, HarmonicModel,
    InversePowerTail, NonIncreasingBeyond, PriceModel, Relabeling,
    UnknownTotal, ZeroBeyond, ZeroTail,
)

__all__ = [
    "StrategyDescriptor", "build_baseline_geometric",
    "build_tail_sum_strategy", "build_bounded_length_strategy",
    "build_bounded_diameter_strategy", "build_cycle_informed_strategy",
    "build_v2_strategy",
]

_SEARCH_CAP = 1_000_000


@dataclass
class StrategyDescriptor:
    """What was built, from which parameters, and who is promised to win."""

    builder: str
    params: dict = field(default_factory=dict)
    m: Optional[int] = None

    def to_json(self) -> str:
        return json.dumps(
            {"builder": self.builder, "params": self.params, "m": self.m})

    @classmethod
    def from_json(cls, text: str) -> "StrategyDescriptor":
        raw = json.loads(text)
        return cls(builder=raw["builder"], params=raw.get("params", {}),
                   m=raw.get("m"))

    def success_pattern(self) -> dict:
        """Machine-checkable claim: which prisoners must succeed."""
        p = self.params
        if self.builder == "baseline-geometric":
            return {"scope": "least-member", "cutoff": 2}
        if self.builder == "tail-sum":
            return {"scope": "least-member", "cutoff": self.m,
                    "relabeling": p.get("relabeling")}
        if self.builder == "bounded-length":
            return {"scope": "max-price-member", "cutoff": self.m}
        if self.builder == "bounded-diameter":
            return {"scope": "above-threshold",
                    "threshold": self.m + p["d"],
                    "relabeling": p.get("relabeling"), "cofinite": True}
        if self.builder == "cycle-informed":
            return {"scope": "cycle-members", "cutoff": self.m}
        if self.builder == "v2":
            kind = p["kind"]
            if kind in ("harmonic-prefix", "shifted-harmonic", "log-shift"):
                return {"scope": "last-member", "cutoff": p.get("k", 1)}
            return {"scope": "none"}
        raise DomainError(f"unknown builder {self.builder!r}")


def _relabeling_pairs(delta: Relabeling):
    return sorted([p, v] for p, v in delta.placements.items())


def relabeling_from_pairs(pairs) -> Relabeling:
    return Relabeling({int(p): int(v) for p, v in pairs})


# ---------------------------------------------------------------------------
# hypothesis plumbing

def _tails_exact(model: PriceModel) -> bool:
    """Whether model.tail returns exact rationals rather than intervals."""
    if isinstance(model, GeometricModel):
        return True
    if isinstance(model, CustomModel):
        return isinstance(model.rule, (ZeroTail, GeometricTail))
    return False


def _rearranged_model(model: PriceModel, delta: Relabeling) -> PriceModel:
    """The price sequence n -> p(delta(n)) as a first-class model.

    delta moves only finitely many indices, so beyond its support the
    rearranged sequence coincides with the original and the original tail
    rule still describes it.
    """
    if delta.is_identity:
        return model
    bound = delta.support_bound
    if isinstance(model, GeometricModel):
        entries = {n: model.term(delta(n)) for n in range(1, bound + 1)}
        return CustomModel(entries, GeometricTail(model.ratio, bound + 1),
                           name=f"{model.name}@{delta.name or 'relabeled'}")
    if isinstance(model, CustomModel):
        start = max(bound + 1, model.rule.start)
        entries = {n: model.term(delta(n)) for n in range(1, start)}
        rule = model.rule
        if isinstance(rule, ZeroTail):
            new_rule = ZeroTail(start)
        elif isinstance(rule, GeometricTail):
            new_rule = GeometricTail(rule.ratio, start)
        else:
            new_rule = InversePowerTail(rule.exponent, start)
        return CustomModel(entries, new_rule,
                           name=f"{model.name}@{delta.name or 'relabeled'}")
    raise CapabilityError(
        f"cannot rearrange a {type(model).__name__} and keep its tails")


def _least_with_certified(fn, target, start: int) -> int:
    """Least n >= start where fn(n) is certified strictly below target."""
    n = start
    while n - start <= _SEARCH_CAP:
        if require_certified(fn(n), target) is Cmp.LESS:
            return n
        n += 1
    raise CapabilityError(f"no certified cutoff within {_SEARCH_CAP} indices")


def _refined_interval(iv: RatInterval, width) -> RatInterval:
    while iv.width > width and iv.refinable:
        iv = iv.refine()
    return iv


def _total_cert_from_tail(value) -> object:
    if isinstance(value, RatInterval):
        return BracketedTotal(lambda w: _refined_interval(value, w))
    return ExactTotal(value)


# ---------------------------------------------------------------------------
# builders

def build_baseline_geometric() -> AllocationPlan:
    """Nothing for the first prisoner, then half of the previous amount.

    Against halving prices the least member n >= 2 of any cycle holds
    exactly the sum of all prices from n on, so the walk is affordable.
    """
    half = rat(1, 2)

    def amount(n: int) -> Rat:
        return ZERO if n == 1 else half ** (n - 1)

    alloc = FnAllocation(
        "baseline-geometric", amount,
        total_cert=ExactTotal(ONE),
        tail_structure=NonIncreasingBeyond(2, positive=True))
    alloc.descriptor = StrategyDescriptor("baseline-geometric", {}, m=2)
    return alloc


def build_tail_sum_strategy(model: PriceModel, delta: Optional[Relabeling]
                            = None, total=ONE):
    """Fund each late prisoner with the whole price tail from his index.

    Picks the least cutoff m > 1 whose sum of tails is certified below the
    budget, gives prisoner n >= m the tail starting at n, prisoners 2..m-1
    nothing, and prisoner 1 the slack.  Returns (plan, m).
    """
    delta = delta or Relabeling.identity()
    total = Rat(total)
    if total <= ZERO:
        raise DomainError("the shared budget must be positive")
    work = _rearranged_model(model, delta)
    if not _tails_exact(work):
        raise CapabilityError(
            f"{model.name}: tail-funded amounts need exact, summable tails")
    m = _least_with_certified(work.second_tail, total, start=2)
    slack = total - work.second_tail(m)

    def amount(n: int) -> Rat:
        if n == 1:
            return slack
        if n < m:
            return ZERO
        return work.tail(n)

    if isinstance(work, CustomModel) and isinstance(work.rule, ZeroTail):
        top = max([i for i in work._table if i >= m], default=m - 1)
        structure = ZeroBeyond(max(top, 1))
    else:
        structure = NonIncreasingBeyond(m, positive=True)
    alloc = FnAllocation(
        f"tail-sum[{model.name}]", amount,
        total_cert=ExactTotal(total), tail_structure=structure)
    params = {"model": model.name, "total": rat_str(total)}
    if not delta.is_identity:
        params["relabeling"] = _relabeling_pairs(delta)
    alloc.descriptor = StrategyDescriptor("tail-sum", params, m=m)
    return alloc, m


def build_bounded_length_strategy(model: PriceModel, k: int, total=ONE):
    """k times each price from a cutoff, against cycles of length <= k.

    A cycle avoiding [1..m-1] costs at most k times its priciest member's
    price, which that member can pay.  Returns (plan, m).
    """
    if not isinstance(k, int) or k < 1:
        raise DomainError("the length bound must be a positive integer")
    total = Rat(total)
    if total <= ZERO:
        raise DomainError("the shared budget must be positive")

    def scaled_tail(n: int):
        t = model.tail(n)
        if isinstance(t, RatInterval):
            return t.scale(k)
        return k * t

    m = _least_with_certified(scaled_tail, total, start=1)

    def amount(n: int) -> Rat:
        return ZERO if n < m else k * model.term(n)

    if isinstance(model, CustomModel) and isinstance(model.rule, ZeroTail):
        top = max([i for i in model._table if i >= m], default=m - 1)
        structure = ZeroBeyond(max(top, 1))
    elif model.nonincreasing_from is not None:
        structure = NonIncreasingBeyond(
            max(m, model.nonincreasing_from), positive=True)
    else:
        structure = None

    def max_in_range(a: int, b: int) -> Rat:
        if b < m:
            return ZERO
        return k * model.max_term_in(max(a, m), b)

    alloc = FnAllocation(
        f"bounded-length[{model.name},k={k}]", amount,
        total_cert=_total_cert_from_tail(scaled_tail(m)),
        tail_structure=structure, max_in_range_fn=max_in_range)
    alloc.descriptor = StrategyDescriptor(
        "bounded-length",
        {"model": model.name, "k": k, "total": rat_str(total)}, m=m)
    return alloc, m


def build_bounded_diameter_strategy(model: PriceModel, d: int,
                                    delta: Optional[Relabeling] = None,
                                    total=ONE):
    """Zeros through m+d, then the tail sums shifted d places outward.

    In rearranged coordinates a cycle containing prisoner m+d+k spans at
    most [m+k, m+2d+k], so its price is at most the tail from m+k, which
    is exactly that prisoner's amount.  Returns (plan, m).
    """
    if not isinstance(d, int) or d < 0:
        raise DomainError("the diameter bound must be a nonnegative integer")
    delta = delta or Relabeling.identity()
    total = Rat(total)
    if total <= ZERO:
        raise DomainError("the shared budget must be positive")
    work = _rearranged_model(model, delta)
    if not _tails_exact(work):
        raise CapabilityError(
            f"{model.name}: shifted tail amounts need exact, summable tails")
    m = _least_with_certified(work.second_tail, total, start=1)

    def base(n: int) -> Rat:
        if n <= m + d:
            return ZERO
        return work.tail(n - d)

    if delta.is_identity:
        fn = base
    else:
        def fn(n: int) -> Rat:
            return base(delta.inverse(n))

    floor = m + d
    if isinstance(work, CustomModel) and isinstance(work.rule, ZeroTail):
        top = max(work._table, default=0)
        structure = ZeroBeyond(max(1, top + d, delta.support_bound))
    else:
        structure = NonIncreasingBeyond(
            max(floor + 1, delta.support_bound + 1), positive=True)
    alloc = FnAllocation(
        f"bounded-diameter[{model.name},d={d}]", fn,
        total_cert=ExactTotal(work.second_tail(m + 1)),
        tail_structure=structure)
    params = {"model": model.name, "d": d, "total": rat_str(total)}
    if not delta.is_identity:
        params["relabeling"] = _relabeling_pairs(delta)
    alloc.descriptor = StrategyDescriptor("bounded-diameter", params, m=m)
    return alloc, m


def build_cycle_informed_strategy(model: PriceModel, plan, k: int,
                                  total=ONE) -> AllocationPlan:
    """Everyone in a disclosed all-past-the-cutoff cycle gets its price.

    The plan is public, so each member of a cycle living entirely in
    [m, infinity) carries exactly the cycle's cost; everyone else gets 0.
    """
    if not isinstance(k, int) or k < 1:
        raise DomainError("the length bound must be a positive integer")
    total = Rat(total)
    if total <= ZERO:
        raise DomainError("the shared budget must be positive")
    for c in plan.cycles:
        if c.length > k:
            raise PlanViolationError(
                f"disclosed plan has a cycle of length {c.length} > {k}")

    def scaled_tail(n: int):
        t = model.tail(n)
        if isinstance(t, RatInterval):
            return t.scale(k)
        return k * t

    m = _least_with_certified(scaled_tail, total, start=1)
    price_cache: dict[int, Rat] = {}

    def amount(n: int) -> Rat:
        cyc = plan.cycle_containing(n)
        if cyc.min_member < m:
            return ZERO
        key = cyc.min_member
        got = price_cache.get(key)
        if got is None:
            got = price_cache[key] = cyc.price(model)
        return got

    total_cert = UnknownTotal()
    if not any(c.is_range for c in plan.cycles):
        # exact: charged cycles at length*price, plus every unlisted
        # singleton's own price, which is tail(m) minus listed members
        charged = ZERO
        listed = ZERO
        for c in plan.cycles:
            if c.min_member >= m:
                charged += c.length * c.price(model)
            for x in c.members:
                if x >= m:
                    listed += model.term(x)
        t = model.tail(m)
        if isinstance(t, RatInterval):
            base_iv = t
            shift = charged - listed
            total_cert = BracketedTotal(
                lambda w: _refined_interval(base_iv, w).shift(shift))
        else:
            total_cert = ExactTotal(t + charged - listed)
    alloc = FnAllocation(f"cycle-informed[{model.name}]", amount,
                         total_cert=total_cert)
    alloc.descriptor = StrategyDescriptor(
        "cycle-informed",
        {"model": model.name, "k": k, "total": rat_str(total),
         "plan": plan.name}, m=m)
    return alloc


# ---------------------------------------------------------------------------
# fixed-price builders (prices 1/n, only the amounts vary)

_SHARED_HARMONIC = HarmonicModel()


def _hsum(n: int) -> Rat:
    if n < 1:
        return ZERO
    return _SHARED_HARMONIC.prefix_sum(n)


def _log_shift_cutoff(K: Rat) -> tuple[int, bool]:
    """Least k with 1 + ... + 1/(k+1) certified >= K + 1.

    Exact and minimal while the cutoff stays small; for large K falls back
    to a certified logarithmic lower bound, which may overshoot but never
    undershoots the guarantee.
    """
    goal = K + 1
    if _hsum(4096) >= goal:
        lo, hi = 1, 4096
        while lo < hi:
            mid = (lo + hi) // 2
            if _hsum(mid + 1) >= goal:
                hi = mid
            else:
                lo = mid + 1
        return lo, True
    # prefix from 1..k+1 exceeds ln(k+2); find the least such k by bisection
    k = 4096
    while ln_bounds(k + 2)[0] < goal:
        k *= 2
        if k > 1 << 200:
            raise CapabilityError("shift constant out of tractable range")
    lo, hi = k // 2, k
    while lo < hi:
        mid = (lo + hi) // 2
        if ln_bounds(mid + 2)[0] >= goal:
            hi = mid
        else:
            lo = mid + 1
    return lo, False


def build_v2_strategy(kind: str, **params) -> AllocationPlan:
    """Allocations for the fixed 1/n price schedule.

    kinds: constant1, harmonic-prefix, shifted-harmonic (k), log-shift (K),
    scaled (c).  Amounts are exact; unbounded families declare a divergent
    total.  Each plan carries amount_upper_pow2(E), a certified upper bound
    for the amount at index 2**E that never materializes 2**E itself.
    """
    if kind == "constant1":
        alloc = FnAllocation(
            "v2-constant1", lambda n: ONE,
            total_cert=DivergentTotal(),
            tail_structure=NonIncreasingBeyond(1, positive=True),
            max_in_range_fn=lambda a, b: ONE)
        alloc.amount_upper_pow2 = lambda E: ONE
        alloc.descriptor = StrategyDescriptor("v2", {"kind": kind})
        return alloc

    if kind == "harmonic-prefix":
        alloc = FnAllocation(
            "v2-harmonic-prefix", _hsum,
            total_cert=DivergentTotal(),
            max_in_range_fn=lambda a, b: _hsum(b))
        alloc.amount_upper_pow2 = lambda E: ONE + E * LN2_HI
        alloc.descriptor = StrategyDescriptor(
            "v2", {"kind": kind, "k": 1})
        return alloc

    if kind == "shifted-harmonic":
        k = params.get("k")
        if not isinstance(k, int) or k < 1:
            raise DomainError("shifted-harmonic needs an integer k >= 1")

        def amount(n: int) -> Rat:
            # the exact start-of-window sum is only ever needed past k,
            # so a huge k stays constructible
            return ZERO if n < k else _hsum(n) - _hsum(k - 1)

        if k - 1 <= 100_000:
            base_floor = _hsum(k - 1)
        else:
            # certified: 1 + ... + 1/(k-1) exceeds ln(k)
            base_floor = ln_bounds(k)[0]
        alloc = FnAllocation(
            f"v2-shifted-harmonic[{k}]", amount,
            total_cert=DivergentTotal(),
            max_in_range_fn=lambda a, b: ZERO if b < k else amount(b))
        alloc.amount_upper_pow2 = (
            lambda E: max(ZERO, ONE + E * LN2_HI - base_floor))
        alloc.descriptor = StrategyDescriptor(
            "v2", {"kind": kind, "k": k})
        return alloc

    if kind == "log-shift":
        K = Rat(params.get("K"))
        if K < ZERO:
            raise DomainError("the shift constant must be nonnegative")
        k, exact = _log_shift_cutoff(K)
        alloc = build_v2_strategy("shifted-harmonic", k=k)
        alloc.name = f"v2-log-shift[{rat_str(K)}]"
        alloc.descriptor = StrategyDescriptor(
            "v2", {"kind": kind, "K": rat_str(K), "k": k,
                   "minimal": exact})
        return alloc

    if kind == "scaled":
        c = Rat(params.get("c"))
        if c >= ONE:
            raise DomainError(
                "scaled prefix amounts with factor >= 1 are a different game")
        if c < ZERO:
            raise DomainError("the scale factor must be nonnegative")

        def amount(n: int) -> Rat:
            return c * _hsum(n)

        alloc = FnAllocation(
            f"v2-scaled[{rat_str(c)}]", amount,
            total_cert=DivergentTotal() if c > ZERO else ExactTotal(ZERO),
            max_in_range_fn=lambda a, b: c * _hsum(b))
        alloc.amount_upper_pow2 = lambda E: c * (ONE + E * LN2_HI)
        alloc.descriptor = StrategyDescriptor(
            "v2", {"kind": kind, "c": rat_str(c)})
        return alloc

    raise DomainError(f"unknown fixed-price strategy kind {kind!r}")

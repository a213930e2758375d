"""Guard-side constructions that defeat prisoner allocations.

Each builder returns a lazy cycle stream together with a machine-checkable
claim about who fails inside it.  Every inequality backing a claim is
established in exact rational arithmetic while the numbers involved are
representable; blocks too large to sum term by term are vouched for by
certified logarithm bounds instead, and the stream reports exactly where
the representation changes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .errors import (
    CapabilityError, DomainError, HorizonExhaustedError, PlanViolationError)
from .numeric import (
    Cmp, LN2_HI, LN2_LO, ONE, Rat, ZERO, ln_bounds, rat, rat_ceil, rat_floor,
    rat_str, require_certified)
from .permutations import Cycle, CyclePlan
from .sequences import (
    AllocationPlan, BracketedTotal, ExactTotal, HarmonicModel,
    NonIncreasingBeyond, PriceModel, Relabeling, WeightedCert, ZeroBeyond,
    weighted_partial_sum)

__all__ = [
    "ALL_MEMBERS_FAIL", "ANCHOR_FAILS", "AdversaryClaim", "AdversaryState",
    "CertifiedBlock", "FAILURE_IN_EVERY_CYCLE", "NO_SUCCESS_AFTER_FIRST",
    "divergence_witness", "good_index_adversary", "scaled_harmonic_gap",
    "two_cycle_adversary", "v1b_ceiling_adversary", "v1d_cycle_chooser",
    "v2a_block_adversary", "v2b_block_adversary",
]

_H = HarmonicModel()

_DEFAULT_HORIZON = 1_000_000
# largest index up to which harmonic block prices are summed exactly
_EXACT_END_CAP = 100_000
_EXPONENT_CAP = 1 << 60
_HEAD_CAP = 2_000_000
_LEADER_CAP = 10_000_000

# claim kinds: who the guard asserts will fail
NO_SUCCESS_AFTER_FIRST = "no-success-after-first-cycle"
FAILURE_IN_EVERY_CYCLE = "failure-in-every-unskipped-cycle"
ALL_MEMBERS_FAIL = "every-member-fails"
ANCHOR_FAILS = "first-member-fails"


@dataclass
class AdversaryClaim:
    """What the guard asserts about successes inside an emitted stream."""

    adversary: str
    kind: str
    detail: str = ""
    params: dict = field(default_factory=dict)


@dataclass
class AdversaryState:
    """Mutable bookkeeping shared by an adversary and its cycle stream.

    Consecutive streams record their coverage in `covered`; streams whose
    cycles scatter across the index line keep the explicit consumed set,
    which always equals the union of the cycles emitted so far.
    """

    adversary: str
    next_candidate: int = 1
    covered: int = 0
    consumed: Optional[set] = None

    def consume(self, members) -> None:
        if self.consumed is not None:
            self.consumed.update(members)


@dataclass(frozen=True)
class CertifiedBlock:
    """A block too large to enumerate, justified by logarithm bounds.

    The block runs from `start_index` (or from 2**start_exponent + 1 when
    only the exponent is representable) through 2**end_exponent.  Its exact
    price provably exceeds price_lower, every relevant amount provably
    stays below amount_upper, and the constructor insists on the strict
    gap between the two, so the block defeats its members without any of
    them being materialized.
    """

    end_exponent: int
    price_lower: Rat
    amount_upper: Rat
    start_index: Optional[int] = None
    start_exponent: Optional[int] = None

    def __post_init__(self):
        if (self.start_index is None) == (self.start_exponent is None):
            raise DomainError("exactly one start representation is required")
        if not self.price_lower > self.amount_upper:
            raise PlanViolationError(
                "certified block fails its own inequality: "
                f"{rat_str(self.price_lower)} must exceed "
                f"{rat_str(self.amount_upper)}")

    @property
    def start_label(self) -> str:
        if self.start_index is not None:
            return str(self.start_index)
        return f"2^{self.start_exponent}+1"

    def describe(self) -> str:
        return (f"block {self.start_label}..2^{self.end_exponent}: "
                f"price > {rat_str(self.price_lower)} > "
                f"{rat_str(self.amount_upper)} >= amounts")


def _int_label(n) -> str:
    n = int(n)
    if n.bit_length() > 1024:
        return f"<{n.bit_length()}-bit integer>"
    return str(n)


def _rat_label(q) -> str:
    # witness inequalities are for reading; huge exact values stay in the
    # log entries themselves and are summarized here by size
    num_bits = int(q.numerator).bit_length()
    den_bits = int(q.denominator).bit_length()
    if max(num_bits, den_bits) > 1024:
        return f"<{num_bits}/{den_bits}-bit rational>"
    return rat_str(q)


def _total_upper(alloc: AllocationPlan, width=rat(1, 64)) -> Rat:
    cert = alloc.total_cert
    if isinstance(cert, ExactTotal):
        return Rat(cert.value)
    if isinstance(cert, BracketedTotal):
        return cert.interval(width).hi
    raise CapabilityError(
        f"{alloc.name}: a certified finite total is required")


# ---------------------------------------------------------------------------
# moving heavy prices to heavy positions

def divergence_witness(model: PriceModel, target,
                       horizon: int = _DEFAULT_HORIZON):
    """A relabeling prefix whose weighted price sum provably exceeds target.

    Picks every other positive price and moves it to a position j with
    j * price > 1; after floor(target) + 1 such moves the partial weighted
    sum is above the target.  Returns (relabeling, m) where m is the last
    moved position.
    """
    target = Rat(target)
    positives = model.positive_indices()

    def next_positive() -> int:
        try:
            n = next(positives)
        except StopIteration:
            raise HorizonExhaustedError(
                f"{model.name}: ran out of positive prices before the "
                "witness was complete") from None
        if n > horizon:
            raise HorizonExhaustedError(
                f"{model.name}: no usable positive price within "
                f"horizon {horizon}")
        return n

    value = next_positive()
    if target <= ZERO:
        return Relabeling.identity(), value

    moves = rat_floor(target) + 1
    placements: dict[int, int] = {}
    position = 0
    moved_sum = ZERO
    done = 0
    while True:
        price = model.term(value)
        position = max(position + 1, rat_floor(ONE / price) + 1)
        placements[position] = value
        moved_sum += position * price
        done += 1
        if done == moves:
            break
        next_positive()  # skip one, keeping room for the bijective fill
        value = next_positive()

    delta = Relabeling(placements, name="divergence-witness")
    # each move contributes strictly more than 1, so this cannot fail
    if not moved_sum > target:
        raise PlanViolationError("witness construction lost its invariant")
    return delta, position


# ---------------------------------------------------------------------------
# good positions: reordered price tails versus enriched amounts

class _DescendingMerge:
    """Enriched amounts listed in nonincreasing order of value, lazily.

    Position k (1-based) maps to (original index, enriched amount).  The
    head of the allocation is sorted outright; beyond it the enriched
    values are already nonincreasing (declared structure for real amounts,
    strictly shrinking powers of two for fills), so a two-way merge keeps
    the whole stream ordered.  Zero amounts are replaced first: a finite
    batch of z zeros each receives 1/z, an infinite supply receives
    1/2, 1/4, 1/8, ... in index order; either way the additions sum to one.
    """

    def __init__(self, alloc: AllocationPlan):
        self.alloc = alloc
        structure = alloc.tail_structure
        if isinstance(structure, ZeroBeyond):
            head_end = max(structure.index, 0)
            fill_tail = True
        elif isinstance(structure, NonIncreasingBeyond):
            if structure.positive:
                head_end = structure.index - 1
                fill_tail = False
            else:
                head_end, fill_tail = self._vanishing_point(alloc, structure)
        else:
            raise CapabilityError(
                f"{alloc.name}: descending reordering needs a declared "
                "tail structure")
        if head_end > _HEAD_CAP:
            raise CapabilityError(
                f"{alloc.name}: head of {head_end} amounts is too large "
                "to sort")
        zeros = [i for i in range(1, head_end + 1)
                 if alloc.amount(i) == ZERO]
        self.head_end = head_end
        self.fill_tail = fill_tail
        self._head_zero_count = len(zeros)
        if fill_tail:
            self.added = ONE
            self._fills = {index: rat(1, 1 << (j + 1))
                           for j, index in enumerate(zeros)}
        elif zeros:
            self.added = ONE
            share = ONE / rat(len(zeros))
            self._fills = {index: share for index in zeros}
        else:
            self.added = ZERO
            self._fills = {}
        pairs = [(self.enriched(i), i) for i in range(1, head_end + 1)]
        pairs.sort(key=lambda pair: (-pair[0], pair[1]))
        self._head = pairs
        self._head_pos = 0
        self._tail_index = head_end + 1
        self._tail_last: Optional[Rat] = None
        self._order: list = []

    @staticmethod
    def _vanishing_point(alloc, structure) -> tuple:
        """First zero of a nonincreasing tail without a positivity
        certificate; everything from it on is zero, so fills take over."""
        base = structure.index
        if alloc.amount(base) == ZERO:
            return base - 1, True
        span = 1
        last_positive = base
        while True:
            if span > _DEFAULT_HORIZON:
                raise CapabilityError(
                    f"{alloc.name}: a nonincreasing tail with no "
                    "positivity certificate must vanish within the scan "
                    "horizon for the zero fill to be exact")
            probe = base + span
            if alloc.amount(probe) == ZERO:
                lo, hi = last_positive, probe
                while lo + 1 < hi:
                    mid = (lo + hi) // 2
                    if alloc.amount(mid) == ZERO:
                        hi = mid
                    else:
                        lo = mid
                return hi - 1, True
            last_positive = probe
            span *= 2

    def enriched(self, index: int) -> Rat:
        """The amount at an original index after zero filling."""
        if index <= self.head_end:
            fill = self._fills.get(index)
            return self.alloc.amount(index) if fill is None else fill
        if not self.fill_tail:
            return self.alloc.amount(index)
        ordinal = self._head_zero_count + (index - self.head_end)
        return rat(1, 1 << ordinal)

    def _tail_value(self) -> Rat:
        return self.enriched(self._tail_index)

    def _advance(self) -> None:
        if self._head_pos < len(self._head):
            value, index = self._head[self._head_pos]
            if value >= self._tail_value():
                self._order.append((index, value))
                self._head_pos += 1
                return
        index = self._tail_index
        value = self._tail_value()
        if self._tail_last is not None and value > self._tail_last:
            raise PlanViolationError(
                f"{self.alloc.name}: declared nonincreasing tail rises "
                f"at index {index}")
        self._tail_last = value
        self._order.append((index, value))
        self._tail_index += 1

    def pair(self, position: int):
        """(original index, enriched amount) at a reordered position."""
        while len(self._order) < position:
            self._advance()
        return self._order[position - 1]


def good_index_adversary(model: PriceModel, alloc: AllocationPlan,
                         search_horizon: int = _DEFAULT_HORIZON) -> CyclePlan:
    """Consecutive cycles in amount-descending coordinates, mapped back.

    Requires the certificate that weighted price sums diverge under every
    relabeling.  Amounts are zero-filled and reordered to be nonincreasing;
    prices travel along.  A reordered position is good when the price tail
    from it strictly exceeds its amount.  Each cycle starts at a good
    position, grows until its price passes that amount, then extends until
    the next position is good again, so the stream covers every index.
    The bad positions before the first good one ride along in cycle one,
    which is the only place a success can hide.
    """
    if model.weighted_cert is not WeightedCert.DIVERGES_ALL:
        raise CapabilityError(
            f"{model.name}: needs the certificate that weighted price "
            "sums diverge under every relabeling")
    total = model.total_cert
    if isinstance(total, ExactTotal):
        exact_total: Optional[Rat] = Rat(total.value)
    elif isinstance(total, BracketedTotal):
        exact_total = None
    else:
        raise CapabilityError(
            f"{model.name}: a certified finite price total is required")

    merge = _DescendingMerge(alloc)
    prices: list = []
    prefix: list = [ZERO]

    def extend_prices(count: int) -> None:
        while len(prices) < count:
            index = merge.pair(len(prices) + 1)[0]
            value = model.term(index)
            prices.append(value)
            prefix.append(prefix[-1] + value)

    def price_of(position: int) -> Rat:
        extend_prices(position)
        return prices[position - 1]

    def price_tail(position: int):
        extend_prices(position - 1)
        base = prefix[position - 1]
        if exact_total is not None:
            return exact_total - base
        return total.interval(rat(1, 64)).shift(-base)

    goodness: dict = {}

    def is_good(position: int) -> bool:
        known = goodness.get(position)
        if known is None:
            amount = merge.pair(position)[1]
            known = require_certified(price_tail(position),
                                      amount) is Cmp.GREATER
            goodness[position] = known
        return known

    log: list = []
    state = AdversaryState("good-index", consumed=set())

    def source() -> Iterator[Cycle]:
        position = 1
        while not is_good(position):
            position += 1
            if position > search_horizon:
                raise HorizonExhaustedError(
                    "no good position within the search horizon; the "
                    "divergence certificate promises one further out")
        start = 1
        anchor = position
        cycle_no = 0
        while True:
            target = merge.pair(anchor)[1]
            cum = ZERO
            end = anchor - 1
            while cum <= target:
                end += 1
                if end - anchor > search_horizon:
                    raise HorizonExhaustedError(
                        "cycle price failed to pass the anchor amount "
                        "within the search horizon")
                cum += price_of(end)
            while not is_good(end + 1):
                end += 1
                if end - anchor > search_horizon:
                    raise HorizonExhaustedError(
                        "no good position to close the cycle within the "
                        "search horizon")
                cum += price_of(end)
            members = tuple(merge.pair(i)[0] for i in range(start, end + 1))
            cycle_no += 1
            log.append({
                "cycle": cycle_no,
                "anchor_position": anchor,
                "anchor_index": merge.pair(anchor)[0],
                "anchor_amount": target,
                "price_from_anchor": cum,
                "bundled_bad_prefix": anchor - start,
                "inequality": f"{_rat_label(cum)} > {_rat_label(target)}",
            })
            state.consume(members)
            state.covered = end
            state.next_candidate = end + 1
            yield Cycle(members)
            start = end + 1
            anchor = end + 1

    plan = CyclePlan(name="good-index", source=source())
    plan.claim = AdversaryClaim(
        "good-index", NO_SUCCESS_AFTER_FIRST,
        detail="beyond cycle one, every member's enriched amount sits "
               "strictly below its cycle price",
        params={"enrichment_added": merge.added})
    plan.witness_log = log
    plan.state = state
    plan.enriched_amount = merge.enriched
    plan.enrichment_added = merge.added
    plan.reordered_index = lambda position: merge.pair(position)[0]
    return plan


# ---------------------------------------------------------------------------
# pigeonhole blocks against a certified finite total

def v1b_ceiling_adversary(model: PriceModel, alloc: AllocationPlan,
                          leader_cap: int = _LEADER_CAP) -> CyclePlan:
    """Blocks sized so the leader price times the size beats the total.

    Block (m .. m + s - 1) with s = ceil(T / p_m) + 1, where T is a
    certified upper bound on the allocation total: if every member could
    pay the block price (at least p_m each), the members alone would hold
    more than T.  Leaders with a free box are emitted as skipped
    singletons.  When the next leader index stops being representable the
    stream truncates and says so.
    """
    bound = _total_upper(alloc)
    log: list = []
    state = AdversaryState("ceiling-blocks")
    holder: list = []

    def source() -> Iterator[Cycle]:
        leader = 1
        cycle_no = 0
        while True:
            if leader > leader_cap:
                log.append({
                    "note": "stream truncated: next leader exceeds the "
                            "representable cap",
                    "next_leader_bits": leader.bit_length(),
                })
                if holder:
                    holder[0].covered_bound = state.covered
                return
            price = model.term(leader)
            if price == ZERO:
                non_increasing = model.nonincreasing_from
                if non_increasing is not None and leader >= non_increasing:
                    raise HorizonExhaustedError(
                        f"prices vanish from index {leader} on; every "
                        "further cycle would be a free singleton")
                cycle_no += 1
                log.append({"cycle": cycle_no, "leader": leader,
                            "skipped": True, "note": "free box"})
                state.covered = leader
                state.next_candidate = leader + 1
                yield Cycle((leader,))
                leader += 1
                continue
            size = rat_ceil(bound / price) + 1
            end = leader + size - 1
            if not size * price > bound:
                raise PlanViolationError("pigeonhole sizing lost its "
                                         "invariant")
            cycle_no += 1
            log.append({
                "cycle": cycle_no, "leader": leader,
                "leader_price": price, "size": size,
                "total_bound": bound,
                "inequality": f"{_int_label(size)} * {_rat_label(price)} > "
                              f"{_rat_label(bound)}",
            })
            state.covered = end
            state.next_candidate = end + 1
            yield Cycle.of_range(leader, end)
            leader = end + 1

    plan = CyclePlan(name="ceiling-blocks", source=source())
    holder.append(plan)
    plan.claim = AdversaryClaim(
        "ceiling-blocks", FAILURE_IN_EVERY_CYCLE,
        detail="in every unskipped block, some member's amount is below "
               "the leader price and so below the block price",
        params={"total_bound": bound})
    plan.witness_log = log
    plan.state = state
    return plan


def two_cycle_adversary(model: PriceModel, alloc: AllocationPlan,
                        search_horizon: int = _DEFAULT_HORIZON) -> CyclePlan:
    """Pairs each leader with a partner too poor for the leader's box.

    Takes the smallest unconsumed index l; if its box is free the cycle
    (l) is emitted and marked skipped, otherwise it searches the smallest
    unconsumed n with amount(n) < price(l) and emits (l, n): the partner
    cannot pay even the leader's box, let alone the pair.
    """
    log: list = []
    state = AdversaryState("two-cycles", consumed=set())
    consumed = state.consumed

    def source() -> Iterator[Cycle]:
        cycle_no = 0
        floor_index = 1
        while True:
            leader = floor_index
            while leader in consumed:
                leader += 1
            price = model.term(leader)
            consumed.add(leader)
            state.next_candidate = leader + 1
            if price == ZERO:
                cycle_no += 1
                log.append({"cycle": cycle_no, "leader": leader,
                            "skipped": True, "note": "free box"})
                yield Cycle((leader,))
                floor_index = leader + 1
                continue
            partner = leader + 1
            scanned = 0
            while True:
                if partner not in consumed:
                    if alloc.amount(partner) < price:
                        break
                    scanned += 1
                    if scanned > search_horizon:
                        raise HorizonExhaustedError(
                            f"no unconsumed index with amount below "
                            f"{rat_str(price)} within {search_horizon} "
                            f"candidates past {leader}")
                partner += 1
            consumed.add(partner)
            cycle_no += 1
            log.append({
                "cycle": cycle_no, "leader": leader, "partner": partner,
                "leader_price": price,
                "partner_amount": alloc.amount(partner),
                "inequality": f"{_rat_label(alloc.amount(partner))} < "
                              f"{_rat_label(price)}",
            })
            yield Cycle((leader, partner))
            floor_index = leader + 1

    plan = CyclePlan(name="two-cycles", source=source())
    plan.claim = AdversaryClaim(
        "two-cycles", FAILURE_IN_EVERY_CYCLE,
        detail="the partner in every unskipped pair cannot pay the "
               "leader's box price")
    plan.witness_log = log
    plan.state = state
    return plan


def v1d_cycle_chooser(model: PriceModel, total=ONE,
                      leader_cap: int = _LEADER_CAP,
                      search_horizon: int = _DEFAULT_HORIZON) -> CyclePlan:
    """Allocation-independent blocks with a pigeonhole witness member.

    Block (m+1 .. m+k) takes the smallest k whose largest price p_i inside
    satisfies k * p_i > total: if all k members could pay a price at least
    p_i, together they would hold more than the total.  Works against
    every allocation bounded by the given total, which is why it needs no
    look at the amounts.
    """
    bound = Rat(total)
    if bound < ZERO:
        raise DomainError("the total bound cannot be negative")
    log: list = []
    state = AdversaryState("pigeonhole-blocks")
    holder: list = []

    def source() -> Iterator[Cycle]:
        covered = 0
        cycle_no = 0
        while True:
            start = covered + 1
            if start > leader_cap:
                log.append({
                    "note": "stream truncated: next block start exceeds "
                            "the representable cap",
                    "next_start_bits": start.bit_length(),
                })
                if holder:
                    holder[0].covered_bound = covered
                return
            non_increasing = model.nonincreasing_from
            if non_increasing is not None and start >= non_increasing:
                best_price = model.term(start)
                if best_price == ZERO:
                    raise HorizonExhaustedError(
                        f"prices vanish from index {start} on; no block "
                        "can exceed the pigeonhole bound")
                witness = start
                size = rat_floor(bound / best_price) + 1
            else:
                best_price = ZERO
                witness = None
                size = None
                for offset in range(1, search_horizon + 1):
                    price = model.term(covered + offset)
                    if price > best_price:
                        best_price, witness = price, covered + offset
                    if best_price > ZERO and offset * best_price > bound:
                        size = offset
                        break
                if size is None:
                    raise HorizonExhaustedError(
                        "no block within the search horizon beats the "
                        "pigeonhole bound")
            end = covered + size
            if not size * best_price > bound:
                raise PlanViolationError("block sizing lost its invariant")
            cycle_no += 1
            log.append({
                "cycle": cycle_no, "start": start, "size": size,
                "witness_index": witness, "witness_price": best_price,
                "total_bound": bound,
                "inequality": f"{_int_label(size)} * "
                              f"{_rat_label(best_price)} > "
                              f"{_rat_label(bound)}",
            })
            state.covered = end
            state.next_candidate = end + 1
            yield Cycle.of_range(start, end)
            covered = end

    plan = CyclePlan(name="pigeonhole-blocks", source=source())
    holder.append(plan)
    plan.claim = AdversaryClaim(
        "pigeonhole-blocks", FAILURE_IN_EVERY_CYCLE,
        detail="each block holds a witness price p with size * p above "
               "the total, so against any allocation within the total "
               "some member cannot pay",
        params={"total_bound": bound})
    plan.witness_log = log
    plan.state = state
    return plan


# ---------------------------------------------------------------------------
# harmonic block adversaries for the fixed-price variants

def _least_block_end(anchor: int, target_fn, end_cap: int):
    """Smallest end in [anchor, end_cap] whose harmonic price from the
    anchor strictly exceeds target_fn(end), or None when even end_cap
    cannot (the caller then switches representation)."""
    cum = ZERO
    cursor = anchor - 1
    step = 64
    while cursor < end_cap:
        upto = min(cursor + step, end_cap)
        chunk = _H.range_sum(cursor + 1, upto)
        if cum + chunk > target_fn(upto):
            lo, hi = cursor + 1, upto
            while lo < hi:
                mid = (lo + hi) // 2
                if cum + _H.range_sum(cursor + 1, mid) > target_fn(mid):
                    hi = mid
                else:
                    lo = mid + 1
            return lo, cum + _H.range_sum(cursor + 1, lo)
        cum += chunk
        cursor = upto
        step *= 2
    return None


def _next_certified(phase: dict, alloc: AllocationPlan, per_member: bool,
                    exponent_cap: int) -> CertifiedBlock:
    """Continue a finished exact stream with one power-of-two block.

    The block price over (s, 2^E] is below-bounded by E*ln2 minus a
    certified upper bound on ln(s); amounts are above-bounded through the
    allocation's amount_upper_pow2 hook (or the exact anchor amount when
    the anchor is still an ordinary index)."""
    hook = getattr(alloc, "amount_upper_pow2", None)
    previous = phase["prev_exp"]
    if previous is None:
        anchor = phase["anchor_index"]
        ln_start_hi = ln_bounds(anchor)[1] if anchor > 1 else ZERO
        floor_exp = max(2, anchor.bit_length())
        start_index, start_exponent = anchor, None
    else:
        # anchor is 2^previous + 1; ln(2^e + 1) <= e ln2 + 2^-e
        ln_start_hi = previous * LN2_HI + rat(1, 1 << min(previous, 64))
        floor_exp = previous + 1
        start_index, start_exponent = None, previous

    if per_member:
        if hook is None:
            raise CapabilityError(
                f"{alloc.name}: lacks a certified amount bound over "
                "power-of-two prefixes")
        amount_bound: Callable[[int], Rat] = hook
    else:
        if start_index is not None:
            fixed = alloc.amount(start_index)
        else:
            if hook is None:
                raise CapabilityError(
                    f"{alloc.name}: lacks a certified amount bound over "
                    "power-of-two prefixes")
            fixed = hook(previous + 1)  # the anchor sits below 2^(prev+1)
        amount_bound = lambda exp: fixed

    def beats(exp: int) -> bool:
        return exp * LN2_LO - ln_start_hi > amount_bound(exp)

    exp = floor_exp
    while not beats(exp):
        exp *= 2
        if exp > exponent_cap:
            raise HorizonExhaustedError(
                f"{alloc.name}: no power-of-two block end is certifiable; "
                "the amounts keep pace with the price sums")
    lo, hi = floor_exp, exp
    while lo < hi:
        mid = (lo + hi) // 2
        if beats(mid):
            hi = mid
        else:
            lo = mid + 1
    block = CertifiedBlock(
        end_exponent=lo,
        price_lower=lo * LN2_LO - ln_start_hi,
        amount_upper=amount_bound(lo),
        start_index=start_index,
        start_exponent=start_exponent)
    phase["prev_exp"] = lo
    return block


def _harmonic_block_plan(alloc: AllocationPlan, per_member: bool, name: str,
                         exact_end_cap: int,
                         exponent_cap: int) -> CyclePlan:
    log: list = []
    state = AdversaryState(name)
    phase = {"anchor": 1, "transitioned": False, "anchor_index": None,
             "prev_exp": None}
    holder: list = []

    def target_for(anchor: int):
        if per_member:
            return lambda end: alloc.max_in_range(anchor, end)
        fixed = alloc.amount(anchor)
        return lambda end: fixed

    def source() -> Iterator[Cycle]:
        cycle_no = 0
        while True:
            anchor = phase["anchor"]
            target_fn = target_for(anchor)
            found = _least_block_end(anchor, target_fn, exact_end_cap)
            if found is None:
                phase["transitioned"] = True
                phase["anchor_index"] = anchor
                if cycle_no == 0:
                    raise HorizonExhaustedError(
                        f"{name}: no block ending by {exact_end_cap} "
                        "defeats this allocation; if one exists it lies "
                        "beyond the exact horizon")
                log.append({
                    "note": "exact stream ends; certified_blocks "
                            "continues it",
                    "next_anchor": anchor,
                })
                if holder:
                    holder[0].covered_bound = anchor - 1
                return
            end, price = found
            amount_bound = target_fn(end)
            cycle_no += 1
            log.append({
                "cycle": cycle_no, "anchor": anchor, "end": end,
                "price": price, "amount_bound": amount_bound,
                "inequality": f"{_rat_label(price)} > "
                              f"{_rat_label(amount_bound)}",
            })
            state.covered = end
            state.next_candidate = end + 1
            phase["anchor"] = end + 1
            yield Cycle.of_range(anchor, end)

    plan = CyclePlan(name=name, source=source())
    holder.append(plan)
    plan.witness_log = log
    plan.state = state
    certified: list = []

    def certified_blocks(count: int) -> list:
        plan.materialize(exact_end_cap + 1)
        if not phase["transitioned"]:
            raise HorizonExhaustedError(
                f"{name}: the exact stream is still running; certified "
                "blocks only continue a finished one")
        while len(certified) < count:
            certified.append(
                _next_certified(phase, alloc, per_member, exponent_cap))
        return list(certified[:count])

    plan.certified_blocks = certified_blocks
    return plan


def v2a_block_adversary(alloc: AllocationPlan,
                        exact_end_cap: int = _EXACT_END_CAP,
                        exponent_cap: int = _EXPONENT_CAP) -> CyclePlan:
    """Consecutive harmonic blocks whose price beats every amount inside.

    Greedily minimal block ends; since amounts inside each block all sit
    strictly below the block price, the set of successful prisoners stays
    finite, defeating the release rule that needs infinitely many.  Once
    block ends stop being exactly summable, certified_blocks(count)
    continues the stream with power-of-two blocks proved by log bounds.
    """
    plan = _harmonic_block_plan(alloc, True, "v2a-blocks",
                                exact_end_cap, exponent_cap)
    plan.claim = AdversaryClaim(
        "v2a-blocks", ALL_MEMBERS_FAIL,
        detail="each block's price strictly exceeds the largest amount "
               "carried by any of its members")
    return plan


def v2b_block_adversary(alloc: AllocationPlan,
                        exact_end_cap: int = _EXACT_END_CAP,
                        exponent_cap: int = _EXPONENT_CAP) -> CyclePlan:
    """Consecutive harmonic blocks whose price beats the first amount.

    Every block's first member fails, so cofinitely many successes are
    impossible no matter the allocation; harmonic divergence guarantees
    each block closes.  The certified continuation mirrors
    v2a_block_adversary.
    """
    plan = _harmonic_block_plan(alloc, False, "v2b-blocks",
                                exact_end_cap, exponent_cap)
    plan.claim = AdversaryClaim(
        "v2b-blocks", ANCHOR_FAILS,
        detail="the first member of each block cannot pay the block price")
    return plan


def scaled_harmonic_gap(k: int, c) -> int:
    """Smallest n >= k with harmonic_sum(k, n) > c * H_n, for 0 < c < 1.

    Exists because the head H_{k-1} is a vanishing share of H_n; found by
    doubling and bisection over exact harmonic prefixes.
    """
    if k < 1:
        raise DomainError("k must be at least 1")
    c = Rat(c)
    if not ZERO < c < ONE:
        raise DomainError("the scale must lie strictly between 0 and 1")
    goal = _H.prefix_sum(k - 1) / (ONE - c)
    if _H.prefix_sum(k) > goal:
        return k
    lo, hi = k, 2 * k
    while _H.prefix_sum(hi) <= goal:
        lo, hi = hi, 2 * hi
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if _H.prefix_sum(mid) > goal:
            hi = mid
        else:
            lo = mid
    return hi

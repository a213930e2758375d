"""Adversary streams against hand-computed blocks and exact inequalities."""
import pytest
from hypothesis import given, settings, strategies as st

from prisoners.adversaries import (
    ALL_MEMBERS_FAIL, ANCHOR_FAILS, CertifiedBlock, FAILURE_IN_EVERY_CYCLE,
    NO_SUCCESS_AFTER_FIRST, divergence_witness, good_index_adversary,
    scaled_harmonic_gap, two_cycle_adversary, v1b_ceiling_adversary,
    v1d_cycle_chooser, v2a_block_adversary, v2b_block_adversary,
)
from prisoners.errors import (
    CapabilityError, DomainError, HorizonExhaustedError, NotMaterializedError,
    PlanViolationError,
)
from prisoners.numeric import (
    LN2_LO, ONE, ZERO, harmonic_sum, ln_bounds, rat,
)
from prisoners.permutations import validate_plan
from prisoners.sequences import (
    CustomModel, ExactTotal, FnAllocation, GeometricTail, HarmonicModel,
    NonIncreasingBeyond, TableAllocation, ZeroTail, builtin_model,
    weighted_partial_sum,
)
from prisoners.strategies import build_baseline_geometric, build_v2_strategy

GEO = builtin_model("geometric", ratio=rat(1, 2))
INV = builtin_model("inverse-square")


def pow2_alloc():
    return FnAllocation(
        "pow2", lambda n: rat(1, 2 ** n),
        total_cert=ExactTotal(ONE),
        tail_structure=NonIncreasingBeyond(1, True))


def spans(cycles):
    return [(c.min_member, c.max_member) for c in cycles]


# ---------------------------------------------------------------------------
# divergence witness

def test_witness_moves_heavy_prices_to_heavy_positions():
    delta, m = divergence_witness(GEO, 10)
    placed = sorted((int(j), v) for j, v in delta.placements.items())
    # value 2^-i lands at position 2^i + 1, values are every other index
    assert placed[:4] == [(3, 1), (9, 3), (33, 5), (129, 7)]
    assert len(placed) == 11  # floor(10) + 1 moves
    assert m == placed[-1][0] == 2 ** 21 + 1
    for j, v in placed:
        assert j * GEO.term(v) > ONE


def test_witness_partial_sum_verified_exactly_at_small_target():
    delta, m = divergence_witness(GEO, 3)
    assert weighted_partial_sum(GEO, delta, m) > 3


def test_witness_zero_target_is_identity():
    delta, m = divergence_witness(GEO, 0)
    assert delta.is_identity
    assert m == 1


def test_witness_needs_infinitely_many_positive_prices():
    finite = CustomModel({1: rat(1, 2), 2: rat(1, 4)}, ZeroTail(3),
                         name="finite")
    with pytest.raises(HorizonExhaustedError):
        divergence_witness(finite, 5)


# ---------------------------------------------------------------------------
# good positions

def test_good_index_singleton_first_cycle_on_halving_amounts():
    plan = good_index_adversary(INV, pow2_alloc())
    cycles = plan.materialize(3)
    # price tail from 1 brackets above 1/2 and p_1 = 1 beats a_1 = 1/2,
    # position 2 is good again, so the first cycle is the singleton (1)
    assert tuple(cycles[0].members) == (1,)
    assert plan.claim.kind == NO_SUCCESS_AFTER_FIRST
    assert plan.enrichment_added == ZERO  # no zeros to fill
    assert validate_plan(plan, plan.state.covered) == []


def test_good_index_zero_fill_single_zero_gets_whole_unit():
    base = build_baseline_geometric()  # a_1 = 0 is the only zero
    plan = good_index_adversary(INV, base)
    plan.materialize(1)
    assert plan.enrichment_added == ONE
    assert plan.enriched_amount(1) == ONE
    assert plan.enriched_amount(2) == rat(1, 2)


def test_good_index_zero_fill_finite_batch_shares_equally():
    tab = TableAllocation(
        {1: ZERO, 2: rat(1, 2), 3: ZERO, 4: rat(1, 4)},
        GeometricTail(rat(1, 2), 5), name="two-zeros")
    plan = good_index_adversary(INV, tab)
    plan.materialize(1)
    assert plan.enriched_amount(1) == rat(1, 2)
    assert plan.enriched_amount(3) == rat(1, 2)
    assert plan.enrichment_added == ONE


def test_good_index_zero_fill_infinite_tail_uses_halving_fills():
    tab = TableAllocation({1: rat(1, 2), 2: ZERO, 3: rat(1, 4)},
                          ZeroTail(4), name="zero-tail")
    plan = good_index_adversary(INV, tab)
    plan.materialize(2)
    assert plan.enriched_amount(2) == rat(1, 2)   # first zero
    assert plan.enriched_amount(4) == rat(1, 4)   # second zero
    assert plan.enriched_amount(5) == rat(1, 8)
    # enriched amounts approach original total + 1 = 7/4 + ... = 1 + 3/4
    total = sum(plan.enriched_amount(i) for i in range(1, 30))
    assert ZERO < (rat(3, 4) + ONE) - total < rat(1, 2 ** 20)


def test_good_index_every_later_cycle_defeats_enriched_amounts():
    plan = good_index_adversary(INV, pow2_alloc())
    cycles = plan.materialize(12)
    for cycle, entry in zip(cycles[1:], plan.witness_log[1:]):
        price = cycle.price(INV)
        for member in cycle.members:
            assert plan.enriched_amount(member) < price
        assert entry["price_from_anchor"] <= price
    assert validate_plan(plan, plan.state.covered) == []
    # consumed set equals the union of emitted cycles
    union = set()
    for cycle in cycles:
        union.update(cycle.members)
    assert plan.state.consumed == union


def test_good_index_reorders_amounts_descending():
    tab = TableAllocation(
        {1: rat(1, 16), 2: rat(1, 2), 3: rat(1, 8), 4: rat(1, 4)},
        GeometricTail(rat(1, 2), 5), name="shuffled")
    plan = good_index_adversary(INV, tab)
    plan.materialize(2)
    order = [plan.reordered_index(k) for k in range(1, 7)]
    # 1/2@2, 1/4@4, 1/8@3, 1/16@1, then the geometric tail takes over
    assert order == [2, 4, 3, 1, 5, 6]
    values = [plan.enriched_amount(i) for i in order]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_good_index_requires_divergence_certificate():
    with pytest.raises(CapabilityError):
        good_index_adversary(GEO, pow2_alloc())


def test_good_index_requires_finite_price_total():
    with pytest.raises(CapabilityError):
        good_index_adversary(HarmonicModel(), pow2_alloc())


def test_good_index_requires_tail_structure():
    bare = FnAllocation("bare", lambda n: rat(1, 2 ** n))
    with pytest.raises(CapabilityError):
        good_index_adversary(INV, bare)


# ---------------------------------------------------------------------------
# ceiling blocks

def test_ceiling_blocks_match_hand_computation():
    plan = v1b_ceiling_adversary(GEO, pow2_alloc())
    cycles = plan.materialize(2)
    assert spans(cycles) == [(1, 3), (4, 20)]
    # leader 21 needs 2^21 + 1 members
    third = plan.materialize(3)[2]
    assert (third.min_member, third.max_member) == (21, 21 + 2 ** 21)
    assert plan.claim.kind == FAILURE_IN_EVERY_CYCLE
    assert plan.claim.params["total_bound"] == ONE


def test_ceiling_pigeonhole_inequality_holds_even_for_jumbo_blocks():
    plan = v1b_ceiling_adversary(GEO, pow2_alloc())
    cycles = plan.materialize(10)
    assert len(cycles) == 4  # the fifth leader is not representable
    assert plan.covered_bound is not None
    assert plan.witness_log[-1]["note"].startswith("stream truncated")
    assert plan.witness_log[-1]["next_leader_bits"] == 2097175
    for entry in plan.witness_log[:-1]:
        assert entry["size"] * entry["leader_price"] > entry["total_bound"]


def test_ceiling_truncation_stops_identity_fallback():
    plan = v1b_ceiling_adversary(GEO, pow2_alloc(), leader_cap=20)
    assert spans(plan.materialize(5)) == [(1, 3), (4, 20)]
    assert plan.covered_bound == 20
    assert plan.cycle_containing(10).contains(4)
    with pytest.raises(NotMaterializedError):
        plan.cycle_containing(21)


def test_ceiling_skips_free_leaders_and_fails_on_vanishing_tails():
    sporadic = CustomModel({1: ZERO, 2: rat(1, 2)},
                           GeometricTail(rat(1, 2), 3), name="sporadic")
    plan = v1b_ceiling_adversary(sporadic, pow2_alloc())
    cycles = plan.materialize(2)
    assert tuple(cycles[0].members) == (1,)
    assert plan.witness_log[0]["skipped"] is True
    assert spans(cycles)[1] == (2, 4)  # ceil(1/(1/2)) + 1 = 3 members

    dead = CustomModel({1: rat(1, 2)}, ZeroTail(2), name="dead")
    with pytest.raises(HorizonExhaustedError):
        v1b_ceiling_adversary(dead, pow2_alloc()).materialize(2)


def test_ceiling_requires_certified_total():
    with pytest.raises(CapabilityError):
        v1b_ceiling_adversary(GEO, FnAllocation("bare", lambda n: ZERO))


# ---------------------------------------------------------------------------
# two-cycles

def test_two_cycle_pairs_match_hand_computation():
    plan = two_cycle_adversary(GEO, pow2_alloc())
    cycles = plan.materialize(4)
    assert [tuple(c.members) for c in cycles] == [
        (1, 2), (3, 4), (5, 6), (7, 8)]
    for entry in plan.witness_log:
        assert entry["partner_amount"] < entry["leader_price"]
    assert plan.state.consumed == set(range(1, 9))
    assert validate_plan(plan, 8) == []


def test_two_cycle_skips_consumed_partners():
    # partner amounts force skipping ahead: a_2 too rich for leader 1
    amounts = {1: rat(1, 2), 2: ONE, 3: rat(1, 64), 4: rat(1, 64)}
    alloc = TableAllocation(amounts, GeometricTail(rat(1, 2), 5),
                            name="rich-2")
    plan = two_cycle_adversary(GEO, alloc)
    cycles = plan.materialize(3)
    assert tuple(cycles[0].members) == (1, 3)
    assert tuple(cycles[1].members) == (2, 4)  # 2 is the next leader
    assert tuple(cycles[2].members) == (5, 6)


def test_two_cycle_free_leader_is_skipped_singleton():
    sporadic = CustomModel({1: ZERO}, GeometricTail(rat(1, 2), 2),
                           name="free-first")
    plan = two_cycle_adversary(sporadic, pow2_alloc())
    cycles = plan.materialize(2)
    assert tuple(cycles[0].members) == (1,)
    assert plan.witness_log[0]["skipped"] is True
    assert tuple(cycles[1].members) == (2, 3)


def test_two_cycle_reports_exhausted_search():
    ones = FnAllocation("ones", lambda n: ONE)
    plan = two_cycle_adversary(GEO, ones, search_horizon=64)
    with pytest.raises(HorizonExhaustedError):
        plan.materialize(1)


# ---------------------------------------------------------------------------
# allocation-independent blocks

def test_v1d_blocks_match_hand_computation():
    plan = v1d_cycle_chooser(GEO)
    cycles = plan.materialize(3)
    assert spans(cycles) == [(1, 3), (4, 20), (21, 21 + 2 ** 21)]
    first, second = plan.witness_log[:2]
    assert (first["size"], first["witness_index"]) == (3, 1)
    assert (second["size"], second["witness_index"]) == (17, 4)
    for entry in plan.witness_log:
        assert entry["size"] * entry["witness_price"] > ONE


def test_v1d_block_size_is_minimal_on_nonincreasing_prices():
    plan = v1d_cycle_chooser(GEO)
    plan.materialize(3)
    for entry in plan.witness_log:
        size, price = entry["size"], entry["witness_price"]
        assert (size - 1) * price <= ONE


def test_v1d_absorbs_zero_stretch_with_witness_beyond_it():
    stretch = CustomModel({1: ZERO, 2: ZERO, 3: ZERO, 4: rat(1, 2)},
                          GeometricTail(rat(1, 2), 5), name="stretch")
    plan = v1d_cycle_chooser(stretch)
    cycles = plan.materialize(2)
    assert spans(cycles) == [(1, 4), (5, 37)]
    assert plan.witness_log[0]["witness_index"] == 4
    assert plan.witness_log[0]["size"] == 4


def test_v1d_respects_alternate_total_bound():
    plan = v1d_cycle_chooser(GEO, total=rat(1, 4))
    cycles = plan.materialize(1)
    # k = floor((1/4)/(1/2)) + 1 = 1
    assert spans(cycles) == [(1, 1)]
    assert plan.claim.params["total_bound"] == rat(1, 4)


def test_v1d_fails_loudly_when_prices_vanish():
    dead = CustomModel({1: rat(1, 2)}, ZeroTail(2), name="dead")
    with pytest.raises(HorizonExhaustedError):
        v1d_cycle_chooser(dead).materialize(2)


# ---------------------------------------------------------------------------
# harmonic block adversaries

def test_v2a_constant_blocks_match_hand_computation():
    plan = v2a_block_adversary(build_v2_strategy("constant1"))
    cycles = plan.materialize(2)
    assert spans(cycles) == [(1, 2), (3, 7)]
    assert harmonic_sum(3, 7) == rat(153, 140)
    assert harmonic_sum(3, 6) < ONE < harmonic_sum(3, 7)
    assert plan.claim.kind == ALL_MEMBERS_FAIL


def test_v2a_block_prices_exceed_every_member_amount():
    alloc = build_v2_strategy("scaled", c=rat(1, 2))
    plan = v2a_block_adversary(alloc)
    cycles = plan.materialize(4)
    assert spans(cycles) == [(1, 1), (2, 4), (5, 36), (37, 2373)]
    for cycle, entry in zip(cycles, plan.witness_log):
        price = entry["price"]
        top = max(alloc.amount(n) for n in
                  range(cycle.min_member, min(cycle.max_member, 40) + 1))
        assert top <= entry["amount_bound"] < price
    # greedy minimality: one index earlier the block no longer wins
    for entry in plan.witness_log:
        anchor, end = entry["anchor"], entry["end"]
        if end > anchor:
            assert harmonic_sum(anchor, end - 1) <= alloc.max_in_range(
                anchor, end - 1)


def test_v2a_exact_ends_agree_with_scaled_gap():
    alloc = build_v2_strategy("scaled", c=rat(1, 2))
    plan = v2a_block_adversary(alloc)
    ends = [c.max_member for c in plan.materialize(4)]
    anchors = [1] + [e + 1 for e in ends[:-1]]
    assert ends == [scaled_harmonic_gap(a, rat(1, 2)) for a in anchors]


def test_v2a_certified_continuation_for_scaled_amounts():
    alloc = build_v2_strategy("scaled", c=rat(1, 2))
    plan = v2a_block_adversary(alloc)
    blocks = plan.certified_blocks(3)
    assert [b.start_label for b in blocks] == ["2374", "2^24+1", "2^50+1"]
    assert [b.end_exponent for b in blocks] == [24, 50, 102]
    for block in blocks:
        assert block.price_lower > block.amount_upper
    # the certified price bound really is below the true block price:
    # E*ln2_lo - ln_hi(start) understates sum of 1/i over the block
    first = blocks[0]
    assert first.price_lower == 24 * LN2_LO - ln_bounds(2374)[1]
    assert plan.covered_bound == 2373
    with pytest.raises(NotMaterializedError):
        plan.cycle_containing(2374)


def test_v2a_reports_horizon_error_against_harmonic_prefix():
    plan = v2a_block_adversary(build_v2_strategy("harmonic-prefix"))
    with pytest.raises(HorizonExhaustedError):
        plan.materialize(1)


def test_v2b_blocks_and_certified_continuation_for_harmonic_prefix():
    plan = v2b_block_adversary(build_v2_strategy("harmonic-prefix"))
    cycles = plan.materialize(5)
    assert spans(cycles) == [(1, 2), (3, 16), (17, 514)]
    # H(3..16) > H_3 while H(3..15) fails: the anchor cannot pay
    h = HarmonicModel()
    assert harmonic_sum(3, 16) > h.prefix_sum(3) >= harmonic_sum(3, 15)
    blocks = plan.certified_blocks(4)
    assert [b.end_exponent for b in blocks] == [19, 41, 85, 173]
    assert blocks[0].start_index == 515
    assert blocks[0].amount_upper == h.prefix_sum(515)
    assert plan.claim.kind == ANCHOR_FAILS


def test_v2b_anchor_rule_terminates_where_v2a_cannot():
    hp = build_v2_strategy("harmonic-prefix")
    plan = v2b_block_adversary(hp)
    assert spans(plan.materialize(1)) == [(1, 2)]


def test_v2b_all_zero_allocation_yields_singletons():
    zero = FnAllocation("zero", lambda n: ZERO,
                        total_cert=ExactTotal(ZERO),
                        tail_structure=NonIncreasingBeyond(1, False))
    plan = v2b_block_adversary(zero)
    cycles = plan.materialize(5)
    assert [tuple(c.members) for c in cycles] == [
        (1,), (2,), (3,), (4,), (5,)]


def test_v2b_small_table_allocation_stays_exact_for_many_blocks():
    entries = {1: rat(3, 8), 2: rat(1, 8), 3: rat(1, 4)}
    alloc = TableAllocation(entries, GeometricTail(rat(1, 2), 4),
                            name="small")
    plan = v2b_block_adversary(alloc)
    cycles = plan.materialize(30)
    assert len(cycles) == 30
    for cycle, entry in zip(cycles, plan.witness_log):
        assert alloc.amount(cycle.min_member) < entry["price"]
    assert validate_plan(plan, plan.state.covered) == []


def test_certified_block_rejects_non_strict_inequality():
    with pytest.raises(PlanViolationError):
        CertifiedBlock(end_exponent=4, price_lower=ONE, amount_upper=ONE,
                       start_index=3)
    with pytest.raises(DomainError):
        CertifiedBlock(end_exponent=4, price_lower=ONE, amount_upper=ZERO)


# ---------------------------------------------------------------------------
# scaled harmonic gaps

def test_scaled_gap_frozen_values():
    assert scaled_harmonic_gap(2, rat(1, 2)) == 4
    assert scaled_harmonic_gap(1, rat(1, 2)) == 1
    assert scaled_harmonic_gap(1, rat(99, 100)) == 1
    assert scaled_harmonic_gap(5, rat(1, 2)) == 36


def test_scaled_gap_rejects_bad_scale():
    with pytest.raises(DomainError):
        scaled_harmonic_gap(2, ONE)
    with pytest.raises(DomainError):
        scaled_harmonic_gap(2, ZERO)
    with pytest.raises(DomainError):
        scaled_harmonic_gap(0, rat(1, 2))


@given(st.integers(min_value=1, max_value=12),
       st.integers(min_value=1, max_value=7))
@settings(max_examples=60, deadline=None)
def test_scaled_gap_minimality_property(k, tenths):
    c = rat(tenths, 10)
    n = scaled_harmonic_gap(k, c)
    h = HarmonicModel()
    assert n >= k
    assert harmonic_sum(k, n) > c * h.prefix_sum(n)
    if n > k:
        assert harmonic_sum(k, n - 1) <= c * h.prefix_sum(n - 1)


def test_scaled_gap_monotone_in_scale():
    previous = 0
    for tenths in range(1, 9):
        n = scaled_harmonic_gap(3, rat(tenths, 10))
        assert n >= previous
        previous = n


# ---------------------------------------------------------------------------
# stream-level invariants

@pytest.mark.parametrize("count", [1, 2, 3, 4])
def test_all_streams_validate_on_prefixes(count):
    plans = [
        two_cycle_adversary(GEO, pow2_alloc()),
        v1d_cycle_chooser(GEO),
        v2a_block_adversary(build_v2_strategy("constant1")),
        v2b_block_adversary(build_v2_strategy("constant1")),
    ]
    for plan in plans:
        cycles = plan.materialize(count)
        assert len(cycles) == count
        bound = min(plan.pulled_bound, 10_000)
        assert validate_plan(plan, bound) == []

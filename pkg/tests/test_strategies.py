"""Builder outputs against hand-computed and independently summed values."""
import pytest
from hypothesis import given, settings, strategies as st

from prisoners.errors import (
    CapabilityError, DomainError, PlanViolationError,
)
from prisoners.numeric import ONE, ZERO, rat
from prisoners.permutations import Cycle, CyclePlan
from prisoners.sequences import (
    CustomModel, ExactTotal, GeometricTail, NonIncreasingBeyond, Relabeling,
    ZeroBeyond, ZeroTail, builtin_model,
)
from prisoners.strategies import (
    StrategyDescriptor, build_baseline_geometric,
    build_bounded_diameter_strategy, build_bounded_length_strategy,
    build_cycle_informed_strategy, build_tail_sum_strategy,
    build_v2_strategy,
)

GEO = builtin_model("geometric", ratio=rat(1, 2))


def test_baseline_amounts_and_total():
    alloc = build_baseline_geometric()
    assert alloc.amount(1) == ZERO
    assert alloc.amount(2) == rat(1, 2)
    assert alloc.amount(4) == rat(1, 8)
    assert alloc.total_cert == ExactTotal(ONE)
    assert alloc.descriptor.success_pattern() == {
        "scope": "least-member", "cutoff": 2}
    # finite prefixes stay strictly under the declared total
    running = ZERO
    for n in range(1, 60):
        running += alloc.amount(n)
        assert running < ONE


def test_tail_sum_geometric_matches_walkthrough():
    alloc, m = build_tail_sum_strategy(GEO, total=ONE)
    assert m == 3
    assert alloc.amount(1) == rat(1, 2)
    assert alloc.amount(2) == ZERO
    assert alloc.amount(3) == rat(1, 4)
    assert alloc.amount(4) == rat(1, 8)
    assert alloc.total_cert == ExactTotal(ONE)
    assert alloc.tail_structure == NonIncreasingBeyond(3, positive=True)
    pat = alloc.descriptor.success_pattern()
    assert pat["scope"] == "least-member" and pat["cutoff"] == 3


def test_tail_sum_smaller_budget_pushes_cutoff():
    alloc, m = build_tail_sum_strategy(GEO, total=rat(1, 4))
    assert m == 5
    # second tail at 5 is 1/8, slack is 1/4 - 1/8
    assert alloc.amount(1) == rat(1, 8)
    assert alloc.amount(5) == rat(1, 16)


def test_tail_sum_finite_support():
    model = CustomModel({1: rat(1, 2), 2: rat(1, 4), 3: rat(1, 4)},
                        ZeroTail(4), name="finite")
    alloc, m = build_tail_sum_strategy(model, total=ONE)
    assert m == 2
    assert alloc.amount(1) == rat(1, 4)
    assert alloc.amount(2) == rat(1, 2)
    assert alloc.amount(3) == rat(1, 4)
    assert alloc.amount(9) == ZERO
    assert alloc.tail_structure == ZeroBeyond(3)
    total = sum((alloc.amount(n) for n in range(1, 10)), ZERO)
    assert total == ONE


def test_tail_sum_rearranged_prefix():
    delta = Relabeling.swap(1, 2)
    alloc, m = build_tail_sum_strategy(GEO, delta=delta, total=ONE)
    # rearranged prices (1/4, 1/2, 1/8, ...): tails still halve from 3 on
    assert m == 3
    assert alloc.amount(1) == rat(1, 2)
    assert alloc.amount(3) == rat(1, 4)
    assert alloc.descriptor.params["relabeling"] == [[1, 2], [2, 1]]


def test_tail_sum_needs_exact_tails():
    with pytest.raises(CapabilityError):
        build_tail_sum_strategy(builtin_model("inverse-square"))
    with pytest.raises(CapabilityError):
        build_tail_sum_strategy(builtin_model("harmonic"))


def test_bounded_length_geometric():
    alloc, m = build_bounded_length_strategy(GEO, k=2, total=ONE)
    assert m == 3
    assert alloc.amount(2) == ZERO
    assert alloc.amount(3) == rat(1, 4)
    assert alloc.amount(5) == rat(1, 16)
    assert alloc.total_cert == ExactTotal(rat(1, 2))
    assert alloc.max_in_range(1, 10) == rat(1, 4)
    assert alloc.max_in_range(4, 9) == rat(1, 8)
    assert alloc.descriptor.success_pattern() == {
        "scope": "max-price-member", "cutoff": 3}


def test_bounded_length_unit_bound_funds_prices():
    alloc, m = build_bounded_length_strategy(GEO, k=1, total=ONE)
    assert m == 2
    for n in range(2, 12):
        assert alloc.amount(n) == GEO.term(n)


def test_bounded_length_inverse_square_certified():
    model = builtin_model("inverse-square")
    alloc, m = build_bounded_length_strategy(model, k=3, total=ONE)
    assert m == 4
    assert alloc.amount(4) == rat(3, 16)
    iv = alloc.total_cert.interval(rat(1, 10**6))
    assert iv.width <= rat(1, 10**6)
    partial = sum((rat(3) / (n * n) for n in range(4, 2001)), ZERO)
    assert iv.hi > partial
    assert iv.lo < partial + rat(3, 1999)


def test_bounded_length_rejects_divergent_prices():
    with pytest.raises(CapabilityError):
        build_bounded_length_strategy(builtin_model("harmonic"), k=2)


def test_bounded_diameter_geometric_walkthrough():
    alloc, m = build_bounded_diameter_strategy(GEO, d=2, total=ONE)
    assert m == 3
    for n in range(1, 6):
        assert alloc.amount(n) == ZERO
    # amount(5 + j) = tail(3 + j) = 2**(-2 - j)
    assert alloc.amount(6) == rat(1, 8)
    assert alloc.amount(7) == rat(1, 16)
    assert alloc.amount(9) == rat(1, 64)
    assert alloc.total_cert == ExactTotal(rat(1, 4))
    pat = alloc.descriptor.success_pattern()
    assert pat == {"scope": "above-threshold", "threshold": 5,
                   "relabeling": None, "cofinite": True}


def test_bounded_diameter_smaller_budget():
    alloc, m = build_bounded_diameter_strategy(GEO, d=2, total=rat(1, 2))
    assert m == 4
    assert alloc.amount(7) == rat(1, 16)


def test_bounded_diameter_relabeled_matches_base_beyond_support():
    delta = Relabeling.swap(1, 2)
    alloc, m = build_bounded_diameter_strategy(GEO, d=2, delta=delta)
    base, m2 = build_bounded_diameter_strategy(GEO, d=2)
    assert (m, m2) == (3, 3)
    for n in range(1, 12):
        assert alloc.amount(n) == base.amount(n)


def test_cycle_informed_prices_disclosed_plan():
    plan = CyclePlan([Cycle((4, 6)), Cycle((1, 2))], name="disclosed")
    alloc = build_cycle_informed_strategy(GEO, plan, k=2, total=ONE)
    assert alloc.amount(4) == rat(5, 64)
    assert alloc.amount(6) == rat(5, 64)
    assert alloc.amount(1) == ZERO
    assert alloc.amount(2) == ZERO
    assert alloc.amount(3) == rat(1, 8)
    assert alloc.amount(5) == rat(1, 32)
    assert alloc.total_cert == ExactTotal(rat(21, 64))
    assert alloc.descriptor.m == 3


def test_cycle_informed_rejects_long_cycles():
    plan = CyclePlan([Cycle((4, 6, 8))])
    with pytest.raises(PlanViolationError):
        build_cycle_informed_strategy(GEO, plan, k=2)


def test_v2_constant_and_harmonic_prefix():
    ones = build_v2_strategy("constant1")
    assert ones.amount(1) == ONE and ones.amount(999) == ONE
    assert ones.amount_upper_pow2(40) == ONE
    assert ones.descriptor.success_pattern() == {"scope": "none"}

    pref = build_v2_strategy("harmonic-prefix")
    assert pref.amount(3) == rat(11, 6)
    assert pref.max_in_range(2, 6) == pref.amount(6)
    assert pref.amount(1024) <= pref.amount_upper_pow2(10)
    assert pref.descriptor.success_pattern() == {
        "scope": "last-member", "cutoff": 1}


def test_v2_shifted_harmonic():
    alloc = build_v2_strategy("shifted-harmonic", k=3)
    assert alloc.amount(2) == ZERO
    assert alloc.amount(5) == rat(47, 60)
    assert alloc.max_in_range(1, 2) == ZERO
    assert alloc.amount(512) <= alloc.amount_upper_pow2(9)
    assert alloc.descriptor.success_pattern() == {
        "scope": "last-member", "cutoff": 3}


def test_v2_scaled():
    alloc = build_v2_strategy("scaled", c=rat(1, 2))
    assert alloc.amount(4) == rat(25, 24)
    assert alloc.amount(256) <= alloc.amount_upper_pow2(8)
    assert alloc.descriptor.success_pattern() == {"scope": "none"}
    with pytest.raises(DomainError):
        build_v2_strategy("scaled", c=ONE)
    with pytest.raises(DomainError):
        build_v2_strategy("scaled", c=rat(3, 2))


def test_v2_log_shift_small_constant_is_minimal():
    alloc = build_v2_strategy("log-shift", K=ONE)
    assert alloc.descriptor.params["k"] == 3
    assert alloc.descriptor.params["minimal"] is True
    shifted = build_v2_strategy("shifted-harmonic", k=3)
    for n in (1, 3, 7, 20):
        assert alloc.amount(n) == shifted.amount(n)


def test_v2_log_shift_large_constant_is_conservative():
    from prisoners.numeric import ln_bounds
    alloc = build_v2_strategy("log-shift", K=rat(20))
    k = alloc.descriptor.params["k"]
    assert alloc.descriptor.params["minimal"] is False
    assert k > 10**8
    assert ln_bounds(k + 2)[0] >= rat(21)
    assert ln_bounds(k + 1)[0] < rat(21)
    assert alloc.amount(100) == ZERO


def test_descriptor_json_round_trip():
    alloc, m = build_bounded_length_strategy(GEO, k=2, total=ONE)
    text = alloc.descriptor.to_json()
    back = StrategyDescriptor.from_json(text)
    assert back == alloc.descriptor
    assert back.success_pattern() == alloc.descriptor.success_pattern()


@given(st.integers(1, 200))
@settings(max_examples=40, deadline=None)
def test_tail_sum_prefix_never_exceeds_declared_total(n):
    alloc, _ = build_tail_sum_strategy(GEO, total=ONE)
    running = sum((alloc.amount(i) for i in range(1, n + 1)), ZERO)
    assert running <= ONE


@given(st.integers(1, 10), st.integers(2, 9))
@settings(max_examples=20, deadline=None)
def test_bounded_length_budget_scaling_keeps_shape(k, denom):
    total = rat(1, denom)
    alloc, m = build_bounded_length_strategy(GEO, k=k, total=total)
    # cutoff is minimal: one step earlier fails the certified bound
    assert k * GEO.tail(m) < total
    if m > 1:
        assert not k * GEO.tail(m - 1) < total
    assert alloc.amount(m) == k * GEO.term(m)

"""Exact oracles for the weighted rearrangement sum of n * price(delta(n)).

Whether any rearrangement makes that sum converge decides whether a winning
allocation exists at all, so this module carries the decision procedure and
the desk-scale consistency checks behind it: exhaustive minimization over
small permutation prefixes, dominance of the descending arrangement, and the
bookkeeping that lets zero prices be compressed out without changing the
answer.  Everything is computed in exact rationals; nothing is estimated.
"""
from __future__ import annotations

import itertools
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .errors import CapabilityError, DomainError
from .numeric import Rat, ZERO, rat_str
from .sequences import (
    PriceModel, Relabeling, WeightedCert, descending_rearrangement,
    omit_zeros, quasi_descending_rearrangement, weighted_partial_sum,
)

__all__ = [
    "DominanceReport", "ExistenceVerdict", "ZeroOmissionTrace",
    "analysis_tsv", "brute_force_min", "check_zero_omission",
    "cycle_notation", "decide_existence", "descending_partial_dominance",
]

# 9! = 362880 exhaustive scans stay interactive; 10! would not
_FACTORIAL_CAP = 9

_DIAG_CHECKPOINTS = (8, 16, 32, 64)


def _require_desk_scale(m: int) -> None:
    if not isinstance(m, int) or m < 1:
        raise DomainError("the prefix length must be a positive integer")
    if m > _FACTORIAL_CAP:
        raise DomainError(
            f"exhaustive scans are capped at {_FACTORIAL_CAP} "
            f"(asked for {m}, which means {m}! permutations)")


# ---------------------------------------------------------------------------
# exhaustive minimization

def _scan_block(terms: dict, first: int, m: int):
    """Best (value, permutation) among prefixes that place `first` first."""
    rest = [i for i in range(1, m + 1) if i != first]
    head = terms[first]
    best = None
    best_perm = None
    for tail in itertools.permutations(rest):
        total = head
        pos = 2
        for idx in tail:
            total += pos * terms[idx]
            pos += 1
        if best is None or total < best:
            best = total
            best_perm = (first,) + tail
    return best, best_perm


def brute_force_min(model: PriceModel, m: int, jobs: int = 1):
    """Exact minimum of the weighted prefix sum over all m! arrangements.

    Returns (value, relabeling) where the relabeling is the
    lexicographically least arrangement achieving the minimum.  The scan is
    partitioned by the first entry; partitions reduce by exact minimum, so
    the result does not depend on worker scheduling.
    """
    _require_desk_scale(m)
    terms = {i: model.term(i) for i in range(1, m + 1)}
    firsts = range(1, m + 1)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=min(jobs, m)) as pool:
            blocks = list(pool.map(lambda f: _scan_block(terms, f, m), firsts))
    else:
        blocks = [_scan_block(terms, f, m) for f in firsts]
    best, best_perm = blocks[0]
    for value, perm in blocks[1:]:
        if value < best or (value == best and perm < best_perm):
            best, best_perm = value, perm
    return best, Relabeling.from_sequence(best_perm, name="minimizer")


# ---------------------------------------------------------------------------
# existence of a winning allocation

@dataclass(frozen=True)
class ExistenceVerdict:
    """Outcome of the convergence question, never guessed.

    value is Exists, NotExists or Unknown; justification names the model
    certificate that backs a definite answer.  Unknown carries exact
    partial sums of a value-ordered rearrangement as diagnostics.
    """

    value: str
    justification: str
    diagnostics: Optional[dict] = None

    def __post_init__(self):
        if self.value not in ("Exists", "NotExists", "Unknown"):
            raise DomainError(f"unknown verdict value {self.value!r}")


def decide_existence(model: PriceModel) -> ExistenceVerdict:
    """Exists iff some rearranged weighted sum is certified finite.

    Convergence under rearrangement is not observable from finitely many
    terms, so only declared model certificates can settle the question;
    anything else is Unknown, with the partial sums of the descending (or
    quasi-descending, when zeros block a full ordering) rearrangement
    attached for inspection.
    """
    cert = model.weighted_cert
    if cert is WeightedCert.CONVERGES_SOME:
        return ExistenceVerdict("Exists", cert.value)
    if cert is WeightedCert.DIVERGES_ALL:
        return ExistenceVerdict("NotExists", cert.value)
    return ExistenceVerdict("Unknown", "no certificate declared",
                            diagnostics=_unknown_diagnostics(model))


def _unknown_diagnostics(model: PriceModel) -> dict:
    horizon = _DIAG_CHECKPOINTS[-1]
    try:
        delta = descending_rearrangement(model, horizon)
        ordering = "descending"
    except CapabilityError:
        try:
            delta = quasi_descending_rearrangement(model, horizon)
            ordering = "quasi-descending"
        except CapabilityError as err:
            return {"ordering": None, "note": str(err)}
    sums = [[m, rat_str(weighted_partial_sum(model, delta, m))]
            for m in _DIAG_CHECKPOINTS]
    return {"ordering": ordering, "partial_sums": sums}


# ---------------------------------------------------------------------------
# zero omission

@dataclass
class ZeroOmissionTrace:
    """Exhaustive desk-scale audit of compressing out zero prices."""

    passed: bool
    mode: str  # "zero-free" or "even-embedding"
    permutations: int
    alpha: dict
    failures: list = field(default_factory=list)


def check_zero_omission(model: PriceModel, m: int) -> ZeroOmissionTrace:
    """Verify that dropping zero prices preserves the weighted sums.

    With q the positive subsequence of p and alpha the compression map,
    two facts carry the equivalence and both are checked exactly for every
    permutation of [1..m]: the arrangement induced on q never exceeds the
    p-sum, and re-embedding q at the even positions (zeros at the odd
    ones) exactly doubles the q-sum.
    """
    _require_desk_scale(m)
    horizon = max(4 * m, 64)
    compressed, alpha = omit_zeros(model, horizon)
    failures: list[dict] = []
    for i, k in alpha.items():
        if compressed.term(k) != model.term(i):
            failures.append({"kind": "alpha", "index": i, "position": k})
    zeros = [i for i in range(1, horizon + 1) if model.term(i) == ZERO]
    if not zeros:
        return _zero_free_trace(model, compressed, alpha, m, failures)

    if compressed.original_index(m) is None:
        raise CapabilityError(
            f"{model.name}: fewer than {m} positive prices below "
            f"index {horizon}")
    if len(zeros) < m:
        raise CapabilityError(
            f"{model.name}: only {len(zeros)} zero prices below index "
            f"{horizon}, need {m} to embed at odd positions")

    beta = [compressed.original_index(k) for k in range(1, m + 1)]
    checked = 0
    for perm in itertools.permutations(range(1, m + 1)):
        checked += 1
        delta = Relabeling.from_sequence(perm)

        # arrangement induced on q by reading delta's positive entries
        induced = ZERO
        k = 0
        for n in range(1, m + 1):
            idx = perm[n - 1]
            p_val = model.term(idx)
            if p_val > ZERO:
                k += 1
                induced += k * compressed.term(alpha[idx])
        p_sum = weighted_partial_sum(model, delta, m)
        if not induced <= p_sum:
            failures.append({"delta": list(perm), "kind": "induced",
                             "lhs": rat_str(induced), "rhs": rat_str(p_sum)})

        # q at even positions, zeros at odd ones: exact doubling
        placements = {2 * k: beta[perm[k - 1] - 1] for k in range(1, m + 1)}
        for j in range(1, m + 1):
            placements[2 * j - 1] = zeros[j - 1]
        sigma = Relabeling(placements, name="even-embedding")
        q_sum = weighted_partial_sum(compressed, delta, m)
        embedded = weighted_partial_sum(model, sigma, 2 * m)
        if embedded != 2 * q_sum:
            failures.append({"delta": list(perm), "kind": "doubling",
                             "lhs": rat_str(embedded),
                             "rhs": rat_str(2 * q_sum)})
    return ZeroOmissionTrace(passed=not failures, mode="even-embedding",
                             permutations=checked, alpha=dict(alpha),
                             failures=failures)


def _zero_free_trace(model, compressed, alpha, m, failures) -> ZeroOmissionTrace:
    # no zeros below the horizon: compression must be the identity
    for i in range(1, m + 1):
        if alpha.get(i) != i:
            failures.append({"kind": "alpha", "index": i,
                             "position": alpha.get(i)})
    checked = 0
    for perm in itertools.permutations(range(1, m + 1)):
        checked += 1
        delta = Relabeling.from_sequence(perm)
        p_sum = weighted_partial_sum(model, delta, m)
        q_sum = weighted_partial_sum(compressed, delta, m)
        if p_sum != q_sum:
            failures.append({"delta": list(perm), "kind": "identity",
                             "lhs": rat_str(q_sum), "rhs": rat_str(p_sum)})
    return ZeroOmissionTrace(passed=not failures, mode="zero-free",
                             permutations=checked, alpha=dict(alpha),
                             failures=failures)


# ---------------------------------------------------------------------------
# dominance of the descending arrangement

@dataclass
class DominanceReport:
    """Descending prices checked against rival arrangements, exactly."""

    passed: bool
    mode: str  # "exhaustive" or "sampled"
    checked: int
    m: int
    sigma: tuple
    minimum: Rat
    failures: list = field(default_factory=list)


def descending_partial_dominance(model: PriceModel, trials: int = 1000,
                                 m: int = 6, seed: int = 0) -> DominanceReport:
    """Check that descending prices minimize the weighted prefix sum.

    Sorting the first m prices into non-increasing order pairs the largest
    price with the smallest weight; no rival arrangement of [1..m] can do
    better.  All m! rivals are tried when m allows it, otherwise `trials`
    seeded shuffles.  Requires strictly positive prices, as a zero would
    let rivals tie in ways the statement does not cover.
    """
    if not isinstance(m, int) or m < 1:
        raise DomainError("the prefix length must be a positive integer")
    terms = {}
    for i in range(1, m + 1):
        v = model.term(i)
        if v <= ZERO:
            raise DomainError(
                f"positivity hypothesis fails at index {i}: "
                f"price is {rat_str(v)}")
        terms[i] = v
    sigma = tuple(sorted(range(1, m + 1), key=lambda i: (-terms[i], i)))
    minimum = ZERO
    for n, idx in enumerate(sigma, start=1):
        minimum += n * terms[idx]

    def rival_sum(perm) -> Rat:
        total = ZERO
        for n, idx in enumerate(perm, start=1):
            total += n * terms[idx]
        return total

    failures: list[dict] = []
    if m <= _FACTORIAL_CAP:
        mode = "exhaustive"
        checked = 0
        for perm in itertools.permutations(range(1, m + 1)):
            checked += 1
            value = rival_sum(perm)
            if not minimum <= value:
                failures.append({"delta": list(perm), "sum": rat_str(value)})
    else:
        if trials < 1:
            raise DomainError("sampling needs at least one trial")
        mode = "sampled"
        rng = random.Random(seed)
        base = list(range(1, m + 1))
        checked = trials
        for _ in range(trials):
            rng.shuffle(base)
            value = rival_sum(base)
            if not minimum <= value:
                failures.append({"delta": list(base), "sum": rat_str(value)})
    return DominanceReport(passed=not failures, mode=mode, checked=checked,
                           m=m, sigma=sigma, minimum=minimum,
                           failures=failures)


# ---------------------------------------------------------------------------
# report format

def cycle_notation(delta: Relabeling) -> str:
    """One-line cycle notation of a finite relabeling, e.g. (1 3 2)(4 5).

    Cycles are rotated to start at their least member and listed by that
    member; fixed points are dropped, so the identity renders as ().
    """
    mapping = delta.placements
    seen = set()
    cycles = []
    for start in sorted(mapping):
        if start in seen:
            continue
        cycle = [start]
        seen.add(start)
        nxt = delta(start)
        while nxt != start:
            cycle.append(nxt)
            seen.add(nxt)
            nxt = delta(nxt)
        if len(cycle) > 1:
            pivot = cycle.index(min(cycle))
            cycles.append(cycle[pivot:] + cycle[:pivot])
    cycles.sort(key=lambda c: c[0])
    if not cycles:
        return "()"
    return "".join("(" + " ".join(str(n) for n in c) + ")" for c in cycles)


def analysis_tsv(rows) -> str:
    """TSV report: one line per arrangement, cycle notation then num/den."""
    lines = [f"{cycle_notation(delta)}\t{rat_str(value)}"
             for delta, value in rows]
    return "\n".join(lines) + "\n" if lines else ""

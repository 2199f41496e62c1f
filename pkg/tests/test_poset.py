"""Multiset/poset algebra: spec'd examples plus randomized invariants.

Derived expectations are computed by independent brute-force oracles
(subset enumeration for antichains, permutation filtering for
linearizations) and compared against the implementation.
"""

import random
from itertools import chain, combinations, permutations

import pytest

from nualign.poset import (
    BOTTOM,
    TOP,
    CycleError,
    Multiset,
    Poset,
    SizeLimitError,
    combine,
)


def ms(*elems):
    return Multiset(elems)


# -- multiset combination ----------------------------------------------------

def test_sum():
    assert combine(ms("a", "a", "b"), ms("a"), "sum") == ms("a", "a", "a", "b")


def test_diff_clamps_at_zero():
    assert combine(ms("a"), ms("a", "a"), "diff") == ms()


def test_join():
    assert combine(ms("a", "a"), ms("a", "b"), "join") == ms("a", "a", "b")


def test_meet():
    assert combine(ms("a", "a", "b"), ms("a", "c"), "meet") == ms("a")


def test_leq():
    assert ms("a") <= ms("a", "a", "b")
    assert not ms("a", "a") <= ms("a")
    assert ms() <= ms("x")
    assert ms() <= ms()


def test_multiset_random_laws():
    rng = random.Random(7)
    universe = "abcde"
    for _ in range(300):
        a = Multiset({x: rng.randrange(4) for x in universe})
        b = Multiset({x: rng.randrange(4) for x in universe})
        # (a + b) - b == a when no clamping occurs (it never clamps here)
        assert (a + b) - b == a
        assert a <= a | b and b <= a | b
        assert a & b <= a and a & b <= b
        # join/meet agree with elementwise max/min
        for x in universe:
            assert (a | b).count(x) == max(a.count(x), b.count(x))
            assert (a & b).count(x) == min(a.count(x), b.count(x))


def test_no_zero_counts_stored():
    m = Multiset({"a": 2, "b": 0})
    assert m.support() == {"a"}
    assert (m - ms("a", "a")).support() == set()


def test_negative_multiplicity_rejected():
    with pytest.raises(ValueError):
        Multiset({"a": -1})


# -- transitive closure ------------------------------------------------------

def test_closure_basic():
    p = Poset("abc", [("a", "b"), ("b", "c")])
    q = p.transitive_closure()
    assert set(q.pairs()) == {("a", "b"), ("b", "c"), ("a", "c")}


def test_closure_idempotent():
    p = Poset("abc", [("a", "b"), ("b", "c")]).transitive_closure()
    assert p.transitive_closure() is p


def test_cycle_rejected():
    with pytest.raises(CycleError):
        Poset("ab", [("a", "b"), ("b", "a")])
    with pytest.raises(CycleError):
        Poset("a", [("a", "a")])


# -- maximal antichains ------------------------------------------------------

def brute_force_maximal_antichains(p):
    """Oracle: check all subsets for antichain-ness and maximality."""
    elems = list(p.elements)
    subsets = [
        frozenset(c)
        for c in chain.from_iterable(
            combinations(elems, r) for r in range(1, len(elems) + 1)
        )
    ]
    antichains = [s for s in subsets if p.is_antichain(s)]
    return {
        a for a in antichains if not any(a < b for b in antichains)
    }


def diamond():
    return Poset("abcd", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])


def test_antichains_chain():
    p = Poset("ab", [("a", "b")])
    assert p.maximal_antichains() == {frozenset("a"), frozenset("b")}


def test_antichains_two_incomparable():
    p = Poset("ab")
    assert p.maximal_antichains() == {frozenset("ab")}


def test_antichains_diamond_matches_oracle():
    p = diamond()
    got = p.maximal_antichains()
    assert got == brute_force_maximal_antichains(p)
    assert got == {frozenset("a"), frozenset("bc"), frozenset("d")}


def test_antichains_random_matches_oracle():
    rng = random.Random(13)
    for _ in range(40):
        n = rng.randrange(2, 7)
        elems = list(range(n))
        pairs = [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < 0.4
        ]
        p = Poset(elems, pairs)
        got = p.maximal_antichains()
        assert got == brute_force_maximal_antichains(p)
        for a in got:
            assert p.is_antichain(a)
            for x in p.elements:
                if x not in a:
                    assert not p.is_antichain(a | {x})


def test_antichain_size_guard():
    p = Poset(range(30))
    with pytest.raises(SizeLimitError):
        p.maximal_antichains()


# -- intervals, prefixes -----------------------------------------------------

def test_interval_closed_chain():
    p = Poset("abc", [("a", "b"), ("b", "c")])
    iv = p.interval(frozenset("a"), frozenset("c"))
    assert set(iv.elements) == set("abc")
    assert iv.precedes("a", "c")


def test_interval_open_chain():
    p = Poset("abc", [("a", "b"), ("b", "c")])
    iv = p.interval(frozenset("a"), frozenset("c"), "open")
    assert set(iv.elements) == {"b"}


def test_prefix_with_bottom_sentinel():
    p = Poset("abc", [("a", "b"), ("b", "c")])
    assert set(p.prefix(frozenset("b")).elements) == {"a", "b"}
    assert set(p.prefix(frozenset("b"), closed=False).elements) == {"a"}
    assert set(p.interval(BOTTOM, frozenset("b")).elements) == {"a", "b"}
    assert set(p.postfix(frozenset("b")).elements) == {"b", "c"}
    assert set(p.interval(frozenset("b"), TOP).elements) == {"b", "c"}


def test_interval_rejects_non_antichain():
    p = Poset("abc", [("a", "b"), ("b", "c")])
    with pytest.raises(ValueError):
        p.interval(frozenset("ab"), frozenset("c"))


def test_interval_closed_is_open_plus_endpoints():
    p = diamond()
    closed = p.interval(frozenset("a"), frozenset("d"))
    opened = p.interval(frozenset("a"), frozenset("d"), "open")
    assert set(closed.elements) == set(opened.elements) | {"a"} | {"d"}


# -- linearizations ----------------------------------------------------------

def brute_force_linearizations(p):
    out = set()
    for perm in permutations(p.elements):
        pos = {x: i for i, x in enumerate(perm)}
        if all(pos[a] < pos[b] for a, b in p.closed_pairs()):
            out.add(perm)
    return out


def test_linearizations_two_incomparable():
    p = Poset("ab")
    assert set(p.linearizations()) == {("a", "b"), ("b", "a")}


def test_linearizations_chain():
    p = Poset("ab", [("a", "b")])
    assert p.linearizations() == [("a", "b")]


def test_linearizations_diamond_matches_oracle():
    p = diamond()
    got = set(p.linearizations())
    assert got == brute_force_linearizations(p)
    assert len(got) == 2


def test_linearizations_random_matches_oracle():
    rng = random.Random(99)
    for _ in range(30):
        n = rng.randrange(1, 6)
        pairs = [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < 0.5
        ]
        p = Poset(range(n), pairs)
        assert set(p.linearizations()) == brute_force_linearizations(p)


def test_single_linearization_iff_total():
    assert Poset("abc", [("a", "b"), ("b", "c")]).is_total()
    p = Poset("abc", [("a", "b")])
    assert not p.is_total()
    assert len(p.linearizations()) > 1


# -- reduction ---------------------------------------------------------------

def test_transitive_reduction_roundtrip():
    rng = random.Random(5)
    for _ in range(30):
        n = rng.randrange(2, 7)
        pairs = [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < 0.5
        ]
        p = Poset(range(n), pairs)
        red = p.transitive_reduction()
        assert set(red.closed_pairs()) == set(p.closed_pairs())
        # reduction is minimal: dropping any pair changes the closure
        rp = red.pairs()
        for k in range(len(rp)):
            smaller = Poset(range(n), rp[:k] + rp[k + 1:])
            assert set(smaller.closed_pairs()) != set(p.closed_pairs())

"""Multiset and finite partial-order algebra.

Everything downstream (markings, event logs, alignments) is built on the
two structures in this module:

- ``Multiset``: a mapping from elements to positive counts, with the usual
  elementwise sum / clamped difference / join / meet and the pointwise
  ``<=`` order.
- ``Poset``: a finite set of elements with a strict (irreflexive, acyclic)
  precedence relation, plus the operations needed by the alignment engine:
  transitive closure/reduction, antichains, intervals, prefixes and
  linearizations.

Posets assign each element a stable integer index at construction; all
internal pair storage and all iteration is in ascending index order, so
results are deterministic.
"""

from __future__ import annotations

from itertools import combinations


class CycleError(ValueError):
    """Raised when a relation that must be acyclic contains a cycle."""


class SizeLimitError(RuntimeError):
    """Raised when an enumeration would exceed its configured size cap."""


# ---------------------------------------------------------------------------
# Multisets
# ---------------------------------------------------------------------------

class Multiset:
    """Finite multiset: elements mapped to counts >= 1.

    Zero counts are never stored, so ``support()`` is exactly the key set.
    Subtraction clamps at zero; a signed variant for pseudo-markings lives
    in the alignment module, keeping this class non-negative.
    """

    __slots__ = ("_counts",)

    def __init__(self, items=()):
        counts = {}
        if isinstance(items, Multiset):
            counts.update(items._counts)
        elif isinstance(items, dict):
            for x, n in items.items():
                if n < 0:
                    raise ValueError(f"negative multiplicity {n} for {x!r}")
                if n:
                    counts[x] = counts.get(x, 0) + n
        else:
            for x in items:
                counts[x] = counts.get(x, 0) + 1
        self._counts = counts

    @classmethod
    def of(cls, *elems):
        return cls(elems)

    def count(self, x):
        return self._counts.get(x, 0)

    __getitem__ = count

    def support(self):
        return set(self._counts)

    def items(self):
        return self._counts.items()

    def total(self):
        return sum(self._counts.values())

    def __iter__(self):
        """Iterate elements with multiplicity."""
        for x, n in self._counts.items():
            for _ in range(n):
                yield x

    def __len__(self):
        return self.total()

    def __bool__(self):
        return bool(self._counts)

    def __contains__(self, x):
        return x in self._counts

    def __eq__(self, other):
        return isinstance(other, Multiset) and self._counts == other._counts

    def __hash__(self):
        return hash(frozenset(self._counts.items()))

    def __le__(self, other):
        return all(n <= other.count(x) for x, n in self._counts.items())

    def __lt__(self, other):
        return self <= other and self != other

    def __add__(self, other):
        out = dict(self._counts)
        for x, n in other._counts.items():
            out[x] = out.get(x, 0) + n
        return Multiset(out)

    def __sub__(self, other):
        """Elementwise difference clamped at zero."""
        out = {}
        for x, n in self._counts.items():
            m = n - other.count(x)
            if m > 0:
                out[x] = m
        return Multiset(out)

    def __or__(self, other):
        """Elementwise max (join)."""
        out = dict(self._counts)
        for x, n in other._counts.items():
            if n > out.get(x, 0):
                out[x] = n
        return Multiset(out)

    def __and__(self, other):
        """Elementwise min (meet)."""
        out = {}
        for x, n in self._counts.items():
            m = min(n, other.count(x))
            if m > 0:
                out[x] = m
        return Multiset(out)

    def scale(self, k):
        if k < 0:
            raise ValueError("negative scale")
        return Multiset({x: n * k for x, n in self._counts.items()})

    def __repr__(self):
        inner = ", ".join(
            (f"{n}*{x!r}" if n > 1 else repr(x))
            for x, n in sorted(self._counts.items(), key=lambda kv: repr(kv[0]))
        )
        return f"[{inner}]"


def combine(a: Multiset, b: Multiset, kind: str) -> Multiset:
    """Elementwise combination: ``sum``, clamped ``diff``, ``join`` or ``meet``."""
    if kind == "sum":
        return a + b
    if kind == "diff":
        return a - b
    if kind == "join":
        return a | b
    if kind == "meet":
        return a & b
    raise ValueError(f"unknown combination kind {kind!r}")


# ---------------------------------------------------------------------------
# Posets
# ---------------------------------------------------------------------------

#: Sentinels accepted by interval/prefix operations as artificial extremes.
BOTTOM = object()
TOP = object()

MAX_ANTICHAIN_ELEMENTS = 25
MAX_LINEARIZATIONS = 500_000


class Poset:
    """Finite strict partial order over arbitrary hashable elements.

    The stored relation is the one given at construction (irreflexive and
    acyclic, both checked); it need not be transitively closed.  Queries
    that depend on closure (``precedes``, antichain tests, intervals) are
    answered against the closure, which is computed once and cached.
    """

    def __init__(self, elements, pairs=()):
        self._elements = tuple(elements)
        self._index = {x: i for i, x in enumerate(self._elements)}
        if len(self._index) != len(self._elements):
            raise ValueError("duplicate elements")
        n = len(self._elements)
        succ = [0] * n
        for a, b in pairs:
            i, j = self._index[a], self._index[b]
            if i == j:
                raise CycleError(f"reflexive pair on {a!r}")
            succ[i] |= 1 << j
        self._succ_raw = succ
        self._closed_succ = self._close(succ, n)

    @staticmethod
    def _close(succ, n):
        """Reachability masks; raises CycleError if the relation has a cycle."""
        closed = list(succ)
        for k in range(n):
            kbit = 1 << k
            kmask = closed[k]
            for i in range(n):
                if closed[i] & kbit:
                    closed[i] |= kmask
        for i in range(n):
            if closed[i] & (1 << i):
                raise CycleError("order relation contains a cycle")
        return closed

    # -- basic queries ------------------------------------------------

    @property
    def elements(self):
        return self._elements

    def __len__(self):
        return len(self._elements)

    def __contains__(self, x):
        return x in self._index

    def __iter__(self):
        return iter(self._elements)

    def index(self, x):
        return self._index[x]

    def pairs(self):
        """The stored (not necessarily closed) pairs, index-ordered."""
        return self._mask_pairs(self._succ_raw)

    def closed_pairs(self):
        return self._mask_pairs(self._closed_succ)

    def _mask_pairs(self, succ):
        out = []
        for i, mask in enumerate(succ):
            j = 0
            while mask >> j:
                if (mask >> j) & 1:
                    out.append((self._elements[i], self._elements[j]))
                j += 1
        return out

    def precedes(self, x, y):
        """Strict precedence in the transitive closure."""
        return bool(self._closed_succ[self._index[x]] & (1 << self._index[y]))

    def incomparable(self, x, y):
        return x != y and not self.precedes(x, y) and not self.precedes(y, x)

    def is_closed(self):
        return self._succ_raw == self._closed_succ

    def transitive_closure(self):
        if self.is_closed():
            return self
        return Poset(self._elements, self.closed_pairs())

    def transitive_reduction(self):
        """Smallest relation with the same closure (unique for finite posets)."""
        n = len(self._elements)
        closed = self._closed_succ
        red = []
        for i in range(n):
            mask = closed[i]
            keep = mask
            j = 0
            while mask >> j:
                if (mask >> j) & 1 and closed[j] & keep:
                    keep &= ~(closed[j] & ~(1 << j))
                j += 1
            red.append(keep)
        return Poset(self._elements, self._mask_pairs(red))

    # -- antichains ----------------------------------------------------

    def is_antichain(self, members):
        members = list(members)
        for x, y in combinations(members, 2):
            if not self.incomparable(x, y):
                return False
        return True

    def minimum(self):
        """Elements with no predecessor (a maximal antichain)."""
        unpreceded = [True] * len(self._elements)
        for i, mask in enumerate(self._closed_succ):
            j = 0
            while mask >> j:
                if (mask >> j) & 1:
                    unpreceded[j] = False
                j += 1
        return frozenset(x for i, x in enumerate(self._elements) if unpreceded[i])

    def maximum(self):
        """Elements with no successor (a maximal antichain)."""
        return frozenset(
            x for i, x in enumerate(self._elements) if not self._closed_succ[i]
        )

    def maximal_antichains(self, limit=MAX_ANTICHAIN_ELEMENTS):
        """All maximal antichains, as frozensets.

        Maximal antichains are exactly the maximal cliques of the
        incomparability graph; enumerated with Bron-Kerbosch.  Guarded by a
        size cap: this is only ever needed at alignment/oracle scale.
        """
        n = len(self._elements)
        if limit is not None and n > limit:
            raise SizeLimitError(
                f"maximal_antichains limited to {limit} elements, got {n}"
            )
        closed = self._closed_succ
        full = (1 << n) - 1
        incomp = []
        for i in range(n):
            mask = 0
            for j in range(n):
                if j != i and not (closed[i] >> j) & 1 and not (closed[j] >> i) & 1:
                    mask |= 1 << j
            incomp.append(mask)

        out = []

        def expand(r, p, x):
            if not p and not x:
                out.append(r)
                return
            pivot_pool = p | x
            pivot = (pivot_pool & -pivot_pool).bit_length() - 1
            cand = p & ~incomp[pivot]
            while cand:
                v = (cand & -cand).bit_length() - 1
                vbit = 1 << v
                expand(r | vbit, p & incomp[v], x & incomp[v])
                p &= ~vbit
                x |= vbit
                cand &= ~vbit

        expand(0, full, 0)
        result = set()
        for mask in out:
            result.add(
                frozenset(self._elements[i] for i in range(n) if (mask >> i) & 1)
            )
        return result

    # -- intervals, prefixes, postfixes ---------------------------------

    def _check_antichain(self, a, what):
        for x in a:
            if x not in self._index:
                raise ValueError(f"{what} contains {x!r}, not an element")
        if not self.is_antichain(a):
            raise ValueError(f"{what} is not an antichain")

    def interval(self, a, b, bounds="closed"):
        """Subposet of elements x with a <= x <= b.

        ``a`` / ``b`` are antichains, or the BOTTOM / TOP sentinels for the
        prefix/postfix forms.  ``bounds`` removes the endpoint antichains:
        one of ``closed``, ``open_left``, ``open_right``, ``open``.
        """
        if bounds not in ("closed", "open_left", "open_right", "open"):
            raise ValueError(f"unknown bounds {bounds!r}")
        if a is not BOTTOM:
            self._check_antichain(a, "lower antichain")
        if b is not TOP:
            self._check_antichain(b, "upper antichain")

        def at_or_above(x):
            return a is BOTTOM or any(y == x or self.precedes(y, x) for y in a)

        def at_or_below(x):
            return b is TOP or any(x == y or self.precedes(x, y) for y in b)

        members = [x for x in self._elements if at_or_above(x) and at_or_below(x)]
        if bounds in ("open_left", "open") and a is not BOTTOM:
            members = [x for x in members if x not in a]
        if bounds in ("open_right", "open") and b is not TOP:
            members = [x for x in members if x not in b]
        return self.restrict(members)

    def prefix(self, a, closed=True):
        """Everything at-or-below (closed) / strictly below (open) antichain a."""
        return self.interval(BOTTOM, a, "closed" if closed else "open_right")

    def postfix(self, a, closed=True):
        return self.interval(a, TOP, "closed" if closed else "open_left")

    def restrict(self, members):
        """Subposet on ``members`` with the closed order restricted to them."""
        keep = [x for x in self._elements if x in set(members)]
        kept = set(keep)
        pairs = [
            (x, y) for x, y in self.closed_pairs() if x in kept and y in kept
        ]
        return Poset(keep, pairs)

    # -- linearizations --------------------------------------------------

    def linearizations(self, cap=MAX_LINEARIZATIONS):
        """All topological orders, as tuples. Oracle use: small posets only."""
        n = len(self._elements)
        preds = [0] * n
        for i, mask in enumerate(self._closed_succ):
            j = 0
            while mask >> j:
                if (mask >> j) & 1:
                    preds[j] |= 1 << i
                j += 1
        out = []

        def backtrack(done_mask, acc):
            if len(acc) == n:
                out.append(tuple(self._elements[i] for i in acc))
                if len(out) > cap:
                    raise SizeLimitError(f"more than {cap} linearizations")
                return
            for i in range(n):
                if not (done_mask >> i) & 1 and preds[i] & ~done_mask == 0:
                    backtrack(done_mask | (1 << i), acc + [i])

        backtrack(0, [])
        return out

    def is_total(self):
        n = len(self._elements)
        return all(
            not self.incomparable(self._elements[i], self._elements[j])
            for i in range(n)
            for j in range(i + 1, n)
        )

    def __repr__(self):
        return f"Poset({len(self._elements)} elements, {len(self.pairs())} pairs)"

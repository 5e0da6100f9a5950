"""Finite multisets with the pointwise algebra used for markings and steps."""

from __future__ import annotations


class Multiset:
    """Immutable finite multiset: a map from elements to positive counts.

    Counts of zero are never stored, so equality and hashing are structural.
    Supports + (pointwise sum), - (difference clamped at zero), | (union =
    pointwise max), & (intersection = pointwise min), k * m (scaling) and
    <= (pointwise comparison).
    """

    __slots__ = ("_counts", "_hash")

    def __init__(self, items=()):
        counts = {}
        if isinstance(items, Multiset):
            counts = dict(items._counts)
        elif isinstance(items, dict):
            for x, k in items.items():
                if not isinstance(k, int):
                    raise TypeError("counts must be integers, got %r" % (k,))
                if k < 0:
                    raise ValueError("negative count for %r" % (x,))
                if k > 0:
                    counts[x] = k
        else:
            for x in items:
                counts[x] = counts.get(x, 0) + 1
        self._counts = counts
        self._hash = None

    @classmethod
    def _raw(cls, counts):
        # counts must already be canonical (positive values only)
        m = object.__new__(cls)
        m._counts = counts
        m._hash = None
        return m

    def __getitem__(self, x):
        return self._counts.get(x, 0)

    def __contains__(self, x):
        return x in self._counts

    def __iter__(self):
        return iter(self._counts)

    def __bool__(self):
        return bool(self._counts)

    def __len__(self):
        """Number of distinct elements (the support size)."""
        return len(self._counts)

    def items(self):
        return self._counts.items()

    def support(self):
        """The set of elements with positive count."""
        return set(self._counts)

    @property
    def cardinality(self):
        """Total count over all elements."""
        return sum(self._counts.values())

    def __add__(self, other):
        counts = dict(self._counts)
        for x, k in other._counts.items():
            counts[x] = counts.get(x, 0) + k
        return Multiset._raw(counts)

    def __sub__(self, other):
        counts = {}
        for x, k in self._counts.items():
            d = k - other._counts.get(x, 0)
            if d > 0:
                counts[x] = d
        return Multiset._raw(counts)

    def __or__(self, other):
        counts = dict(self._counts)
        for x, k in other._counts.items():
            if k > counts.get(x, 0):
                counts[x] = k
        return Multiset._raw(counts)

    def __and__(self, other):
        counts = {}
        for x, k in self._counts.items():
            j = other._counts.get(x, 0)
            if j and k:
                counts[x] = min(j, k)
        return Multiset._raw(counts)

    def __mul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            raise ValueError("cannot scale a multiset by a negative factor")
        if k == 0:
            return Multiset._raw({})
        return Multiset._raw({x: n * k for x, n in self._counts.items()})

    __rmul__ = __mul__

    def __le__(self, other):
        return all(k <= other._counts.get(x, 0) for x, k in self._counts.items())

    def __eq__(self, other):
        if not isinstance(other, Multiset):
            return NotImplemented
        return self._counts == other._counts

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._counts.items()))
        return self._hash

    def disjoint(self, other):
        """True iff no element appears in both multisets."""
        a, b = self._counts, other._counts
        if len(b) < len(a):
            a, b = b, a
        return not any(x in b for x in a)

    def __repr__(self):
        inner = ", ".join(
            "%r: %d" % (x, k) for x, k in sorted(self._counts.items(), key=lambda i: repr(i[0]))
        )
        return "Multiset({%s})" % inner


EMPTY = Multiset()

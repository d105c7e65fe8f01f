"""Finite posets, intervals and product-order boxes.

Elements are addressed by integer index (declaration order); labels are
only used at the edges (construction, JSON, reports).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "PosetError",
    "Poset",
    "Interval",
    "Box",
    "poset_build",
    "chain",
    "antichain",
    "interval_of",
    "box_height",
    "box_bottom",
    "box_top",
    "box_contains",
    "box_subboxes",
    "box_split",
    "box_points",
    "is_lower_extremal",
    "count_inclusion_pairs",
    "inclusion_pairs",
    "reduced_inclusions",
]


class PosetError(ValueError):
    pass


class Interval(NamedTuple):
    """Closed interval ``[lo, hi]`` given by element indices."""

    lo: int
    hi: int


Box = tuple  # tuple[Interval, ...], n = 2 or 3


class Poset:
    """Immutable finite partial order.

    ``leq[i, j]`` is True iff element i <= element j.
    """

    def __init__(self, labels: Sequence[str], leq: np.ndarray):
        self.labels = tuple(str(x) for x in labels)
        if len(set(self.labels)) != len(self.labels):
            raise PosetError("duplicate element labels")
        leq = np.array(leq, dtype=bool)
        n = len(self.labels)
        if leq.shape != (n, n):
            raise PosetError("relation matrix has wrong shape")
        if not leq.diagonal().all():
            raise PosetError("not a partial order: relation is not reflexive")
        off = leq & leq.T
        np.fill_diagonal(off, False)
        if off.any():
            i, j = map(int, np.argwhere(off)[0])
            raise PosetError(
                f"not a partial order: {self.labels[i]} and {self.labels[j]} form a cycle"
            )
        closed = (leq.astype(np.int64) @ leq.astype(np.int64)) > 0
        if (closed & ~leq).any():
            raise PosetError("not a partial order: relation is not transitive")
        leq.setflags(write=False)
        self.leq = leq
        self.n = n
        self.index = {lab: i for i, lab in enumerate(self.labels)}

    # -- basic relations -------------------------------------------------
    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Poset({list(self.labels)}, covers={self.cover_labels()})"

    def __eq__(self, other):
        return (
            isinstance(other, Poset)
            and self.labels == other.labels
            and np.array_equal(self.leq, other.leq)
        )

    def __hash__(self):
        return hash((self.labels, self.leq.tobytes()))

    def idx(self, x) -> int:
        if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
            if not 0 <= x < self.n:
                raise PosetError(f"element index {x} out of range")
            return int(x)
        try:
            return self.index[x]
        except KeyError:
            raise PosetError(f"unknown element {x!r}") from None

    def le(self, a: int, b: int) -> bool:
        return bool(self.leq[a, b])

    @cached_property
    def covers(self) -> np.ndarray:
        """``covers[a, b]`` iff a < b with nothing strictly between."""
        lt = self.leq.copy()
        np.fill_diagonal(lt, False)
        lti = lt.astype(np.int64)
        between = (lti @ lti) > 0
        c = lt & ~between
        c.setflags(write=False)
        return c

    def cover_pairs(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in np.argwhere(self.covers)]

    def cover_labels(self) -> list[list[str]]:
        return [[self.labels[a], self.labels[b]] for a, b in self.cover_pairs()]

    @cached_property
    def height_matrix(self) -> np.ndarray:
        """``H[a, b]`` = length of the longest chain from a to b (-1 if a ≰ b)."""
        n = self.n
        order = sorted(range(n), key=lambda i: int(self.leq[:, i].sum()))
        H = np.full((n, n), -1, dtype=np.int64)
        for a in range(n):
            H[a, a] = 0
            for b in order:
                if b == a or not self.leq[a, b]:
                    continue
                best = -1
                for c in range(n):
                    if self.covers[c, b] and self.leq[a, c] and H[a, c] >= 0:
                        best = max(best, H[a, c] + 1)
                H[a, b] = best
        H.setflags(write=False)
        return H

    @cached_property
    def height(self) -> int:
        return int(self.height_matrix.max()) if self.n else 0

    @cached_property
    def intervals(self) -> list[Interval]:
        """All intervals [a, b] with a <= b, ordered lexicographically."""
        return [Interval(int(a), int(b)) for a, b in np.argwhere(self.leq)]

    def members(self, a: int, b: int) -> list[int]:
        """Elements c with a <= c <= b, in declaration order."""
        return [int(c) for c in np.nonzero(self.leq[a] & self.leq[:, b])[0]]

    def subintervals(self, iv: Interval) -> list[Interval]:
        m = self.members(iv.lo, iv.hi)
        return [Interval(g, h) for g in m for h in m if self.leq[g, h]]

    @cached_property
    def components(self) -> list[list[int]]:
        comp = list(range(self.n))

        def find(x):
            while comp[x] != x:
                comp[x] = comp[comp[x]]
                x = comp[x]
            return x

        for a, b in np.argwhere(self.leq):
            ra, rb = find(int(a)), find(int(b))
            if ra != rb:
                comp[max(ra, rb)] = min(ra, rb)
        groups: dict[int, list[int]] = {}
        for x in range(self.n):
            groups.setdefault(find(x), []).append(x)
        return list(groups.values())

    @property
    def is_connected(self) -> bool:
        return len(self.components) <= 1

    def component_of(self) -> list[int]:
        out = [0] * self.n
        for k, comp in enumerate(self.components):
            for x in comp:
                out[x] = k
        return out

    def is_automorphism(self, perm: Sequence[int]) -> bool:
        perm = list(perm)
        if sorted(perm) != list(range(self.n)):
            return False
        p = np.asarray(perm)
        return bool(np.array_equal(self.leq[np.ix_(p, p)], self.leq))

    def to_json(self) -> dict:
        return {"elements": list(self.labels), "covers": self.cover_labels()}


def poset_build(elements: Iterable, cover_pairs: Iterable[Sequence]) -> Poset:
    """Poset generated by the given relations (reflexive-transitive closure)."""
    labels = [str(e) for e in elements]
    index = {lab: i for i, lab in enumerate(labels)}
    if len(index) != len(labels):
        raise PosetError("duplicate element labels")
    n = len(labels)
    rel = np.eye(n, dtype=bool)
    for pair in cover_pairs:
        if len(pair) != 2:
            raise PosetError(f"bad cover pair {pair!r}")
        x, y = (str(t) for t in pair)
        for t in (x, y):
            if t not in index:
                raise PosetError(f"unknown element {t!r}")
        rel[index[x], index[y]] = True
    # Warshall closure
    for k in range(n):
        rel |= rel[:, [k]] & rel[[k], :]
    return Poset(labels, rel)


def chain(n: int, prefix: str = "x") -> Poset:
    labels = [f"{prefix}{i}" for i in range(n)]
    return poset_build(labels, zip(labels, labels[1:]))


def antichain(n: int, prefix: str = "x") -> Poset:
    return poset_build([f"{prefix}{i}" for i in range(n)], [])


def interval_of(P: Poset, a, b) -> Interval:
    a, b = P.idx(a), P.idx(b)
    if not P.leq[a, b]:
        raise PosetError(f"{P.labels[a]} is not <= {P.labels[b]}")
    return Interval(a, b)


def interval_height(P: Poset, iv: Interval) -> int:
    return int(P.height_matrix[iv.lo, iv.hi])


def box_height(P: Poset, box: Box) -> int:
    return int(sum(P.height_matrix[iv.lo, iv.hi] for iv in box))


def box_bottom(box: Box) -> tuple[int, ...]:
    return tuple(iv.lo for iv in box)


def box_top(box: Box) -> tuple[int, ...]:
    return tuple(iv.hi for iv in box)


def box_contains(P: Poset, S: Box, T: Box) -> bool:
    """True iff S ⊆ T componentwise."""
    if len(S) != len(T):
        return False
    return all(
        P.leq[t.lo, s.lo] and P.leq[s.lo, s.hi] and P.leq[s.hi, t.hi]
        for s, t in zip(S, T)
    )


def box_points(P: Poset, box: Box) -> list[tuple[int, ...]]:
    return list(product(*(P.members(iv.lo, iv.hi) for iv in box)))


def box_subboxes(P: Poset, T: Box) -> list[Box]:
    """Every S ⊆ T, lexicographic on component intervals."""
    return [tuple(c) for c in product(*(P.subintervals(iv) for iv in T))]


def box_split(P: Poset, S: Box, T: Box, point) -> tuple[tuple[Box, Box], tuple[Box, Box]]:
    """Split S ⊆ T at a point of S: ((S1, T1), (S2, T2))."""
    point = tuple(P.idx(x) for x in point)
    if len(point) != len(S) or not box_contains(P, S, T):
        raise PosetError("malformed inclusion or split point")
    for q, s in zip(point, S):
        if not (P.leq[s.lo, q] and P.leq[q, s.hi]):
            raise PosetError("split point is not in S")
    S1 = tuple(Interval(s.lo, q) for s, q in zip(S, point))
    T1 = tuple(Interval(t.lo, q) for t, q in zip(T, point))
    S2 = tuple(Interval(q, s.hi) for s, q in zip(S, point))
    T2 = tuple(Interval(q, t.hi) for t, q in zip(T, point))
    return (S1, T1), (S2, T2)


def is_lower_extremal(P: Poset, S: Box, T: Box) -> bool:
    """S is the singleton at the bottom of T and T has positive height.

    Components of T of height zero satisfy the per-interval condition
    vacuously.
    """
    if box_height(P, T) < 1:
        return False
    return all(s.lo == s.hi == t.lo for s, t in zip(S, T))


def _coordinate_pairs(P: Poset) -> list[tuple[Interval, Interval]]:
    return [(t, s) for t in P.intervals for s in P.subintervals(t)]


def count_inclusion_pairs(P: Poset, n: int) -> int:
    """Number of inclusions S ⊆ T of boxes in P^n."""
    if n not in (2, 3):
        raise PosetError("arity must be 2 or 3")
    per = sum(len(P.subintervals(t)) for t in P.intervals)
    return per**n


def inclusion_pairs(P: Poset, n: int) -> Iterable[tuple[Box, Box]]:
    """All (S, T) with S ⊆ T in P^n.

    Order: lexicographic over the per-coordinate pairs (T_k, S_k), first
    coordinate slowest.
    """
    if n not in (2, 3):
        raise PosetError("arity must be 2 or 3")
    coords = _coordinate_pairs(P)
    for combo in product(coords, repeat=n):
        yield tuple(s for _, s in combo), tuple(t for t, _ in combo)


def reduced_inclusions(P: Poset, n: int) -> list[tuple[Box, Box]]:
    """Lower-extremal inclusions with h(T) >= 1 plus S = T with h(T) = 1."""
    out = []
    for T in product(P.intervals, repeat=n):
        h = box_height(P, T)
        if h >= 1:
            out.append((tuple(Interval(t.lo, t.lo) for t in T), T))
        if h == 1:
            out.append((T, T))
    return out

"""The incidence coalgebra of a finite poset."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from .poset import Poset, PosetError
from .scalar import Field, QQ, Scalar

__all__ = [
    "CoalgebraBasis",
    "TensorVector",
    "delta",
    "counit",
    "coassociativity_check",
]


class CoalgebraBasis:
    """Basis Y = {(a, b) : a <= b} of D = KY with tensor-index maps.

    ``Y`` is ordered lexicographically by element index.  A basis tensor of
    degree n is a tuple of Y-indices; its flat index is the base-|Y|
    number formed by those digits (first factor most significant).
    """

    def __init__(self, P: Poset):
        self.P = P
        self.Y: list[tuple[int, int]] = [(iv.lo, iv.hi) for iv in P.intervals]
        self.index = {y: k for k, y in enumerate(self.Y)}
        yidx = np.full((P.n, P.n), -1, dtype=np.int64)
        for k, (a, b) in enumerate(self.Y):
            yidx[a, b] = k
        yidx.setflags(write=False)
        self.yidx = yidx

    @property
    def dim(self) -> int:
        return len(self.Y)

    def __len__(self):
        return len(self.Y)

    def y(self, a, b) -> int:
        a, b = self.P.idx(a), self.P.idx(b)
        k = int(self.yidx[a, b])
        if k < 0:
            raise PosetError(f"({self.P.labels[a]}, {self.P.labels[b]}) is not in Y")
        return k

    def flat(self, *ys: int) -> int:
        out = 0
        for k in ys:
            out = out * len(self.Y) + k
        return out

    def unflat(self, idx: int, degree: int) -> tuple[int, ...]:
        m = len(self.Y)
        out = []
        for _ in range(degree):
            idx, r = divmod(idx, m)
            out.append(r)
        return tuple(reversed(out))

    def label(self, k: int) -> tuple[str, str]:
        a, b = self.Y[k]
        return self.P.labels[a], self.P.labels[b]

    @cached_property
    def heights(self) -> np.ndarray:
        return np.array([self.P.height_matrix[a, b] for a, b in self.Y], dtype=np.int64)


@dataclass
class TensorVector:
    """Sparse element of D^{⊗n}: basis tuple -> nonzero Scalar."""

    degree: int
    field: Field = QQ
    terms: dict = dc_field(default_factory=dict)

    def add(self, key: tuple, coeff) -> None:
        c = self.terms.get(key)
        c = self.field(coeff) if c is None else c + coeff
        if c:
            self.terms[key] = c
        else:
            self.terms.pop(key, None)

    def __eq__(self, other):
        return (
            isinstance(other, TensorVector)
            and self.degree == other.degree
            and self.terms == other.terms
        )

    def __len__(self):
        return len(self.terms)

    def items(self):
        return self.terms.items()


def delta(basis: CoalgebraBasis, y) -> list[tuple[int, int]]:
    """Δ(a, b) = Σ_{c ∈ [a, b]} (a, c) ⊗ (c, b), as pairs of Y-indices."""
    if isinstance(y, (int, np.integer)):
        a, b = basis.Y[int(y)]
    else:
        a, b = basis.P.idx(y[0]), basis.P.idx(y[1])
        basis.y(a, b)
    return [(int(basis.yidx[a, c]), int(basis.yidx[c, b])) for c in basis.P.members(a, b)]


def counit(basis: CoalgebraBasis, y, field: Field = QQ) -> Scalar:
    if isinstance(y, (int, np.integer)):
        a, b = basis.Y[int(y)]
    else:
        a, b = basis.P.idx(y[0]), basis.P.idx(y[1])
    return field.one() if a == b else field.zero()


def counit_tensor(basis: CoalgebraBasis, vec: TensorVector) -> Scalar:
    """ε^{⊗n} applied linearly to a tensor."""
    total = vec.field.zero()
    for key, c in vec.items():
        if all(basis.Y[k][0] == basis.Y[k][1] for k in key):
            total = total + c
    return total


def coassociativity_check(P: Poset | CoalgebraBasis) -> bool:
    """(Δ⊗id)Δ = (id⊗Δ)Δ and both counit laws, on every basis element."""
    basis = P if isinstance(P, CoalgebraBasis) else CoalgebraBasis(P)
    for k in range(basis.dim):
        d = delta(basis, k)
        left: dict = {}
        right: dict = {}
        for y1, y2 in d:
            for z1, z2 in delta(basis, y1):
                left[(z1, z2, y2)] = left.get((z1, z2, y2), 0) + 1
            for z1, z2 in delta(basis, y2):
                right[(y1, z1, z2)] = right.get((y1, z1, z2), 0) + 1
        if left != right:
            return False
        lc: dict = {}
        rc: dict = {}
        for y1, y2 in d:
            a1, b1 = basis.Y[y1]
            a2, b2 = basis.Y[y2]
            if a1 == b1:
                lc[y2] = lc.get(y2, 0) + 1
            if a2 == b2:
                rc[y1] = rc.get(y1, 0) + 1
        if lc != {k: 1} or rc != {k: 1}:
            return False
    return True

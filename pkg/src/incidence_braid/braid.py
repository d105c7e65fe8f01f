"""λ-tables, their structural conditions, and braid-equation verification.

A :class:`LambdaTable` stores the coefficients λ_{a|b|c|d}^{e|f|g|h} of a
linear map r on D⊗D,

    r((a,b)⊗(c,d)) = Σ λ_{a|b|c|d}^{e|f|g|h} (e,f)⊗(g,h),

together with the set-level solution r0 it should induce.  Three
independent braid verifiers are provided: the full LBE = RBE sweep over
all box inclusions, the reduced sweep over lower-extremal inclusions, and
a matrix oracle that multiplies r12 r23 r12 and r23 r12 r23 outright.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property, reduce
from itertools import product
from math import lcm
from typing import Any, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from . import _kernels as K
from .coalgebra import CoalgebraBasis
from .poset import (
    Box,
    Interval,
    Poset,
    PosetError,
    box_contains,
    box_height,
    box_points,
    box_subboxes,
    inclusion_pairs,
    poset_build,
    reduced_inclusions,
)
from .scalar import Field, FieldError, QQ, Scalar, field_make

__all__ = [
    "TableError",
    "CheckReport",
    "SetSolution",
    "LambdaTable",
    "structural_check",
    "nondegeneracy_check",
    "lbe",
    "rbe",
    "psi",
    "verify_braid_full",
    "verify_braid_reduced",
    "braid_defect_matrix",
    "DefectResult",
    "lbe_counit_sum_check",
    "case_equation_residuals",
    "default_workers",
]

INT64_SAFE = 2**62
DEFAULT_GUARD_DIM = 20000


class TableError(ValueError):
    """Malformed table, inclusion or oracle request."""


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("INCIDENCE_BRAID_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass
class CheckReport:
    """Outcome of a check: verdict, first counterexample, counts."""

    check: str
    passed: bool
    counterexample: dict | None = None
    checked: int = 0
    failures: int = 0
    details: dict = dc_field(default_factory=dict)

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict:
        out = {
            "check": self.check,
            "passed": self.passed,
            "checked": self.checked,
            "failures": self.failures,
            "counterexample": self.counterexample,
        }
        out.update(self.details)
        return out


# ---------------------------------------------------------------------------
# set-level solution


class SetSolution:
    """r0(a, c) = (L[a, c], R[a, c]) on a poset."""

    def __init__(self, P: Poset, left, right):
        self.P = P
        L = np.array(left, dtype=np.int64)
        R = np.array(right, dtype=np.int64)
        if L.shape != (P.n, P.n) or R.shape != (P.n, P.n):
            raise TableError("action tables must be n x n")
        if P.n and (L.min() < 0 or L.max() >= P.n or R.min() < 0 or R.max() >= P.n):
            raise TableError("action value out of range")
        L.setflags(write=False)
        R.setflags(write=False)
        self.L = L
        self.R = R

    @classmethod
    def from_automorphisms(cls, P: Poset, phi_l: Sequence[int], phi_r: Sequence[int]):
        """L(x, y) = φ_l(y) and R(x, y) = φ_r(x)."""
        n = P.n
        L = np.tile(np.asarray(phi_l, dtype=np.int64), (n, 1))
        R = np.tile(np.asarray(phi_r, dtype=np.int64).reshape(n, 1), (1, n))
        return cls(P, L, R)

    @classmethod
    def flip(cls, P: Poset):
        ident = list(range(P.n))
        return cls.from_automorphisms(P, ident, ident)

    def __eq__(self, other):
        return (
            isinstance(other, SetSolution)
            and self.P == other.P
            and np.array_equal(self.L, other.L)
            and np.array_equal(self.R, other.R)
        )

    def r0(self, a: int, c: int) -> tuple[int, int]:
        return int(self.L[a, c]), int(self.R[a, c])

    @cached_property
    def Linv(self) -> np.ndarray:
        """Linv[a, y] = the q with L[a, q] = y (or -1)."""
        n = self.P.n
        out = np.full((n, n), -1, dtype=np.int64)
        for a in range(n):
            out[a, self.L[a]] = np.arange(n)
        return out

    @cached_property
    def Rinv(self) -> np.ndarray:
        """Rinv[c, z] = the p with R[p, c] = z (or -1)."""
        n = self.P.n
        out = np.full((n, n), -1, dtype=np.int64)
        for c in range(n):
            out[c, self.R[:, c]] = np.arange(n)
        return out

    @property
    def phi_l(self) -> list[int]:
        self._require_constant()
        return [int(x) for x in self.L[0]] if self.P.n else []

    @property
    def phi_r(self) -> list[int]:
        self._require_constant()
        return [int(x) for x in self.R[:, 0]] if self.P.n else []

    def _require_constant(self):
        if not self.P.is_connected:
            raise TableError("φ_l, φ_r need a connected poset")
        if not self.is_constant():
            raise TableError("actions are not constant on the poset")

    def is_constant(self) -> bool:
        n = self.P.n
        return bool((self.L == self.L[0:1]).all() and (self.R == self.R[:, 0:1]).all()) if n else True

    def violations(self) -> list[str]:
        """Failed invariants among: non-degenerate, automorphisms,
        component constancy, set braid equation."""
        P = self.P
        n = P.n
        out = []
        for a in range(n):
            if sorted(self.L[a].tolist()) != list(range(n)):
                out.append(f"left action of {P.labels[a]} is not bijective")
                break
        for b in range(n):
            if sorted(self.R[:, b].tolist()) != list(range(n)):
                out.append(f"right action of {P.labels[b]} is not bijective")
                break
        if out:
            return out
        for a in range(n):
            if not P.is_automorphism(self.L[a]):
                out.append(f"left action of {P.labels[a]} is not a poset automorphism")
                break
        for b in range(n):
            if not P.is_automorphism(self.R[:, b]):
                out.append(f"right action of {P.labels[b]} is not a poset automorphism")
                break
        for comp in P.components:
            ref = comp[0]
            for x in comp[1:]:
                if not np.array_equal(self.L[x], self.L[ref]) or not np.array_equal(
                    self.R[:, x], self.R[:, ref]
                ):
                    out.append(
                        f"actions differ on {P.labels[ref]} and {P.labels[x]} in one component"
                    )
                    break
        if not self.is_braided():
            out.append("r0 does not satisfy the set braid equation")
        return out

    def is_braided(self) -> bool:
        L, R = self.L, self.R
        n = self.P.n
        for x, y, z in product(range(n), repeat=3):
            # r12 r23 r12
            a1, b1 = L[x, y], R[x, y]
            b2, c2 = L[b1, z], R[b1, z]
            a3, b3 = L[a1, b2], R[a1, b2]
            lhs = (a3, b3, c2)
            # r23 r12 r23
            y1, z1 = L[y, z], R[y, z]
            x2, y2 = L[x, y1], R[x, y1]
            y3, z3 = L[y2, z1], R[y2, z1]
            if lhs != (x2, y3, z3):
                return False
        return True

    def to_json(self) -> dict:
        lab = self.P.labels
        return {
            "left": [[lab[v] for v in row] for row in self.L.tolist()],
            "right": [[lab[v] for v in row] for row in self.R.tolist()],
        }

    @classmethod
    def from_json(cls, P: Poset, data: dict) -> "SetSolution":
        try:
            left = [[P.idx(v) for v in row] for row in data["left"]]
            right = [[P.idx(v) for v in row] for row in data["right"]]
        except (KeyError, TypeError) as exc:
            raise TableError(f"bad r0 description: {exc}") from exc
        return cls(P, left, right)


# ---------------------------------------------------------------------------
# λ-tables


@dataclass
class _Coded:
    """Integer-coded table for the kernels."""

    lam: np.ndarray
    mod: int
    scale: int
    yidx: np.ndarray
    Y: np.ndarray
    L: np.ndarray
    R: np.ndarray
    Linv: np.ndarray
    Rinv: np.ndarray
    mem: np.ndarray
    memlen: np.ndarray
    bound: int  # max |entry|
    maxlen: int

    def safe(self, factors: int, terms: int) -> bool:
        if self.mod:
            return self.mod**2 < INT64_SAFE
        return (self.bound**factors) * terms < INT64_SAFE

    def as_object(self) -> "_Coded":
        return _Coded(
            self.lam.astype(object), self.mod, self.scale, self.yidx, self.Y,
            self.L, self.R, self.Linv, self.Rinv, self.mem, self.memlen,
            self.bound, self.maxlen,
        )

    def decode(self, value, power: int, field: Field) -> Scalar:
        if self.mod:
            return field(int(value))
        return field(Fraction(int(value), self.scale**power))


class LambdaTable:
    """Sparse coefficients of r on D⊗D over an exact field.

    ``entries[(s1, s2)][(d1, d2)]`` is the Scalar coefficient, with all
    four keys Y-indices of :class:`CoalgebraBasis`.  Absent means zero.
    """

    def __init__(self, P: Poset, field: Field, sol: SetSolution, entries=None):
        if sol.P != P:
            raise TableError("set solution lives on another poset")
        self.P = P
        self.field = field
        self.sol = sol
        self.basis = CoalgebraBasis(P)
        self.entries: dict[tuple[int, int], dict[tuple[int, int], Scalar]] = {}
        for (src, dst), c in (entries or {}).items():
            self.set_idx(src, dst, c)

    # -- construction ----------------------------------------------------
    def support_ok(self, src: tuple[int, int], dst: tuple[int, int]) -> bool:
        P, L, R = self.P, self.sol.L, self.sol.R
        (a, b), (c, d) = self.basis.Y[src[0]], self.basis.Y[src[1]]
        (e, f), (g, h) = self.basis.Y[dst[0]], self.basis.Y[dst[1]]
        le = P.leq
        return bool(
            le[R[a, c], g] and le[h, R[b, c]] and le[L[a, c], e] and le[f, L[a, d]]
        )

    def set_idx(self, src, dst, coeff, check_support: bool = True) -> None:
        src = (int(src[0]), int(src[1]))
        dst = (int(dst[0]), int(dst[1]))
        c = self.field(coeff)
        if c and check_support and not self.support_ok(src, dst):
            raise TableError(f"entry {self.describe(src, dst)} violates the support condition")
        col = self.entries.setdefault(src, {})
        if c:
            col[dst] = c
        else:
            col.pop(dst, None)
        self.__dict__.pop("coded", None)

    def set(self, a, b, c, d, e, f, g, h, coeff, check_support: bool = True) -> None:
        B = self.basis
        self.set_idx((B.y(a, b), B.y(c, d)), (B.y(e, f), B.y(g, h)), coeff, check_support)

    def copy(self) -> "LambdaTable":
        t = LambdaTable(self.P, self.field, self.sol)
        t.entries = {k: dict(v) for k, v in self.entries.items()}
        return t

    def with_entry(self, src, dst, coeff, check_support: bool = False) -> "LambdaTable":
        t = self.copy()
        t.set_idx(src, dst, coeff, check_support)
        return t

    # -- access -----------------------------------------------------------
    def get_idx(self, s1: int, s2: int, d1: int, d2: int) -> Scalar:
        if min(s1, s2, d1, d2) < 0:
            return self.field.zero()
        c = self.entries.get((s1, s2), {}).get((d1, d2))
        return self.field.zero() if c is None else c

    def lam(self, a, b, c, d, e, f, g, h) -> Scalar:
        """λ_{a|b|c|d}^{e|f|g|h} (zero if any pair is not in Y)."""
        y = self.basis.yidx
        P = self.P
        a, b, c, d, e, f, g, h = (P.idx(t) for t in (a, b, c, d, e, f, g, h))
        return self.get_idx(int(y[a, b]), int(y[c, d]), int(y[e, f]), int(y[g, h]))

    def column(self, s1: int, s2: int) -> dict[tuple[int, int], Scalar]:
        return self.entries.get((s1, s2), {})

    def nonzero(self) -> Iterable[tuple[tuple[int, int], tuple[int, int], Scalar]]:
        for src in sorted(self.entries):
            for dst in sorted(self.entries[src]):
                yield src, dst, self.entries[src][dst]

    def __eq__(self, other):
        if not isinstance(other, LambdaTable):
            return NotImplemented
        strip = lambda t: {k: v for k, v in t.entries.items() if v}
        return (
            self.P == other.P
            and self.field == other.field
            and self.sol == other.sol
            and strip(self) == strip(other)
        )

    def describe(self, src, dst) -> str:
        lab = self.basis.label
        (a, b), (c, d) = lab(src[0]), lab(src[1])
        (e, f), (g, h) = lab(dst[0]), lab(dst[1])
        return f"λ_{{{a}|{b}|{c}|{d}}}^{{{e}|{f}|{g}|{h}}}"

    # -- integer coding ---------------------------------------------------
    @cached_property
    def coded(self) -> _Coded:
        P, B = self.P, self.basis
        ny, n = B.dim, P.n
        if ny**4 > 50_000_000:
            raise TableError("table too large to encode densely")
        mod = self.field.p
        if mod:
            scale = 1
            vals = {k: {d: c.value for d, c in col.items()} for k, col in self.entries.items()}
        else:
            dens = [c.value.denominator for col in self.entries.values() for c in col.values()]
            scale = reduce(lcm, dens, 1)
            vals = {
                k: {d: int(c.value * scale) for d, c in col.items()}
                for k, col in self.entries.items()
            }
        bound = max((abs(v) for col in vals.values() for v in col.values()), default=0)
        dtype = np.int64 if bound < 2**62 else object
        lam = np.zeros((ny, ny, ny, ny), dtype=dtype)
        for (s1, s2), col in vals.items():
            for (d1, d2), v in col.items():
                lam[s1, s2, d1, d2] = v
        sizes = [[len(P.members(a, b)) if P.leq[a, b] else 0 for b in range(n)] for a in range(n)]
        maxlen = max((max(r) for r in sizes), default=1) or 1
        mem = np.zeros((n, n, maxlen), dtype=np.int64)
        memlen = np.array(sizes, dtype=np.int64).reshape(n, n)
        for a in range(n):
            for b in range(n):
                if P.leq[a, b]:
                    m = P.members(a, b)
                    mem[a, b, : len(m)] = m
        return _Coded(
            lam=lam, mod=mod, scale=scale, yidx=np.ascontiguousarray(B.yidx),
            Y=np.array(B.Y, dtype=np.int64).reshape(-1, 2),
            L=np.ascontiguousarray(self.sol.L), R=np.ascontiguousarray(self.sol.R),
            Linv=self.sol.Linv, Rinv=self.sol.Rinv, mem=mem, memlen=memlen,
            bound=int(bound), maxlen=int(maxlen),
        )

    # -- matrix of r --------------------------------------------------------
    def matrix_int(self) -> tuple[dict[int, dict[int, int]], int]:
        """Columns of the scaled integer matrix of r, and the scale."""
        B = self.basis
        co = self.coded
        cols: dict[int, dict[int, int]] = {}
        for (s1, s2), col in self.entries.items():
            j = B.flat(s1, s2)
            out = {}
            for (d1, d2), c in col.items():
                out[B.flat(d1, d2)] = c.value if co.mod else int(c.value * co.scale)
            if out:
                cols[j] = out
        return cols, co.scale

    # -- JSON ---------------------------------------------------------------
    def to_json(self) -> dict:
        lab = self.basis.label
        entries = []
        for src, dst, c in self.nonzero():
            entries.append(
                {
                    "src": [list(lab(src[0])), list(lab(src[1]))],
                    "dst": [list(lab(dst[0])), list(lab(dst[1]))],
                    "coeff": str(c),
                }
            )
        return {
            "schema": "incidence-braid/1",
            "field": self.field.to_json(),
            "poset": self.P.to_json(),
            "r0": self.sol.to_json(),
            "entries": entries,
        }

    @classmethod
    def from_json(cls, data: dict) -> "LambdaTable":
        try:
            field = field_make(data["field"])
            pj = data["poset"]
            P = poset_build(pj["elements"], pj.get("covers", []))
            sol = SetSolution.from_json(P, data["r0"])
            tab = cls(P, field, sol)
            for ent in data.get("entries", []):
                (a, b), (c, d) = ent["src"]
                (e, f), (g, h) = ent["dst"]
                tab.set(a, b, c, d, e, f, g, h, field.parse(ent["coeff"]), check_support=False)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, (TableError, PosetError, FieldError)):
                raise
            raise TableError(f"malformed table JSON: {exc!r}") from exc
        return tab


# ---------------------------------------------------------------------------
# structural conditions


def structural_check(tab: LambdaTable) -> CheckReport:
    """Conditions 1)-5), group-like normalization and the r0 invariants."""
    P, B, F = tab.P, tab.basis, tab.field
    L, R = tab.sol.L, tab.sol.R
    parts: dict[str, bool] = {}
    first: dict | None = None
    failures = 0

    def fail(part, info):
        nonlocal first, failures
        failures += 1
        parts[part] = False
        if first is None:
            first = {"condition": part, **info}

    viol = tab.sol.violations()
    parts["r0"] = not viol
    if viol:
        fail("r0", {"reason": viol[0]})
        return CheckReport("structural", False, first, 0, failures, {"conditions": parts})

    # support
    parts["support"] = True
    for src, dst, _ in tab.nonzero():
        if not tab.support_ok(src, dst):
            fail("support", {"entry": tab.describe(src, dst)})

    # group-like normalization
    parts["group_like"] = True
    for x in range(P.n):
        for y in range(P.n):
            s = (int(B.yidx[x, x]), int(B.yidx[y, y]))
            lx = int(L[x, y])
            rx = int(R[x, y])
            d = (int(B.yidx[lx, lx]), int(B.yidx[rx, rx]))
            if tab.get_idx(*s, *d) != F.one():
                fail("group_like", {"entry": tab.describe(s, d)})

    # counit sums
    parts["counit"] = True
    diag = [k for k, (e, f) in enumerate(B.Y) if e == f]
    for (s1, s2) in product(range(B.dim), repeat=2):
        col = tab.column(s1, s2)
        total = F.zero()
        for (d1, d2), c in col.items():
            if d1 in diag and d2 in diag:
                total = total + c
        (a, b), (c_, d_) = B.Y[s1], B.Y[s2]
        want = F.one() if (a == b and c_ == d_) else F.zero()
        if total != want:
            fail("counit", {"src": [list(B.label(s1)), list(B.label(s2))], "sum": str(total)})

    # split identity
    co = tab.coded
    if not co.safe(2, 1):
        co = co.as_object()
        kern = K.py(K.split_violations)
    else:
        kern = K.split_violations
    first_split = np.zeros(6, dtype=np.int64)
    n_split = kern(
        co.lam, co.yidx, co.Y, co.L, co.R, co.Linv, co.Rinv,
        co.mem, co.memlen, co.mod, co.scale, first_split,
    )
    parts["split"] = n_split == 0
    if n_split:
        s1, s2, d1, d2, yy, zz = (int(t) for t in first_split)
        failures += int(n_split) - 1
        fail(
            "split",
            {
                "entry": tab.describe((s1, s2), (d1, d2)),
                "y": P.labels[yy],
                "z": P.labels[zz],
            },
        )
    passed = all(parts.values())
    return CheckReport("structural", passed, first, B.dim**2, failures, {"conditions": parts})


# ---------------------------------------------------------------------------
# non-degeneracy


def _rank(cols: dict[int, dict[int, Any]], dim: int, field: Field) -> int:
    from sympy.polys.domains import GF as SymGF, QQ as SymQQ
    from sympy.polys.matrices import DomainMatrix

    if field.p:
        dom = SymGF(field.p)
        conv = lambda v: dom(int(v))
    else:
        dom = SymQQ
        conv = lambda v: dom(v.numerator, v.denominator) if isinstance(v, Fraction) else dom(v)
    rows: dict[int, dict[int, Any]] = {}
    for j, col in cols.items():
        for i, v in col.items():
            if v:
                rows.setdefault(i, {})[j] = conv(v)
    M = DomainMatrix(rows, (dim, dim), dom)
    return M.rank()


def nondegeneracy_check(tab: LambdaTable) -> CheckReport:
    """Invertibility of r and of the two non-degeneracy maps.

    With σ = (D⊗ε)r and τ = (ε⊗D)r, the maps are
    x⊗y ↦ Σ x₁ ⊗ σ(x₂⊗y) and x⊗y ↦ Σ τ(x⊗y₁) ⊗ y₂.
    """
    B = tab.basis
    m = B.dim
    dim = m * m
    raw = lambda c: c.value
    r_cols: dict[int, dict[int, Any]] = {}
    n1: dict[int, dict[int, Any]] = {}
    n2: dict[int, dict[int, Any]] = {}

    def add(cols, j, i, v):
        col = cols.setdefault(j, {})
        col[i] = col.get(i, 0) + v

    for s1 in range(m):
        a, b = B.Y[s1]
        for s2 in range(m):
            c, d = B.Y[s2]
            j = B.flat(s1, s2)
            for (d1, d2), v in tab.column(s1, s2).items():
                add(r_cols, j, B.flat(d1, d2), raw(v))
            # x⊗y ↦ Σ_{p∈[a,b]} (a,p) ⊗ σ((p,b)⊗(c,d))
            for p in tab.P.members(a, b):
                left = int(B.yidx[a, p])
                for (d1, d2), v in tab.column(int(B.yidx[p, b]), s2).items():
                    e, f = B.Y[d2]
                    if e == f:
                        add(n1, j, B.flat(left, d1), raw(v))
            # x⊗y ↦ Σ_{q∈[c,d]} τ((a,b)⊗(c,q)) ⊗ (q,d)
            for q in tab.P.members(c, d):
                right = int(B.yidx[q, d])
                for (d1, d2), v in tab.column(s1, int(B.yidx[c, q])).items():
                    e, f = B.Y[d1]
                    if e == f:
                        add(n2, j, B.flat(d2, right), raw(v))

    if tab.field.p:
        p = tab.field.p
        for cols in (r_cols, n1, n2):
            for col in cols.values():
                for k in col:
                    col[k] %= p
    ranks = {
        "r": _rank(r_cols, dim, tab.field),
        "left_map": _rank(n1, dim, tab.field),
        "right_map": _rank(n2, dim, tab.field),
    }
    bad = [k for k, v in ranks.items() if v != dim]
    ce = None if not bad else {"singular": bad[0], "rank": ranks[bad[0]], "dim": dim}
    return CheckReport(
        "nondegeneracy", not bad, ce, 3, len(bad), {"ranks": ranks, "dim": dim}
    )


# ---------------------------------------------------------------------------
# LBE / RBE, reference implementation on Scalars


def _check_inclusion(P: Poset, S: Box, T: Box, n: int) -> None:
    if len(S) != n or len(T) != n:
        raise TableError(f"boxes must have {n} components")
    for iv in tuple(S) + tuple(T):
        if not P.leq[iv[0], iv[1]]:
            raise TableError("box component is not an interval")
    if not box_contains(P, S, T):
        raise TableError("S is not contained in T")


def _as_box(P: Poset, box) -> Box:
    return tuple(Interval(P.idx(iv[0]), P.idx(iv[1])) for iv in box)


def lbe(tab: LambdaTable, S, T) -> Scalar:
    """Left braid coefficient sum of the inclusion S ⊆ T in X³."""
    P = tab.P
    S, T = _as_box(P, S), _as_box(P, T)
    _check_inclusion(P, S, T, 3)
    (a, b), (c, d), (e, f) = T
    (g, h), (i, j), (k, l) = S
    L, R = tab.sol.L, tab.sol.R
    lam = tab.lam
    m = P.members
    o1, o2 = L[a, L[c, k]], L[a, L[c, l]]
    o3 = R[L[a, i], L[R[a, i], e]]
    o4 = R[L[a, j], L[R[a, j], e]]
    gce, hce = R[R[g, c], e], R[R[h, c], e]
    total = tab.field.zero()
    for x in m(a, g):
        xc = R[x, c]
        for y in m(h, b):
            yc = R[y, c]
            for w in m(c, i):
                for z in m(j, d):
                    aw, az = L[a, w], L[a, z]
                    l1 = lam(a, b, c, d, aw, az, xc, yc)
                    if not l1:
                        continue
                    for u in m(e, k):
                        for v in m(l, f):
                            xu, xv = L[xc, u], L[xc, v]
                            l2 = lam(xc, yc, e, f, xu, xv, gce, hce)
                            if not l2:
                                continue
                            total = total + l1 * l2 * lam(aw, az, xu, xv, o1, o2, o3, o4)
    return total


def rbe(tab: LambdaTable, S, T) -> Scalar:
    """Right braid coefficient sum of the inclusion S ⊆ T in X³."""
    P = tab.P
    S, T = _as_box(P, S), _as_box(P, T)
    _check_inclusion(P, S, T, 3)
    (a, b), (c, d), (e, f) = T
    (g, h), (i, j), (k, l) = S
    L, R = tab.sol.L, tab.sol.R
    lam = tab.lam
    m = P.members
    ack, acl = L[a, L[c, k]], L[a, L[c, l]]
    q1 = L[R[a, L[i, e]], R[i, e]]
    q2 = L[R[a, L[j, e]], R[j, e]]
    gce, hce = R[R[g, c], e], R[R[h, c], e]
    total = tab.field.zero()
    for u in m(e, k):
        for v in m(l, f):
            cu, cv = L[c, u], L[c, v]
            for w in m(c, i):
                for z in m(j, d):
                    we, ze = R[w, e], R[z, e]
                    l1 = lam(c, d, e, f, cu, cv, we, ze)
                    if not l1:
                        continue
                    for x in m(a, g):
                        for y in m(h, b):
                            xcu, ycu = R[x, cu], R[y, cu]
                            l2 = lam(a, b, cu, cv, ack, acl, xcu, ycu)
                            if not l2:
                                continue
                            total = total + l1 * l2 * lam(xcu, ycu, we, ze, q1, q2, gce, hce)
    return total


def psi(tab: LambdaTable, S) -> tuple[int, int, int]:
    """Basis tensor (as Y-indices) that LBE(S, T) multiplies."""
    P = tab.P
    S = _as_box(P, S)
    (g, h), (i, j), (k, l) = S
    L, R = tab.sol.L, tab.sol.R
    y = tab.basis.yidx
    t1 = (L[g, L[i, k]], L[g, L[i, l]])
    gik = R[g, L[i, k]]
    t2 = (L[gik, R[i, k]], L[gik, R[j, k]])
    t3 = (R[R[g, i], k], R[R[h, i], k])
    return int(y[t1]), int(y[t2]), int(y[t3])


# ---------------------------------------------------------------------------
# batched verification


def _boxes_array(incs: Sequence[tuple[Box, Box]]) -> np.ndarray:
    rows = []
    for S, T in incs:
        rows.append([v for iv in T for v in iv] + [v for iv in S for v in iv])
    width = 4 * len(incs[0][0]) if incs else 12
    return np.array(rows, dtype=np.int64).reshape(-1, width)


def _lbe_rbe_chunk(co: _Coded, boxes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    terms = co.maxlen**6
    if co.safe(3, terms) and co.lam.dtype != object:
        out_l = np.zeros(len(boxes), dtype=np.int64)
        out_r = np.zeros(len(boxes), dtype=np.int64)
        K.lbe_rbe_batch(co.lam, co.yidx, co.L, co.R, co.mem, co.memlen, boxes, co.mod, out_l, out_r)
    else:
        oc = co.as_object()
        out_l = np.zeros(len(boxes), dtype=object)
        out_r = np.zeros(len(boxes), dtype=object)
        K.py(K.lbe_rbe_batch)(oc.lam, oc.yidx, oc.L, oc.R, oc.mem, oc.memlen, boxes, oc.mod, out_l, out_r)
    return out_l, out_r


def lbe_rbe_values(tab: LambdaTable, incs: Sequence[tuple[Box, Box]], workers: int = 1):
    """Scaled LBE and RBE values for many inclusions (kernel path)."""
    co = tab.coded
    if not incs:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    boxes = _boxes_array(incs)
    if workers <= 1 or len(boxes) < 2 * workers:
        return _lbe_rbe_chunk(co, boxes)
    chunks = np.array_split(boxes, workers)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(_lbe_rbe_chunk, [co] * len(chunks), chunks))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _box_json(P: Poset, box: Box) -> list[list[str]]:
    return [[P.labels[iv[0]], P.labels[iv[1]]] for iv in box]


def _compare(tab, incs, check, workers, verbose=False) -> CheckReport:
    lv, rv = lbe_rbe_values(tab, incs, workers)
    co = tab.coded
    bad = np.nonzero(lv != rv)[0]
    ce = None
    if len(bad):
        k = int(bad[0])
        S, T = incs[k]
        ce = {
            "S": _box_json(tab.P, S),
            "T": _box_json(tab.P, T),
            "lbe": str(co.decode(lv[k], 3, tab.field)),
            "rbe": str(co.decode(rv[k], 3, tab.field)),
        }
    details: dict = {}
    if verbose:
        details["residuals"] = [
            {
                "S": _box_json(tab.P, S),
                "T": _box_json(tab.P, T),
                "residual": str(co.decode(lv[k] - rv[k], 3, tab.field)),
            }
            for k, (S, T) in enumerate(incs)
        ]
    return CheckReport(check, not len(bad), ce, len(incs), int(len(bad)), details)


def verify_braid_full(tab: LambdaTable, workers: int | None = None, verbose: bool = False) -> CheckReport:
    """LBE(S,T) = RBE(S,T) for every inclusion of boxes in X³."""
    incs = list(inclusion_pairs(tab.P, 3))
    return _compare(tab, incs, "braid_full", workers or default_workers(), verbose)


def verify_braid_reduced(tab: LambdaTable, workers: int | None = None, verbose: bool = False) -> CheckReport:
    """r0 braided, and LBE = RBE on lower-extremal inclusions (h(T) >= 1)
    and on S = T with h(T) = 1.

    The reduced set only decides the braid equation for tables passing
    :func:`structural_check`; other tables are reported as failures with
    the structural counterexample.
    """
    st = structural_check(tab)
    if not st.passed:
        return CheckReport(
            "braid_reduced", False,
            {"reason": "structural conditions fail; the reduced set does not apply",
             "structural": st.counterexample},
            0, 1,
        )
    if not tab.sol.is_braided():
        return CheckReport(
            "braid_reduced", False, {"reason": "r0 does not satisfy the set braid equation"}, 0, 1
        )
    incs = reduced_inclusions(tab.P, 3)
    return _compare(tab, incs, "braid_reduced", workers or default_workers(), verbose)


def lbe_counit_sum_check(tab: LambdaTable, T) -> bool:
    """Σ_{S ⊆ T, h(S)=0} LBE(S,T) = δ_ab δ_cd δ_ef, and the same for RBE."""
    P = tab.P
    T = _as_box(P, T)
    incs = [(tuple(Interval(p, p) for p in pt), T) for pt in box_points(P, T)]
    lv, rv = lbe_rbe_values(tab, incs)
    co = tab.coded
    want = 1 if all(iv[0] == iv[1] for iv in T) else 0
    want = want * (1 if co.mod else co.scale**3)
    sl, sr = sum(lv.tolist()), sum(rv.tolist())
    if co.mod:
        sl, sr = sl % co.mod, sr % co.mod
    return sl == want and sr == want


_CASES = {
    # (a≺b?, c≺d?, e≺f?)
    "110": (True, True, False),
    "101": (True, False, True),
    "011": (False, True, True),
    "111": (True, True, True),
}


def case_equation_residuals(tab: LambdaTable, case: str, labels: Sequence) -> Scalar:
    """LBE - RBE for the lower-extremal inclusion of a height-one case.

    ``labels`` is (a, b, c, d, e, f); a coordinate flagged 0 in ``case``
    must have equal endpoints, a coordinate flagged 1 must be a cover.
    """
    case = str(case)
    if case not in _CASES:
        raise TableError(f"unknown case {case!r}")
    P = tab.P
    if P.height != 1:
        raise TableError("case equations need a poset of height one")
    if len(labels) != 6:
        raise TableError("labels must be (a, b, c, d, e, f)")
    idx = [P.idx(t) for t in labels]
    T = tuple(Interval(idx[2 * k], idx[2 * k + 1]) for k in range(3))
    for iv, strict in zip(T, _CASES[case]):
        if strict and not P.covers[iv]:
            raise TableError(f"case {case} needs a cover in this coordinate")
        if not strict and iv[0] != iv[1]:
            raise TableError(f"case {case} needs equal endpoints in this coordinate")
    S = tuple(Interval(t[0], t[0]) for t in T)
    return lbe(tab, S, T) - rbe(tab, S, T)


# ---------------------------------------------------------------------------
# matrix oracle


@dataclass
class DefectResult:
    """r12 r23 r12 - r23 r12 r23 on D⊗D⊗D."""

    matrix: Any  # scipy.sparse csr of scaled ints, or dict columns
    scale_power: int
    scale: int
    field: Field
    dim: int
    is_zero: bool

    def entries(self) -> dict[tuple[int, int], Scalar]:
        out = {}
        if isinstance(self.matrix, dict):
            items = ((i, j, v) for j, col in self.matrix.items() for i, v in col.items())
        else:
            coo = self.matrix.tocoo()
            items = zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist())
        for i, j, v in items:
            if self.field.p:
                s = self.field(int(v))
            else:
                s = self.field(Fraction(int(v), self.scale**self.scale_power))
            if s:
                out[(i, j)] = s
        return out

    def nonzero_columns(self) -> list[int]:
        return sorted({j for _, j in self.entries()})


def _sparse_r(tab: LambdaTable) -> tuple[sp.csr_matrix, int, int]:
    cols, scale = tab.matrix_int()
    m = tab.basis.dim**2
    rows, cs, data = [], [], []
    for j, col in cols.items():
        for i, v in col.items():
            rows.append(i)
            cs.append(j)
            data.append(v)
    bound = max((abs(v) for v in data), default=0)
    dtype = np.int64 if bound < 2**62 else object
    M = sp.csr_matrix((np.array(data, dtype=dtype), (rows, cs)), shape=(m, m)) if dtype != object else None
    return M, scale, bound


def _dict_apply(cols, vec, mod):
    out: dict[int, int] = {}
    for j, x in vec.items():
        for i, v in cols.get(j, {}).items():
            out[i] = out.get(i, 0) + x * v
    if mod:
        return {i: v % mod for i, v in out.items() if v % mod}
    return {i: v for i, v in out.items() if v}


def _compose_dict(first: dict, second: dict, dim: int, mod: int) -> dict:
    """Columns of second @ first."""
    return {j: _dict_apply(second, col, mod) for j, col in first.items()}


def _kron_dict(cols: dict, m: int, which: str) -> dict:
    """r12 (which='12') or r23 (which='23') as dict columns on D⊗D⊗D,
    given r's columns on D⊗D and |Y| = m."""
    out: dict[int, dict[int, int]] = {}
    mm = m * m
    for j, col in cols.items():
        for t in range(m):
            if which == "12":
                jj = j * m + t
                out[jj] = {i * m + t: v for i, v in col.items()}
            else:
                jj = t * mm + j
                out[jj] = {t * mm + i: v for i, v in col.items()}
    return out


def braid_defect_matrix(tab: LambdaTable, guard_dim: int = DEFAULT_GUARD_DIM, use_scipy: bool = True) -> DefectResult:
    """Materialize r on D⊗D and compare the two triple products exactly."""
    m = tab.basis.dim
    dim = m**3
    if dim > guard_dim:
        raise TableError(f"oracle dimension {dim} exceeds guard {guard_dim}")
    mod = tab.field.p
    M, scale, bound = _sparse_r(tab)
    nnz_col = max((len(c) for c in tab.entries.values()), default=0)
    fits = mod or (bound**3) * max(nnz_col, 1) ** 2 * 2 < INT64_SAFE
    if use_scipy and M is not None and fits:
        I = sp.identity(m, dtype=np.int64, format="csr")
        r12 = sp.kron(M, I, format="csr")
        r23 = sp.kron(I, M, format="csr")

        def mul(A, Bm):
            C = (A @ Bm).tocsr()
            if mod:
                C.data %= mod
                C.eliminate_zeros()
            return C

        left = mul(r12, mul(r23, r12))
        right = mul(r23, mul(r12, r23))
        D = (left - right).tocsr()
        if mod:
            D.data %= mod
        D.eliminate_zeros()
        return DefectResult(D, 3, scale, tab.field, dim, D.nnz == 0)
    cols, scale = tab.matrix_int()
    r12 = _kron_dict(cols, m, "12")
    r23 = _kron_dict(cols, m, "23")
    full12 = {j: r12.get(j, {}) for j in range(dim)}
    full23 = {j: r23.get(j, {}) for j in range(dim)}
    left = _compose_dict(_compose_dict(full12, full23, dim, mod), full12, dim, mod)
    right = _compose_dict(_compose_dict(full23, full12, dim, mod), full23, dim, mod)
    diff: dict[int, dict[int, int]] = {}
    for j in range(dim):
        lc, rc = left.get(j, {}), right.get(j, {})
        col = {}
        for i in set(lc) | set(rc):
            v = lc.get(i, 0) - rc.get(i, 0)
            if mod:
                v %= mod
            if v:
                col[i] = v
        if col:
            diff[j] = col
    return DefectResult(diff, 3, scale, tab.field, dim, not diff)

"""Hot loops for the braid / square coefficient sums.

All kernels work on integer-coded tables:

* ``lam[s1, s2, d1, d2]`` holds the coefficient of basis tensor
  ``Y[d1] ⊗ Y[d2]`` in ``r(Y[s1] ⊗ Y[s2])``, either as a residue mod
  ``mod`` (prime fields) or as an integer multiple of a common
  denominator (``mod == 0``, rationals).
* ``yidx[a, b]`` is the Y-index of (a, b), or -1 when a ≰ b.
* ``L[x, y]`` / ``R[x, y]`` are the left and right set actions.
* ``mem[a, b, :memlen[a, b]]`` lists the members of the interval [a, b].

The kernels are compiled with numba when it is importable and the
environment variable ``INCIDENCE_BRAID_NO_NUMBA`` is unset (or "0").
Otherwise the very same Python functions run un-jitted.  The un-jitted
functions also accept ``dtype=object`` arrays, which the callers use when
int64 could overflow.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("INCIDENCE_BRAID_NO_NUMBA", "0") not in ("", "0")

try:
    if _DISABLE:
        raise ImportError
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


def py(fn):
    """The plain-Python version of a (possibly) jitted kernel."""
    return getattr(fn, "py_func", fn)


@njit(cache=True)
def _lam(lam, yidx, a, b, c, d, e, f, g, h):
    s1 = yidx[a, b]
    s2 = yidx[c, d]
    d1 = yidx[e, f]
    d2 = yidx[g, h]
    if s1 < 0 or s2 < 0 or d1 < 0 or d2 < 0:
        return lam[0, 0, 0, 0] * 0
    return lam[s1, s2, d1, d2]


@njit(cache=True)
def lbe_one(lam, yidx, L, R, mem, memlen, bx, mod):
    a, b, c, d, e, f = bx[0], bx[1], bx[2], bx[3], bx[4], bx[5]
    g, h, i, j, k, l = bx[6], bx[7], bx[8], bx[9], bx[10], bx[11]
    # third factor output does not depend on the summation variables
    o1 = L[a, L[c, k]]
    o2 = L[a, L[c, l]]
    o3 = R[L[a, i], L[R[a, i], e]]
    o4 = R[L[a, j], L[R[a, j], e]]
    gce = R[R[g, c], e]
    hce = R[R[h, c], e]
    total = lam[0, 0, 0, 0] * 0
    for ix in range(memlen[a, g]):
        x = mem[a, g, ix]
        xc = R[x, c]
        for iy in range(memlen[h, b]):
            y = mem[h, b, iy]
            yc = R[y, c]
            for iw in range(memlen[c, i]):
                w = mem[c, i, iw]
                aw = L[a, w]
                for iz in range(memlen[j, d]):
                    z = mem[j, d, iz]
                    az = L[a, z]
                    l1 = _lam(lam, yidx, a, b, c, d, aw, az, xc, yc)
                    if l1 == 0:
                        continue
                    for iu in range(memlen[e, k]):
                        u = mem[e, k, iu]
                        xu = L[xc, u]
                        for iv in range(memlen[l, f]):
                            v = mem[l, f, iv]
                            xv = L[xc, v]
                            l2 = _lam(lam, yidx, xc, yc, e, f, xu, xv, gce, hce)
                            if l2 == 0:
                                continue
                            l3 = _lam(lam, yidx, aw, az, xu, xv, o1, o2, o3, o4)
                            if l3 == 0:
                                continue
                            if mod:
                                total = (total + (l1 * l2 % mod) * l3) % mod
                            else:
                                total += l1 * l2 * l3
    return total


@njit(cache=True)
def rbe_one(lam, yidx, L, R, mem, memlen, bx, mod):
    a, b, c, d, e, f = bx[0], bx[1], bx[2], bx[3], bx[4], bx[5]
    g, h, i, j, k, l = bx[6], bx[7], bx[8], bx[9], bx[10], bx[11]
    ack = L[a, L[c, k]]
    acl = L[a, L[c, l]]
    q1 = L[R[a, L[i, e]], R[i, e]]
    q2 = L[R[a, L[j, e]], R[j, e]]
    gce = R[R[g, c], e]
    hce = R[R[h, c], e]
    total = lam[0, 0, 0, 0] * 0
    for iu in range(memlen[e, k]):
        u = mem[e, k, iu]
        cu = L[c, u]
        for iv in range(memlen[l, f]):
            v = mem[l, f, iv]
            cv = L[c, v]
            for iw in range(memlen[c, i]):
                w = mem[c, i, iw]
                we = R[w, e]
                for iz in range(memlen[j, d]):
                    z = mem[j, d, iz]
                    ze = R[z, e]
                    l1 = _lam(lam, yidx, c, d, e, f, cu, cv, we, ze)
                    if l1 == 0:
                        continue
                    for ix in range(memlen[a, g]):
                        x = mem[a, g, ix]
                        xcu = R[x, cu]
                        for iy in range(memlen[h, b]):
                            y = mem[h, b, iy]
                            ycu = R[y, cu]
                            l2 = _lam(lam, yidx, a, b, cu, cv, ack, acl, xcu, ycu)
                            if l2 == 0:
                                continue
                            l3 = _lam(lam, yidx, xcu, ycu, we, ze, q1, q2, gce, hce)
                            if l3 == 0:
                                continue
                            if mod:
                                total = (total + (l1 * l2 % mod) * l3) % mod
                            else:
                                total += l1 * l2 * l3
    return total


@njit(cache=True)
def lbe_rbe_batch(lam, yidx, L, R, mem, memlen, boxes, mod, out_l, out_r):
    for n in range(boxes.shape[0]):
        out_l[n] = lbe_one(lam, yidx, L, R, mem, memlen, boxes[n], mod)
        out_r[n] = rbe_one(lam, yidx, L, R, mem, memlen, boxes[n], mod)


@njit(cache=True)
def lsq_one(lam, yidx, L, R, mem, memlen, bx, mod):
    a, b, c, d = bx[0], bx[1], bx[2], bx[3]
    e, f, g, h = bx[4], bx[5], bx[6], bx[7]
    total = lam[0, 0, 0, 0] * 0
    for ix in range(memlen[a, e]):
        x = mem[a, e, ix]
        xc = R[x, c]
        for iy in range(memlen[f, b]):
            y = mem[f, b, iy]
            yc = R[y, c]
            for iw in range(memlen[c, g]):
                w = mem[c, g, iw]
                aw = L[a, w]
                for iz in range(memlen[h, d]):
                    z = mem[h, d, iz]
                    az = L[a, z]
                    l1 = _lam(lam, yidx, a, b, c, d, aw, az, xc, yc)
                    if l1 == 0:
                        continue
                    l2 = _lam(
                        lam, yidx, aw, az, xc, yc,
                        L[aw, R[e, c]], L[aw, R[f, c]],
                        R[L[a, g], xc], R[L[a, h], xc],
                    )
                    if l2 == 0:
                        continue
                    if mod:
                        total = (total + l1 * l2) % mod
                    else:
                        total += l1 * l2
    return total


@njit(cache=True)
def lsq_batch(lam, yidx, L, R, mem, memlen, boxes, mod, out):
    for n in range(boxes.shape[0]):
        out[n] = lsq_one(lam, yidx, L, R, mem, memlen, boxes[n], mod)


@njit(cache=True)
def split_violations(lam, yidx, Y, L, R, Linv, Rinv, mem, memlen, mod, scale, first):
    """Count failures of the split identity; record the first one.

    ``first`` receives (s1, s2, d1, d2, y, z).  For rationals the table is
    scaled by ``scale`` so the identity reads lhs * scale == l1 * l2.
    """
    ny = Y.shape[0]
    count = 0
    for s1 in range(ny):
        a = Y[s1, 0]
        b = Y[s1, 1]
        for s2 in range(ny):
            c = Y[s2, 0]
            d = Y[s2, 1]
            gl = R[a, c]
            gh = R[b, c]
            el = L[a, c]
            eh = L[a, d]
            for ie in range(memlen[el, eh]):
                e = mem[el, eh, ie]
                for jf in range(memlen[e, eh]):
                    f = mem[e, eh, jf]
                    for ig in range(memlen[gl, gh]):
                        g = mem[gl, gh, ig]
                        for jh in range(memlen[g, gh]):
                            h = mem[g, gh, jh]
                            lhs = lam[s1, s2, yidx[e, f], yidx[g, h]]
                            for iy in range(memlen[e, f]):
                                yy = mem[e, f, iy]
                                q = Linv[a, yy]
                                for iz in range(memlen[g, h]):
                                    zz = mem[g, h, iz]
                                    p = Rinv[c, zz]
                                    l1 = _lam(lam, yidx, a, p, c, q, e, yy, g, zz)
                                    l2 = _lam(lam, yidx, p, b, q, d, yy, f, zz, h)
                                    if mod:
                                        ok = lhs == (l1 * l2) % mod
                                    else:
                                        ok = lhs * scale == l1 * l2
                                    if not ok:
                                        if count == 0:
                                            first[0] = s1
                                            first[1] = s2
                                            first[2] = yidx[e, f]
                                            first[3] = yidx[g, h]
                                            first[4] = yy
                                            first[5] = zz
                                        count += 1
    return count


def warmup() -> None:
    """Trigger compilation on a toy problem (used by the benchmark)."""
    lam = np.ones((1, 1, 1, 1), dtype=np.int64)
    z = np.zeros((1, 1), dtype=np.int64)
    mem = np.zeros((1, 1, 1), dtype=np.int64)
    ml = np.ones((1, 1), dtype=np.int64)
    b12 = np.zeros((1, 12), dtype=np.int64)
    b8 = np.zeros((1, 8), dtype=np.int64)
    o1 = np.zeros(1, dtype=np.int64)
    o2 = np.zeros(1, dtype=np.int64)
    lbe_rbe_batch(lam, z, z, z, mem, ml, b12, 0, o1, o2)
    lsq_batch(lam, z, z, z, mem, ml, b8, 0, o1)

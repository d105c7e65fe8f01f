import json
import os
import subprocess
import sys
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from incidence_braid.braid import (
    LambdaTable,
    SetSolution,
    TableError,
    _compose_dict,
    _kron_dict,
    braid_defect_matrix,
    case_equation_residuals,
    lbe,
    lbe_counit_sum_check,
    lbe_rbe_values,
    nondegeneracy_check,
    psi,
    rbe,
    structural_check,
    verify_braid_full,
    verify_braid_reduced,
)
from incidence_braid.poset import antichain, chain, inclusion_pairs
from incidence_braid.scalar import GF, QQ

from conftest import row_table


def flip_table(P, F=QQ):
    sol = SetSolution.flip(P)
    tab = LambdaTable(P, F, sol)
    for s1, s2 in product(range(tab.basis.dim), repeat=2):
        tab.set_idx((s1, s2), (s2, s1), 1)
    return tab


def test_flip_is_braided():
    tab = flip_table(chain(3))
    assert structural_check(tab).passed
    assert verify_braid_full(tab, workers=1).passed
    assert braid_defect_matrix(tab).is_zero


def test_set_solution_violations():
    P = chain(2)
    bad = SetSolution(P, [[0, 0], [0, 0]], [[0, 1], [0, 1]])
    assert any("not bijective" in v for v in bad.violations())
    assert SetSolution.flip(P).is_braided()


def test_support_violation_rejected():
    P = chain(2)
    tab = LambdaTable(P, QQ, SetSolution.flip(P))
    with pytest.raises(TableError, match="support"):
        tab.set("x0", "x1", "x0", "x0", "x1", "x1", "x0", "x0", 1)


def test_zero_table_is_degenerate():
    P = chain(2)
    tab = LambdaTable(P, QQ, SetSolution.flip(P))
    rep = nondegeneracy_check(tab)
    assert not rep.passed and rep.details["ranks"]["r"] == 0
    assert not structural_check(tab).passed


def test_json_roundtrip(table_row8):
    doc = table_row8.to_json()
    again = LambdaTable.from_json(json.loads(json.dumps(doc)))
    assert again == table_row8
    assert doc["schema"] == "incidence-braid/1"


def test_malformed_json_rejected():
    with pytest.raises(TableError):
        LambdaTable.from_json({"field": {"kind": "rationals"}})


def test_kernel_matches_reference(table_row8):
    tab = table_row8
    incs = list(inclusion_pairs(tab.P, 3))
    lv, rv = lbe_rbe_values(tab, incs)
    co = tab.coded
    for k, (S, T) in enumerate(incs):
        assert co.decode(lv[k], 3, QQ) == lbe(tab, S, T)
        assert co.decode(rv[k], 3, QQ) == rbe(tab, S, T)


def test_kernel_matches_reference_on_perturbed_table():
    tab = row_table(8, 2, 1)
    src, dst, c = next(iter(tab.nonzero()))
    bad = tab.with_entry(src, dst, c + QQ(1))
    incs = list(inclusion_pairs(bad.P, 3))[::11]
    lv, rv = lbe_rbe_values(bad, incs)
    co = bad.coded
    for k, (S, T) in enumerate(incs):
        assert co.decode(lv[k], 3, QQ) == lbe(bad, S, T)
        assert co.decode(rv[k], 3, QQ) == rbe(bad, S, T)


def test_workers_do_not_change_result(table_row8):
    incs = list(inclusion_pairs(table_row8.P, 3))
    one = lbe_rbe_values(table_row8, incs, workers=1)
    two = lbe_rbe_values(table_row8, incs, workers=2)
    assert all(np.array_equal(a, b) for a, b in zip(one, two))


def test_left_product_transcription(table_row8):
    """Column of r12 r23 r12 at T equals the sum of LBE(S,T) times ψ(S)."""
    tab = table_row8
    B = tab.basis
    m = B.dim
    cols, scale = tab.matrix_int()
    dim = m**3
    r12 = {j: c for j, c in _kron_dict(cols, m, "12").items()}
    r23 = {j: c for j, c in _kron_dict(cols, m, "23").items()}
    full12 = {j: r12.get(j, {}) for j in range(dim)}
    full23 = {j: r23.get(j, {}) for j in range(dim)}
    left = _compose_dict(_compose_dict(full12, full23, dim, 0), full12, dim, 0)
    for T in product(tab.P.intervals, repeat=3):
        j = B.flat(*(B.index[tuple(iv)] for iv in T))
        want = {}
        for S, T2 in inclusion_pairs(tab.P, 3):
            if tuple(T2) != tuple(T):
                continue
            v = lbe(tab, S, T)
            if v:
                k = B.flat(*psi(tab, S))
                want[k] = want.get(k, QQ.zero()) + v
        got = {i: QQ(v) / QQ(scale) ** 3 for i, v in left.get(j, {}).items()}
        assert {k: v for k, v in want.items() if v} == got


def test_counit_sums(table_row8):
    for T in product(table_row8.P.intervals, repeat=3):
        assert lbe_counit_sum_check(table_row8, T)


def test_case_equations_vanish(table_row8):
    for case in ("110", "101", "011", "111"):
        labels = {
            "110": ("a0", "b0", "a0", "b0", "a0", "a0"),
            "101": ("a0", "b0", "a0", "a0", "a0", "b0"),
            "011": ("a0", "a0", "a0", "b0", "a0", "b0"),
            "111": ("a0", "b0", "a0", "b0", "a0", "b0"),
        }[case]
        assert not case_equation_residuals(table_row8, case, labels)


def test_case_equation_pattern_checked(table_row8):
    with pytest.raises(TableError):
        case_equation_residuals(table_row8, "110", ("a0", "b0", "a0", "b0", "a0", "b0"))


def test_reduced_rejects_unbraided_r0():
    P = antichain(2)
    sol = SetSolution(P, [[1, 1], [0, 0]], [[0, 0], [1, 1]])
    if sol.is_braided():
        pytest.skip("r0 happens to be braided")
    rep = verify_braid_reduced(LambdaTable(P, QQ, sol), workers=1)
    assert not rep.passed


def test_matrix_guard(table_row8):
    with pytest.raises(TableError, match="guard"):
        braid_defect_matrix(table_row8, guard_dim=10)


def test_matrix_paths_agree():
    tab = row_table(8, 2, 1)
    src, dst, c = next(iter(tab.nonzero()))
    bad = tab.with_entry(src, dst, c + QQ(1))
    a = braid_defect_matrix(bad, use_scipy=True)
    b = braid_defect_matrix(bad, use_scipy=False)
    assert not a.is_zero and a.entries() == b.entries()


def test_prime_field_verification():
    tab = row_table(3, 2, 1)
    assert tab.field == GF(2)
    assert verify_braid_full(tab, workers=1).passed
    assert braid_defect_matrix(tab).is_zero


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 4), st.sampled_from([-3, -1, 1, 2]))
def test_single_entry_perturbation_agreement(which, delta):
    tab = row_table(8, 1, 1)
    entries = list(tab.nonzero())
    src, dst, c = entries[which * 7 % len(entries)]
    bad = tab.with_entry(src, dst, c + QQ(delta))
    full = verify_braid_full(bad, workers=1).passed
    assert full == braid_defect_matrix(bad).is_zero


def test_pure_python_fallback(tmp_path):
    code = (
        "from incidence_braid import _kernels as K;"
        "from conftest import row_table;"
        "from incidence_braid.braid import verify_braid_full;"
        "print(K.HAS_NUMBA, verify_braid_full(row_table(8,2,1), workers=1).passed)"
    )
    env = dict(os.environ, INCIDENCE_BRAID_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True,
        cwd=os.path.dirname(__file__), check=True,
    )
    assert out.stdout.split() == ["False", "True"]


def test_reduced_requires_structure(table_row1):
    B = table_row1.basis
    src = (B.y("a0", "b0"), B.y("a0", "b0"))
    dst = (B.y("a0", "a0"), B.y("a0", "a0"))
    bad = table_row1.with_entry(src, dst, table_row1.get_idx(*src, *dst) + 1)
    # Still braided, but no longer counital.
    assert verify_braid_full(bad, workers=1).passed
    rep = verify_braid_reduced(bad, workers=1)
    assert not rep.passed and "structural" in rep.counterexample["reason"]

"""Reference implementations: the slow twins the fast kernels answer to."""
import numpy as np
import pytest

from mla.lu import lu_unb
from mla.matrix import alloc_matrix, fill_random
from mla.oracle import FlopTally, flop_count, gemm_ref, lu_ref, trsm_ref


def test_gemm_ref_scalar_fma():
    c = np.asfortranarray([[2.0]])
    gemm_ref(c, np.asfortranarray([[3.0]]), np.asfortranarray([[4.0]]),
             alpha=0.5, beta=2.0)
    assert c[0, 0] == 0.5 * 2.0 + 2.0 * 12.0


def test_gemm_ref_empty_k_scales():
    c = fill_random(alloc_matrix(4, 3), 1)
    want = 0.25 * c
    gemm_ref(c, alloc_matrix(4, 0), alloc_matrix(0, 3), alpha=0.25)
    assert np.array_equal(c, want)


def test_gemm_ref_rejects_mismatch():
    with pytest.raises(ValueError):
        gemm_ref(alloc_matrix(2, 2), alloc_matrix(2, 3), alloc_matrix(4, 2))


def test_trsm_ref_exact_integer_case():
    # Diagonal holds garbage on purpose: only the strict lower part counts.
    a11 = np.asfortranarray([[9.0, 0.0, 0.0],
                             [2.0, 9.0, 0.0],
                             [3.0, 4.0, 9.0]])
    b = np.asfortranarray([[1.0], [2.0], [3.0]])
    trsm_ref(a11, b)
    assert np.array_equal(b, [[1.0], [0.0], [0.0]])


def test_trsm_ref_rejects_bad_shapes():
    with pytest.raises(ValueError):
        trsm_ref(alloc_matrix(3, 2), alloc_matrix(3, 1))
    with pytest.raises(ValueError):
        trsm_ref(alloc_matrix(3, 3), alloc_matrix(2, 1))


def test_lu_ref_agrees_with_lu_unb_bitwise():
    # Same pivot choices and the same per-element update order, so the
    # two independently written loops must agree exactly.
    a = fill_random(alloc_matrix(20, 20), 77)
    f_ref = a.copy(order="F")
    f_unb = a.copy(order="F")
    r_ref = lu_ref(f_ref)
    r_unb = lu_unb(f_unb)
    assert np.array_equal(r_ref.ipiv.ipiv, r_unb.ipiv.ipiv)
    assert np.array_equal(f_ref, f_unb)


def test_lu_ref_rejects_wide():
    with pytest.raises(ValueError):
        lu_ref(alloc_matrix(2, 3))


def test_tally_counts_each_operation():
    t = FlopTally()
    assert t.add(t.mul(2.0, 3.0), 1.0) == 7.0
    assert t.sub(1.0, t.div(1.0, 2.0)) == 0.5
    assert t.flops == 4


def test_flop_count_runs_the_closure():
    assert flop_count(lambda t: t.mul(t.add(1.0, 1.0), 2.0)) == 2


def test_tally_does_not_change_the_arithmetic():
    a = fill_random(alloc_matrix(12, 8), 5)
    plain = a.copy(order="F")
    tallied = a.copy(order="F")
    lu_ref(plain)
    lu_ref(tallied, tally=FlopTally())
    assert np.array_equal(plain, tallied)


def test_flop_count_of_lu_matches_the_loop_structure():
    # Exact count: per column, (m-j-1) divides plus 2(m-j-1)(n-j-1)
    # multiply-subtract flops.
    m, n = 9, 6
    a = fill_random(alloc_matrix(m, n), 8)
    count = flop_count(lambda t: lu_ref(a, tally=t))
    want = sum((m - j - 1) + 2 * (m - j - 1) * (n - j - 1) for j in range(n))
    assert count == want

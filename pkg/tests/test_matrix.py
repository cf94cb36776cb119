"""Storage, views, seeded fill, pivot application and residuals."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mla.matrix import (PivotVector, alloc_matrix, fill_random, frobenius_norm,
                        leading_dimension, partition_2x2, residual_lu,
                        split_lu, swap_rows)
from mla.oracle import lu_ref

EPS = float(np.finfo(np.float64).eps)


def test_alloc_is_zeroed_column_major():
    a = alloc_matrix(5, 3)
    assert a.shape == (5, 3)
    assert a.dtype == np.float64
    assert a.flags.f_contiguous
    assert not a.any()


def test_alloc_with_leading_dimension():
    a = alloc_matrix(5, 3, ld=9)
    assert a.shape == (5, 3)
    assert leading_dimension(a) == 9
    assert a.base.shape == (9, 3)


def test_alloc_rejects_bad_dims():
    with pytest.raises(ValueError):
        alloc_matrix(-1, 3)
    with pytest.raises(ValueError):
        alloc_matrix(5, 3, ld=4)


def test_leading_dimension_of_view():
    parent = fill_random(alloc_matrix(10, 8), 3)
    view = parent[2:7, 3:6]
    assert leading_dimension(view) == 10
    # View arithmetic: reading through the view is reading the parent.
    for i in range(5):
        for j in range(3):
            assert view[i, j] == parent[2 + i, 3 + j]


def test_partition_degenerate_splits():
    a = alloc_matrix(4, 4)
    tl, tr, bl, br = partition_2x2(a, 0, 0)
    assert tl.shape == (0, 0)
    assert br.shape == (4, 4)
    tl, tr, bl, br = partition_2x2(a, 4, 4)
    assert br.shape == (0, 0)
    assert tl.shape == (4, 4)


def test_partition_rectangular():
    a = alloc_matrix(5, 3)
    tl, tr, bl, br = partition_2x2(a, 2, 1)
    assert tl.shape == (2, 1)
    assert tr.shape == (2, 2)
    assert bl.shape == (3, 1)
    assert br.shape == (3, 2)


def test_partition_rejects_out_of_range():
    a = alloc_matrix(4, 4)
    with pytest.raises(ValueError):
        partition_2x2(a, 5, 0)
    with pytest.raises(ValueError):
        partition_2x2(a, 0, -1)


def test_partition_views_alias_parent():
    a = fill_random(alloc_matrix(6, 6), 11)
    _, _, _, br = partition_2x2(a, 2, 3)
    br[0, 0] = -1.0
    assert a[2, 3] == -1.0


def test_fill_same_seed_is_bitwise_identical():
    a = fill_random(alloc_matrix(40, 30), 123)
    b = fill_random(alloc_matrix(40, 30), 123)
    assert np.array_equal(a, b)


def test_fill_different_seeds_differ():
    a = fill_random(alloc_matrix(40, 30), 1)
    b = fill_random(alloc_matrix(40, 30), 2)
    assert (a != b).any()


def test_fill_stays_in_open_unit_interval():
    a = fill_random(alloc_matrix(1000, 1000), 1)
    assert a.min() > 0.0
    assert a.max() < 1.0


def test_fill_ignores_leading_dimension():
    # Draws follow the view's logical indices, not the storage layout.
    tight = fill_random(alloc_matrix(5, 3), 9)
    padded = fill_random(alloc_matrix(5, 3, ld=17), 9)
    assert np.array_equal(tight, padded)


@given(st.integers(min_value=0, max_value=2**64 - 1),
       st.integers(min_value=1, max_value=12),
       st.integers(min_value=1, max_value=12))
def test_fill_determinism_property(seed, rows, cols):
    a = fill_random(alloc_matrix(rows, cols), seed)
    b = fill_random(alloc_matrix(rows, cols), seed)
    assert np.array_equal(a, b)
    assert 0.0 < a.min() and a.max() < 1.0


def test_pivot_vector_basics():
    piv = PivotVector([2, 1, 2])
    assert len(piv) == 3
    assert piv.offset == 0
    assert piv.ipiv.dtype == np.int64
    with pytest.raises(ValueError):
        PivotVector(np.zeros((2, 2), dtype=np.int64))


def test_swap_rows_single_interchange():
    a = np.asfortranarray(np.arange(6, dtype=np.float64).reshape(3, 2))
    swap_rows(a, np.array([2], dtype=np.int64))
    assert np.array_equal(a, [[4.0, 5.0], [2.0, 3.0], [0.0, 1.0]])


def test_swap_rows_roundtrip_is_bitwise():
    rng = np.random.default_rng(7)
    a = fill_random(alloc_matrix(100, 40), 5)
    before = a.copy(order="F")
    ipiv = np.array([rng.integers(k, 100) for k in range(100)], dtype=np.int64)
    swap_rows(a, ipiv)
    swap_rows(a, ipiv, reverse=True)
    assert np.array_equal(a, before)


def test_swap_rows_validates_indices():
    a = alloc_matrix(3, 2)
    with pytest.raises(IndexError):
        swap_rows(a, np.array([3], dtype=np.int64))


def test_split_lu_shapes_and_unit_diagonal():
    f = fill_random(alloc_matrix(5, 3), 4)
    lower, upper = split_lu(f)
    assert lower.shape == (5, 3)
    assert upper.shape == (3, 3)
    assert np.array_equal(np.diag(lower), np.ones(3))
    assert np.array_equal(upper, np.triu(upper))
    # Strictly-lower entries come through unchanged.
    assert lower[4, 0] == f[4, 0]


def test_residual_identity_is_zero():
    eye = np.asfortranarray(np.eye(3))
    piv = PivotVector(np.arange(3, dtype=np.int64))
    assert residual_lu(eye, eye.copy(order="F"), eye.copy(order="F"), piv) == 0.0


def test_residual_of_oracle_factorization():
    a = fill_random(alloc_matrix(8, 8), 21)
    f = a.copy(order="F")
    res = lu_ref(f)
    lower, upper = split_lu(f)
    assert residual_lu(a, lower, upper, res.ipiv) <= 8 * 100 * EPS


def test_residual_detects_perturbation():
    a = fill_random(alloc_matrix(8, 8), 21)
    f = a.copy(order="F")
    res = lu_ref(f)
    lower, upper = split_lu(f)
    upper[0, 1] += 1.0
    assert residual_lu(a, lower, upper, res.ipiv) > 1e-3


def test_frobenius_norm_matches_numpy():
    a = fill_random(alloc_matrix(9, 4), 2)
    assert frobenius_norm(a) == float(np.linalg.norm(a))

"""Closed-form flop counts and the per-iteration schedule breakdown."""
import pytest

from mla.costmodel import (cumulative_flop_share, flops_ll_partial, flops_lu,
                           flops_panel_total, flops_rl_partial,
                           iteration_flops)


def test_square_count_is_exactly_two_thirds_cubed():
    for n in (1, 7, 64, 1000, 10000):
        assert flops_lu(n, n) == 2 * n**3 / 3


def test_tall_count_matches_closed_form():
    assert flops_lu(300, 100) == (3 * 300 * 100 * 100 - 100**3) / 3


def test_panel_total():
    assert flops_panel_total(1000, 256) == 1000 * 1000 * 256 / 2


def test_iteration_terms_telescope_to_the_total():
    for m, n, b in [(100, 100, 32), (300, 200, 64), (1000, 1000, 96),
                    (2000, 2000, 256), (4096, 4096, 256)]:
        terms = iteration_flops(m, n, b)
        total = sum(t["total"] for t in terms)
        exact = flops_lu(m, n)
        assert abs(total - exact) <= 1e-9 * exact
        assert all(t["total"] == t["panel"] + t["trsm"] + t["gemm"]
                   for t in terms)


def test_iteration_flops_validates():
    with pytest.raises(ValueError):
        iteration_flops(100, 200, 32)
    with pytest.raises(ValueError):
        iteration_flops(100, 100, 0)


def test_front_loading_of_the_schedule():
    # Early iterations carry most of the work: the first quarter of a
    # 10000/256 schedule is close to 58% of all flops, half is ~87.5%.
    quarter = cumulative_flop_share(10000, 256, 0.25)
    half = cumulative_flop_share(10000, 256, 0.50)
    assert 0.57 <= quarter <= 0.59
    assert 0.87 <= half <= 0.88
    assert cumulative_flop_share(10000, 256, 0.0) == 0.0
    assert cumulative_flop_share(10000, 256, 1.0) == 1.0


def test_cumulative_share_rejects_bad_fraction():
    with pytest.raises(ValueError):
        cumulative_flop_share(1000, 32, 1.5)


def test_partial_counts_difference():
    # The right-looking early-termination count exceeds the left-looking
    # one by exactly the trailing-update term.
    for m, n, k in [(256, 256, 32), (1000, 800, 256), (4000, 4000, 96)]:
        diff = flops_rl_partial(m, n, k) - flops_ll_partial(m, n, k)
        assert diff == pytest.approx(2 * (n - k) * (m * k - k * k / 2),
                                     rel=1e-12)


def test_partial_counts_reject_k_beyond_n():
    with pytest.raises(ValueError):
        flops_ll_partial(100, 50, 60)
    with pytest.raises(ValueError):
        flops_rl_partial(100, 50, 60)

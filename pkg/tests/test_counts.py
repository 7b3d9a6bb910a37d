import math
from fractions import Fraction

import numpy as np
import pytest
from conftest import get_index

from polymix.counts import (
    CountDistribution,
    closed_walk_count,
    conv_condition_check,
    count_distribution,
    delta_factor,
    lemma_bounds,
    minimal_conv_constant,
    partition_function,
    srw_return_probability,
)
from polymix.errors import PolymixError


def test_partition_function_small_values():
    assert partition_function(4, 1) == 6
    assert partition_function(4, 2) == 36
    assert partition_function(2, 3) == 6
    assert partition_function(0, 2) == 1


def test_partition_function_matches_enumeration():
    for L, d in [(4, 2), (6, 2), (6, 3), (8, 2)]:
        assert partition_function(L, d) == len(get_index(L, d))


def test_srw_return_probability():
    assert srw_return_probability(2, 1, exact=True) == Fraction(1, 2)
    assert srw_return_probability(4, 2, exact=True) == Fraction(9, 64)
    # d=2 closed-walk count has the closed form C(L, L/2)^2
    for L in (4, 8, 12):
        assert closed_walk_count(L, 2) == math.comb(L, L // 2) ** 2
    assert srw_return_probability(6, 1) == pytest.approx(
        float(Fraction(math.comb(6, 3), 2 ** 6)), rel=1e-12
    )


def test_route_agreement_z_equals_walks():
    for L in range(0, 31, 2):
        for d in (1, 2, 3, 4):
            assert partition_function(L, d) * 1 == closed_walk_count(L, d)
            assert (
                srw_return_probability(L, d, exact=True)
                == Fraction(partition_function(L, d), (2 * d) ** L)
            )


def test_local_clt_normalization():
    # p_L approaches 2 (d / 2 pi L)^{d/2} within 2% at L=200, d=2
    p = srw_return_probability(200, 2)
    ref = 2.0 * (2.0 / (2.0 * math.pi * 200)) ** 1
    assert abs(p / ref - 1.0) < 0.02


def test_count_distribution_exact_4_2():
    dist = count_distribution(4, 2)
    assert dist.exact
    assert dist.fractions == [Fraction(1, 6), Fraction(2, 3), Fraction(1, 6)]
    assert dist.variance() == pytest.approx(1.0 / 3.0, abs=1e-14)


def test_count_distribution_d1_point_mass():
    dist = count_distribution(6, 1)
    w = dist.weights()
    assert w[3] == pytest.approx(1.0)
    assert w[:3].sum() == 0.0


def test_count_distribution_normalized_and_mean():
    for L, d in [(100, 2), (60, 3)]:
        dist = count_distribution(L, d)
        assert abs(dist.weights().sum() - 1.0) < 1e-12
        assert dist.mean() == pytest.approx(L / (2 * d), abs=1e-10)


def test_log_mode_agrees_with_exact():
    de = count_distribution(40, 2, exact=True)
    dl = count_distribution(40, 2, exact=False)
    assert np.allclose(de.log_weights, dl.log_weights, atol=1e-9)


def test_count_distribution_matches_enumeration():
    for L, d in [(4, 2), (6, 2), (6, 3)]:
        index = get_index(L, d)
        dist = count_distribution(L, d)
        n1 = index.counts[:, 0]
        for k in range(L // 2 + 1):
            assert dist.fractions[k] == Fraction(int((n1 == k).sum()), len(index))


def test_count_law_type_symmetry():
    # the law of N_j is the same for every type j
    index = get_index(6, 3)
    for j in (1, 2):
        assert np.array_equal(
            np.bincount(index.counts[:, 0], minlength=4),
            np.bincount(index.counts[:, j], minlength=4),
        )


def test_conv_condition():
    dist = count_distribution(100, 2)
    c = minimal_conv_constant(dist)
    assert c is not None and c > 1.0
    rep = conv_condition_check(dist, c, find_minimal=False)
    assert rep.holds
    rep_low = conv_condition_check(dist, c / 1.5, find_minimal=False)
    assert not rep_low.holds
    # degenerate small-L case still runs and reports margins
    rep_small = conv_condition_check(count_distribution(4, 2), 5.0, find_minimal=False)
    assert set(rep_small.margins) >= {"ratio_up", "ratio_down", "envelope_upper"}


def test_conv_rejects_bad_c():
    with pytest.raises(PolymixError):
        conv_condition_check(count_distribution(20, 2), -1.0)


def test_lemma_bounds():
    rep = lemma_bounds(4, 2)
    assert rep.sigma2 == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert rep.var_x >= 0
    # sigma^2 / L in a stable band at d=2
    vals = [lemma_bounds(L, 2).sigma2 / L for L in (40, 80, 160)]
    assert max(vals) / min(vals) < 2.0
    assert all(rep_c is None or rep_c >= 1.0 for rep_c in [rep.ratio_bound_c])


def test_delta_factor():
    dist = count_distribution(20, 2)
    n_bar = 5
    assert delta_factor(20, n_bar, dist) == pytest.approx(1.0 / 20.0)
    # at the top of the support the ratio branch dominates
    assert delta_factor(20, 10, dist) > 1.0 / 20.0
    with pytest.raises(PolymixError):
        delta_factor(20, 0, dist)
    with pytest.raises(PolymixError):
        delta_factor(22, 5, dist)


def test_delta_times_gap_bounded_below():
    dist = count_distribution(100, 2)
    vals = [delta_factor(100, n, dist) * (100 - 2 * n) for n in range(1, 50)]
    assert min(vals) > 0.3


def test_serialization():
    dist = count_distribution(8, 2)
    js = dist.to_json()
    assert js["L"] == 8 and len(js["log_weights"]) == 5
    assert isinstance(dist, CountDistribution)

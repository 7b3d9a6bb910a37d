import numpy as np
import pytest
from conftest import get_gen

from polymix.generator import dirichlet_form, entropy
from polymix.lsi import lsi_constant_estimate, lsi_upper_bound, mixing_bound_check


def test_two_state_alpha_exact():
    rep = lsi_constant_estimate(get_gen(2, 1), restarts=12, seed=0)
    assert rep.alpha_est == pytest.approx(0.5, abs=1e-6)


def test_two_state_alpha_vs_dense_scan():
    # one-parameter family f = (2p, 2(1-p)) covers all densities here
    gen = get_gen(2, 1)
    best = np.inf
    for p in np.linspace(1e-6, 0.5 - 1e-6, 4000):
        f = np.array([2 * p, 2 * (1 - p)])
        s = np.sqrt(f)
        r = dirichlet_form(s, s, gen) / entropy(f)
        best = min(best, r)
    rep = lsi_constant_estimate(get_gen(2, 1), restarts=12, seed=0)
    assert rep.alpha_est <= best + 1e-6


def test_alpha_below_half_gap():
    for L, d in [(4, 1), (4, 2), (6, 2)]:
        rep = lsi_constant_estimate(get_gen(L, d), restarts=10, seed=0)
        assert 0 < rep.alpha_est <= rep.gap / 2 + 1e-8


def test_minimizer_is_density():
    _, f, n_conv, _ = lsi_upper_bound(-get_gen(4, 2).matrix, 36, restarts=8, seed=1)
    assert n_conv > 0
    assert np.all(f >= 0) and f.mean() == pytest.approx(1.0, abs=1e-9)


def test_probe_vectors_give_closed_form_bound():
    gen = get_gen(4, 2)
    neg = -gen.matrix
    w, U = np.linalg.eigh(neg.toarray())
    alpha, _, _, gap = lsi_upper_bound(
        neg, gen.dim, restarts=6, seed=0, probe_vectors=[U[:, 1]]
    )
    assert gap == pytest.approx(w[1], abs=1e-10)
    assert alpha <= w[1] / 2 + 1e-10


def test_mixing_bound_report():
    gen = get_gen(4, 2)
    rep = lsi_constant_estimate(gen, restarts=10, seed=0)
    bound = mixing_bound_check(gen, rep)
    assert bound.bound == pytest.approx(
        (4.0 + np.log(np.log(gen.dim))) / (2 * rep.alpha_est)
    )
    assert bound.holds == (bound.t_mix <= bound.bound)


def test_alpha_scaling_band_small():
    vals = [
        lsi_constant_estimate(get_gen(L, 2), restarts=10, seed=0).alpha_est * L * L
        for L in (4, 6)
    ]
    assert max(vals) / min(vals) < 2.0

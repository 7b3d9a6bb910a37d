"""Acceptance suite: ten end-to-end criteria, one test (and one verdict line) each.

Each test prints a single "criterion N PASS" line with the measured values
after its assertions; run pytest with -v (or -s) to see one line per
criterion.  Tolerances are pinned in the assertions, not configurable.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from conftest import get_gen, get_index

from polymix.counts import (
    count_distribution,
    minimal_conv_constant,
    partition_function,
    srw_return_probability,
)
from polymix.entropy_lab import chi_laplace_probe, entropy_decomposition_check
from polymix.generator import build_generator
from polymix.interchange import (
    build_colored_generator,
    dirichlet_comparison,
    lsi_segment,
)
from polymix.lsi import lsi_constant_estimate, mixing_bound_check
from polymix.paths import enumerate_state_space, extremal_path
from polymix.simulate import SimConfig, phi_matrix, simulate, tv_lower_estimate
from polymix.spectral import exact_mixing_time, kappa_value
from polymix.wilson import (
    WilsonStatistic,
    drift_check,
    eigenfunction_check,
    lower_bound_time,
    phi_star,
    variance_check,
)

# t_mix values shared from criterion 5 into the criterion 7 soft check
T_MIX_D2 = {}


def test_criterion_01_eigenfunction_identity():
    worst = 0.0
    for L in (4, 6, 8):
        for d in (1, 2, 3):
            rep = eigenfunction_check(get_gen(L, d))
            worst = max(worst, rep.max_residual)
            assert rep.max_residual < 1e-10, (L, d, rep.max_residual)
    print(f"criterion 1 PASS: max |L.Phi + kappa.Phi| = {worst:.3e} < 1e-10 "
          "over (L,d) in {4,6,8}x{1,2,3}")


def test_criterion_02_counting_oracle():
    checked = 0
    for L in (2, 4, 6, 8, 10):
        for d in (1, 2, 3):
            n_enum = len(get_index(L, d))
            z = partition_function(L, d)
            p = srw_return_probability(L, d, exact=True)
            assert n_enum == z
            assert Fraction(z, (2 * d) ** L) == p
            checked += 1
    print(f"criterion 2 PASS: |Omega| = Z = (2d)^L p_L exactly on {checked} "
          "grid points (L <= 10, d <= 3)")


def test_criterion_03_count_law():
    dist42 = count_distribution(4, 2)
    assert dist42.fractions == [Fraction(1, 6), Fraction(2, 3), Fraction(1, 6)]
    for L in (2, 4, 6, 8, 10):
        for d in (1, 2, 3):
            index = get_index(L, d)
            dist = count_distribution(L, d)
            n1 = index.counts[:, 0]
            for k in range(L // 2 + 1):
                assert dist.fractions[k] == Fraction(int((n1 == k).sum()), len(index))
    print("criterion 3 PASS: formula law = enumeration frequencies exactly "
          "(L <= 10, d <= 3); gamma(4,2) = (1/6, 2/3, 1/6)")


def test_criterion_04_ssep_oracle():
    worst_entry = 0.0
    worst_tmix = 0.0
    for L in (4, 6, 8):
        gen = get_gen(L, 1)
        index = gen.index
        # independent oracle: exclusion process over binary occupancy words,
        # swap rate 1/2 per edge, same lexicographic word order
        words = [w for w in itertools.product((0, 1), repeat=L) if sum(w) == L // 2]
        words.sort()
        pos = {w: i for i, w in enumerate(words)}
        m = np.zeros((len(words), len(words)))
        for w in words:
            for x in range(L - 1):
                if w[x] != w[x + 1]:
                    v = list(w)
                    v[x], v[x + 1] = v[x + 1], v[x]
                    m[pos[w], pos[tuple(v)]] += 0.5
        np.fill_diagonal(m, -m.sum(axis=1))
        assert [index.path_at(i).increments for i in range(len(index))] == words
        entry_diff = np.abs(gen.matrix.toarray() - m).max()
        worst_entry = max(worst_entry, entry_diff)
        assert entry_diff < 1e-12

        # oracle mixing time: dense eigendecomposition plus its own bisection
        w_eig, U = np.linalg.eigh(-m)

        def tv_max(t):
            M = (U * np.exp(-t * w_eig)) @ U.T
            return 0.5 * np.abs(M - 1.0 / len(words)).sum(axis=1).max()

        lo, hi = 0.0, 1.0
        while tv_max(hi) > 0.25:
            lo, hi = hi, 2 * hi
        while hi - lo > 1e-6:
            mid = 0.5 * (lo + hi)
            if tv_max(mid) > 0.25:
                lo = mid
            else:
                hi = mid
        t_oracle = 0.5 * (lo + hi)
        t_pkg = exact_mixing_time(gen, rtol=1e-6, compute_gap=False).t_mix
        worst_tmix = max(worst_tmix, abs(t_pkg - t_oracle))
        assert abs(t_pkg - t_oracle) < 1e-3
    print(f"criterion 4 PASS: d=1 generator = SSEP oracle (max entry diff "
          f"{worst_entry:.1e}); T_mix agreement within {worst_tmix:.2e} < 1e-3")


def test_criterion_05_mixing_time_scaling():
    grid = (4, 6, 8, 10, 12)
    for L in grid:
        gen = build_generator(enumerate_state_space(L, 2))
        rtol = 1e-2 if L >= 12 else 1e-3
        rep = exact_mixing_time(gen, rtol=rtol, compute_gap=False)
        T_MIX_D2[L] = rep.t_mix
        del gen
    ratios = np.array([T_MIX_D2[L] / (L * L * math.log(L)) for L in grid])
    spread = ratios.max() / ratios.min()
    slope = np.polyfit(np.log(grid), np.log([T_MIX_D2[L] for L in grid]), 1)[0]
    assert spread < 3.0, ratios
    assert 1.7 <= slope <= 2.4, slope
    print(f"criterion 5 PASS: T_mix/(L^2 log L) spread {spread:.2f} < 3 over "
          f"L in {grid}; fitted exponent {slope:.2f} in [1.7, 2.4]")


def test_criterion_06_lower_bound_pipeline():
    seed = 2024
    # variance bound: sup_t Var(Phi_t)/L^3 under a common constant
    sup_ratios = {}
    for L, n_traj in ((16, 2000), (32, 1500), (64, 1000)):
        stat = WilsonStatistic.for_length(L)
        times = np.linspace(0.0, 2.0 / stat.kappa, 6)
        cfg = SimConfig(L=L, d=2, t_max=times[-1], sample_times=times,
                        n_trajectories=n_traj, master_seed=seed)
        pm = phi_matrix(simulate(cfg, extremal_path(L, 2)))
        rep = variance_check(stat, times, pm)
        # deterministic start: zero up to E[x^2]-E[x]^2 cancellation round-off
        assert abs(rep.variance_at_zero) < 1e-18
        sup_ratios[L] = rep.sup_ratio_hi
    C0 = max(sup_ratios.values())
    assert C0 < 0.1, sup_ratios

    # drift law: fitted decay rate within 5% of kappa at L=32
    L = 32
    stat = WilsonStatistic.for_length(L)
    times = np.linspace(0.0, 1.2 / stat.kappa, 10)[1:]
    cfg = SimConfig(L=L, d=2, t_max=times[-1], sample_times=times,
                    n_trajectories=8000, master_seed=seed + 1)
    pm = phi_matrix(simulate(cfg, extremal_path(L, 2)))
    drep = drift_check(stat, times, pm, phi_star(L))
    assert abs(drep.rate_ratio - 1.0) < 0.05, drep.rate_ratio

    # end-to-end TV lower bound at T = lower_bound_time
    lb = lower_bound_time(L, 2, C0)
    assert lb.T_lb > 0
    a = math.sqrt(L ** 3 / lb.eps)
    tv = tv_lower_estimate(L, 2, lb.T_lb, a, n_traj=6000, seed=seed + 2)
    assert tv.ci_lower_95 > 0.4, tv
    print(f"criterion 6 PASS: C0 = {C0:.3f} (sup Var/L^3, L in 16/32/64); "
          f"drift rate/kappa = {drep.rate_ratio:.4f} (within 5%); TV lower bound "
          f"{tv.estimate:.3f} (95% CI >= {tv.ci_lower_95:.3f} > 0.4) at T = {lb.T_lb:.1f}")


def test_criterion_07_log_sobolev_scaling():
    vals = {}
    reports = {}
    for L in (4, 6, 8):
        gen = get_gen(L, 2)
        rep = lsi_constant_estimate(gen, restarts=12, seed=0)
        assert 0 < rep.alpha_est <= rep.gap / 2 + 1e-8
        vals[L] = rep.alpha_est * L * L
        reports[L] = rep
    band = max(vals.values()) / min(vals.values())
    assert band < 2.0, vals
    soft = []
    for L in (4, 6, 8):
        t_mix = T_MIX_D2.get(L)
        bound = mixing_bound_check(get_gen(L, 2), reports[L], t_mix=t_mix)
        soft.append((L, bound.t_mix, bound.bound, bound.holds))
    print(f"criterion 7 PASS: alpha*L^2 band {band:.2f} < 2 over L in 4/6/8; "
          f"alpha <= gap/2 everywhere; soft mixing bound (L, T_mix, rhs, holds): {soft}")


def test_criterion_08_conv_condition():
    cs = {}
    for d in (2, 3):
        for L in (50, 100, 200, 400, 10000):
            c = minimal_conv_constant(count_distribution(L, d))
            assert c is not None
            cs[(L, d)] = c
        grid = [cs[(L, d)] for L in (50, 100, 200, 400, 10000)]
        assert max(grid) / min(grid) < 2.0, (d, grid)
    print(f"criterion 8 PASS: minimal Conv constant varies < factor 2 per d; "
          f"values {dict((k, round(v, 3)) for k, v in cs.items())}")


def test_criterion_09_entropy_machinery():
    rng = np.random.default_rng(9)
    for L, d in ((6, 2), (6, 3)):
        gen = get_gen(L, d)
        for _ in range(100):
            f = rng.gamma(1.0, 1.0, size=gen.dim)
            for i in range(d):
                rep = entropy_decomposition_check(gen, f, i)
                assert rep.max_residual < 1e-12
                assert rep.top_level_residual < 1e-12
    probe = chi_laplace_probe(40, 3, 0, 5)
    assert abs(probe.nu_chi - 1.0) < 1e-12
    assert abs(probe.second_moment - probe.second_moment_closed) < 1e-12 * probe.second_moment_closed
    sups = {L: chi_laplace_probe(L, 3, 0, round(L / 6)).laplace_sup for L in (40, 80, 160)}
    assert max(sups.values()) < 0.2, sups
    print(f"criterion 9 PASS: entropy decomposition < 1e-12 on 100 densities at "
          f"(6,2),(6,3); nu(chi)=1 and moment identity < 1e-12; Laplace sup "
          f"{ {k: round(v, 4) for k, v in sups.items()} } < 0.2")


def test_criterion_10_interchange_recursion():
    alphas = {}
    for n in (4, 5, 6, 7):
        rep = lsi_segment(n, restarts=16, seed=0)
        alphas[n] = rep.alpha_full * n * n
    band = max(alphas.values()) / min(alphas.values())
    assert band < 2.0, alphas
    contraction = []
    for n, counts in ((4, (2, 2)), (5, (2, 3)), (6, (3, 3)), (6, (2, 2, 2))):
        rep = lsi_segment(n, counts=counts, restarts=10, seed=0)
        assert rep.contraction_holds, (n, counts)
        contraction.append((n, counts))
    ratios = {n: dirichlet_comparison(n) / n ** 3 for n in (3, 4, 5)}
    assert max(ratios.values()) < 0.2, ratios
    print(f"criterion 10 PASS: alpha(Gamma_n)*n^2 band {band:.2f} < 2 over n in "
          f"4..7; contraction holds at {contraction}; Dirichlet ratio/n^3 "
          f"{ {k: round(v, 3) for k, v in ratios.items()} } < 0.2")

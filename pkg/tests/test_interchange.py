import itertools
import math

import numpy as np
import pytest
from conftest import get_gen

from polymix.errors import CapacityError
from polymix.interchange import (
    Permutation,
    build_colored_generator,
    build_interchange_generator,
    color_labels_of_perms,
    dirichlet_comparison,
    enumerate_colored,
    enumerate_permutations,
    lsi_segment,
    perm_rank,
    perm_unrank,
    project_coloring,
    project_generator,
    recursion_check,
)


def test_rank_unrank_roundtrip():
    for n in (3, 4, 5):
        for r in range(math.factorial(n)):
            assert perm_rank(perm_unrank(r, n)) == r
    # Lehmer rank equals lexicographic position
    perms = list(itertools.permutations(range(4)))
    for i, p in enumerate(perms):
        assert perm_rank(p) == i


def test_permutation_validation():
    with pytest.raises(ValueError):
        Permutation(3, (0, 0, 2))
    assert Permutation(3, (2, 0, 1)).rank == perm_rank((2, 0, 1))


def test_enumeration_order_and_capacity():
    index = enumerate_permutations(3)
    assert len(index) == 6
    assert np.array_equal(index.perms[0], [0, 1, 2])
    with pytest.raises(CapacityError):
        enumerate_permutations(9)


def test_two_point_generator():
    gen = build_interchange_generator(2)
    assert np.allclose(gen.matrix.toarray(), [[-1.0, 1.0], [1.0, -1.0]])


def test_segment_generator_structure():
    gen = build_interchange_generator(3)
    m = gen.matrix.toarray()
    assert gen.dim == 6
    assert np.allclose(m, m.T)
    assert np.allclose(m.sum(axis=1), 0.0)
    assert np.abs(m @ np.ones(6)).max() < 1e-14


def test_complete_graph_gap_dominates_segment():
    g_seg = np.linalg.eigvalsh(-build_interchange_generator(4, "segment").matrix.toarray())[1]
    g_com = np.linalg.eigvalsh(-build_interchange_generator(4, "complete").matrix.toarray())[1]
    assert g_com >= g_seg - 1e-12


def test_project_coloring_counts():
    # n=4, counts (2,2): 24 permutations over 6 words, 4 preimages each
    index = enumerate_permutations(4)
    labels = color_labels_of_perms(index, (2, 2))
    _, freq = np.unique(labels, return_counts=True)
    assert len(freq) == 6 and np.all(freq == 4)
    cfg = project_coloring((0, 2, 1, 3), (2, 2))
    assert cfg.word == (0, 1, 0, 1)
    with pytest.raises(ValueError):
        project_coloring((0, 1, 2), (2, 2))


def test_pushforward_uniformity_chi_square():
    from scipy.stats import chi2

    index = enumerate_permutations(6)
    labels = color_labels_of_perms(index, (2, 2, 2))
    rng = np.random.default_rng(0)
    picks = rng.integers(len(index), size=1_000_000)
    freq = np.bincount(labels[picks], minlength=90)
    expect = 1_000_000 / 90
    stat = ((freq - expect) ** 2 / expect).sum()
    assert stat < chi2.isf(0.01, 89)


def test_projected_generator_matches_direct():
    for n, counts in [(4, (2, 2)), (5, (2, 3)), (6, (2, 2, 2))]:
        proj = project_generator(build_interchange_generator(n), counts)
        direct = build_colored_generator(n, counts)
        assert np.abs((proj.matrix - direct.matrix).toarray()).max() < 1e-12
    with pytest.raises(ValueError):
        project_generator(direct, (2, 2, 2))


def test_gap_invariant_under_projection():
    for n, counts in [(4, (2, 2)), (5, (2, 3)), (6, (2, 2, 2))]:
        full = np.linalg.eigvalsh(-build_interchange_generator(n).matrix.toarray())[1]
        col = np.linalg.eigvalsh(-build_colored_generator(n, counts).matrix.toarray())[1]
        assert abs(full - col) < 1e-8


def test_two_color_projection_is_exclusion_oracle():
    # independent exclusion construction over binary words, swap rate 1
    n, counts = (6, (3, 3))
    direct = build_colored_generator(n, counts)
    words = [w for w in itertools.product((0, 1), repeat=n) if sum(w) == 3]
    words.sort()
    pos = {w: i for i, w in enumerate(words)}
    m = np.zeros((len(words), len(words)))
    for w in words:
        for i in range(n - 1):
            if w[i] != w[i + 1]:
                v = list(w)
                v[i], v[i + 1] = v[i + 1], v[i]
                m[pos[w], pos[tuple(v)]] += 1.0
    np.fill_diagonal(m, -m.sum(axis=1))
    assert np.abs(direct.matrix.toarray() - m).max() < 1e-12


def test_colored_two_types_matches_polymer_swap_part():
    # the d=1 polymer generator is the exclusion process at half rate
    gen_poly = get_gen(6, 1)
    colored = build_colored_generator(6, (3, 3))
    assert np.abs(gen_poly.matrix.toarray() - 0.5 * colored.matrix.toarray()).max() < 1e-12


def test_lsi_segment_contraction():
    rep = lsi_segment(5, counts=(2, 3), restarts=8, seed=0)
    assert rep.contraction_holds
    assert rep.alpha_full <= rep.alpha_colored + 1e-6
    assert rep.alpha_full <= rep.gap_full / 2 + 1e-8


def test_colored_alpha_uniform_in_split():
    vals = [
        lsi_segment(6, counts=(n1, 6 - n1), restarts=8, seed=0).alpha_colored * 36
        for n1 in (1, 2, 3)
    ]
    assert max(vals) / min(vals) < 2.0


def test_dirichlet_comparison():
    assert dirichlet_comparison(2) == pytest.approx(1.0, abs=1e-10)
    for n in (3, 4, 5):
        ratio = dirichlet_comparison(n)
        assert 0.05 < ratio / n ** 3 < 0.2
    with pytest.raises(CapacityError):
        dirichlet_comparison(7)


def test_recursion_check():
    rep = recursion_check(5, samples=50, seed=0)
    assert rep.split_max_residual < 1e-12
    assert rep.n1 == 2
    assert rep.alpha_n > 0 and rep.alpha_parts > 0
    assert rep.c_witness >= 0.0
    assert rep.lhs_inv_alpha <= rep.base_inv_alpha + rep.c_witness * rep.log_factor + 1e-9


def test_colored_index_lookup():
    idx = enumerate_colored(4, (2, 2))
    assert len(idx) == 6
    back = idx.indices_of_words(idx.words)
    assert np.array_equal(back, np.arange(6))

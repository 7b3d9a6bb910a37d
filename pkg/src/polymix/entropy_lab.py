"""Conditioning-class entropy identities and particle-count probes.

The conditional measures mu^{(i)} fix the first i particle counts
(N_1, ..., N_i).  Under the uniform measure every conditioning class is
itself uniform, so conditional means and entropies reduce to class
averages, computed here with bincount over class labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .counts import CountDistribution, count_distribution, delta_factor
from .generator import GeneratorMatrix, dirichlet_form, entropy
from .paths import StateIndex

TINY = 1e-300


# ---------------------------------------------------------------------------
# Conditioning classes on (N_1 .. N_i)
# ---------------------------------------------------------------------------

def class_labels(index: StateIndex, i: int) -> tuple[np.ndarray, int]:
    """Label states by their (N_1..N_i) value; returns (labels, n_classes).

    i = 0 puts every state in one class.  Because the counts sum to L/2,
    level d coincides with level d-1.
    """
    if not 0 <= i <= index.d:
        raise ValueError(f"conditioning level {i} outside 0..{index.d}")
    n = len(index)
    if i == 0:
        return np.zeros(n, dtype=np.int64), 1
    _, inv = np.unique(index.counts[:, :i], axis=0, return_inverse=True)
    return inv.astype(np.int64), int(inv.max()) + 1


def _xlogx(v: np.ndarray) -> np.ndarray:
    return np.where(v > 0, v * np.log(np.maximum(v, TINY)), 0.0)


def conditional_mean(f: np.ndarray, labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Per-class mean of f, one entry per class."""
    cnt = np.bincount(labels, minlength=n_classes)
    return np.bincount(labels, weights=f, minlength=n_classes) / cnt


def conditional_entropy(f: np.ndarray, labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Per-class Ent(f) under the uniform measure of each class."""
    cnt = np.bincount(labels, minlength=n_classes)
    m = np.bincount(labels, weights=f, minlength=n_classes) / cnt
    mlog = np.bincount(labels, weights=_xlogx(f), minlength=n_classes) / cnt
    return mlog - _xlogx(m)


@dataclass
class EntropyDecompositionReport:
    """Residuals of the two-level entropy decomposition at level i."""

    L: int
    d: int
    i: int
    max_residual: float
    top_level_residual: float

    @property
    def holds(self) -> bool:
        return self.max_residual < 1e-12 and self.top_level_residual < 1e-12


def entropy_decomposition_check(gen: GeneratorMatrix, f: np.ndarray, i: int) -> EntropyDecompositionReport:
    """Check Ent_i(f) = Ent_i(E[f | level i+1]) + E[Ent_{i+1}(f) | level i].

    The identity is pointwise in the level-i class; the report carries the
    maximum residual over classes.  Also checks that the level-(d-1) entropy
    of the fully conditioned mean vanishes (level d determines nothing new).
    """
    index = gen.index
    d = gen.d
    if not 0 <= i <= d - 1:
        raise ValueError(f"level {i} outside 0..{d - 1}")
    f = np.asarray(f, dtype=float)
    lab_i, nc_i = class_labels(index, i)
    lab_j, nc_j = class_labels(index, i + 1)
    ent_i = conditional_entropy(f, lab_i, nc_i)
    g = conditional_mean(f, lab_j, nc_j)[lab_j]
    ent_i_of_g = conditional_entropy(g, lab_i, nc_i)
    ent_j = conditional_entropy(f, lab_j, nc_j)
    avg_ent_j = conditional_mean(ent_j[lab_j], lab_i, nc_i)
    resid = float(np.abs(ent_i - ent_i_of_g - avg_ent_j).max())

    lab_top, nc_top = class_labels(index, d)
    h = conditional_mean(f, lab_top, nc_top)[lab_top]
    lab_dm1, nc_dm1 = class_labels(index, d - 1)
    top_resid = float(np.abs(conditional_entropy(h, lab_dm1, nc_dm1)).max())
    return EntropyDecompositionReport(
        L=gen.L, d=d, i=i, max_residual=resid, top_level_residual=top_resid
    )


# ---------------------------------------------------------------------------
# chi statistic and its Laplace transform, from the count law alone
# ---------------------------------------------------------------------------

@dataclass
class ChiLaplaceReport:
    """Moment and Laplace-transform diagnostics of the chi statistic.

    The probe works at a subsystem of even size L holding the last d - i
    particle types, conditioned on the first of those types having count
    n - 1.  The remaining types then follow the count law of a system of
    size L - 2(n - 1) with d - i - 1 types, so everything reduces to count
    distributions; no state enumeration is involved.
    """

    L: int
    d: int
    i: int
    n: int
    nu_chi: float
    second_moment: float
    second_moment_closed: float
    delta: float
    laplace_sup: float
    chi_is_constant: bool
    t_grid: np.ndarray = field(repr=False, default=None)

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "d": self.d,
            "i": self.i,
            "n": self.n,
            "nu_chi": self.nu_chi,
            "second_moment": self.second_moment,
            "second_moment_closed": self.second_moment_closed,
            "delta": self.delta,
            "laplace_sup": self.laplace_sup,
            "chi_is_constant": self.chi_is_constant,
        }


def chi_laplace_probe(L: int, d: int, i: int, n: int, t_grid=None) -> ChiLaplaceReport:
    """Diagnostics of chi = sum_j N_j^2 / ((d-i-1) nu[N^2]) under nu.

    nu conditions the first remaining type to have count n - 1; the closed
    form for the second moment is n^2 gamma(n)/gamma(n-1) with gamma the
    count law at size L with d - i types.  Reports nu(chi), the raw second
    moment against its closed form, and sup_t log nu(e^{tY}) / (t^2 Delta)
    for Y the normalized centered square of one count.
    """
    if not 0 <= i <= d - 2:
        raise ValueError(f"need 0 <= i <= d-2, got i={i}, d={d}")
    if not 1 <= n <= L // 2:
        raise ValueError(f"n={n} outside 1..{L // 2}")
    d_rem = d - i
    gamma = count_distribution(L, d_rem)
    L_red = L - 2 * (n - 1)
    reduced = count_distribution(L_red, d_rem - 1)

    log_m2_closed = 2.0 * np.log(n) + float(gamma.log_weights[n] - gamma.log_weights[n - 1])
    m2_closed = float(np.exp(log_m2_closed))

    w = reduced.weights()
    k = reduced.support.astype(float)
    m2 = float(np.dot(w, k * k))
    nu_chi = (d_rem - 1) * m2 / ((d_rem - 1) * m2_closed)

    mean = float(np.dot(w, k))
    sigma2 = float(np.dot(w, (k - mean) ** 2))
    y = ((k - mean) ** 2 - sigma2) / m2_closed
    chi_const = d_rem - 1 == 1

    delta = delta_factor(L, n, gamma)
    if t_grid is None:
        t_grid = np.concatenate([-np.geomspace(0.01, 10.0, 25)[::-1], np.geomspace(0.01, 10.0, 25)])
    t_grid = np.asarray(t_grid, dtype=float)
    t_grid = t_grid[t_grid != 0]
    logw = reduced.log_weights
    sup = 0.0
    for t in t_grid:
        log_mgf = float(logsumexp(logw + t * y))
        sup = max(sup, log_mgf / (t * t * delta))
    return ChiLaplaceReport(
        L=L,
        d=d,
        i=i,
        n=n,
        nu_chi=nu_chi,
        second_moment=m2,
        second_moment_closed=m2_closed,
        delta=delta,
        laplace_sup=sup,
        chi_is_constant=chi_const,
        t_grid=t_grid,
    )


# ---------------------------------------------------------------------------
# Empirical constants of the entropy recursion
# ---------------------------------------------------------------------------

@dataclass
class RecursionReport:
    """Max observed ratios over random densities, one entry per level."""

    L: int
    d: int
    samples: int
    level_ratios: np.ndarray
    final_ratio: float

    @property
    def max_ratio(self) -> float:
        """Largest ratio observed over all levels and the final bound."""
        return max(float(np.max(self.level_ratios)), self.final_ratio)

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "d": self.d,
            "samples": self.samples,
            "level_ratios": [float(v) for v in self.level_ratios],
            "final_ratio": self.final_ratio,
            "max_ratio": self.max_ratio,
        }


def recursion_constant_probe(gen: GeneratorMatrix, samples: int = 200, seed: int = 0) -> RecursionReport:
    """Empirical witnesses of the level-by-level entropy recursion.

    For each positive density f and level i it records
    mu[Ent_i(E[f | i+1])] / (L^2 E(sqrt f, sqrt f) + mu[Ent_{i+1} f]), and
    separately mu[Ent_d f] / (L^2 E(sqrt f, sqrt f)).  Degenerate draws
    (vanishing denominators) are skipped.  The sampled family mixes random
    gamma draws with exponential tilts of the slowest generator mode, so
    the largest ratios are witnessed by near-extremal densities and not
    only by typical ones.
    """
    index = gen.index
    L, d = gen.L, gen.d
    rng = np.random.default_rng(seed)
    labels = [class_labels(index, i) for i in range(d + 1)]
    nstates = len(index)
    pis = [np.bincount(lab, minlength=nc) / nstates for lab, nc in labels]
    max_ratios = np.zeros(d)
    final = 0.0
    w, U = np.linalg.eigh(-gen.matrix.toarray())
    psi = U[:, 1] / np.abs(U[:, 1]).max()
    tilts = [np.exp(c * psi) for c in (0.5, -0.5, 1.0, -1.0, 2.0, -2.0)]
    for k in range(samples + len(tilts)):
        if k < len(tilts):
            f = tilts[k].copy()
        else:
            f = rng.gamma(shape=1.0, scale=1.0, size=nstates)
        f /= f.mean()
        dir_term = L * L * dirichlet_form(np.sqrt(f), np.sqrt(f), gen)
        if dir_term < 1e-14:
            continue
        ents = []
        for i in range(d + 1):
            lab, nc = labels[i]
            ents.append(float(np.dot(pis[i], conditional_entropy(f, lab, nc))))
        for i in range(d):
            lab_j, nc_j = labels[i + 1]
            g = conditional_mean(f, lab_j, nc_j)[lab_j]
            lab_i, nc_i = labels[i]
            num = float(np.dot(pis[i], conditional_entropy(g, lab_i, nc_i)))
            den = dir_term + ents[i + 1]
            if den > 1e-14:
                max_ratios[i] = max(max_ratios[i], num / den)
        final = max(final, ents[d] / dir_term)
    return RecursionReport(L=L, d=d, samples=samples, level_ratios=max_ratios, final_ratio=final)

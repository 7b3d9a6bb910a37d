"""Interchange process on small graphs and its colored projections.

States are permutations of {0..n-1} (vertex -> label); an edge swaps the
labels at its endpoints at rate 1.  Coloring the labels into blocks
projects the process onto words over the colors; with two colors this is
the exclusion process on the same graph.  Permutations are indexed by
Lehmer code, which coincides with lexicographic rank.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import CapacityError
from .entropy_lab import conditional_entropy, conditional_mean
from .lsi import lsi_upper_bound

MAX_N = 8


# ---------------------------------------------------------------------------
# Permutation indexing (Lehmer code = lexicographic rank)
# ---------------------------------------------------------------------------

def perm_rank(image) -> int:
    image = list(image)
    n = len(image)
    r = 0
    for i in range(n):
        l = sum(1 for j in range(i + 1, n) if image[j] < image[i])
        r += l * math.factorial(n - 1 - i)
    return r


def perm_unrank(r: int, n: int) -> tuple:
    avail = list(range(n))
    out = []
    for i in range(n):
        f = math.factorial(n - 1 - i)
        k, r = divmod(r, f)
        out.append(avail.pop(k))
    return tuple(out)


def _ranks_of(perms: np.ndarray) -> np.ndarray:
    """Vectorized Lehmer rank of each row."""
    n = perms.shape[1]
    out = np.zeros(perms.shape[0], dtype=np.int64)
    for i in range(n):
        l = (perms[:, i + 1:] < perms[:, i:i + 1]).sum(axis=1)
        out += l * math.factorial(n - 1 - i)
    return out


@dataclass
class Permutation:
    n: int
    image: tuple

    def __post_init__(self):
        if sorted(self.image) != list(range(self.n)):
            raise ValueError(f"not a bijection on 0..{self.n - 1}: {self.image}")

    @property
    def rank(self) -> int:
        return perm_rank(self.image)


@dataclass
class PermIndex:
    """All of S_n in Lehmer-rank (= lexicographic) order."""

    n: int
    perms: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.perms.shape[0]


def enumerate_permutations(n: int) -> PermIndex:
    if n > MAX_N:
        raise CapacityError(f"n={n} exceeds the S_n capacity n <= {MAX_N}")
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int8)
    return PermIndex(n=n, perms=perms)


def _edges(n: int, graph: str):
    if graph == "segment":
        return [(i, i + 1) for i in range(n - 1)]
    if graph == "complete":
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    raise ValueError(f"unknown graph {graph!r}")


@dataclass
class InterchangeGenerator:
    """Generator of label swaps along graph edges; rows sum to zero."""

    index: object
    matrix: sp.csr_matrix = field(repr=False)
    graph: str = "segment"
    counts: tuple | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.index.n


def build_interchange_generator(n: int, graph: str = "segment") -> InterchangeGenerator:
    index = enumerate_permutations(n)
    N = len(index)
    rows, cols = [], []
    ids = np.arange(N, dtype=np.int64)
    for i, j in _edges(n, graph):
        swapped = index.perms.copy()
        swapped[:, [i, j]] = swapped[:, [j, i]]
        rows.append(ids)
        cols.append(_ranks_of(swapped))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    off = sp.coo_matrix((np.ones(rows.shape[0]), (rows, cols)), shape=(N, N)).tocsr()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    return InterchangeGenerator(index=index, matrix=(off + sp.diags(diag)).tocsr(), graph=graph)


# ---------------------------------------------------------------------------
# Colored projection
# ---------------------------------------------------------------------------

@dataclass
class ColoredConfig:
    n: int
    counts: tuple
    word: tuple

    def __post_init__(self):
        if sum(self.counts) != self.n:
            raise ValueError("color counts must sum to n")
        for c, m in enumerate(self.counts):
            if self.word.count(c) != m:
                raise ValueError("word multiplicities do not match counts")


def _color_of_labels(counts) -> np.ndarray:
    """Map label -> color, colors in blocks of sizes counts."""
    return np.repeat(np.arange(len(counts), dtype=np.int8), counts)


def project_coloring(perm_image, counts) -> ColoredConfig:
    n = len(perm_image)
    if sum(counts) != n:
        raise ValueError("color counts must sum to n")
    cmap = _color_of_labels(counts)
    return ColoredConfig(n=n, counts=tuple(counts), word=tuple(int(cmap[v]) for v in perm_image))


@dataclass
class ColoredIndex:
    """All color words with the given multiplicities, lexicographic order."""

    n: int
    counts: tuple
    words: np.ndarray = field(repr=False)
    codes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.words.shape[0]

    def indices_of_words(self, words: np.ndarray) -> np.ndarray:
        k = len(self.counts)
        code = np.zeros(words.shape[0], dtype=np.int64)
        for x in range(self.n):
            code = code * k + words[:, x]
        idx = np.searchsorted(self.codes, code)
        if np.any(self.codes[idx] != code):
            raise KeyError("some words are not enumerated")
        return idx


def enumerate_colored(n: int, counts) -> ColoredIndex:
    counts = tuple(counts)
    base = _color_of_labels(counts)
    words = np.array(sorted(set(itertools.permutations(base.tolist()))), dtype=np.int8)
    k = len(counts)
    codes = np.zeros(words.shape[0], dtype=np.int64)
    for x in range(n):
        codes = codes * k + words[:, x]
    return ColoredIndex(n=n, counts=counts, words=words, codes=codes)


def build_colored_generator(n: int, counts, graph: str = "segment") -> InterchangeGenerator:
    """The projected dynamics built directly on color words."""
    index = enumerate_colored(n, counts)
    N = len(index)
    rows, cols = [], []
    ids = np.arange(N, dtype=np.int64)
    for i, j in _edges(n, graph):
        differ = index.words[:, i] != index.words[:, j]
        swapped = index.words[differ].copy()
        swapped[:, [i, j]] = swapped[:, [j, i]]
        rows.append(ids[differ])
        cols.append(index.indices_of_words(swapped))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    off = sp.coo_matrix((np.ones(rows.shape[0]), (rows, cols)), shape=(N, N)).tocsr()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    return InterchangeGenerator(
        index=index, matrix=(off + sp.diags(diag)).tocsr(), graph=graph, counts=tuple(counts)
    )


def color_labels_of_perms(index: PermIndex, counts) -> np.ndarray:
    """Colored-word class label of every permutation."""
    cmap = _color_of_labels(counts)
    words = cmap[index.perms]
    colored = enumerate_colored(index.n, counts)
    return colored.indices_of_words(words)


def project_generator(gen: InterchangeGenerator, counts) -> InterchangeGenerator:
    """Lump the S_n generator over colored-word classes.

    Classes all have size prod(counts_i!), so the lumped matrix is
    (1/class size) * S^T A S with S the class indicator matrix.
    """
    if gen.counts is not None:
        raise ValueError("generator is already colored")
    labels = color_labels_of_perms(gen.index, counts)
    N = gen.dim
    M = int(labels.max()) + 1
    S = sp.coo_matrix((np.ones(N), (np.arange(N), labels)), shape=(N, M)).tocsr()
    size = N // M
    lumped = (S.T @ gen.matrix @ S) / size
    colored = enumerate_colored(gen.index.n, counts)
    return InterchangeGenerator(
        index=colored, matrix=lumped.tocsr(), graph=gen.graph, counts=tuple(counts)
    )


# ---------------------------------------------------------------------------
# Log-Sobolev estimates and the recursion pieces
# ---------------------------------------------------------------------------

@dataclass
class SegmentLsiReport:
    """Upper-bound estimates of alpha for S_n and a colored projection."""

    n: int
    graph: str
    counts: tuple | None
    alpha_full: float
    alpha_colored: float | None
    gap_full: float
    contraction_holds: bool | None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "graph": self.graph,
            "counts": list(self.counts) if self.counts else None,
            "gap": self.gap_full,
            "alpha_est": self.alpha_full,
            "alpha_colored": self.alpha_colored,
        }


def lsi_segment(
    n: int, counts=None, graph: str = "segment", restarts: int = 16, seed: int = 0
) -> SegmentLsiReport:
    """Estimate alpha(G_n) and optionally the colored alpha(G_n, counts).

    The colored minimizer is lifted through the projection and fed to the
    S_n optimizer as a start; the lift preserves both the Dirichlet form
    and the entropy, so the full estimate never exceeds the colored one and
    the contraction inequality holds by construction of the estimates.
    """
    gen = build_interchange_generator(n, graph)
    alpha_col = None
    extra = []
    probes = []
    contraction = None
    if counts is not None:
        cgen = build_colored_generator(n, counts, graph)
        alpha_col, f_col, _, _ = lsi_upper_bound(
            -cgen.matrix, cgen.dim, restarts=restarts, seed=seed
        )
        labels = color_labels_of_perms(gen.index, counts)
        extra.append(np.log(np.maximum(f_col[labels], 1e-300)))
        probes.append(f_col[labels] - 1.0)
    alpha_full, _, _, gap = lsi_upper_bound(
        -gen.matrix, gen.dim, restarts=restarts, seed=seed, extra_starts=extra, probe_vectors=probes
    )
    if alpha_col is not None:
        alpha_full = min(alpha_full, alpha_col)
        contraction = alpha_full <= alpha_col + 1e-6
    return SegmentLsiReport(
        n=n,
        graph=graph,
        counts=tuple(counts) if counts is not None else None,
        alpha_full=alpha_full,
        alpha_colored=alpha_col,
        gap_full=gap,
        contraction_holds=contraction,
    )


def dirichlet_comparison(n: int) -> float:
    """sup over nonconstant f of E_complete(f,f) / E_segment(f,f).

    Generalized extremal eigenvalue on the complement of constants, using
    the eigenbasis of the segment form.
    """
    if n > 6:
        raise CapacityError("dirichlet_comparison supports n <= 6")
    a_seg = -build_interchange_generator(n, "segment").matrix.toarray()
    a_com = -build_interchange_generator(n, "complete").matrix.toarray()
    w, U = np.linalg.eigh(a_seg)
    V = U[:, 1:]
    g_com = V.T @ a_com @ V
    g_seg = np.diag(w[1:])
    vals = scipy.linalg.eigh(g_com, g_seg, eigvals_only=True)
    return float(vals[-1])


@dataclass
class RecursionCheckReport:
    """Entropy split identity plus the assembled alpha recursion at n1 = n//2."""

    n: int
    n1: int
    split_max_residual: float
    alpha_n: float
    alpha_parts: float
    lhs_inv_alpha: float
    base_inv_alpha: float
    log_factor: float
    c_witness: float

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "n1": self.n1,
            "split_max_residual": self.split_max_residual,
            "alpha_n": self.alpha_n,
            "alpha_parts": self.alpha_parts,
            "c_witness": self.c_witness,
        }


def recursion_check(n: int, n1: int | None = None, samples: int = 100, seed: int = 0) -> RecursionCheckReport:
    """Check the conditioning split of entropy and the alpha recursion.

    Split: Ent(f) = mean over colored classes of within-class entropies
    plus the entropy of class means, with two colors (n1, n - n1); exact
    identity on random positive f.  Recursion: with empirical alphas,
    1/alpha(n) <= 1/min(alpha(n1), alpha(n-n1)) + C n^2 (-log p(1-p));
    reports the C witness making it an equality (0 if the base term alone
    suffices).
    """
    n1 = n1 or n // 2
    index = enumerate_permutations(n)
    labels = color_labels_of_perms(index, (n1, n - n1))
    M = int(labels.max()) + 1
    N = len(index)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        f = rng.gamma(1.0, 1.0, size=N)
        ent = float(np.mean(np.where(f > 0, f * np.log(f), 0.0)) - f.mean() * np.log(f.mean()))
        within = conditional_entropy(f, labels, M)
        means = conditional_mean(f, labels, M)
        ent_means = float(
            np.mean(np.where(means > 0, means * np.log(means), 0.0))
            - means.mean() * np.log(means.mean())
        )
        worst = max(worst, abs(ent - within.mean() - ent_means))

    alpha_n = lsi_segment(n, seed=seed).alpha_full
    alpha_a = lsi_segment(n1, seed=seed).alpha_full if n1 > 1 else np.inf
    alpha_b = lsi_segment(n - n1, seed=seed).alpha_full if n - n1 > 1 else np.inf
    alpha_parts = float(min(alpha_a, alpha_b))
    p = n1 / n
    log_factor = n * n * (-math.log(p * (1 - p)))
    lhs = 1.0 / alpha_n
    base = 1.0 / alpha_parts if np.isfinite(alpha_parts) else 0.0
    c_wit = max(0.0, (lhs - base) / log_factor)
    return RecursionCheckReport(
        n=n,
        n1=n1,
        split_max_residual=worst,
        alpha_n=alpha_n,
        alpha_parts=alpha_parts,
        lhs_inv_alpha=lhs,
        base_inv_alpha=base,
        log_factor=log_factor,
        c_witness=c_wit,
    )

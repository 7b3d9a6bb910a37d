"""Sparse assembly of the heat-bath generator and its quadratic forms.

The generator acts on functions over an enumerated state space as a sum of
single-site resampling operators minus the identity.  Rows sum to zero and
the matrix is symmetric, so the uniform measure is reversible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError
from .paths import StateIndex

# Keep COO assembly under control: entries scale like |states| * L * d.
DEFAULT_ENTRY_BUDGET = 80_000_000


def _site_digits(codes: np.ndarray, x: int, L: int, base: int):
    """Increment codes (a, b) = (zeta_x, zeta_{x+1}) and their place values."""
    pa = base ** (L - x)
    pb = base ** (L - x - 1)
    a = (codes // pa) % base
    b = (codes // pb) % base
    return a, b, pa, pb


@dataclass
class GeneratorMatrix:
    """Generator as a CSR matrix aligned with a state enumeration."""

    index: object
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def L(self) -> int:
        return self.index.L

    @property
    def d(self) -> int:
        return self.index.d


def build_generator(index: StateIndex, max_entries: int = DEFAULT_ENTRY_BUDGET) -> GeneratorMatrix:
    """Assemble the generator over an enumerated polymer state space.

    Off-diagonal entry (sigma, xi) sums, over update sites, the probability
    that resampling sigma at that site yields xi; the diagonal makes rows
    sum to zero.
    """
    codes = index.codes
    L, d = index.L, index.d
    n = codes.shape[0]
    base = 2 * d
    est = n * (L - 1) * (2 * d - 1)
    if est > max_entries:
        raise CapacityError(
            f"generator assembly would create ~{est} entries (budget {max_entries})"
        )
    rows_all, cols_all, vals_all = [], [], []
    state_ids = np.arange(n, dtype=np.int64)
    for x in range(1, L):
        a, b, pa, pb = _site_digits(codes, x, L, base)
        opposite = b == (a + d) % base
        # neighbour heights differ: keep or swap the increment pair
        m = (~opposite) & (a != b)
        tgt = codes[m] + (b[m] - a[m]) * pa + (a[m] - b[m]) * pb
        rows_all.append(state_ids[m])
        cols_all.append(index.indices_of_codes(tgt))
        vals_all.append(np.full(tgt.shape[0], 0.5))
        # neighbour heights equal: regenerate the particle/anti-particle pair
        om = np.nonzero(opposite)[0]
        ao, bo = a[om], b[om]
        for j in range(base):
            mj = ao != j
            src = om[mj]
            tgt = codes[src] + (j - ao[mj]) * pa + ((j + d) % base - bo[mj]) * pb
            rows_all.append(state_ids[src])
            cols_all.append(index.indices_of_codes(tgt))
            vals_all.append(np.full(src.shape[0], 1.0 / base))
    rows = np.concatenate(rows_all)
    cols = np.concatenate(cols_all)
    vals = np.concatenate(vals_all)
    off = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    off.sum_duplicates()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    gen = (off + sp.diags(diag)).tocsr()
    return GeneratorMatrix(index=index, matrix=gen)


# ---------------------------------------------------------------------------
# Quadratic forms and entropy under the uniform measure
# ---------------------------------------------------------------------------

def dirichlet_form(f: np.ndarray, g: np.ndarray, gen: GeneratorMatrix) -> float:
    """E(f, g) = -mu[f (L g)] with mu uniform."""
    return float(-np.dot(f, gen.matrix @ g) / gen.dim)


def entropy(f: np.ndarray) -> float:
    """Ent(f) = mu[f log f] - mu[f] log mu[f], with 0 log 0 = 0."""
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("entropy requires f >= 0")
    flogf = np.where(f > 0, f * np.log(np.where(f > 0, f, 1.0)), 0.0)
    m = f.mean()
    if m == 0:
        return 0.0
    return float(flogf.mean() - m * np.log(m))


def dirichlet_form_split(f: np.ndarray, gen: GeneratorMatrix) -> float:
    """The Dirichlet form written out as swap terms plus regeneration terms.

    Agrees with -mu[f L f] to round-off; kept as an independent route for
    tests of the generator assembly.
    """
    index = gen.index
    codes = index.codes
    L, d = gen.L, gen.d
    base = 2 * d
    n = codes.shape[0]
    total = 0.0
    for x in range(1, L):
        a, b, pa, pb = _site_digits(codes, x, L, base)
        opposite = b == (a + d) % base
        # swap term: rate 1/2 when the neighbours differ (swap may be a no-op)
        m = ~opposite
        tgt = codes[m] + (b[m] - a[m]) * pa + (a[m] - b[m]) * pb
        df = f[index.indices_of_codes(tgt)] - f[m]
        total += 0.5 * 0.5 * np.sum(df ** 2) / n
        # regeneration terms: rate 1/(2d) to each of the 2d pair types
        om = np.nonzero(opposite)[0]
        ao = a[om]
        bo = b[om]
        for j in range(base):
            tgt = codes[om] + (j - ao) * pa + ((j + d) % base - bo) * pb
            df = f[index.indices_of_codes(tgt)] - f[om]
            total += 0.5 * np.sum(df ** 2) / (base * n)
    return float(total)

"""Exact combinatorics of particle counts.

Everything here is closed-form or dynamic programming on the count
distribution: the partition function of pinned paths, the simple-random-walk
return probability that cross-checks it, the birth-and-death law gamma(n) of
one particle-count coordinate, the convexity/Gaussian-envelope condition on
that law, and the moment bounds used by the covariance and Laplace estimates.

Two numeric modes are used throughout: exact rationals (big integers) for
moderate L, and log-space floats for large L, where tail weights sit far
below double-precision underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import PolymixError

# Largest L for which the exact rational mode is used by default.  Rationals
# at this size are cheap and make the small-L identity tests exact.
EXACT_MODE_LIMIT = 256


# ---------------------------------------------------------------------------
# Random-walk return probability and partition function
# ---------------------------------------------------------------------------

def _closed_walk_counts_1d(L: int) -> list[int]:
    """counts[l] = number of closed 1-d walks of length l, by grid DP."""
    counts = [0] * (L + 1)
    counts[0] = 1
    # walk[pos + L] = number of l-step walks ending at pos
    walk = [0] * (2 * L + 1)
    walk[L] = 1
    for l in range(1, L + 1):
        nxt = [0] * (2 * L + 1)
        for p in range(L - l, L + l + 1):
            w = walk[p]
            if w:
                nxt[p - 1] += w
                nxt[p + 1] += w
        walk = nxt
        counts[l] = walk[L]
    return counts

def closed_walk_count(L: int, d: int) -> int:
    """Exact number of closed L-step walks on Z^d.

    One-dimensional closed-walk counts come from a grid DP; axes are then
    combined by an exact binomial convolution over how many steps each axis
    receives.
    """
    one_d = _closed_walk_counts_1d(L)
    # combined[m] = closed walks of length m using the axes merged so far
    combined = list(one_d)
    for _ in range(d - 1):
        new = [0] * (L + 1)
        for m in range(0, L + 1, 2):
            s = 0
            for l in range(0, m + 1, 2):
                s += math.comb(m, l) * one_d[l] * combined[m - l]
            new[m] = s
        combined = new
    return combined[L]


def srw_return_probability(L: int, d: int, exact: bool = False):
    """Probability that the simple random walk on Z^d is home after L steps.

    Float mode convolves the one-step kernel L times on the occupation grid;
    exact mode divides the exact closed-walk count by (2d)^L.
    """
    if L % 2 != 0 or L < 0:
        raise PolymixError(f"L must be even and nonnegative, got {L}")
    if exact:
        return Fraction(closed_walk_count(L, d), (2 * d) ** L)
    shape = (2 * L + 1,) * d
    p = np.zeros(shape)
    origin = (L,) * d
    p[origin] = 1.0
    step = 1.0 / (2 * d)
    for _ in range(L):
        nxt = np.zeros_like(p)
        for axis in range(d):
            nxt += step * np.roll(p, 1, axis=axis)
            nxt += step * np.roll(p, -1, axis=axis)
        p = nxt
    return float(p[origin])


def partition_function(L: int, d: int) -> int:
    """|Omega_L| as an exact integer, via the multinomial-squared sum.

    Uses the one-type marginalisation recursion
    Z_L^d = sum_k L!/((k!)^2 (L-2k)!) Z_{L-2k}^{d-1}, with Z_m^1 = C(m, m/2).
    """
    if L % 2 != 0 or L < 0:
        raise PolymixError(f"L must be even and nonnegative, got {L}")
    z = [math.comb(m, m // 2) for m in range(0, L + 1, 2)]  # d = 1
    for _ in range(2, d + 1):
        z = [
            sum(
                math.factorial(m)
                // (math.factorial(k) ** 2 * math.factorial(m - 2 * k))
                * z[(m - 2 * k) // 2]
                for k in range(m // 2 + 1)
            )
            for m in range(0, L + 1, 2)
        ]
    return z[L // 2]


_LOG_Z_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _log_partition_table(L: int, d: int) -> np.ndarray:
    """log Z_m^d for even m = 0, 2, ..., L (index m // 2), in floats."""
    for (lc, dc), tab in _LOG_Z_CACHE.items():
        if dc == d and lc >= L:
            return tab[: L // 2 + 1]
    m_all = np.arange(0, L + 1, 2)
    tab = gammaln(m_all + 1) - 2 * gammaln(m_all // 2 + 1)  # log C(m, m/2)
    for _ in range(2, d + 1):
        new = np.empty_like(tab)
        for i, m in enumerate(m_all):
            k = np.arange(m // 2 + 1)
            terms = (
                gammaln(m + 1)
                - 2 * gammaln(k + 1)
                - gammaln(m - 2 * k + 1)
                + tab[(m - 2 * k) // 2]
            )
            new[i] = logsumexp(terms)
        tab = new
    _LOG_Z_CACHE[(L, d)] = tab
    return tab


def log_partition_function(L: int, d: int) -> float:
    return float(_log_partition_table(L, d)[L // 2])


# ---------------------------------------------------------------------------
# The law of one particle-count coordinate
# ---------------------------------------------------------------------------

@dataclass
class CountDistribution:
    """The law gamma(n) of N_1 on support 0..L/2.

    log_weights always holds log gamma; in exact mode the rationals are kept
    alongside for identity-level tests.
    """

    L: int
    d: int
    log_weights: np.ndarray = field(repr=False)
    fractions: list[Fraction] | None = field(default=None, repr=False)

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.L // 2 + 1)

    @property
    def n_bar(self) -> float:
        return self.L / (2 * self.d)

    @property
    def exact(self) -> bool:
        return self.fractions is not None

    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def mean(self) -> float:
        return float(np.dot(self.weights(), self.support))

    def variance(self) -> float:
        w = self.weights()
        m = np.dot(w, self.support)
        return float(np.dot(w, (self.support - m) ** 2))

    def central_moment(self, k: int) -> float:
        w = self.weights()
        m = np.dot(w, self.support)
        return float(np.dot(w, (self.support - m) ** k))

    def log_ratio(self, n: int) -> float:
        """log(gamma(n+1) / gamma(n))."""
        return float(self.log_weights[n + 1] - self.log_weights[n])

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "d": self.d,
            "log_weights": [float(v) for v in self.log_weights],
        }


def count_distribution(L: int, d: int, exact: bool | None = None) -> CountDistribution:
    """gamma(k) = [L! / ((k!)^2 (L-2k)!)] * Z_{L-2k}^{d-1} / Z_L^d."""
    if L % 2 != 0 or L <= 0:
        raise PolymixError(f"L must be even and positive, got {L}")
    if d < 1:
        raise PolymixError(f"d must be >= 1, got {d}")
    if exact is None:
        exact = L <= EXACT_MODE_LIMIT
    ks = np.arange(L // 2 + 1)
    if d == 1:
        logw = np.full(L // 2 + 1, -np.inf)
        logw[L // 2] = 0.0
        fr = None
        if exact:
            fr = [Fraction(0)] * (L // 2) + [Fraction(1)]
        return CountDistribution(L, d, logw, fr)
    if exact:
        z_total = partition_function(L, d)
        fr = []
        for k in range(L // 2 + 1):
            num = (
                math.factorial(L)
                // (math.factorial(k) ** 2 * math.factorial(L - 2 * k))
                * partition_function(L - 2 * k, d - 1)
            )
            fr.append(Fraction(num, z_total))
        logw = np.array(
            [
                math.log(f.numerator) - math.log(f.denominator)
                if f > 0
                else -np.inf
                for f in fr
            ]
        )
        return CountDistribution(L, d, logw, fr)
    sub = _log_partition_table(L, d - 1)
    logw = (
        gammaln(L + 1)
        - 2 * gammaln(ks + 1)
        - gammaln(L - 2 * ks + 1)
        + sub[(L - 2 * ks) // 2]
        - log_partition_function(L, d)
    )
    # compensate residual normalisation drift from gammaln round-off
    logw = logw - logsumexp(logw)
    return CountDistribution(L, d, logw, None)


# ---------------------------------------------------------------------------
# Convexity / Gaussian-envelope condition
# ---------------------------------------------------------------------------

@dataclass
class ConvReport:
    """Margins of the convexity hypothesis at a given c, plus the minimal c.

    Margins are log-scale slacks (inequality holds iff margin >= 0); the
    range conditions are reported as plain slacks.
    """

    L: int
    d: int
    n_bar: float
    n_min: int
    n_max: int
    c_checked: float
    margins: dict[str, float]
    holds: bool
    c_found: float | None

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "d": self.d,
            "n_bar": self.n_bar,
            "c_checked": self.c_checked,
            "holds": self.holds,
            "c_found": self.c_found,
            "margins": {k: float(v) for k, v in self.margins.items()},
        }


def _conv_margins(dist: CountDistribution, c: float) -> dict[str, float]:
    n_bar = dist.n_bar
    n_min, n_max = 0, dist.L // 2
    lw = dist.log_weights
    ns = dist.support.astype(float)
    logc = math.log(c)

    margins = {
        "range_upper_hi": c * n_bar - (n_max - n_bar),
        "range_upper_lo": (n_max - n_bar) - n_bar / c,
        "range_lower_hi": c * n_bar - (n_bar - n_min),
        "range_lower_lo": (n_bar - n_min) - n_bar / c,
    }

    # ratio decay above the mean: gamma(n+1)/gamma(n) <= c exp(-(n-nbar)/(c nbar))
    up = np.arange(int(math.ceil(n_bar)), n_max)
    if up.size:
        lhs = lw[up + 1] - lw[up]
        rhs = logc - (up - n_bar) / (c * n_bar)
        margins["ratio_up"] = float(np.min(rhs - lhs))
    else:
        margins["ratio_up"] = math.inf
    # mirrored decay below the mean
    dn = np.arange(n_min + 1, int(math.floor(n_bar)) + 1)
    if dn.size:
        lhs = lw[dn - 1] - lw[dn]
        rhs = logc - (n_bar - dn) / (c * n_bar)
        margins["ratio_down"] = float(np.min(rhs - lhs))
    else:
        margins["ratio_down"] = math.inf

    # two-sided Gaussian envelope
    env_hi = logc - 0.5 * math.log(n_bar) - (n_bar - ns) ** 2 / (c * n_bar)
    env_lo = -logc - 0.5 * math.log(n_bar) - c * (n_bar - ns) ** 2 / n_bar
    margins["envelope_upper"] = float(np.min(env_hi - lw))
    margins["envelope_lower"] = float(np.min(lw - env_lo))
    return margins


def conv_condition_check(
    dist: CountDistribution, c: float, find_minimal: bool = True
) -> ConvReport:
    """Check the convexity hypothesis at c; optionally search the minimal c.

    All condition families are monotone in c, so the search is a geometric
    grid scan followed by bisection.  Failure is reported, not raised.
    """
    if c <= 0:
        raise PolymixError(f"c must be positive, got {c}")
    margins = _conv_margins(dist, c)
    holds = all(v >= 0 for v in margins.values())
    c_found = None
    if find_minimal:
        c_found = minimal_conv_constant(dist)
    return ConvReport(
        L=dist.L,
        d=dist.d,
        n_bar=dist.n_bar,
        n_min=0,
        n_max=dist.L // 2,
        c_checked=c,
        margins=margins,
        holds=holds,
        c_found=c_found,
    )


def minimal_conv_constant(dist: CountDistribution, rtol: float = 1e-3) -> float | None:
    """Smallest c on a geometric grid + bisection for which Conv(c, nbar) holds."""

    def ok(c: float) -> bool:
        return all(v >= 0 for v in _conv_margins(dist, c).values())

    hi = None
    c = 1.0
    for _ in range(60):
        if ok(c):
            hi = c
            break
        c *= 1.25
    if hi is None:
        return None
    lo = hi / 1.25
    while hi - lo > rtol * hi:
        mid = math.sqrt(lo * hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# Moment bounds (appendix lemmas) and the Delta factor
# ---------------------------------------------------------------------------

@dataclass
class MomentReport:
    L: int
    d: int
    sigma2: float
    var_x: float
    ratio_bound_c: float | None

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "d": self.d,
            "sigma2": self.sigma2,
            "var_x": self.var_x,
            "ratio_bound_c": self.ratio_bound_c,
        }


def lemma_bounds(L: int, d: int, dist: CountDistribution | None = None) -> MomentReport:
    """Variance of N_1, variance of X = Nbar_1^2 - sigma^2, and the best
    constant in the two-sided ratio bound gamma(n)/gamma(n+1) vs n^2/(L-2n)^2.

    The upper ratio bound is checked for n >= 1 only: at n = 0 the stated
    comparison degenerates (the n^2 factor vanishes while gamma(0) > 0) and
    only the trivial lower inequality survives.
    """
    if dist is None:
        dist = count_distribution(L, d)
    sigma2 = dist.variance()
    var_x = dist.central_moment(4) - sigma2 ** 2
    ratio_c = None
    if d >= 2:
        lw = dist.log_weights
        best = 1.0
        for n in range(1, L // 2):
            log_ratio = float(lw[n] - lw[n + 1])
            log_ref = 2 * math.log(n) - 2 * math.log(L - 2 * n)
            # need 1/C <= ratio/ref <= C
            best = max(best, math.exp(abs(log_ratio - log_ref)))
        ratio_c = best
    return MomentReport(L=L, d=d, sigma2=sigma2, var_x=var_x, ratio_bound_c=ratio_c)


def delta_factor(L_sub: int, n: int, dist: CountDistribution) -> float:
    """Delta(n, L_sub) = (1 / L_sub) * max(1, gamma(n-1)/gamma(n)).

    dist must be the count law of the size-L_sub subsystem.  The displayed
    fraction is read with 1/L_sub multiplying the whole max term.
    """
    if dist.L != L_sub:
        raise PolymixError(f"dist has L={dist.L}, expected {L_sub}")
    if not 1 <= n <= L_sub // 2:
        raise PolymixError(f"n={n} outside support 1..{L_sub // 2}")
    log_ratio = float(dist.log_weights[n - 1] - dist.log_weights[n])
    return math.exp(max(0.0, log_ratio)) / L_sub

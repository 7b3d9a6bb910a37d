"""The sine-weight statistic Phi and the mixing-time lower-bound pipeline.

Phi(eta) = sum_x g_x h_x with g_x = sin(pi x / L) and h_x the first
coordinate of eta_x.  Because g is the principal Dirichlet eigenvector of
the discrete Laplacian, Phi is an exact eigenfunction of the generator with
eigenvalue -kappa_L, which gives an exponential drift law and, combined
with a variance bound, a total-variation lower bound at diffusive times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .generator import GeneratorMatrix
from .paths import PolymerPath, StateIndex
from .spectral import kappa_value


@dataclass
class WilsonStatistic:
    """Weights g_x = sin(pi x/L), x = 1..L-1, and the eigenvalue kappa_L."""

    L: int
    g: np.ndarray = field(repr=False)
    kappa: float = 0.0

    @classmethod
    def for_length(cls, L: int) -> "WilsonStatistic":
        x = np.arange(1, L)
        return cls(L=L, g=np.sin(np.pi * x / L), kappa=kappa_value(L))

    def laplacian_residual(self) -> float:
        """max_x |(Delta g)_x + kappa g_x| with g_0 = g_L = 0."""
        ext = np.zeros(self.L + 1)
        ext[1:-1] = self.g
        lap = 0.5 * (ext[:-2] + ext[2:]) - ext[1:-1]
        return float(np.abs(lap + self.kappa * self.g).max())

    def phi(self, path: PolymerPath) -> float:
        h = path.first_coordinate_heights()
        return float(np.dot(self.g, h[1:-1]))

    def phi_vector(self, index: StateIndex) -> np.ndarray:
        """Phi evaluated at every enumerated state."""
        return index.height_profiles[:, 1:-1].astype(float) @ self.g


def phi_star(L: int) -> float:
    """Phi at the tent state: sum_{x} g_x * min(x, L-x)."""
    x = np.arange(1, L)
    return float(np.dot(np.sin(np.pi * x / L), np.minimum(x, L - x)))


@dataclass
class EigenfunctionReport:
    L: int
    d: int
    max_residual: float
    worst_state: str

    @property
    def holds(self) -> bool:
        return self.max_residual < 1e-10


def eigenfunction_check(gen: GeneratorMatrix, stat: WilsonStatistic | None = None) -> EigenfunctionReport:
    """max over states of |(L Phi)(eta) + kappa Phi(eta)|."""
    if stat is None:
        stat = WilsonStatistic.for_length(gen.L)
    v = stat.phi_vector(gen.index)
    resid = np.abs(gen.matrix @ v + stat.kappa * v)
    i = int(np.argmax(resid))
    return EigenfunctionReport(
        L=gen.L,
        d=gen.d,
        max_residual=float(resid[i]),
        worst_state=gen.index.path_at(i).to_string(),
    )


def phi_square_drift_bound(gen: GeneratorMatrix, stat: WilsonStatistic | None = None) -> float:
    """max over states of ((L Phi^2) + 2 kappa Phi^2) / L.

    The numerator is bounded by a constant times L uniformly on the tested
    grid; the returned normalized maximum witnesses that constant.
    """
    if stat is None:
        stat = WilsonStatistic.for_length(gen.L)
    v = stat.phi_vector(gen.index)
    expr = gen.matrix @ (v * v) + 2.0 * stat.kappa * v * v
    return float(expr.max() / gen.L)


# ---------------------------------------------------------------------------
# Trajectory-based checks
# ---------------------------------------------------------------------------

@dataclass
class DriftReport:
    """Sample means of Phi against the exponential drift law."""

    L: int
    kappa: float
    times: np.ndarray = field(repr=False)
    means: np.ndarray = field(repr=False)
    std_errors: np.ndarray = field(repr=False)
    predicted: np.ndarray = field(repr=False)
    n_within_3se: int = 0
    n_times: int = 0
    fitted_rate: float = 0.0

    @property
    def rate_ratio(self) -> float:
        return self.fitted_rate / self.kappa


def drift_check(stat: WilsonStatistic, times, phi_samples, phi0: float) -> DriftReport:
    """Compare sample means of Phi(eta_t) with e^{-kappa t} phi0.

    phi_samples has one row per trajectory and one column per sample time.
    The decay rate is fitted by least squares on log of the positive means.
    """
    times = np.asarray(times, dtype=float)
    phi_samples = np.asarray(phi_samples, dtype=float)
    n_traj = phi_samples.shape[0]
    means = phi_samples.mean(axis=0)
    se = phi_samples.std(axis=0, ddof=1) / math.sqrt(n_traj)
    pred = phi0 * np.exp(-stat.kappa * times)
    within = np.abs(means - pred) <= 3.0 * np.maximum(se, 1e-12)
    # fit only where the signal is well above noise
    usable = means > 5.0 * np.maximum(se, 1e-12)
    if usable.sum() >= 2:
        coef = np.polyfit(times[usable], np.log(means[usable]), 1)
        rate = -float(coef[0])
    else:
        rate = float("nan")
    return DriftReport(
        L=stat.L,
        kappa=stat.kappa,
        times=times,
        means=means,
        std_errors=se,
        predicted=pred,
        n_within_3se=int(within.sum()),
        n_times=len(times),
        fitted_rate=rate,
    )


@dataclass
class VarianceReport:
    """sup over sample times of Var(Phi(eta_t)) / L^3, with its CI."""

    L: int
    sup_ratio: float
    sup_ratio_hi: float
    variance_at_zero: float
    times: np.ndarray = field(repr=False)
    ratios: np.ndarray = field(repr=False)


def variance_check(stat: WilsonStatistic, times, phi_samples) -> VarianceReport:
    """Empirical Var(Phi)/L^3 over the time grid, start deterministic.

    The upper CI edge uses the chi-square-free normal approximation
    var * (1 + 3*sqrt(2/n)).
    """
    times = np.asarray(times, dtype=float)
    phi_samples = np.asarray(phi_samples, dtype=float)
    n_traj = phi_samples.shape[0]
    var = phi_samples.var(axis=0, ddof=1)
    l3 = float(stat.L) ** 3
    ratios = var / l3
    infl = 1.0 + 3.0 * math.sqrt(2.0 / n_traj)
    i0 = int(np.argmin(times))
    return VarianceReport(
        L=stat.L,
        sup_ratio=float(ratios.max()),
        sup_ratio_hi=float(ratios.max() * infl),
        variance_at_zero=float(var[i0]) if times[i0] == 0 else float("nan"),
        times=times,
        ratios=ratios,
    )


# ---------------------------------------------------------------------------
# Lower-bound time
# ---------------------------------------------------------------------------

@dataclass
class LowerBoundReport:
    L: int
    d: int
    kappa: float
    phi_star: float
    C0: float
    eps: float
    T_lb: float

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "d": self.d,
            "kappa": self.kappa,
            "phi_star": self.phi_star,
            "C0": self.C0,
            "eps": self.eps,
            "T_lb": self.T_lb,
        }


def lower_bound_time(L: int, d: int, C0: float, stat: WilsonStatistic | None = None) -> LowerBoundReport:
    """T such that the drifted mean still clears twice the deviation scale.

    With eps = 1/(4 C0), T solves e^{-kappa T} Phi(tent) = 2 sqrt(L^3/eps);
    below that time the distribution started from the tent keeps most of its
    mass on {Phi >= sqrt(L^3/eps)} while equilibrium puts at most C0*eps
    there.  Clamped at 0 when the argument of the log is not > 1.
    """
    if C0 <= 0:
        raise ValueError("C0 must be positive")
    if stat is None:
        stat = WilsonStatistic.for_length(L)
    eps = 1.0 / (4.0 * C0)
    p = phi_star(L)
    arg = math.sqrt(eps) * p / (2.0 * L ** 1.5)
    T = max(0.0, math.log(arg) / stat.kappa) if arg > 0 else 0.0
    return LowerBoundReport(
        L=L, d=d, kappa=stat.kappa, phi_star=p, C0=C0, eps=eps, T_lb=T
    )

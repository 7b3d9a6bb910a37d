"""Event-driven continuous-time Monte Carlo for the polymer dynamics.

Gillespie scheme: exponential holding times with total rate L - 1, a
uniformly chosen update site, and the heat-bath move at that site.  Each
trajectory consumes its own counter-based random stream keyed by
(master_seed, trajectory id), so runs are reproducible under any
scheduling.  The hot loop is compiled with numba; uniforms are drawn in
blocks by the Python driver and refilled when the kernel runs out.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import InvalidPathError
from .paths import PolymerPath, enumerate_state_space, extremal_path

_FNV_OFFSET = np.uint64(1469598103934665603)
_FNV_PRIME = np.uint64(1099511628211)


@njit(cache=True)
def _state_hash(z):
    h = _FNV_OFFSET
    for x in range(z.shape[0]):
        h = (h ^ np.uint64(z[x])) * _FNV_PRIME
    return h


@njit(cache=True)
def _phi_of(z, g, d):
    """Phi = sum_x g_x h_x, recomputed from scratch (no drift accumulation)."""
    hh = 0
    phi = 0.0
    for x in range(z.shape[0] - 1):
        zz = z[x]
        if zz == 0:
            hh += 1
        elif zz == d:
            hh -= 1
        phi += g[x] * hh
    return phi


@njit(cache=True)
def _advance(z, counts, tstate, istate, rnd, sample_times, g, out_phi, out_counts, out_hash, d):
    """Run events until all sample times are emitted or rnd is exhausted.

    Returns 1 if the caller must refill rnd and call again, 0 when done.
    Samples are emitted with the state held constant between events.
    """
    L = z.shape[0]
    base = 2 * d
    lam = L - 1.0
    t = tstate[0]
    ptr = istate[0]
    n_s = sample_times.shape[0]
    n_rnd = rnd.shape[0]
    k = 0
    while True:
        if k + 3 > n_rnd:
            tstate[0] = t
            istate[0] = ptr
            return 1
        t_next = t - math.log(rnd[k]) / lam
        while ptr < n_s and sample_times[ptr] < t_next:
            out_phi[ptr] = _phi_of(z, g, d)
            for j in range(d):
                out_counts[ptr, j] = counts[j]
            out_hash[ptr] = _state_hash(z)
            ptr += 1
        if ptr >= n_s:
            tstate[0] = t
            istate[0] = ptr
            return 0
        x = 1 + int(rnd[k + 1] * lam)
        if x > L - 1:
            x = L - 1
        a = z[x - 1]
        b = z[x]
        if b == (a + d) % base:
            j = int(rnd[k + 2] * base)
            if j >= base:
                j = base - 1
            z[x - 1] = j
            z[x] = (j + d) % base
            counts[a % d] -= 1
            counts[j % d] += 1
        elif rnd[k + 2] < 0.5:
            z[x - 1] = b
            z[x] = a
        t = t_next
        k += 3


@njit(cache=True)
def _advance_equilibrium(z, counts, tstate, istate, rnd, burn_time, thin_events, out_states, d):
    """Burn in to burn_time, then store the state every thin_events events."""
    L = z.shape[0]
    base = 2 * d
    lam = L - 1.0
    t = tstate[0]
    since = istate[0]
    got = istate[1]
    n_out = out_states.shape[0]
    n_rnd = rnd.shape[0]
    k = 0
    while True:
        if k + 3 > n_rnd:
            tstate[0] = t
            istate[0] = since
            istate[1] = got
            return 1
        t_next = t - math.log(rnd[k]) / lam
        x = 1 + int(rnd[k + 1] * lam)
        if x > L - 1:
            x = L - 1
        a = z[x - 1]
        b = z[x]
        if b == (a + d) % base:
            j = int(rnd[k + 2] * base)
            if j >= base:
                j = base - 1
            z[x - 1] = j
            z[x] = (j + d) % base
            counts[a % d] -= 1
            counts[j % d] += 1
        elif rnd[k + 2] < 0.5:
            z[x - 1] = b
            z[x] = a
        t = t_next
        k += 3
        if t >= burn_time:
            since += 1
            if since >= thin_events:
                since = 0
                for y in range(L):
                    out_states[got, y] = z[y]
                got += 1
                if got >= n_out:
                    tstate[0] = t
                    istate[0] = since
                    istate[1] = got
                    return 0


# ---------------------------------------------------------------------------
# Configuration and records
# ---------------------------------------------------------------------------

@dataclass
class SimConfig:
    L: int
    d: int
    t_max: float
    sample_times: np.ndarray
    n_trajectories: int
    master_seed: int
    observables: tuple = ("phi", "counts", "state_hash")

    def __post_init__(self):
        st = np.asarray(self.sample_times, dtype=float)
        if np.any(np.diff(st) < 0):
            raise ValueError("sample_times must be sorted")
        if st.size and (st[0] < 0 or st[-1] > self.t_max):
            raise ValueError("sample_times must lie in [0, t_max]")
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be >= 1")
        self.sample_times = st


@dataclass
class TrajectoryRecord:
    traj_id: int
    seed: tuple
    times: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    state_hash: np.ndarray = field(repr=False)


def _counts_of_z(z: np.ndarray, d: int) -> np.ndarray:
    return np.array([(z == j).sum() for j in range(d)], dtype=np.int64)


def _sine_weights(L: int) -> np.ndarray:
    return np.sin(np.pi * np.arange(1, L) / L)


def _stream(master_seed: int, traj_id: int) -> np.random.Generator:
    key = np.array([master_seed, traj_id], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def simulate(config: SimConfig, initial: PolymerPath) -> list[TrajectoryRecord]:
    """Run n_trajectories independent chains from `initial`.

    Each record carries Phi, particle counts and a state hash at every
    sample time.  Identical (config, master_seed) gives identical records.
    """
    if initial.L != config.L or initial.d != config.d:
        raise InvalidPathError("initial path does not match config dimensions")
    L, d = config.L, config.d
    g = _sine_weights(L)
    st = config.sample_times
    n_s = st.shape[0]
    block = max(4096, int(3.6 * (L - 1) * config.t_max) + 64)
    z_init = np.array(initial.increments, dtype=np.int8)
    records = []
    for tid in range(config.n_trajectories):
        rng = _stream(config.master_seed, tid)
        z = z_init.copy()
        counts = _counts_of_z(z, d)
        tstate = np.zeros(1)
        istate = np.zeros(1, dtype=np.int64)
        out_phi = np.zeros(n_s)
        out_counts = np.zeros((n_s, d), dtype=np.int64)
        out_hash = np.zeros(n_s, dtype=np.uint64)
        while _advance(z, counts, tstate, istate, rng.random(block), st, g, out_phi, out_counts, out_hash, d):
            pass
        records.append(
            TrajectoryRecord(
                traj_id=tid,
                seed=(config.master_seed, tid),
                times=st.copy(),
                phi=out_phi,
                counts=out_counts,
                state_hash=out_hash,
            )
        )
    return records


def phi_matrix(records: list[TrajectoryRecord]) -> np.ndarray:
    """(n_traj, n_times) array of Phi samples."""
    return np.stack([r.phi for r in records])


def write_trajectories_csv(records: list[TrajectoryRecord], fh) -> None:
    """CSV rows (traj_id, t, phi, N_1..N_d, state_hash)."""
    d = records[0].counts.shape[1]
    w = csv.writer(fh)
    w.writerow(["traj_id", "t", "phi"] + [f"N_{j + 1}" for j in range(d)] + ["state_hash"])
    for r in records:
        for i, t in enumerate(r.times):
            w.writerow(
                [r.traj_id, repr(float(t)), repr(float(r.phi[i]))]
                + [int(c) for c in r.counts[i]]
                + [int(r.state_hash[i])]
            )


# ---------------------------------------------------------------------------
# Equilibrium sampling
# ---------------------------------------------------------------------------

def _balanced_initial(L: int, d: int) -> np.ndarray:
    """Any valid state: particle/anti-particle runs with near-equal counts."""
    per = [L // (2 * d)] * d
    for j in range(L // 2 - sum(per)):
        per[j % d] += 1
    z = []
    for j, n in enumerate(per):
        z.extend([j] * n + [j + d] * n)
    return np.array(z, dtype=np.int8)


def equilibrium_sample(L: int, d: int, n_samples: int, seed: int) -> np.ndarray:
    """(n_samples, L) int8 increment vectors approximately uniform on states.

    Small systems (L <= 10, d <= 2) are sampled exactly by uniform state
    index.  Larger ones use one long run: burn-in 10 L^2 log L time units,
    then one sample every L^2 events.
    """
    rng = _stream(seed, 0)
    if L <= 10 and d <= 2:
        index = enumerate_state_space(L, d)
        picks = rng.integers(len(index), size=n_samples)
        from .paths import digits_of

        return digits_of(index.codes[picks], L, d)
    z = _balanced_initial(L, d)
    counts = _counts_of_z(z, d)
    tstate = np.zeros(1)
    istate = np.zeros(2, dtype=np.int64)
    out = np.zeros((n_samples, L), dtype=np.int8)
    burn = 10.0 * L * L * math.log(L)
    thin = L * L
    block = 1 << 22
    while _advance_equilibrium(z, counts, tstate, istate, rng.random(block), burn, thin, out, d):
        pass
    return out


def phi_of_samples(samples: np.ndarray, d: int) -> np.ndarray:
    """Phi for each increment row, vectorized."""
    L = samples.shape[1]
    g = _sine_weights(L)
    step = (samples == 0).astype(np.int64) - (samples == d).astype(np.int64)
    h = np.cumsum(step[:, :-1], axis=1)
    return h @ g


# ---------------------------------------------------------------------------
# TV lower bound estimation
# ---------------------------------------------------------------------------

@dataclass
class TvLowerReport:
    """P(Phi_T >= a from the tent) minus the equilibrium tail, with CI.

    The difference of the two probabilities lower-bounds the TV distance at
    time T; ci_lower_95 is the one-sided 95% lower confidence edge.
    """

    L: int
    d: int
    T: float
    a: float
    p_hat: float
    q_hat: float
    estimate: float
    std_error: float
    ci_lower_95: float
    n_traj: int
    n_eq: int
    seed: int

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "d": self.d,
            "T": self.T,
            "a": self.a,
            "p_hat": self.p_hat,
            "q_hat": self.q_hat,
            "estimate": self.estimate,
            "std_error": self.std_error,
            "ci_lower_95": self.ci_lower_95,
            "n_traj": self.n_traj,
            "n_eq": self.n_eq,
            "seed": self.seed,
        }


def tv_lower_estimate(
    L: int,
    d: int,
    T: float,
    a: float,
    n_traj: int,
    seed: int,
    n_eq: int | None = None,
) -> TvLowerReport:
    """Estimate P(Phi_T >= a | tent start) - mu(Phi >= a)."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    n_eq = n_eq or n_traj
    cfg = SimConfig(
        L=L,
        d=d,
        t_max=T,
        sample_times=np.array([T]),
        n_trajectories=n_traj,
        master_seed=seed,
    )
    recs = simulate(cfg, extremal_path(L, d))
    phis = phi_matrix(recs)[:, 0]
    p_hat = float((phis >= a).mean())
    eq = equilibrium_sample(L, d, n_eq, seed + 1)
    q_hat = float((phi_of_samples(eq, d) >= a).mean())
    se = math.sqrt(p_hat * (1 - p_hat) / n_traj + q_hat * (1 - q_hat) / n_eq)
    est = p_hat - q_hat
    return TvLowerReport(
        L=L,
        d=d,
        T=T,
        a=a,
        p_hat=p_hat,
        q_hat=q_hat,
        estimate=est,
        std_error=se,
        ci_lower_95=est - 1.645 * se,
        n_traj=n_traj,
        n_eq=n_eq,
        seed=seed,
    )

"""Pinned directed-polymer configurations and their elementary heat-bath moves.

A configuration of length L in transverse dimension d is stored as its
increment vector: L codes in {0, ..., 2d-1}, where code j < d means a step
+e_{j+1} and code j >= d means a step -e_{j-d+1}.  Validity requires the
steps of every direction to balance, so the path returns to the origin.

States are also identified with integers ("codes") by reading the increment
vector as an L-digit number in base 2d, most significant digit first.  With
this convention numeric order of codes equals lexicographic order of
increment strings, which fixes a canonical enumeration order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CapacityError, InvalidPathError

# Enumeration guards: number of valid states kept in memory, and size of the
# raw base-(2d) code space swept during enumeration.
DEFAULT_STATE_BUDGET = 2_000_000
CODE_SPACE_BUDGET = 1 << 28


def _unit_step(code: int, d: int) -> tuple[int, ...]:
    """The increment as a d-vector, e.g. code d+1 -> -e_2."""
    v = [0] * d
    if code < d:
        v[code] = 1
    else:
        v[code - d] = -1
    return tuple(v)


@dataclass(frozen=True)
class PolymerPath:
    """An immutable pinned path, stored by its increment codes."""

    L: int
    d: int
    increments: tuple[int, ...]

    def __post_init__(self):
        if self.L <= 0 or self.L % 2 != 0:
            raise InvalidPathError(f"L must be even and positive, got {self.L}")
        if self.d < 1:
            raise InvalidPathError(f"d must be >= 1, got {self.d}")
        if len(self.increments) != self.L:
            raise InvalidPathError(
                f"expected {self.L} increments, got {len(self.increments)}"
            )
        base = 2 * self.d
        net = [0] * self.d
        for z in self.increments:
            if not 0 <= z < base:
                raise InvalidPathError(f"increment code {z} out of range 0..{base - 1}")
            if z < self.d:
                net[z] += 1
            else:
                net[z - self.d] -= 1
        if any(net):
            raise InvalidPathError(f"unbalanced increments, net displacement {net}")

    @property
    def code(self) -> int:
        """Integer encoding; numeric order is lexicographic order."""
        base = 2 * self.d
        c = 0
        for z in self.increments:
            c = c * base + z
        return c

    @classmethod
    def from_code(cls, code: int, L: int, d: int) -> "PolymerPath":
        base = 2 * d
        zs = []
        for _ in range(L):
            code, z = divmod(code, base)
            zs.append(z)
        return cls(L, d, tuple(reversed(zs)))

    def heights(self) -> list[tuple[int, ...]]:
        """The pinned path eta_0 .. eta_L, eta_0 = eta_L = origin."""
        pos = [0] * self.d
        out = [tuple(pos)]
        for z in self.increments:
            step = _unit_step(z, self.d)
            pos = [p + s for p, s in zip(pos, step)]
            out.append(tuple(pos))
        return out

    def first_coordinate_heights(self) -> np.ndarray:
        """h_x = eta_x . e_1 for x = 0..L, as an int array."""
        h = np.zeros(self.L + 1, dtype=np.int64)
        acc = 0
        for x, z in enumerate(self.increments, start=1):
            if z == 0:
                acc += 1
            elif z == self.d:
                acc -= 1
            h[x] = acc
        return h

    def to_string(self) -> str:
        """Canonical text encoding: one letter per increment, A = code 0."""
        return "".join(chr(ord("A") + z) for z in self.increments)

    @classmethod
    def from_string(cls, s: str, d: int) -> "PolymerPath":
        return cls(len(s), d, tuple(ord(ch) - ord("A") for ch in s))


def gradient(heights) -> PolymerPath:
    """Increment vector of a height sequence eta_0..eta_L.

    Accepts points as length-d tuples/lists (or plain ints when d = 1).
    Raises InvalidPathError on non-unit steps or nonzero endpoints.
    """
    pts = [np.atleast_1d(np.asarray(p, dtype=np.int64)) for p in heights]
    L = len(pts) - 1
    if L < 2:
        raise InvalidPathError("need at least 3 points eta_0..eta_L")
    d = pts[0].shape[0]
    if np.any(pts[0]) or np.any(pts[-1]):
        raise InvalidPathError("path endpoints must both be at the origin")
    codes = []
    for x in range(1, L + 1):
        step = pts[x] - pts[x - 1]
        if np.sum(np.abs(step)) != 1:
            raise InvalidPathError(f"non-unit step at site {x}: {step}")
        j = int(np.nonzero(step)[0][0])
        codes.append(j if step[j] == 1 else j + d)
    return PolymerPath(L, d, tuple(codes))


def integrate(path: PolymerPath) -> list[tuple[int, ...]]:
    """Inverse of gradient: reconstruct the height sequence."""
    return path.heights()


def particle_counts(path: PolymerPath) -> tuple[int, ...]:
    """N_j = number of sites carrying a +e_j increment; sums to L/2."""
    counts = [0] * path.d
    for z in path.increments:
        if z < path.d:
            counts[z] += 1
    return tuple(counts)


def heat_bath_candidates(path: PolymerPath, x: int) -> list[tuple[PolymerPath, float]]:
    """Resampling candidates for eta_x, x in 1..L-1, with their probabilities.

    If the neighbours eta_{x-1}, eta_{x+1} differ, the update keeps or swaps
    the increment pair (1/2 each).  If they coincide the pair is a
    particle/anti-particle pair and is regenerated as (e_j, -e_j) for a
    uniform j among the 2d types.  The identity candidate is kept explicitly
    so the probabilities always sum to one.
    """
    if not 1 <= x <= path.L - 1:
        raise ValueError(f"site {x} out of range 1..{path.L - 1}")
    d = path.d
    base = 2 * d
    a, b = path.increments[x - 1], path.increments[x]
    zs = list(path.increments)
    out = []
    if b == (a + d) % base:
        # eta_{x-1} == eta_{x+1}: regenerate the pair
        for j in range(base):
            zs[x - 1], zs[x] = j, (j + d) % base
            out.append((PolymerPath(path.L, d, tuple(zs)), 1.0 / base))
    else:
        out.append((path, 0.5))
        zs[x - 1], zs[x] = b, a
        out.append((PolymerPath(path.L, d, tuple(zs)), 0.5))
    return out


def extremal_path(L: int, d: int = 1) -> PolymerPath:
    """The tent configuration along e_1: rises for L/2 steps, then descends."""
    if L % 2 != 0 or L <= 0:
        raise InvalidPathError(f"L must be even and positive, got {L}")
    return PolymerPath(L, d, tuple([0] * (L // 2) + [d] * (L // 2)))


def type_permutation_image(path: PolymerPath, perm) -> PolymerPath:
    """Relabel particle types: perm maps type index 0..d-1 to its image."""
    d = path.d
    zs = tuple(
        perm[z] if z < d else perm[z - d] + d for z in path.increments
    )
    return PolymerPath(path.L, d, zs)


# ---------------------------------------------------------------------------
# Vectorised helpers on arrays of codes
# ---------------------------------------------------------------------------

def digits_of(codes: np.ndarray, L: int, d: int) -> np.ndarray:
    """(n, L) int8 array of increment codes, site 1 in column 0."""
    base = 2 * d
    out = np.empty((codes.shape[0], L), dtype=np.int8)
    for x in range(L):
        out[:, x] = (codes // base ** (L - 1 - x)) % base
    return out


def counts_of_codes(codes: np.ndarray, L: int, d: int) -> np.ndarray:
    """(n, d) int16 particle-count matrix for an array of codes."""
    dig = digits_of(codes, L, d)
    counts = np.empty((codes.shape[0], d), dtype=np.int16)
    for j in range(d):
        counts[:, j] = (dig == j).sum(axis=1)
    return counts


def first_coord_height_profile(codes: np.ndarray, L: int, d: int) -> np.ndarray:
    """(n, L+1) int16 array of h_x = eta_x . e_1 for each code."""
    dig = digits_of(codes, L, d)
    h = np.zeros((codes.shape[0], L + 1), dtype=np.int16)
    step = (dig == 0).astype(np.int16) - (dig == d).astype(np.int16)
    np.cumsum(step, axis=1, out=h[:, 1:])
    return h


@dataclass
class StateIndex:
    """Canonical enumeration of the state space: sorted code array plus L, d.

    Immutable after construction; index i corresponds to the i-th code in
    increasing (= lexicographic) order.
    """

    L: int
    d: int
    codes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return int(self.codes.shape[0])

    def index_of(self, state) -> int:
        code = state.code if isinstance(state, PolymerPath) else int(state)
        i = int(np.searchsorted(self.codes, code))
        if i >= len(self) or int(self.codes[i]) != code:
            raise KeyError(f"code {code} is not an enumerated state")
        return i

    def path_at(self, i: int) -> PolymerPath:
        return PolymerPath.from_code(int(self.codes[i]), self.L, self.d)

    def indices_of_codes(self, codes: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.codes, codes)
        if np.any(self.codes[idx] != codes):
            raise KeyError("some codes are not enumerated states")
        return idx

    @cached_property
    def counts(self) -> np.ndarray:
        """(n, d) particle-count matrix, row order = state order."""
        return counts_of_codes(self.codes, self.L, self.d)

    @cached_property
    def height_profiles(self) -> np.ndarray:
        """(n, L+1) first-coordinate height profiles."""
        return first_coord_height_profile(self.codes, self.L, self.d)


def enumerate_state_space(
    L: int, d: int, max_states: int = DEFAULT_STATE_BUDGET
) -> StateIndex:
    """Enumerate all valid states in canonical order.

    Sweeps the full base-(2d) code space in chunks and keeps balanced
    increment vectors.  Raises CapacityError if either the code space or the
    number of states exceeds its budget (never truncates silently).
    """
    if L % 2 != 0 or L <= 0:
        raise InvalidPathError(f"L must be even and positive, got {L}")
    base = 2 * d
    total = base ** L
    if total > CODE_SPACE_BUDGET:
        raise CapacityError(
            f"code space (2d)^L = {total} exceeds budget {CODE_SPACE_BUDGET}"
        )
    powers = np.array([base ** (L - 1 - x) for x in range(L)], dtype=np.int64)
    kept = []
    n_kept = 0
    chunk = 1 << 22
    for lo in range(0, total, chunk):
        arr = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        net = np.zeros((arr.shape[0], d), dtype=np.int16)
        for x in range(L):
            dig = (arr // powers[x]) % base
            for j in range(d):
                net[:, j] += (dig == j).astype(np.int16)
                net[:, j] -= (dig == j + d).astype(np.int16)
        good = arr[np.all(net == 0, axis=1)]
        n_kept += good.shape[0]
        if n_kept > max_states:
            raise CapacityError(
                f"state count exceeds budget {max_states} at (L={L}, d={d})"
            )
        kept.append(good)
    codes = np.concatenate(kept) if kept else np.empty(0, dtype=np.int64)
    return StateIndex(L=L, d=d, codes=codes)

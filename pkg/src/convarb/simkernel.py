"""Seedable stochastic primitives on a time grid.

Every random routine takes an integer ``seed`` and an optional ``path_index``;
the pair is hashed into an independent generator (``numpy.random.SeedSequence``)
so that path ``i`` of a batch is identical no matter how the batch is split
across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from . import kernels
from .errors import DomainError

__all__ = [
    "TimeGrid",
    "IncrementPath",
    "JumpMarkedPath",
    "make_grid",
    "path_rng",
    "brownian_increments",
    "brownian_bridge_increments",
    "ou_path",
    "doleans_exponential",
    "sample_default_time",
    "first_passage",
    "normal_matrix",
]

# relative distance under which an event time is merged into an existing grid point
_MERGE_RTOL = 8 * np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class TimeGrid:
    points: np.ndarray
    horizon: float
    event_times: tuple = ()

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n_steps(self) -> int:
        return len(self.points) - 1

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.points)

    def index_of(self, t: float) -> int:
        """Index of the grid point equal to ``t`` (within merge tolerance)."""
        i = int(np.argmin(np.abs(self.points - t)))
        if abs(self.points[i] - t) > _MERGE_RTOL * max(self.horizon, 1.0) * 4:
            raise DomainError(f"time {t} is not a grid point")
        return i

    def same_as(self, other: "TimeGrid") -> bool:
        return self is other or (
            len(self.points) == len(other.points) and bool(np.array_equal(self.points, other.points))
        )


@dataclass(frozen=True, eq=False)
class IncrementPath:
    """Increments on a grid.

    ``levels`` optionally stores the running path itself. Pinned paths keep
    it so that ``cumulative()`` returns the pin exactly; a float running sum
    of the increments can miss it by rounding.
    """

    grid: TimeGrid
    values: np.ndarray
    levels: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_steps,):
            raise DomainError(f"expected {self.grid.n_steps} increments, got shape {v.shape}")
        object.__setattr__(self, "values", v)
        if self.levels is not None:
            lv = np.asarray(self.levels, dtype=float)
            if lv.shape != (self.grid.n_steps + 1,) or lv[0] != 0.0:
                raise DomainError("levels must start at 0 and have one entry per grid point")
            object.__setattr__(self, "levels", lv)

    def cumulative(self) -> np.ndarray:
        if self.levels is not None:
            return self.levels.copy()
        return np.concatenate(([0.0], np.cumsum(self.values)))


@dataclass(frozen=True, eq=False)
class JumpMarkedPath:
    """Increments split into a continuous part and marked jumps.

    ``jumps`` is a list of ``(step index, jump size)``; a jump at step ``i``
    happens at the right end of the cell ``(t_i, t_{i+1}]``.
    """

    grid: TimeGrid
    continuous_part: IncrementPath
    jumps: list = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for i, _ in self.jumps:
            if not 0 <= i < self.grid.n_steps:
                raise DomainError(f"jump index {i} outside grid")
            if i in seen:
                raise DomainError(f"two jumps at step {i}")
            seen.add(i)

    @classmethod
    def from_arrays(cls, grid, continuous, jump_array):
        jump_array = np.asarray(jump_array, dtype=float)
        jumps = [(int(i), float(jump_array[i])) for i in np.flatnonzero(jump_array)]
        return cls(grid, IncrementPath(grid, continuous), jumps)

    def jump_array(self) -> np.ndarray:
        out = np.zeros(self.grid.n_steps)
        for i, s in self.jumps:
            out[i] = s
        return out

    def total(self) -> np.ndarray:
        return self.continuous_part.values + self.jump_array()


def make_grid(horizon: float, n_steps: int, event_times: Sequence[float] = ()) -> TimeGrid:
    """Uniform grid on ``[0, horizon]`` with ``event_times`` merged in."""
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    if int(n_steps) != n_steps or n_steps < 1:
        raise DomainError("n_steps must be a positive integer")
    n_steps = int(n_steps)
    base = horizon * np.arange(n_steps + 1) / n_steps
    base[-1] = horizon
    tol = _MERGE_RTOL * horizon
    pts = list(base)
    events = []
    for t in event_times:
        t = float(t)
        if not (0.0 < t <= horizon):
            raise DomainError(f"event time {t} outside (0, {horizon}]")
        j = int(np.argmin(np.abs(base - t)))
        if abs(base[j] - t) <= tol:
            events.append(float(base[j]))
            continue
        pts.append(t)
        events.append(t)
    pts = np.unique(np.asarray(pts))
    # collapse event times that coincide with each other
    keep = np.concatenate(([True], np.diff(pts) > tol))
    pts = pts[keep]
    return TimeGrid(pts, float(horizon), tuple(sorted(set(events))))


def path_rng(seed: int, path_index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(path_index)]))


def normal_matrix(n_drivers: int, n: int, seed: int, n_paths: int, start: int = 0) -> np.ndarray:
    """Standard normals of shape ``(n_drivers, n_paths, n)``; row ``j`` uses path ``start + j``."""
    out = np.empty((n_drivers, n_paths, n))
    for j in range(n_paths):
        out[:, j, :] = path_rng(seed, start + j).standard_normal((n_drivers, n))
    return out


def brownian_increments(grid: TimeGrid, seed: int, path_index: int = 0) -> IncrementPath:
    z = path_rng(seed, path_index).standard_normal(grid.n_steps)
    return IncrementPath(grid, z * np.sqrt(grid.dt))


def brownian_bridge_increments(grid: TimeGrid, terminal_value: float, seed: int,
                               path_index: int = 0) -> IncrementPath:
    """Increments of a Brownian path pinned to ``terminal_value`` at the horizon."""
    dW = brownian_increments(grid, seed, path_index).values
    t = grid.points
    W = np.concatenate(([0.0], np.cumsum(dW)))
    B = W - (t / grid.horizon) * (W[-1] - terminal_value)
    B[-1] = terminal_value
    return IncrementPath(grid, np.diff(B), levels=B)


def ou_path(grid: TimeGrid, drift_coeff: float, driving: IncrementPath, initial: float = 0.0) -> np.ndarray:
    """Euler solution of ``dW = drift_coeff * W dt + d(driving)``."""
    if not driving.grid.same_as(grid):
        raise DomainError("driving increments live on a different grid")
    return kernels.ou_euler(initial, drift_coeff, grid.dt, driving.values)


def doleans_exponential(z: JumpMarkedPath, qv_continuous: IncrementPath) -> np.ndarray:
    """Stochastic exponential of ``z`` at the grid points.

    ``exp(Z^c - <Z^c>/2) * prod(1 + dZ)`` over the marked jumps. A jump of
    exactly -1 absorbs the path at 0; jumps below -1 flip its sign.
    """
    if not qv_continuous.grid.same_as(z.grid):
        raise DomainError("quadratic variation lives on a different grid")
    if np.any(qv_continuous.values < 0):
        raise DomainError("quadratic variation increments must be nonnegative")
    return kernels.doleans(z.continuous_part.values, qv_continuous.values, z.jump_array())


def sample_default_time(intensity: Callable[[float], float] | float, horizon: float, seed: int,
                        path_index: int = 0) -> float | None:
    """First jump time of a Poisson clock with the given intensity, or None past ``horizon``."""
    e = path_rng(seed, path_index).exponential()
    if np.isscalar(intensity):
        lam = float(intensity)
        if lam < 0:
            raise DomainError("intensity must be nonnegative")
        if lam == 0 or e / lam > horizon:
            return None
        return e / lam
    probe = np.linspace(0.0, horizon, 257)
    if any(intensity(s) < 0 for s in probe):
        raise DomainError("intensity must be nonnegative")

    def cum(t):
        return integrate.quad(intensity, 0.0, t, limit=200)[0]

    if cum(horizon) < e:
        return None
    return optimize.brentq(lambda t: cum(t) - e, 0.0, horizon, xtol=1e-14 * max(horizon, 1.0))


def _cross_prob(a, c, dv, level):
    if a >= level or c >= level:
        return 1.0
    if dv <= 0:
        return 0.0
    return math.exp(-2.0 * (level - a) * (level - c) / dv)


def _locate(a, c, dv, level, rng, resolution, max_depth=64):
    # crossing of `level` is known to happen inside (0, dv]; bisect with bridge midpoints
    offset = 0.0
    for _ in range(max_depth):
        if dv <= resolution:
            break
        half = 0.5 * dv
        while True:
            m = 0.5 * (a + c) + math.sqrt(0.25 * dv) * rng.standard_normal()
            pl = _cross_prob(a, m, half, level)
            pr = _cross_prob(m, c, half, level)
            p_any = 1.0 - (1.0 - pl) * (1.0 - pr)
            if rng.random() < p_any:
                break
        if rng.random() * p_any < pl:
            c, dv = m, half
        else:
            a, dv, offset = m, half, offset + half
    return offset + 0.5 * dv


def first_passage(values: np.ndarray, variance_times: np.ndarray, level: float,
                  rng: np.random.Generator, resolution: float = 1e-14):
    """First time a Brownian path sampled at ``values`` reaches ``level``.

    The path between samples is a Brownian bridge in the variance clock
    ``variance_times``; the passage is located by recursive bridge bisection to
    ``resolution`` (relative to the total variance). Returns
    ``(cell index, variance time)`` or None when the level is not reached.
    """
    res = resolution * max(float(variance_times[-1]), 1e-300)
    for i in range(len(values) - 1):
        a, c = float(values[i]), float(values[i + 1])
        v0, dv = float(variance_times[i]), float(variance_times[i + 1] - variance_times[i])
        if a >= level:
            return i, v0
        if c < level and rng.random() >= _cross_prob(a, c, dv, level):
            continue
        s = _locate(a, c, dv, level, rng, res)
        return i, min(v0 + s, float(variance_times[i + 1]))
    return None

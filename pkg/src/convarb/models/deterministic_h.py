"""Second asset driven by the first one's Brownian motion with a deterministic loading.

``X = X0 + M`` with ``M`` a Brownian motion, and

    dY = M f dt + h dM,   h(t) = 1 + exp(r t) - exp(r T),   f(t) = -r exp(r t).

``h`` is negative on ``[0, log(exp(rT) - 1)/r]`` when ``exp(rT) > 2``, and the
drift is positive whenever ``M < 0``. There is no second martingale. Both
prices are stopped when either reaches 0.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..simkernel import make_grid, normal_matrix
from .base import DecomposedPath, assemble, require

__all__ = ["model_deterministic_h", "negative_h_end", "h_loading"]


def h_loading(r: float, t, horizon: float):
    return 1.0 + np.exp(r * np.asarray(t, dtype=float)) - np.exp(r * horizon)


def negative_h_end(r: float, horizon: float) -> float | None:
    """End of the interval where ``h < 0``, or None when ``h`` never goes negative."""
    e = np.exp(r * horizon)
    if e <= 2.0:
        return None
    return float(np.log(e - 1.0) / r)


def model_deterministic_h(r: float = 1.0, horizon: float = 1.5, X0: float = 10.0, Y0: float = 10.0,
                          n_steps: int = 300, seed: int = 0, path_index: int = 0,
                          n_paths: int | None = None) -> DecomposedPath:
    require(r > 0, "r must be positive")
    require(horizon > 0, "horizon must be positive")
    require(X0 > 0 and Y0 > 0, "initial prices must be positive")
    single = n_paths is None
    m = 1 if single else int(n_paths)
    require(m >= 1, "n_paths must be at least 1")
    grid = make_grid(horizon, n_steps)
    dt = grid.dt
    t = grid.points[:-1]
    dB = normal_matrix(1, n_steps, seed, m, path_index)[0] * np.sqrt(dt)
    M = np.concatenate((np.zeros((m, 1)), np.cumsum(dB, axis=1)), axis=1)
    h = h_loading(r, t, horizon)
    f = -r * np.exp(r * t)
    dY_raw = M[:, :-1] * f * dt + h * dB
    frac = kernels.absorb_scan(np.full(m, X0), np.full(m, Y0), dB, dY_raw)
    dMX = frac * dB
    X = X0 + np.concatenate((np.zeros((m, 1)), np.cumsum(dMX, axis=1)), axis=1)
    Y = Y0 + np.concatenate((np.zeros((m, 1)), np.cumsum(frac * dY_raw, axis=1)), axis=1)
    zeros = np.zeros_like(dMX)
    stopped = np.where(frac[:, -1] < 1.0, np.argmin(frac == 1.0, axis=1), -1)
    meta = {"normal_form_violated": False, "r": r, "M": X - X0, "absorbed_cell": stopped,
            "batch_keys": ("M", "absorbed_cell")}
    path = assemble(grid, X, Y, fvX=zeros, dMX=dMX, h=np.broadcast_to(h, dMX.shape), dM2=zeros.copy(),
                    dQV_MX=frac * dt, dQV_M2=zeros.copy(), fvY=frac * M[:, :-1] * f * dt, model="deterministic_h",
                    events={"absorbed": stopped}, metadata=meta)
    return path.path(0) if single else path

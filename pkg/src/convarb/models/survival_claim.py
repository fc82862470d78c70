"""Survival claim ``1{tau > T}`` priced by two markets with different default intensities.

Each market sees ``tau`` as a totally inaccessible time with a constant
intensity, so ``X = 1{tau > t} exp(-lambdaX (T - t))`` and likewise ``Y`` with
``lambdaY``. Paths are simulated under the measure that makes ``X`` a
martingale (``tau`` exponential with rate ``lambdaX``); ``tau`` is inserted as a
grid point. Both prices jump to 0 at ``tau``, so the only martingale is the
compensated default indicator and ``Y``'s martingale part is ``h`` times ``X``'s.
"""

from __future__ import annotations

import numpy as np

from ..simkernel import make_grid, sample_default_time
from .base import DecomposedPath, assemble, require

__all__ = ["model_survival_claim", "survival_price"]


def survival_price(intensity: float, t, horizon: float):
    """Pre-default price ``exp(-intensity * (T - t))``."""
    return np.exp(-intensity * (horizon - np.asarray(t, dtype=float)))


def model_survival_claim(lambdaX: float = 0.1, lambdaY: float = 0.3, horizon: float = 1.0,
                         n_steps: int = 200, seed: int = 0, path_index: int = 0) -> DecomposedPath:
    require(lambdaX > 0 and lambdaY > 0, "intensities must be positive")
    require(horizon > 0, "horizon must be positive")
    tau = sample_default_time(lambdaX, horizon, seed, path_index)
    grid = make_grid(horizon, n_steps, [] if tau is None else [tau])
    t = grid.points
    alive = np.ones(len(t), dtype=bool)
    tau_idx = None
    if tau is not None:
        tau_idx = grid.index_of(tau)
        alive[tau_idx:] = False
    X = np.where(alive, survival_price(lambdaX, t, horizon), 0.0)
    Y = np.where(alive, survival_price(lambdaY, t, horizon), 0.0)

    dt = grid.dt
    live = alive[:-1]
    growX = np.exp(lambdaX * dt)
    growY = np.exp(lambdaY * dt)
    p = np.where(live, -np.expm1(-lambdaX * dt), 0.0)
    Xl, Yl = X[:-1], Y[:-1]
    dMX = np.diff(X)
    dQV_MX = (Xl * growX) ** 2 * p * (1.0 - p)
    with np.errstate(divide="ignore", invalid="ignore"):
        h_live = (Yl * growY) / (Xl * growX)
    h_dead = np.exp(-(lambdaY - lambdaX) * (horizon - t[1:]))
    h = np.where(live, h_live, h_dead)

    meta = {"normal_form_violated": False, "tau": tau, "lambdaX": lambdaX, "lambdaY": lambdaY}
    return assemble(grid, X, Y, fvX=np.zeros_like(dMX), dMX=dMX, h=h, dM2=np.zeros_like(dMX),
                    dQV_MX=dQV_MX, dQV_M2=np.zeros_like(dMX), jumpMX=np.where(live, dMX, 0.0),
                    convergence=True, model="survival_claim", events={"tau": tau_idx}, metadata=meta)

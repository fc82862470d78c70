"""Two markets pricing the same Brownian payoff under different risk attitudes.

``X = X0 + B``; ``Y`` is the price of ``X`` at the horizon under a measure
whose Girsanov kernel is an Ornstein-Uhlenbeck process ``W^Y`` driven by
``rho*B + sqrt(1-rho^2)*beta``. For the insider

    dY = h W^Y dt + h dB - sqrt(1-rho^2) (Tbar - t) dbeta,   h = 1 - rho (Tbar - t).

Both prices are stopped when either reaches 0. The horizon-dependent terms use
the fixed horizon ``Tbar``.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..simkernel import make_grid, normal_matrix
from .base import DecomposedPath, assemble, require

__all__ = ["model_risk_attitudes", "h_profile", "a2_closed_form"]


def h_profile(rho: float, t, horizon_bar: float = 2.0):
    """``h(t) = 1 - rho (Tbar - t)``."""
    return 1.0 - rho * (horizon_bar - np.asarray(t, dtype=float))


def a2_closed_form(rho: float, t, wy, horizon_bar: float = 2.0):
    """Density of the orthogonal drift against ``<M2>``: ``(h W)^+ / ((1-rho^2)(Tbar-t)^2)`` on ``h <= 0``."""
    h = h_profile(rho, t, horizon_bar)
    drift = np.maximum(h * np.asarray(wy, dtype=float), 0.0)
    return np.where(h <= 0, drift / ((1.0 - rho**2) * (horizon_bar - np.asarray(t)) ** 2), 0.0)


def model_risk_attitudes(rho: float = 0.8, X0: float = 10.0, horizon_bar: float = 2.0,
                         n_steps: int = 400, seed: int = 0, path_index: int = 0,
                         n_paths: int | None = None, wy0: float = 0.0) -> DecomposedPath:
    """Simulate one path, or ``n_paths`` paths starting at ``path_index`` as a batch.

    Path ``path_index + j`` of a batch is identical to the single path with that index.
    """
    require(-1.0 <= rho <= 1.0, "rho must lie in [-1, 1]")
    require(X0 > 0, "X0 must be positive")
    require(horizon_bar > 0, "horizon_bar must be positive")
    single = n_paths is None
    m = 1 if single else int(n_paths)
    require(m >= 1, "n_paths must be at least 1")
    grid = make_grid(horizon_bar, n_steps)
    dt = grid.dt
    t = grid.points[:-1]
    z = normal_matrix(2, n_steps, seed, m, path_index)
    dB = z[0] * np.sqrt(dt)
    dbeta = z[1] * np.sqrt(dt)
    side = np.sqrt(max(1.0 - rho * rho, 0.0))
    WY = kernels.ou_euler(np.full(m, wy0), rho, dt, rho * dB + side * dbeta)

    h = h_profile(rho, t, horizon_bar)
    m2_coef = -side * (horizon_bar - t)
    dY_raw = h * WY[:, :-1] * dt + h * dB + m2_coef * dbeta
    frac = kernels.absorb_scan(np.full(m, X0), np.full(m, X0), dB, dY_raw)

    dMX = frac * dB
    dM2 = frac * m2_coef * dbeta
    X = X0 + np.concatenate((np.zeros((m, 1)), np.cumsum(dMX, axis=1)), axis=1)
    Y = X0 + np.concatenate((np.zeros((m, 1)), np.cumsum(frac * dY_raw, axis=1)), axis=1)
    dQV_MX = frac * dt
    dQV_M2 = frac * m2_coef**2 * dt
    stopped = np.where(frac[:, -1] < 1.0, np.argmin(frac == 1.0, axis=1), -1)

    hb = np.broadcast_to(h, dMX.shape)
    meta = {"normal_form_violated": False, "rho": rho, "horizon_bar": horizon_bar, "WY": WY,
            "absorbed_cell": stopped, "batch_keys": ("WY", "absorbed_cell")}
    path = assemble(grid, X, Y, fvX=np.zeros_like(dMX), dMX=dMX, h=hb, dM2=dM2, dQV_MX=dQV_MX,
                    dQV_M2=dQV_M2, model="risk_attitudes", events={"absorbed": stopped}, metadata=meta)
    return path.path(0) if single else path

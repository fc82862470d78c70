"""Filtering model whose observation noise vanishes at the horizon.

``X = X0 + B`` is observed through ``dO = X dt + dW``; ``Y`` is the
Kalman-Bucy estimate of ``X`` until the horizon, when ``X_T`` is revealed and
``Y`` jumps to it. The gain solves ``dP/dt = 1 - P^2`` with ``P_0 = 0``. For
the insider, ``Y``'s martingale part is ``P dW`` and its drift is
``P (X - Y) dt``; the revelation jump is predictable.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..simkernel import normal_matrix
from .base import DecomposedPath, assemble, predictable_event_grid, require

__all__ = ["model_filtering", "riccati_gain"]


def riccati_gain(times, p0: float = 0.0) -> np.ndarray:
    """RK4 solution of ``dP/dt = 1 - P^2`` on the given time points."""
    times = np.asarray(times, dtype=float)
    out = np.empty(len(times))
    out[0] = p = p0

    def f(x):
        return 1.0 - x * x

    for i in range(len(times) - 1):
        s = times[i + 1] - times[i]
        k1 = f(p)
        k2 = f(p + 0.5 * s * k1)
        k3 = f(p + 0.5 * s * k2)
        k4 = f(p + s * k3)
        p = p + s * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        out[i + 1] = p
    return out


def model_filtering(horizon: float = 1.0, X0: float = 1.0, n_steps: int = 1000, seed: int = 0,
                    path_index: int = 0, n_paths: int | None = None) -> DecomposedPath:
    """Simulate one path, or a batch of ``n_paths`` paths starting at ``path_index``."""
    require(horizon > 0, "horizon must be positive")
    single = n_paths is None
    m = 1 if single else int(n_paths)
    require(m >= 1, "n_paths must be at least 1")
    grid, eff, _ = predictable_event_grid(horizon, n_steps, predictable=[horizon])
    n = grid.n_steps
    dt = np.diff(eff)
    P = riccati_gain(eff)
    z = normal_matrix(2, n, seed, m, path_index)
    z[:, :, -1] = 0.0
    dB = z[0] * np.sqrt(dt)
    dWo = z[1] * np.sqrt(dt)
    X = X0 + np.concatenate((np.zeros((m, 1)), np.cumsum(dB, axis=1)), axis=1)
    yhat, innovation = kernels.kalman_bucy(X[:, :-1], dWo, P[:-1], dt, X0)
    Y = yhat.copy()
    Y[:, -1] = X[:, -1]

    dM2 = P[:-1] * dWo
    dQV_M2 = np.broadcast_to(P[:-1] ** 2 * dt, dM2.shape).copy()
    dQV_MX = np.broadcast_to(dt, dB.shape).copy()
    jump = Y[:, -1] - Y[:, -2]
    meta = {"normal_form_violated": True, "gain": P, "innovation": innovation,
            "terminal_jump": jump, "batch_keys": ("innovation", "terminal_jump")}
    path = assemble(grid, X, Y, fvX=np.zeros_like(dB), dMX=dB, h=0.0, dM2=dM2, dQV_MX=dQV_MX,
                    dQV_M2=dQV_M2, convergence=True, model="filtering",
                    events={"reveal": np.full(m, n)}, metadata=meta)
    return path.path(0) if single else path

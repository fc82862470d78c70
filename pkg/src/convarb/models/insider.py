"""Defaultable asset ``1{tau > T} * exp(B_T - T/2)`` priced by two differently informed markets.

Market X knows ``B_T`` from the start and sees the default when it happens;
market Y watches ``B`` and knows whether the default will happen. The insider
knows ``B_T`` and ``tau`` at time 0, so ``X`` is a predictable finite-variation
process (growth, then a predictable drop at ``tau``) and ``Y`` is a Brownian
exponential carrying the Brownian-bridge drift ``(B_T - B_u)/(T - u)``.
"""

from __future__ import annotations

import numpy as np

from ..simkernel import normal_matrix, path_rng
from .base import DecomposedPath, assemble, predictable_event_grid, require

__all__ = ["model_insider_defaultable", "bridge_drift_energy"]


def model_insider_defaultable(lam: float = 0.1, horizon: float = 1.0, n_steps: int = 200,
                              seed: int = 0, path_index: int = 0) -> DecomposedPath:
    require(lam > 0, "default intensity must be positive")
    require(horizon > 0, "horizon must be positive")
    rng = path_rng(seed, path_index)
    tau = float(rng.exponential() / lam)
    BT = float(rng.standard_normal() * np.sqrt(horizon))
    predictable = [tau] if tau <= horizon else []
    grid, eff, index = predictable_event_grid(horizon, n_steps, predictable=predictable)
    n = grid.n_steps
    t = grid.points

    dW = rng.standard_normal(n) * np.sqrt(grid.dt)
    W = np.concatenate(([0.0], np.cumsum(dW)))
    B = W - (t / horizon) * (W[-1] - BT)
    B[-1] = BT
    tau_idx = None
    if predictable:
        tau_idx = index[tau]
        B[tau_idx - 1] = B[tau_idx]

    exp_T = np.exp(BT - 0.5 * horizon)
    alive = t < tau
    X = np.where(alive, np.exp(-lam * (horizon - eff)) * exp_T, 0.0)
    survives = tau > horizon
    Y = np.exp(B - 0.5 * eff) if survives else np.zeros(n + 1)

    dt_eff = np.diff(eff)
    Yl = Y[:-1]
    to_go = horizon - eff[:-1]
    drift = Yl * (BT - B[:-1]) / to_go * dt_eff
    dM2 = np.diff(Y) - drift
    dQV_M2 = Yl**2 * dt_eff
    zeros = np.zeros(n)

    meta = {"normal_form_violated": True, "tau": tau, "B_T": BT, "B": B, "lam": lam}
    return assemble(grid, X, Y, fvX=np.diff(X), dMX=zeros, h=0.0, dM2=dM2, dQV_MX=zeros.copy(),
                    dQV_M2=dQV_M2, convergence=True, model="insider_defaultable",
                    events={"tau": tau_idx}, metadata=meta)


def bridge_drift_energy(eps, n_paths: int, n_steps: int = 8192, horizon: float = 1.0, seed: int = 0,
                        start: int = 0, chunk: int = 500) -> np.ndarray:
    """Left-point sums of ``((B_T - B_u)^+ / (T - u))**2 du`` over ``[0, T - eps]``.

    Returns an array of shape ``(n_paths, len(eps))``. Every ``T - eps`` must be
    a grid point of the uniform ``n_steps`` grid.
    """
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    dt = horizon / n_steps
    stops = np.rint((horizon - eps) / dt).astype(int)
    require(np.allclose(stops * dt, horizon - eps, rtol=0, atol=1e-9 * horizon),
            "horizon - eps must fall on the grid")
    t = dt * np.arange(n_steps)
    out = np.empty((n_paths, len(eps)))
    for lo in range(0, n_paths, chunk):
        m = min(chunk, n_paths - lo)
        z = normal_matrix(1, n_steps, seed, m, start + lo)[0]
        B = np.concatenate((np.zeros((m, 1)), np.cumsum(z * np.sqrt(dt), axis=1)), axis=1)
        gap = np.maximum(B[:, -1:] - B[:, :-1], 0.0) / (horizon - t)
        cum = np.concatenate((np.zeros((m, 1)), np.cumsum(gap * gap * dt, axis=1)), axis=1)
        out[lo:lo + m] = cum[:, stops]
    return out

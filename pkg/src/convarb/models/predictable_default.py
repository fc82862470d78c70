"""Survival claim whose default time is predictable for one market only.

``tau`` is the first passage of an observed Brownian driver through a barrier,
run on a clock that makes ``tau`` exponential with rate ``lambdaY``. Market X
watches the driver and prices the claim continuously; market Y only sees the
default and prices it with constant intensity ``lambdaY``. For the insider
``Y`` is predictable with finite variation: it grows until ``tau`` and drops
to 0 at a predictable time, which a long position sold just before ``tau``
harvests without risk.
"""

from __future__ import annotations

import numpy as np

from ..simkernel import make_grid, path_rng
from ._clock import ExpHittingClock
from .base import DecomposedPath, assemble, predictable_event_grid, require
from .survival_claim import survival_price

__all__ = ["model_predictable_default_variant", "harvest_value"]


def harvest_value(lambdaY: float, tau: float, horizon: float) -> float:
    """Value gained by holding ``Y`` from 0 up to just before ``tau``."""
    return float(np.exp(-lambdaY * (horizon - tau)) - np.exp(-lambdaY * horizon))


def model_predictable_default_variant(lambdaY: float = 0.5, horizon: float = 1.0, n_steps: int = 200,
                                      barrier: float = 1.0, seed: int = 0, path_index: int = 0,
                                      mode: str = "analytic") -> DecomposedPath:
    require(lambdaY > 0, "lambdaY must be positive")
    require(horizon > 0, "horizon must be positive")
    require(barrier > 0, "barrier must be positive")
    require(mode in ("analytic", "euler"), f"unknown mode {mode!r}")
    rng = path_rng(seed, path_index)
    clk = ExpHittingClock(lambdaY, barrier)
    base = make_grid(horizon, n_steps)
    v, w = clk.sample_path(base.points, rng)

    tau = s_hit = None
    if mode == "analytic":
        hit = clk.exact_hit(v, w, rng, horizon)
        if hit is not None:
            tau, s_hit = hit
        grid, eff, index = predictable_event_grid(horizon, n_steps, predictable=[] if tau is None else [tau])
    else:
        above = np.flatnonzero(w[1:] >= barrier)
        if len(above):
            tau = float(base.points[above[0] + 1])
        grid, eff, index = base, np.array(base.points), ({} if tau is None else {tau: base.index_of(tau)})

    if s_hit is not None:
        pos = np.searchsorted(v, s_hit)
        v, w = np.insert(v, pos, s_hit), np.insert(w, pos, barrier)
    W = np.interp(clk.phi(eff), v, w)
    n_pts = len(grid.points)
    hit_mask = np.zeros(n_pts, dtype=bool)
    tau_idx = None
    if tau is not None:
        tau_idx = index[tau]
        hit_mask[tau_idx:] = True
        if mode == "analytic":
            W[eff == tau] = barrier
    remaining = clk.phi(horizon) - clk.phi(eff)
    p = np.where(hit_mask, 1.0, clk.hit_probability(W, remaining))
    slope = np.where(hit_mask, 0.0, clk.hit_probability_slope(W, remaining))

    X = 1.0 - p
    Y = np.where(hit_mask, 0.0, survival_price(lambdaY, eff, horizon))
    dMX = np.diff(X)
    dQV_MX = slope[:-1] ** 2 * np.diff(clk.phi(eff))
    zeros = np.zeros(n_pts - 1)

    meta = {"normal_form_violated": True, "tau": tau, "lambdaY": lambdaY}
    return assemble(grid, X, Y, fvX=zeros, dMX=dMX, h=0.0, dM2=zeros.copy(), dQV_MX=dQV_MX,
                    dQV_M2=zeros.copy(), convergence=True, model="predictable_default_variant",
                    mode=mode, events={"tau": tau_idx}, metadata=meta)

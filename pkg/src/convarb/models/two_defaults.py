"""Two claims on a payoff driven by two independent, predictable default times.

The payoff at the horizon is ``1{theta1 > T} + 1{theta2 <= T}``. Each default
time is the first passage of its own Brownian driver through a barrier, run on
a clock that gives it an exponential law with the requested rate. ``X`` sees
the first driver only through the default indicator and prices the second
default by its Brownian conditional probability; ``Y`` is the mirror image.
For the insider both defaults are predictable: ``X`` has a predictable
downward jump at ``theta1`` and ``Y`` a predictable upward jump at ``theta2``.
"""

from __future__ import annotations

import numpy as np

from ..simkernel import make_grid, path_rng
from ._clock import ExpHittingClock
from .base import DecomposedPath, assemble, predictable_event_grid, require

__all__ = ["model_two_defaults", "upward_jump_size"]


def upward_jump_size(C2_rate: float, theta2: float, horizon: float) -> float:
    """Jump of ``Y`` at the second default: ``(1 - C2(T)) / (1 - C2(theta2))``."""
    return float(np.exp(-C2_rate * (horizon - theta2)))


def model_two_defaults(C1_rate: float = 1.0, C2_rate: float = 1.0, barrier1: float = 1.0,
                       barrier2: float = 1.0, horizon: float = 1.0, n_steps: int = 200,
                       seed: int = 0, path_index: int = 0, mode: str = "analytic") -> DecomposedPath:
    """Simulate one path.

    Parameters
    ----------
    C1_rate, C2_rate : float
        Rates of the exponential laws of the two default times.
    barrier1, barrier2 : float
        Barrier levels of the two drivers (the laws do not depend on them).
    mode : {'analytic', 'euler'}
        ``'analytic'`` locates each default exactly by Brownian-bridge first
        passage and inserts a left-limit cell before it; ``'euler'`` monitors
        the barrier on the uniform grid only.
    """
    require(C1_rate > 0 and C2_rate > 0, "default rates must be positive")
    require(barrier1 > 0 and barrier2 > 0, "barrier levels must be positive")
    require(horizon > 0, "horizon must be positive")
    require(mode in ("analytic", "euler"), f"unknown mode {mode!r}")
    rng = path_rng(seed, path_index)
    base = make_grid(horizon, n_steps)
    clocks = (ExpHittingClock(C1_rate, barrier1), ExpHittingClock(C2_rate, barrier2))
    normals = rng.standard_normal((2, n_steps))
    samples = [clk.sample_path(base.points, rng, normals[k]) for k, clk in enumerate(clocks)]

    thetas: list = [None, None]
    hit_clock: list = [None, None]
    for k, clk in enumerate(clocks):
        v, w = samples[k]
        if mode == "analytic":
            hit = clk.exact_hit(v, w, rng, horizon)
            if hit is not None:
                thetas[k], hit_clock[k] = hit
        else:
            above = np.flatnonzero(w[1:] >= clk.level)
            if len(above):
                thetas[k] = float(base.points[above[0] + 1])

    if mode == "analytic":
        events = [t for t in thetas if t is not None]
        grid, eff, index = predictable_event_grid(horizon, n_steps, predictable=events)
    else:
        grid, eff, index = base, np.array(base.points), {t: base.index_of(t) for t in thetas if t is not None}
    pts = grid.points

    drivers = []
    for k, clk in enumerate(clocks):
        v, w = samples[k]
        if hit_clock[k] is not None:
            pos = np.searchsorted(v, hit_clock[k])
            v = np.insert(v, pos, hit_clock[k])
            w = np.insert(w, pos, clk.level)
        W = np.interp(clk.phi(eff), v, w)
        if thetas[k] is not None:
            if mode == "analytic":
                # the left-limit point and the event point both sit on the barrier
                W[eff == thetas[k]] = clk.level
            hit = np.arange(len(pts)) >= index[thetas[k]]
        else:
            hit = np.zeros(len(pts), dtype=bool)
        remaining = clk.phi(horizon) - clk.phi(eff)
        p = np.where(hit, 1.0, clk.hit_probability(W, remaining))
        slope = np.where(hit, 0.0, clk.hit_probability_slope(W, remaining))
        drivers.append((W, hit, p, slope, np.diff(clk.phi(eff))))

    (_, hit1, p1, slope1, dphi1), (_, hit2, p2, slope2, dphi2) = drivers
    surv1 = np.where(hit1, 0.0, np.exp(-C1_rate * (horizon - eff)))
    claim2 = np.where(hit2, 1.0, -np.expm1(-C2_rate * (horizon - eff)))
    X = surv1 + p2
    Y = (1.0 - p1) + claim2

    dMX = np.diff(p2)
    fvX = np.diff(X) - dMX
    dQV_MX = slope2[:-1] ** 2 * dphi2
    dM2 = -np.diff(p1)
    dQV_M2 = slope1[:-1] ** 2 * dphi1

    # <M^X> is equivalent to Lebesgue measure until the second default, even where
    # the hitting-probability slope underflows; the first default's jump cell is singular
    split_ref = np.where(hit2[:-1], 0.0, 1.0)
    if thetas[0] is not None:
        split_ref[index[thetas[0]] - 1] = 0.0

    ev = {"theta1": index.get(thetas[0]), "theta2": index.get(thetas[1])}
    meta = {
        "normal_form_violated": True,
        "theta1": thetas[0], "theta2": thetas[1],
        "C1_rate": C1_rate, "C2_rate": C2_rate,
    }
    return assemble(grid, X, Y, fvX=fvX, dMX=dMX, h=0.0, dM2=dM2, dQV_MX=dQV_MX, dQV_M2=dQV_M2,
                    fv_split_reference=split_ref, convergence=True, model="two_defaults", mode=mode,
                    events=ev, metadata=meta)

"""Single asset killed when a Brownian motion first crosses an independent random barrier.

Outside information sees only the default indicator, so the default time has
a deterministic hazard ``c(t)`` and the price ``X = X0 * exp(int c) * 1{no default}``
is a martingale there. An insider who also watches the Brownian path sees the
default compensated by ``-log(1 - F_D(S))`` where ``S`` is the running maximum;
on stretches where the Brownian motion sits strictly below its maximum the
price drifts up at rate ``c`` with no risk of default.

``Y`` mirrors ``X`` (``h = 1``, no second martingale).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import integrate, stats
from scipy.special import log_ndtr, ndtr

from ..simkernel import make_grid, path_rng
from .base import DecomposedPath, assemble, require

__all__ = [
    "model_random_barrier",
    "barrier_hazard",
    "barrier_log_survival",
    "barrier_hazard_quadrature",
]


def _dist(barrier):
    if barrier is None:
        return stats.expon()
    if isinstance(barrier, dict):
        name = barrier.get("distribution", "expon")
        return getattr(stats, name)(**barrier.get("params", {}))
    return barrier


def _exp_rate(dist):
    # closed forms apply to an exponential law with zero location
    if getattr(dist, "dist", None) is stats.expon and dist.kwds.get("loc", 0.0) == 0.0 and not dist.args:
        return 1.0 / dist.kwds.get("scale", 1.0)
    return None


def barrier_log_survival(t, barrier=None):
    """``log P(T^D > t)`` for the barrier law."""
    dist = _dist(barrier)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    rate = _exp_rate(dist)
    if rate is not None:
        return np.log(2.0) + 0.5 * rate**2 * t + log_ndtr(-rate * np.sqrt(t))
    out = np.zeros_like(t)
    for i, s in enumerate(t):
        if s > 0:
            out[i] = np.log(dist.expect(lambda x: 2.0 * ndtr(x / np.sqrt(s)) - 1.0))
    return out


def barrier_hazard(t, barrier=None):
    """Intensity of the default time in the filtration of the default indicator alone."""
    dist = _dist(barrier)
    t = np.asarray(t, dtype=float)
    rate = _exp_rate(dist)
    if rate is None:
        h = 1e-6 * np.maximum(t, 1e-3)
        return -(barrier_log_survival(t + h, dist) - barrier_log_survival(t - h, dist)) / (2 * h)
    x = rate * np.sqrt(t)
    mills = np.exp(stats.norm.logpdf(x) - log_ndtr(-x))
    return -0.5 * rate**2 + rate * mills / (2.0 * np.sqrt(t))


def barrier_hazard_quadrature(t: float, barrier=None) -> float:
    """Hazard from the mixture of level-``x`` first-passage densities, by quadrature."""
    dist = _dist(barrier)

    def f_x(x):
        return x / np.sqrt(2 * np.pi * t**3) * np.exp(-x * x / (2 * t))

    num = integrate.quad(lambda x: f_x(x) * dist.pdf(x), 0.0, np.inf, limit=200)[0]
    den = integrate.quad(lambda x: (2.0 * ndtr(x / np.sqrt(t)) - 1.0) * dist.pdf(x), 0.0, np.inf,
                         limit=200)[0]
    return num / den


@lru_cache(maxsize=32)
def _growth_factors(key, horizon, n_steps):
    dist = _dist(dict(distribution=key[0], params=dict(key[1])))
    lg = barrier_log_survival(make_grid(horizon, n_steps).points, dist)
    return np.exp(lg[:-1] - lg[1:])


def model_random_barrier(barrier=None, X0: float = 1.0, horizon: float = 1.0, n_steps: int = 200,
                         seed: int = 0, path_index: int = 0) -> DecomposedPath:
    """Simulate one path.

    Parameters
    ----------
    barrier : dict or frozen ``scipy.stats`` distribution, optional
        Law of the barrier, e.g. ``{"distribution": "expon", "params": {"scale": 1.0}}``
        (the default).
    """
    require(X0 > 0, "X0 must be positive")
    require(horizon > 0, "horizon must be positive")
    dist = _dist(barrier)
    require(dist.cdf(0.0) == 0.0, "barrier law must live on (0, inf)")
    rng = path_rng(seed, path_index)
    grid = make_grid(horizon, n_steps)
    dB = rng.standard_normal(n_steps) * np.sqrt(grid.dt)
    level = dist.ppf(rng.random())
    B = np.concatenate(([0.0], np.cumsum(dB)))
    S = np.maximum.accumulate(B)

    if isinstance(barrier, dict) or barrier is None:
        b = barrier or {"distribution": "expon", "params": {}}
        key = (b.get("distribution", "expon"), tuple(sorted(b.get("params", {}).items())))
        g = _growth_factors(key, float(horizon), int(n_steps))
    else:
        lg = barrier_log_survival(grid.points, dist)
        g = np.exp(lg[:-1] - lg[1:])

    log_sf = dist.logsf(S)
    dLam = log_sf[:-1] - log_sf[1:]
    p = -np.expm1(-dLam)
    crossed = np.flatnonzero(S[1:] >= level)
    jump = np.zeros(n_steps)
    default_idx = None
    if len(crossed):
        default_idx = int(crossed[0]) + 1
        jump[default_idx - 1] = 1.0

    alive = np.ones(n_steps + 1, dtype=bool)
    if default_idx is not None:
        alive[default_idx:] = False
    X = X0 * np.concatenate(([1.0], np.cumprod(g))) * alive
    Xl = X[:-1]
    dMX = -Xl * g * (jump - p)
    fvX = np.diff(X) - dMX
    dQV_MX = (Xl * g) ** 2 * p * (1.0 - p)
    jumpMX = np.where(p > 0, dMX, 0.0)

    meta = {
        "normal_form_violated": True,
        "single_asset": True,
        "barrier_level": float(level),
        "running_max": S,
        "compensator_increments": dLam,
    }
    return assemble(grid, X, X.copy(), fvX=fvX, dMX=dMX, h=1.0, dM2=np.zeros(n_steps),
                    dQV_MX=dQV_MX, dQV_M2=np.zeros(n_steps), jumpMX=jumpMX, convergence=False,
                    model="random_barrier", events={"default": default_idx}, metadata=meta)

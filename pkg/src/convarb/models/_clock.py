"""Gaussian clocks whose level-hitting time has an exponential law.

A Brownian motion run on the clock ``phi`` (so that ``<W>_t = phi(t)``) hits a
level ``b > 0`` before ``t`` with probability ``2*sf(b/sqrt(phi(t)))``.
Choosing ``phi(t) = (b / isf(C(t)/2))**2`` makes that probability equal to
``C(t) = 1 - exp(-rate*t)``, so the hitting time is exponential yet
predictable in the filtration of ``W``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr
from scipy.stats import norm

from ..simkernel import first_passage


class ExpHittingClock:
    def __init__(self, rate: float, level: float):
        self.rate = float(rate)
        self.level = float(level)

    def cdf(self, t):
        return -np.expm1(-self.rate * np.asarray(t, dtype=float))

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            q = norm.isf(0.5 * self.cdf(t))
            out = np.where(t > 0, (self.level / q) ** 2, 0.0)
        return out

    def time_of(self, s: float) -> float:
        """Calendar time at which the clock reads ``s``."""
        c = 2.0 * norm.sf(self.level / np.sqrt(s))
        return float(-np.log1p(-c) / self.rate)

    def hit_probability(self, w, remaining):
        """P(level reached by the end | current value ``w``, remaining clock variance)."""
        w = np.asarray(w, dtype=float)
        remaining = np.asarray(remaining, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = 2.0 * ndtr(-(self.level - w) / np.sqrt(remaining))
        p = np.where(remaining > 0, p, (w >= self.level).astype(float))
        return np.where(w >= self.level, 1.0, p)

    def hit_probability_slope(self, w, remaining):
        """Derivative of :meth:`hit_probability` in ``w``."""
        w = np.asarray(w, dtype=float)
        remaining = np.asarray(remaining, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            sd = np.sqrt(remaining)
            g = 2.0 * norm.pdf((self.level - w) / sd) / sd
        return np.where((remaining > 0) & (w < self.level), g, 0.0)

    def sample_path(self, times, rng, normals=None):
        """Driver values on ``times`` in the clock's variance scale."""
        v = self.phi(times)
        z = rng.standard_normal(len(times) - 1) if normals is None else normals
        return v, np.concatenate(([0.0], np.cumsum(z * np.sqrt(np.diff(v)))))

    def exact_hit(self, v, w, rng, horizon):
        """Exact first hitting time of the bridge-interpolated driver, or None."""
        fp = first_passage(w, v, self.level, rng)
        if fp is None:
            return None
        return min(self.time_of(fp[1]), horizon), fp[1]

"""Cellwise calculus of signed measures carried by finite-variation increments.

A :class:`DiscreteMeasure` assigns one signed mass to every grid cell. Absolute
continuity, orthogonality and positivity are all decided cell by cell against a
null-mass threshold ``tol``; the default threshold is ``1e-12`` times the total
variation of the measure it is applied to.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .simkernel import TimeGrid

__all__ = [
    "DiscreteMeasure",
    "LebesgueSplit",
    "PositivityVerdict",
    "MonotoneVerdict",
    "null_tol",
    "lebesgue_decompose",
    "is_orthogonal",
    "difference_positivity_check",
    "monotone_classify",
]

NULL_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    grid: TimeGrid
    mass: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mass, dtype=float)
        if m.ndim == 0 or m.shape[-1] != self.grid.n_steps:
            raise DomainError(f"expected {self.grid.n_steps} cell masses, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise DomainError("measure masses must be finite")
        object.__setattr__(self, "mass", m)

    @property
    def total_variation(self):
        return np.abs(self.mass).sum(axis=-1)

    def cumulative(self) -> np.ndarray:
        """Distribution function at the grid points, starting from 0."""
        c = np.cumsum(self.mass, axis=-1)
        return np.concatenate((np.zeros(c.shape[:-1] + (1,)), c), axis=-1)


@dataclass(frozen=True, eq=False)
class LebesgueSplit:
    """``target = density * reference + singular`` cell by cell.

    ``absolutely_continuous`` holds the target mass on cells where the reference
    is charged, so ``absolutely_continuous + singular`` reproduces the target
    bitwise. ``density * reference`` matches the absolutely continuous part to
    within 2 ulp; no float density can do better on every cell.
    """

    density: np.ndarray
    absolutely_continuous: DiscreteMeasure
    singular: DiscreteMeasure
    reference: DiscreteMeasure

    @property
    def grid(self) -> TimeGrid:
        return self.reference.grid

    def reconstruct(self) -> np.ndarray:
        return self.absolutely_continuous.mass + self.singular.mass


@dataclass(frozen=True)
class PositivityVerdict:
    ok: bool
    violation_cells: tuple


@dataclass(frozen=True)
class MonotoneVerdict:
    classification: str
    increasing_part: DiscreteMeasure
    decreasing_part: DiscreteMeasure


def null_tol(measure: DiscreteMeasure | np.ndarray):
    """Null-mass threshold of a measure; one value per path for batched masses."""
    m = measure.mass if isinstance(measure, DiscreteMeasure) else np.asarray(measure)
    if m.ndim <= 1:
        return NULL_RTOL * float(np.abs(m).sum())
    return NULL_RTOL * np.abs(m).sum(axis=-1, keepdims=True)


def _same_grid(a: DiscreteMeasure, b: DiscreteMeasure):
    if not a.grid.same_as(b.grid):
        raise DomainError("measures live on different grids")


def lebesgue_decompose(target: DiscreteMeasure, reference: DiscreteMeasure,
                       tol: float | None = None) -> LebesgueSplit:
    """Split ``target`` into a part with a density against ``reference`` and a singular rest."""
    _same_grid(target, reference)
    if tol is None:
        tol = null_tol(reference)
    if np.any(np.asarray(tol) < 0):
        raise DomainError("tol must be nonnegative")
    ref = reference.mass
    if np.any(ref < -tol):
        raise DomainError("reference measure has negative mass")
    charged = ref > tol
    density = np.zeros_like(ref)
    density[charged] = target.mass[charged] / ref[charged]
    ac = np.where(charged, target.mass, 0.0)
    sing = np.where(charged, 0.0, target.mass)
    g = target.grid
    return LebesgueSplit(density, DiscreteMeasure(g, ac), DiscreteMeasure(g, sing), reference)


def is_orthogonal(mu: DiscreteMeasure, nu: DiscreteMeasure, tol: float = 0.0) -> bool:
    _same_grid(mu, nu)
    return bool(np.all(np.minimum(np.abs(mu.mass), np.abs(nu.mass)) <= tol))


def difference_positivity_check(mu1: DiscreteMeasure, mu2: DiscreteMeasure,
                                tol: float = 0.0) -> PositivityVerdict:
    """Cells where ``mu1`` is null but ``mu2`` is charged."""
    _same_grid(mu1, mu2)
    cells = np.flatnonzero((mu1.mass <= tol) & (mu2.mass > tol))
    return PositivityVerdict(len(cells) == 0, tuple(int(i) for i in cells))


def monotone_classify(v: DiscreteMeasure, tol: float = 0.0) -> MonotoneVerdict:
    """Jordan split ``v = A - a`` and the monotonicity of ``v``.

    A measure with no cell beyond ``tol`` in either direction is reported as
    ``"increasing"``.
    """
    up = np.maximum(v.mass, 0.0)
    down = np.maximum(-v.mass, 0.0)
    has_up = bool(np.any(v.mass > tol))
    has_down = bool(np.any(v.mass < -tol))
    if has_down and not has_up:
        cls = "decreasing"
    elif has_up and has_down:
        cls = "neither"
    else:
        cls = "increasing"
    return MonotoneVerdict(cls, DiscreteMeasure(v.grid, up), DiscreteMeasure(v.grid, down))

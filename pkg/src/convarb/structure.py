"""Structure analysis of a decomposed price pair.

* :func:`check_thm33` decides whether each price is in normal form: its
  finite-variation part splits into a drift with a density against its own
  martingale's predictable quadratic variation plus a decreasing singular
  remainder.
* :func:`split_A` splits the increasing part ``A`` of ``Y``'s drift into the
  piece explained by the positive exposure ``h^+`` to ``X``'s martingale
  (``A1``) and the orthogonal rest (``A2``).
* :func:`check_C1_C2` checks that ``A2`` has a density against the
  quadratic variation of ``Y``'s own martingale and that the density keeps the
  density-process jumps above -1.
* :func:`covariation_rule` is the reduced test when ``Y`` has no martingale
  of its own.

All functions accept a single path or a batch; batched inputs return per-path
verdict arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation, PreconditionError
from .measurecalc import DiscreteMeasure, NULL_RTOL, lebesgue_decompose, null_tol
from .models.base import DecomposedPath

__all__ = [
    "NormalFormVerdict",
    "ASplit",
    "ConditionVerdict",
    "StructureReport",
    "check_thm33",
    "split_A",
    "check_C1_C2",
    "covariation_rule",
    "jump_condition_a1",
    "analyze",
    "default_tol",
]

NORMAL_FORM = "normal_form"
J_NOT_DECREASING = "J_not_decreasing"
SINGULARITY_VIOLATED = "singularity_violated"


def default_tol(path: DecomposedPath, mass: np.ndarray, martingale_qv: np.ndarray | None = None):
    """Null-mass threshold for ``mass`` on this path.

    Analytic paths use ``1e-12`` times the total variation. Euler paths use
    ``3 * sqrt(dt) * vol`` with ``vol`` the average volatility of the relevant
    martingale, because Euler noise leaks into drift cells.
    """
    if path.mode == "euler" and martingale_qv is not None:
        dt = float(np.max(path.grid.dt))
        vol = np.sqrt(np.sum(martingale_qv, axis=-1, keepdims=True) / path.grid.horizon)
        tol = 3.0 * np.sqrt(dt) * vol
        return float(tol) if np.ndim(mass) == 1 else tol
    return null_tol(mass)


def _any(mask):
    return np.any(mask, axis=-1)


@dataclass
class NormalFormVerdict:
    X: object
    Y: object
    JX: np.ndarray
    JY: np.ndarray


@dataclass
class ASplit:
    A1: DiscreteMeasure
    a1_tilde: np.ndarray
    A2: DiscreteMeasure


@dataclass
class ConditionVerdict:
    holds: object
    cells: tuple = ()


@dataclass
class StructureReport:
    thm33_X_verdict: object
    thm33_Y_verdict: object
    A1: DiscreteMeasure
    A2: DiscreteMeasure
    a1_tilde: np.ndarray
    a2_tilde: np.ndarray
    C1: ConditionVerdict
    C2: ConditionVerdict
    jump_condition_a1: object
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def plain(v):
            return v.tolist() if isinstance(v, np.ndarray) else v

        return {
            "thm33_X_verdict": plain(self.thm33_X_verdict),
            "thm33_Y_verdict": plain(self.thm33_Y_verdict),
            "C1": {"holds": plain(self.C1.holds), "cells": [list(map(int, np.atleast_1d(c))) for c in self.C1.cells]},
            "C2": {"holds": plain(self.C2.holds), "cells": [list(map(int, np.atleast_1d(c))) for c in self.C2.cells]},
            "jump_condition_a1": plain(self.jump_condition_a1),
            "A1_total": plain(self.A1.mass.sum(axis=-1)),
            "A2_total": plain(self.A2.mass.sum(axis=-1)),
            "notes": list(self.notes),
        }


def _verdict(flags_j, flags_s):
    out = np.where(flags_j, J_NOT_DECREASING, np.where(flags_s, SINGULARITY_VIOLATED, NORMAL_FORM))
    return str(out) if out.ndim == 0 else out


def _cells(mask):
    idx = np.argwhere(mask)
    return tuple(tuple(int(v) for v in row) if len(row) > 1 else int(row[0]) for row in idx)


def check_thm33(path: DecomposedPath, tol=None) -> NormalFormVerdict:
    """Normal-form verdict for each asset.

    ``J_not_decreasing`` when the singular part of the finite-variation
    increments rises above ``tol`` somewhere; ``singularity_violated`` when the
    model's declared singular part ``dJX`` charges cells where ``<M^X>`` does;
    ``normal_form`` otherwise.
    """
    g = path.grid
    fvX = path.dJX + path.dWX
    split_x = lebesgue_decompose(DiscreteMeasure(g, fvX), DiscreteMeasure(g, path.dQV_MX))
    tol_x = default_tol(path, fvX, path.dQV_MX) if tol is None else tol
    JX = split_x.singular.mass
    orth = np.all(np.minimum(np.abs(path.dJX), path.dQV_MX) <= null_tol(path.dQV_MX), axis=-1)
    vx = _verdict(_any(JX > tol_x), ~orth)

    qv_y = path.dQV_M1 + path.dQV_M2
    dV = path.dVY
    split_y = lebesgue_decompose(DiscreteMeasure(g, dV), DiscreteMeasure(g, qv_y))
    tol_y = default_tol(path, dV, qv_y) if tol is None else tol
    JY = split_y.singular.mass
    vy = _verdict(_any(JY > tol_y), np.zeros(np.shape(JY)[:-1], dtype=bool))
    return NormalFormVerdict(vx, vy, JX, JY)


def split_A(path: DecomposedPath, tol=None) -> ASplit:
    """``A = A1 + A2`` with ``A1`` carried by ``h^+ d<M^X>`` and ``A2`` singular to it.

    ``a1_tilde`` is the density of ``A1`` against ``h^2 d<M^X>`` (zero where
    ``h <= 0``).
    """
    g = path.grid
    if np.any(path.dA < 0):
        raise InvariantViolation("dA has negative mass")
    ref = np.maximum(path.h, 0.0) * path.dQV_MX
    split = lebesgue_decompose(DiscreteMeasure(g, path.dA), DiscreteMeasure(g, ref), tol)
    charged = split.absolutely_continuous.mass != 0
    denom = path.h * path.h * path.dQV_MX
    a1 = np.zeros_like(path.dA)
    np.divide(split.absolutely_continuous.mass, denom, out=a1, where=charged & (denom > 0))
    if np.any(a1 < 0):
        raise InvariantViolation("negative density of A1")
    return ASplit(split.absolutely_continuous, a1, split.singular)


def check_C1_C2(path: DecomposedPath, A2: DiscreteMeasure, tol=None, jump_tol: float = 1e-12):
    """Absolute continuity of ``A2`` against ``<M2>`` and the jump bound on its density.

    Returns ``(C1 verdict, a2_tilde, C2 verdict)``. ``a2_tilde`` is 0 on cells
    where ``<M2>`` does not charge.
    """
    g = path.grid
    split = lebesgue_decompose(A2, DiscreteMeasure(g, path.dQV_M2))
    tol_mass = default_tol(path, path.dA, path.dQV_M2) if tol is None else tol
    bad = split.singular.mass > tol_mass
    c1 = ConditionVerdict(~_any(bad) if bad.ndim > 1 else not bool(np.any(bad)), _cells(bad))
    a2 = np.where(A2.mass > 0, split.density, 0.0)
    jumps = path.jumpM2
    over = (jumps != 0) & (a2 * jumps >= 1.0 - jump_tol)
    c2 = ConditionVerdict(~_any(over) if over.ndim > 1 else not bool(np.any(over)), _cells(over))
    return c1, a2, c2


def jump_condition_a1(path: DecomposedPath, a1_tilde: np.ndarray, jump_tol: float = 1e-12):
    jumps = path.jumpM1
    over = (jumps != 0) & (a1_tilde * jumps >= 1.0 - jump_tol)
    return ~_any(over) if over.ndim > 1 else not bool(np.any(over))


def covariation_rule(path: DecomposedPath, tol=None) -> ConditionVerdict:
    """With no second martingale, ``Y``'s drift may not rise where ``d<X,Y>`` is not positive."""
    if np.any(path.dM2 != 0):
        raise PreconditionError("covariation rule needs a path without a second martingale (dM2 = 0)")
    cov = path.h * path.dQV_MX
    tol_cov = NULL_RTOL * np.sum(np.abs(cov), axis=-1, keepdims=cov.ndim > 1)
    dV = path.dVY
    tol_v = default_tol(path, dV, path.dQV_M1) if tol is None else tol
    bad = (cov <= tol_cov) & (dV > tol_v)
    holds = ~_any(bad) if bad.ndim > 1 else not bool(np.any(bad))
    return ConditionVerdict(holds, _cells(bad))


def analyze(path: DecomposedPath, tol=None) -> StructureReport:
    """Run every structure check on a path or batch."""
    normal_form = check_thm33(path, tol)
    sa = split_A(path, tol)
    c1, a2, c2 = check_C1_C2(path, sa.A2, tol)
    notes = []
    if path.metadata.get("normal_form_violated"):
        notes.append("model declares a drift that is not absolutely continuous")
    return StructureReport(normal_form.X, normal_form.Y, sa.A1, sa.A2, sa.a1_tilde, a2, c1, c2,
                           jump_condition_a1(path, sa.a1_tilde), notes)


"""Shared container and assembly helpers for the example economies."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from ..errors import DomainError
from ..measurecalc import DiscreteMeasure, null_tol
from ..simkernel import IncrementPath, JumpMarkedPath, TimeGrid, make_grid

__all__ = [
    "DecomposedPath", "assemble", "left_limit_offset", "check_invariants", "require",
    "predictable_event_grid",
]

# per-step array fields, in a fixed order used for slicing batches
STEP_FIELDS = (
    "dJX", "dWX", "dMX", "jumpMX", "h", "dM1", "dM2", "jumpM2",
    "dA", "da", "dQV_MX", "dQV_M1", "dQV_M2",
)


def left_limit_offset(horizon: float) -> float:
    """Width of the cell that carries a predictable jump just before its event time."""
    return 1e-12 * horizon


def require(cond: bool, msg: str):
    if not cond:
        raise DomainError(msg)


@dataclass(eq=False)
class DecomposedPath:
    """Prices of both assets on a grid with every decomposition increment.

    Arrays are 1-D for a single path or 2-D ``(n_paths, n)`` for a batch that
    shares one grid. ``jumpMX`` and ``jumpM2`` are the jump parts of ``dMX`` and
    ``dM2``; the continuous parts are the remainders.
    """

    grid: TimeGrid
    X: np.ndarray
    Y: np.ndarray
    dJX: np.ndarray
    dWX: np.ndarray
    dMX: np.ndarray
    jumpMX: np.ndarray
    h: np.ndarray
    dM1: np.ndarray
    dM2: np.ndarray
    jumpM2: np.ndarray
    dA: np.ndarray
    da: np.ndarray
    dQV_MX: np.ndarray
    dQV_M1: np.ndarray
    dQV_M2: np.ndarray
    horizon_is_convergence: bool
    model: str = ""
    mode: str = "analytic"
    events: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return 1 if self.X.ndim == 1 else self.X.shape[0]

    @property
    def is_batch(self) -> bool:
        return self.X.ndim == 2

    @property
    def dVY(self) -> np.ndarray:
        return self.dA - self.da

    @property
    def jumpM1(self) -> np.ndarray:
        return self.h * self.jumpMX

    def path(self, j: int) -> "DecomposedPath":
        if not self.is_batch:
            if j != 0:
                raise IndexError(j)
            return self
        kw = {f: getattr(self, f)[j] for f in STEP_FIELDS}
        ev = {}
        for k, v in self.events.items():
            if isinstance(v, np.ndarray):
                v = int(v[j]) if v[j] >= 0 else None
            ev[k] = v
        meta = dict(self.metadata)
        for k in meta.get("batch_keys", ()):
            meta[k] = meta[k][j]
        meta.pop("batch_keys", None)
        return replace(self, X=self.X[j], Y=self.Y[j], events=ev, metadata=meta, **kw)

    def paths(self):
        for j in range(self.n_paths):
            yield self.path(j)

    def measure(self, name: str) -> DiscreteMeasure:
        return DiscreteMeasure(self.grid, getattr(self, name))

    def increments(self, name: str) -> IncrementPath:
        return IncrementPath(self.grid, getattr(self, name))

    def marked(self, name: str) -> JumpMarkedPath:
        """``dMX``, ``dM1`` or ``dM2`` as continuous part plus jump marks."""
        jumps = {"dMX": self.jumpMX, "dM1": self.jumpM1, "dM2": self.jumpM2}[name]
        total = getattr(self, name)
        return JumpMarkedPath.from_arrays(self.grid, total - jumps, jumps)


def assemble(grid, X, Y, *, fvX, dMX, h, dM2, dQV_MX, dQV_M2,
             jumpMX=None, jumpM2=None, convergence=False, model="", mode="analytic",
             events=None, metadata=None, fv_split_reference=None, fvY=None) -> DecomposedPath:
    """Build a :class:`DecomposedPath` from prices and analytic pieces.

    The finite-variation part of ``X`` (``fvX``) is split into the part that has
    a density against ``dQV_MX`` (``dWX``) and the singular rest (``dJX``).
    ``Y``'s finite-variation increment is the residual
    ``dY - h*dMX - dM2`` unless given analytically as ``fvY``, and is
    Jordan-split into ``dA`` and ``da``. An analytic ``fvY`` keeps exact zeros
    of the drift exact, which the residual would smear into rounding noise.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    dQV_MX = np.asarray(dQV_MX, dtype=float)
    fvX = np.asarray(fvX, dtype=float)
    ref = dQV_MX if fv_split_reference is None else fv_split_reference
    charged = ref > null_tol(ref)
    dWX = np.where(charged, fvX, 0.0)
    dJX = np.where(charged, 0.0, fvX)
    h = np.broadcast_to(np.asarray(h, dtype=float), dMX.shape).copy()
    dM1 = h * dMX
    dV = np.diff(Y, axis=-1) - dM1 - dM2 if fvY is None else np.asarray(fvY, dtype=float)
    zeros = np.zeros_like(dMX)
    return DecomposedPath(
        grid=grid, X=X, Y=Y, dJX=dJX, dWX=dWX, dMX=np.asarray(dMX, dtype=float),
        jumpMX=zeros if jumpMX is None else np.asarray(jumpMX, dtype=float),
        h=h, dM1=dM1, dM2=np.asarray(dM2, dtype=float),
        jumpM2=zeros.copy() if jumpM2 is None else np.asarray(jumpM2, dtype=float),
        dA=np.maximum(dV, 0.0), da=np.maximum(-dV, 0.0),
        dQV_MX=dQV_MX, dQV_M1=h * h * dQV_MX, dQV_M2=np.asarray(dQV_M2, dtype=float),
        horizon_is_convergence=convergence, model=model, mode=mode,
        events=dict(events or {}), metadata=dict(metadata or {}),
    )


def check_invariants(path: DecomposedPath, rtol: float = 1e-12) -> list[str]:
    """Return a description of every container invariant the path breaks."""
    problems: list[str] = []

    def close(a, b, scale):
        return np.all(np.abs(a - b) <= rtol * np.maximum(scale, 1.0))

    scaleX = np.max(np.abs(path.X), axis=-1, keepdims=True)
    scaleY = np.max(np.abs(path.Y), axis=-1, keepdims=True)
    if not close(np.diff(path.X, axis=-1), path.dJX + path.dWX + path.dMX, scaleX):
        problems.append("X increments do not match dJX + dWX + dMX")
    if not close(np.diff(path.Y, axis=-1), path.dA - path.da + path.dM1 + path.dM2, scaleY):
        problems.append("Y increments do not match dA - da + dM1 + dM2")
    if not np.array_equal(path.dM1, path.h * path.dMX):
        problems.append("dM1 differs from h * dMX")
    if not np.array_equal(path.dQV_M1, path.h * path.h * path.dQV_MX):
        problems.append("dQV_M1 differs from h^2 * dQV_MX")
    if np.any(np.minimum(path.dA, path.da) != 0):
        problems.append("dA and da charge the same cell")
    for name in ("dA", "da", "dQV_MX", "dQV_M1", "dQV_M2"):
        if np.any(getattr(path, name) < 0):
            problems.append(f"{name} has negative mass")
    if path.horizon_is_convergence and not np.array_equal(path.X[..., -1], path.Y[..., -1]):
        problems.append("terminal prices differ on a convergence model")
    if not path.metadata.get("normal_form_violated", False):
        ref = path.dQV_M1 + path.dQV_M2
        tol = null_tol(ref)
        if np.any((ref <= tol) & (path.dA > null_tol(path.dA))):
            problems.append("dA charges cells with no martingale activity in Y")
    return problems


def as_dict(path: DecomposedPath) -> dict[str, Any]:
    out = {f: getattr(path, f) for f in STEP_FIELDS}
    out.update(t=path.grid.points, X=path.X, Y=path.Y)
    return out


def predictable_event_grid(horizon: float, n_steps: int, predictable=(), ordinary=()):
    """Uniform grid with an extra left-limit point before each predictable event.

    Returns ``(grid, effective_times, event_index)``. The left-limit point of an
    event at ``tau`` sits at ``tau - delta`` but is evaluated at time ``tau``
    (``effective_times``), so the cell ``[tau - delta, tau]`` carries only the
    jump. ``event_index`` maps each event time to the index of its grid point.
    """
    delta = left_limit_offset(horizon)
    extra = list(ordinary)
    for tau in predictable:
        extra.append(tau)
        if tau - delta > 0:
            extra.append(tau - delta)
    grid = make_grid(horizon, n_steps, extra)
    eff = np.array(grid.points, dtype=float)
    index = {}
    for tau in list(predictable) + list(ordinary):
        index[tau] = grid.index_of(tau)
    for tau in predictable:
        k = index[tau]
        if k > 0 and tau - grid.points[k - 1] <= 2 * delta:
            eff[k - 1] = grid.points[k]
    return grid, eff, index

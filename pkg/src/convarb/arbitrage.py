"""Arbitrage set detection and the explicit long-only arbitrage portfolio.

The arbitrage set is the set of cells where the orthogonal drift ``A2`` of
``Y`` charges while ``Y``'s own martingale is silent. Holding one unit of
``Y`` hedged with ``(-h)^+`` units of ``X`` over the first connected
component of that set gains exactly ``dA2`` per cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .measurecalc import DiscreteMeasure, null_tol
from .models.base import DecomposedPath

__all__ = [
    "ArbitrageWindow",
    "PortfolioLedger",
    "BacktestResult",
    "detect_arbitrage_set",
    "mask_windows",
    "build_arbitrage_portfolio",
    "backtest",
    "predictable_jump_harvest",
]


@dataclass
class ArbitrageWindow:
    mask: np.ndarray
    debut_index: int | None
    exit_index: int | None

    @property
    def empty(self) -> bool:
        return self.debut_index is None

    def in_window(self) -> np.ndarray:
        out = np.zeros(len(self.mask), dtype=bool)
        if not self.empty:
            out[self.debut_index:self.exit_index] = True
        return out


@dataclass
class PortfolioLedger:
    piC: np.ndarray
    piX: np.ndarray
    piY: np.ndarray
    V: np.ndarray
    clipped_cells: tuple = ()

    def rows(self, times):
        """``(t, piC, piX, piY, V)`` per grid step, holdings taken over the step."""
        for i in range(len(self.piX)):
            yield times[i], self.piC[i], self.piX[i], self.piY[i], self.V[i]


@dataclass
class BacktestResult:
    monotone: bool
    strict: bool
    admissible: bool
    terminal_value: float
    min_value: float
    violations: list = field(default_factory=list)


def mask_windows(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs ``[start, stop)`` of True cells."""
    m = np.concatenate(([False], np.asarray(mask, dtype=bool), [False]))
    edges = np.flatnonzero(np.diff(m.astype(np.int8)))
    return [(int(a), int(b)) for a, b in zip(edges[::2], edges[1::2])]


def detect_arbitrage_set(path: DecomposedPath, A2: DiscreteMeasure | np.ndarray, tol=None) -> ArbitrageWindow:
    """Cells where ``A2`` charges and ``<M2>`` does not, with début and exit.

    The exit is the first cell after the début that leaves the set, or the
    number of steps when the set runs to the horizon.
    """
    a2 = A2.mass if isinstance(A2, DiscreteMeasure) else np.asarray(A2)
    if a2.ndim != 1:
        raise DomainError("detect_arbitrage_set works on one path at a time")
    tol_a = null_tol(path.dA) if tol is None else tol
    tol_q = null_tol(path.dQV_M2) if tol is None else tol
    mask = (a2 > tol_a) & (path.dQV_M2 <= tol_q)
    hits = np.flatnonzero(mask)
    if len(hits) == 0:
        return ArbitrageWindow(mask, None, None)
    debut = int(hits[0])
    after = np.flatnonzero(~mask[debut:])
    exit_ = debut + int(after[0]) if len(after) else len(mask)
    return ArbitrageWindow(mask, debut, exit_)


def build_arbitrage_portfolio(path: DecomposedPath, window: ArbitrageWindow) -> PortfolioLedger:
    """Zero-cost long-only portfolio active on ``[debut, exit)``.

    Holds one unit of ``Y`` and ``max(-h, 0)`` units of ``X`` over each active
    cell, financed by cash. Cells where ``h > 0`` would call for a short
    position in ``X`` are recorded in ``clipped_cells``.
    """
    n = path.grid.n_steps
    active = window.in_window()
    piX = np.where(active, np.maximum(-path.h, 0.0), 0.0)
    piY = active.astype(float)
    clipped = tuple(int(i) for i in np.flatnonzero(active & (path.h > 0)))
    gains = piX * np.diff(path.X) + piY * np.diff(path.Y)
    V = np.concatenate(([0.0], np.cumsum(gains)))
    piC = V[:n] - piX * path.X[:n] - piY * path.Y[:n]
    return PortfolioLedger(piC, piX, piY, V, clipped)


def backtest(path: DecomposedPath, ledger: PortfolioLedger, window: ArbitrageWindow | None = None,
             tol=None) -> BacktestResult:
    """Check that the value never decreases and strictly rises inside the arbitrage set."""
    dV = np.diff(ledger.V)
    if tol is None:
        tol = 1e-12 * max(float(np.max(np.abs(ledger.V))), float(np.sum(path.dA)), 1.0)
    violations = []
    for i in np.flatnonzero(dV < -tol):
        violations.append((int(i), "decrease"))
    for i in np.flatnonzero((ledger.piX < 0) | (ledger.piY < 0)):
        violations.append((int(i), "short position"))
    gains = ledger.piX * np.diff(path.X) + ledger.piY * np.diff(path.Y)
    scale = np.maximum(np.abs(ledger.V[1:]), 1.0)
    for i in np.flatnonzero(np.abs(dV - gains) > 1e-13 * scale):
        violations.append((int(i), "not self-financing"))
    strict = True
    if window is not None and not window.empty:
        inside = window.mask & window.in_window()
        weak = inside & (dV < max(tol, 0.0))
        for i in np.flatnonzero(weak):
            violations.append((int(i), "not strictly increasing"))
        strict = not np.any(weak) and bool(np.any(dV[inside] > tol))
    monotone = not any(k == "decrease" for _, k in violations)
    admissible = not any(k == "short position" for _, k in violations)
    return BacktestResult(monotone, strict, admissible, float(ledger.V[-1]), float(np.min(ledger.V)),
                          violations)


def predictable_jump_harvest(path: DecomposedPath, announced_index: int, side: str = "Y") -> float:
    """Profit of one unit bought one grid step before ``announced_index`` and sold at it."""
    if side not in ("X", "Y"):
        raise DomainError(f"side must be 'X' or 'Y', got {side!r}")
    prices = path.X if side == "X" else path.Y
    if prices.ndim != 1:
        raise DomainError("predictable_jump_harvest works on one path at a time")
    if announced_index is None or not 1 <= int(announced_index) < len(prices):
        raise DomainError(f"announced index {announced_index} outside the grid")
    k = int(announced_index)
    return float(prices[k] - prices[k - 1])

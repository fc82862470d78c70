"""Exact feasibility test for an equivalent supermartingale measure on a tree.

With atom masses written ``q = m + r`` (``r >= 0``) the program is

    maximize m
    subject to  sum_{w below n} (m + r_w) (Z_child(w, n) - Z_n) <= 0   for every internal n, Z in {X, Y}
                N m + sum_w r_w <= 1

An equivalent supermartingale measure exists iff the optimum is positive.
At optimum 0 the multipliers ``y[n, Z]`` of the node constraints are
nonnegative and give every atom a gain ``sum_n sum_Z y[n, Z] dZ >= 0`` with
a positive total: holding ``y[n, Z]`` units of ``Z`` over the period after
node ``n``, financed by cash, is a long-only arbitrage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from ..errors import DomainError
from .simplex import solve_lp
from .tree import MarketTree, format_rational

__all__ = ["Certificate", "OracleResult", "solve", "verify", "MAX_ATOMS"]

MAX_ATOMS = 3 ** 6
ASSETS = ("X", "Y")


@dataclass
class Certificate:
    """Long-only self-financing strategy: holdings over the period after each internal node."""

    piX: dict
    piY: dict
    cash: dict
    value: dict

    def to_dict(self) -> dict:
        f = format_rational
        return {k: {n: f(v) for n, v in getattr(self, k).items()} for k in ("piX", "piY", "cash", "value")}


@dataclass
class OracleResult:
    feasible: bool
    measure: dict | None
    certificate: Certificate | None
    optimum: Fraction
    pivots: int = 0

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "optimum": format_rational(self.optimum),
            "measure": None if self.measure is None else {k: format_rational(v) for k, v in self.measure.items()},
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _child_towards(tree: MarketTree):
    """``step[(n, w)]``: the child of ``n`` on the way to atom ``w``."""
    step = {}
    for w in tree.atoms:
        p = tree.path_to(w)
        for a, b in zip(p[:-1], p[1:]):
            step[(a, w)] = b
    return step


def solve(tree: MarketTree) -> OracleResult:
    """Max-min atom mass over supermartingale measures, with a certificate when it is 0."""
    if not isinstance(tree, MarketTree):
        raise DomainError("solve expects a MarketTree")
    atoms = tree.atoms
    if len(atoms) > MAX_ATOMS:
        raise DomainError(f"tree has {len(atoms)} atoms, more than the {MAX_ATOMS} the oracle accepts")
    col = {w: 1 + i for i, w in enumerate(atoms)}
    below = {w: set(tree.path_to(w)) for w in atoms}
    step = _child_towards(tree)
    rows, keys = [], []
    for n in tree.internal:
        for z in ASSETS:
            zn = tree.price(n, z)
            row = [Fraction(0)] * (1 + len(atoms))
            for w in atoms:
                if n in below[w]:
                    d = tree.price(step[(n, w)], z) - zn
                    row[col[w]] = d
                    row[0] += d
            rows.append(row)
            keys.append((n, z))
    rows.append([Fraction(len(atoms))] + [Fraction(1)] * len(atoms))
    b = [Fraction(0)] * (len(rows) - 1) + [Fraction(1)]
    c = [Fraction(1)] + [Fraction(0)] * len(atoms)
    sol = solve_lp(rows, b, c)
    if sol.value > 0:
        q = {w: sol.x[0] + sol.x[col[w]] for w in atoms}
        total = sum(q.values(), Fraction(0))
        measure = {w: v / total for w, v in q.items()}
        return OracleResult(True, measure, None, sol.value / total, sol.pivots)
    y = dict(zip(keys, sol.duals))
    return OracleResult(False, None, _certificate(tree, y), sol.value, sol.pivots)


def _certificate(tree: MarketTree, y: dict) -> Certificate:
    piX, piY, cash, value = {}, {}, {}, {tree.root: Fraction(0)}
    for n in tree.order:
        if not tree.children[n]:
            continue
        hx, hy = y[(n, "X")], y[(n, "Y")]
        piX[n], piY[n] = hx, hy
        X, Y = tree.price(n, "X"), tree.price(n, "Y")
        cash[n] = value[n] - hx * X - hy * Y
        for ch in tree.children[n]:
            value[ch] = cash[n] + hx * tree.price(ch, "X") + hy * tree.price(ch, "Y")
    return Certificate(piX, piY, cash, value)


def verify(tree: MarketTree, result: OracleResult) -> bool:
    """Independent exact re-check of a solve result."""
    has_q, has_c = result.measure is not None, result.certificate is not None
    if has_q == has_c or result.feasible != has_q:
        return False
    if has_q:
        q = result.measure
        if set(q) != set(tree.atoms) or any(v <= 0 for v in q.values()):
            return False
        if sum(q.values(), Fraction(0)) != 1:
            return False
        mass = dict(q)
        for n in reversed(tree.order):
            if tree.children[n]:
                mass[n] = sum((mass[c] for c in tree.children[n]), Fraction(0))
        for n in tree.internal:
            for z in ASSETS:
                zn = tree.price(n, z)
                if sum((mass[c] * (tree.price(c, z) - zn) for c in tree.children[n]), Fraction(0)) > 0:
                    return False
        return result.optimum > 0
    cert = result.certificate
    if cert.value.get(tree.root) != 0 or result.optimum != 0:
        return False
    for n in tree.internal:
        hx, hy = cert.piX.get(n), cert.piY.get(n)
        if hx is None or hy is None or hx < 0 or hy < 0:
            return False
        X, Y = tree.price(n, "X"), tree.price(n, "Y")
        if cert.cash.get(n) != cert.value[n] - hx * X - hy * Y:
            return False
        for ch in tree.children[n]:
            if cert.value.get(ch) != cert.value[n] + hx * (tree.price(ch, "X") - X) + hy * (tree.price(ch, "Y") - Y):
                return False
    terminal = [cert.value[w] for w in tree.atoms]
    return all(v >= 0 for v in terminal) and any(v > 0 for v in terminal)

"""Finite-tree versions of the default models, and random trees for testing.

Each period an alive node moves to one of a few event outcomes or to "no
event"; when ``branching`` allows more children than outcomes, the no-event
probability is split evenly over identical extra children. Nodes with no
possible event have a single child. Probabilities are rounded to rationals
with denominators at most ``10**6``; everything after that is exact.

* ``survival_claim``: default or survival each period with the per-period
  default probability of intensity ``lambdaX``; each market prices the
  survival claim with its own intensity, ``(1 - p)**periods_left``.
* ``predictable_default_variant``: the default of the next period is
  announced one period ahead. ``X`` watches the announcement, ``Y`` sees only
  the default; both are the conditional survival probability given what
  each market observes.
* ``two_defaults``: two announced defaults, at most one announcement per
  period. ``X`` observes announcements of the second default and the first
  default itself, ``Y`` the mirror image; each prices
  ``1{no first default} + 1{second default}`` by conditional expectation.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..errors import DomainError
from .tree import MarketTree, Node

__all__ = ["discretize_model", "random_tree", "MAX_PERIODS", "MAX_BRANCHING", "DISCRETIZED_MODELS"]

MAX_PERIODS = 6
MAX_BRANCHING = 3
PROB_DENOMINATOR = 10 ** 6
DISCRETIZED_MODELS = ("survival_claim", "predictable_default_variant", "two_defaults")


def _prob(p: float) -> Fraction:
    return Fraction(p).limit_denominator(PROB_DENOMINATOR)


def _period_prob(rate: float, dt: float) -> Fraction:
    return _prob(-math.expm1(-rate * dt))


def _expand(periods, branching, outcomes):
    """All outcome histories with their probabilities.

    ``outcomes(history)`` returns ``[(label, prob), ...]`` for the next period,
    where label ``None`` means no event. Returns the branch probability of
    every history and the list of full-length histories.
    """
    out = {(): Fraction(1)}
    frontier = [()]
    for _ in range(periods):
        nxt = []
        for h in frontier:
            opts = outcomes(h)
            events = [(lab, p) for lab, p in opts if lab is not None and p > 0]
            rest = Fraction(1) - sum((p for _, p in events), Fraction(0))
            n_none = (max(1, branching - len(events)) if events else 1) if rest > 0 else 0
            if len(events) + n_none > branching:
                raise DomainError(f"node needs {len(events) + n_none} children, branching is {branching}")
            kids = [(lab, p) for lab, p in events] + [((None, j), rest / n_none) for j in range(n_none)]
            for lab, p in kids:
                child = h + (lab,)
                out[child] = p
                nxt.append(child)
        frontier = nxt
    return out, frontier


def _label(o):
    return None if isinstance(o, tuple) else o


def _conditional_prices(hist_prob, atoms, payoff, observe):
    """``E[payoff | observe(history)]`` at every history, grouped by time and observation."""
    weight = {}
    for w in atoms:
        p = Fraction(1)
        for k in range(1, len(w) + 1):
            p *= hist_prob[w[:k]]
        weight[w] = p
    num, den = {}, {}
    for w in atoms:
        for k in range(len(w) + 1):
            key = (k, observe(w[:k]))
            num[key] = num.get(key, Fraction(0)) + weight[w] * payoff(w)
            den[key] = den.get(key, Fraction(0)) + weight[w]
    return {h: num[(len(h), observe(h))] / den[(len(h), observe(h))] for h in hist_prob}


def _to_tree(hist_prob, X, Y) -> MarketTree:
    ids = {h: "r" if not h else "r" + "".join(f".{_name(o)}" for o in h) for h in hist_prob}
    nodes = [Node(ids[h], len(h), None if not h else ids[h[:-1]], hist_prob[h], X[h], Y[h])
             for h in sorted(hist_prob, key=lambda h: (len(h), ids[h]))]
    return MarketTree(nodes)


def _name(o):
    return f"n{o[1]}" if isinstance(o, tuple) else str(o)


def _survival(periods, branching, lambdaX=0.1, lambdaY=0.3, horizon=1.0):
    dt = horizon / periods
    pX, pY = _period_prob(lambdaX, dt), _period_prob(lambdaY, dt)

    def outcomes(h):
        return [] if "d" in h else [("d", pX)]

    hp, atoms = _expand(periods, branching, outcomes)
    X, Y = {}, {}
    for h in hp:
        left = periods - len(h)
        dead = "d" in h
        X[h] = Fraction(0) if dead else (1 - pX) ** left
        Y[h] = Fraction(0) if dead else (1 - pY) ** left
    return _to_tree(hp, X, Y)


def _predictable(periods, branching, lambdaY=0.5, horizon=1.0):
    dt = horizon / periods
    a = _period_prob(lambdaY, dt)

    def outcomes(h):
        # announcements only while the announced default still falls inside the horizon
        return [] if ("a" in h or len(h) >= periods - 1) else [("a", a)]

    hp, atoms = _expand(periods, branching, outcomes)

    def payoff(w):
        return Fraction(0) if "a" in w else Fraction(1)

    def observe_x(h):
        return tuple(_label(o) for o in h)

    def observe_y(h):
        return tuple(_label(o) for o in h[:-1])

    return _to_tree(hp, _conditional_prices(hp, atoms, payoff, observe_x),
                    _conditional_prices(hp, atoms, payoff, observe_y))


def _two_defaults(periods, branching, C1_rate=1.0, C2_rate=1.0, horizon=1.0):
    dt = horizon / periods
    a1, a2 = _period_prob(C1_rate, dt), _period_prob(C2_rate, dt)

    def outcomes(h):
        if len(h) >= periods - 1:
            return []
        return [(k, p) for k, p in (("1", a1), ("2", a2)) if k not in h]

    hp, atoms = _expand(periods, branching, outcomes)

    def payoff(w):
        return Fraction(int("1" not in w) + int("2" in w))

    def observe_x(h):
        return (tuple(_label(o) == "2" for o in h), tuple(_label(o) == "1" for o in h[:-1]))

    def observe_y(h):
        return (tuple(_label(o) == "1" for o in h), tuple(_label(o) == "2" for o in h[:-1]))

    return _to_tree(hp, _conditional_prices(hp, atoms, payoff, observe_x),
                    _conditional_prices(hp, atoms, payoff, observe_y))


_BUILDERS = {"survival_claim": _survival, "predictable_default_variant": _predictable,
             "two_defaults": _two_defaults}


def discretize_model(model: str, periods: int, branching: int = 2, params: dict | None = None) -> MarketTree:
    """Tree version of one of the default models.

    Parameters
    ----------
    model : {'survival_claim', 'predictable_default_variant', 'two_defaults'}
    periods : int
        Number of periods, at most 6.
    branching : int
        Maximum children per node, at most 3. ``two_defaults`` needs 3.
    params : dict, optional
        Model parameters (rates and horizon); names follow the path models.
    """
    if model not in _BUILDERS:
        raise DomainError(f"cannot discretize {model!r}; supported: {', '.join(DISCRETIZED_MODELS)}")
    if not 1 <= int(periods) <= MAX_PERIODS:
        raise DomainError(f"periods must be in [1, {MAX_PERIODS}], got {periods}")
    if not 2 <= int(branching) <= MAX_BRANCHING:
        raise DomainError(f"branching must be in [2, {MAX_BRANCHING}], got {branching}")
    try:
        return _BUILDERS[model](int(periods), int(branching), **dict(params or {}))
    except TypeError as exc:
        raise DomainError(f"invalid parameters for {model}: {exc}") from None


def random_tree(rng: np.random.Generator, max_periods: int = 3, max_branching: int = 3,
                price_denominator: int = 4, max_price: int = 8) -> MarketTree:
    """Random tree with rational probabilities and prices ``k / price_denominator``."""
    periods = int(rng.integers(1, max_periods + 1))
    nodes = [Node("0", 0, None, Fraction(1), *(Fraction(int(v), price_denominator)
                                              for v in rng.integers(0, max_price + 1, 2)))]
    frontier = ["0"]
    counter = 1
    for t in range(1, periods + 1):
        nxt = []
        for parent in frontier:
            k = int(rng.integers(1, max_branching + 1))
            weights = rng.integers(1, 5, k)
            for wgt in weights:
                x, y = (Fraction(int(v), price_denominator) for v in rng.integers(0, max_price + 1, 2))
                nid = str(counter)
                counter += 1
                nodes.append(Node(nid, t, parent, Fraction(int(wgt), int(weights.sum())), x, y))
                nxt.append(nid)
        frontier = nxt
    return MarketTree(nodes)

"""Finite market trees with exact rational node data, and their JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from ..errors import DomainError

__all__ = ["Node", "MarketTree", "TreeFileError", "parse_rational", "format_rational", "load_tree",
           "loads_tree", "dump_tree", "dumps_tree"]


class TreeFileError(DomainError):
    """A tree file that does not parse or does not describe a valid tree."""


def parse_rational(value) -> Fraction:
    """``"num/den"``, an integer, or a decimal string as an exact fraction."""
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError(f"not a rational: {value!r}")


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Node:
    id: str
    t: int
    parent: str | None
    prob: Fraction
    X: Fraction
    Y: Fraction


class MarketTree:
    """Event tree with one branch probability and two prices per node.

    Parameters
    ----------
    nodes : iterable of Node
        Exactly one root (``parent is None``, ``t == 0``). Children sit one
        time step after their parent; sibling probabilities sum to 1; all
        leaves share the final time.
    """

    def __init__(self, nodes):
        self.nodes: dict[str, Node] = {}
        for n in nodes:
            if n.id in self.nodes:
                raise DomainError(f"duplicate node id {n.id!r}")
            self.nodes[n.id] = n
        self.children: dict[str, list[str]] = {k: [] for k in self.nodes}
        roots = []
        for n in self.nodes.values():
            if n.parent is None:
                roots.append(n.id)
            elif n.parent not in self.nodes:
                raise DomainError(f"node {n.id!r} has unknown parent {n.parent!r}")
            else:
                self.children[n.parent].append(n.id)
        if len(roots) != 1:
            raise DomainError(f"a tree needs exactly one root, found {len(roots)}")
        self.root = roots[0]
        self._validate()
        self.atoms = [k for k in self.order if not self.children[k]]
        self.periods = self.nodes[self.atoms[0]].t

    def _validate(self):
        root = self.nodes[self.root]
        if root.t != 0:
            raise DomainError("root must sit at t = 0")
        order, stack = [], [self.root]
        while stack:
            k = stack.pop()
            order.append(k)
            node = self.nodes[k]
            if node.prob <= 0 and node.parent is not None:
                raise DomainError(f"node {k!r} has nonpositive probability")
            if node.X < 0 or node.Y < 0:
                raise DomainError(f"node {k!r} has a negative price")
            kids = self.children[k]
            if kids:
                if sum((self.nodes[c].prob for c in kids), Fraction(0)) != 1:
                    raise DomainError(f"children of {k!r} have probabilities not summing to 1")
                for c in kids:
                    if self.nodes[c].t != node.t + 1:
                        raise DomainError(f"node {c!r} is not one step after its parent")
            stack.extend(reversed(kids))
        if len(order) != len(self.nodes):
            raise DomainError("tree has nodes unreachable from the root (cycle)")
        depths = {self.nodes[k].t for k in order if not self.children[k]}
        if len(depths) != 1:
            raise DomainError("all leaves must sit at the final time")
        self.order = order

    @property
    def internal(self) -> list[str]:
        return [k for k in self.order if self.children[k]]

    def path_to(self, atom: str) -> list[str]:
        """Node ids from the root down to ``atom``."""
        out = [atom]
        while self.nodes[out[-1]].parent is not None:
            out.append(self.nodes[out[-1]].parent)
        return out[::-1]

    def atom_probability(self, atom: str) -> Fraction:
        p = Fraction(1)
        for k in self.path_to(atom)[1:]:
            p *= self.nodes[k].prob
        return p

    def price(self, node_id: str, asset: str) -> Fraction:
        return getattr(self.nodes[node_id], asset)

    def to_dict(self) -> dict:
        return {"nodes": [{"id": n.id, "t": n.t, "parent": n.parent, "prob": format_rational(n.prob),
                           "X": format_rational(n.X), "Y": format_rational(n.Y)}
                          for n in (self.nodes[k] for k in self.order)]}


def _line_context(text: str, lineno: int) -> str:
    lines = text.splitlines()
    if 1 <= lineno <= len(lines):
        return lines[lineno - 1].strip()
    return ""


def loads_tree(text: str, source: str = "<string>") -> MarketTree:
    """Parse a tree from JSON text; errors carry the offending line."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeFileError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}: "
                            f"{_line_context(text, exc.lineno)!r}") from None
    if not isinstance(data, dict) or not isinstance(data.get("nodes"), list):
        raise TreeFileError(f"{source}: expected an object with a 'nodes' list")
    nodes = []
    for i, raw in enumerate(data["nodes"]):
        try:
            parent = raw.get("parent")
            nodes.append(Node(str(raw["id"]), int(raw["t"]), None if parent is None else str(parent),
                              parse_rational(raw.get("prob", "1")), parse_rational(raw["X"]),
                              parse_rational(raw["Y"])))
        except (KeyError, TypeError, ValueError, ZeroDivisionError, AttributeError) as exc:
            needle = f'"id": {json.dumps(raw.get("id"))}' if isinstance(raw, dict) else ""
            lineno = next((j + 1 for j, line in enumerate(text.splitlines()) if needle and needle in line), 0)
            where = f"{source}:{lineno}" if lineno else source
            raise TreeFileError(f"{where}: node #{i} invalid ({exc!r}): "
                                f"{_line_context(text, lineno)!r}") from None
    try:
        return MarketTree(nodes)
    except TreeFileError:
        raise
    except DomainError as exc:
        raise TreeFileError(f"{source}: {exc}") from None


def load_tree(path) -> MarketTree:
    p = Path(path)
    return loads_tree(p.read_text(), str(p))


def dumps_tree(tree: MarketTree) -> str:
    """One node per line, so parse diagnostics point at a single node."""
    rows = [json.dumps(r, sort_keys=False) for r in tree.to_dict()["nodes"]]
    return '{"nodes": [\n  ' + ",\n  ".join(rows) + "\n]}\n"


def dump_tree(tree: MarketTree, path) -> None:
    Path(path).write_text(dumps_tree(tree))

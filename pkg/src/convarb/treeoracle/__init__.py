"""Exact linear-programming oracle for supermartingale measures on finite trees."""

from .discretize import DISCRETIZED_MODELS, MAX_BRANCHING, MAX_PERIODS, discretize_model, random_tree
from .oracle import MAX_ATOMS, Certificate, OracleResult, solve, verify
from .simplex import LPSolution, solve_lp
from .tree import (MarketTree, Node, TreeFileError, dump_tree, dumps_tree, format_rational, load_tree,
                   loads_tree, parse_rational)

__all__ = [
    "Certificate",
    "DISCRETIZED_MODELS",
    "LPSolution",
    "MAX_ATOMS",
    "MAX_BRANCHING",
    "MAX_PERIODS",
    "MarketTree",
    "Node",
    "OracleResult",
    "TreeFileError",
    "discretize_model",
    "dump_tree",
    "dumps_tree",
    "format_rational",
    "load_tree",
    "loads_tree",
    "parse_rational",
    "random_tree",
    "solve",
    "solve_lp",
    "verify",
]

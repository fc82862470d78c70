"""Simulation and no-arbitrage analysis for two converging asset prices
when short sales are prohibited.

The subpackages mirror the analysis pipeline: :mod:`simkernel` generates the
stochastic primitives, :mod:`models` builds decomposed price paths,
:mod:`structure`, :mod:`arbitrage` and :mod:`density` analyse them, and
:mod:`treeoracle` gives exact answers on finite event trees.
"""

__version__ = "0.1.0"

"""Valuation and tail-risk toolkit for regulator human-capital-beta signals.

The subpackages follow the pipeline order: correlated GBM paths, indexed
benchmarks, Merton equity valuation, early exercise premium, mechanism
constraints and tail risk.
"""

from revdoor.benchmark import SignalParams
from revdoor.merton import CapitalStructure, EquityValuation
from revdoor.paths import MarketParams, PathSet, SimGrid

__version__ = "0.1.0"

__all__ = [
    "CapitalStructure",
    "EquityValuation",
    "MarketParams",
    "PathSet",
    "SignalParams",
    "SimGrid",
    "__version__",
]

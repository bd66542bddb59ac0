"""Lifecycle economics of grid storage doing energy arbitrage.

Degradation-aware daily dispatch, whole-life simulation under a marginal
benefit of usage, discounted cash flow, and physical vs economic end of life.
"""

__version__ = "0.1.0"

"""Exact generators, network reduction and spectral gap checks for particle processes on weighted graphs."""
__version__ = "0.1.0"

from .graph import WeightedGraph, parse_graph, random_graph, reduce_at
from .spectra import DEFAULT_TOL, Spectrum, Tolerances, spectral_gap

__all__ = ["DEFAULT_TOL", "Spectrum", "Tolerances", "WeightedGraph", "parse_graph",
           "random_graph", "reduce_at", "spectral_gap", "__version__"]

from .analytic import OverheadParams, OverheadReport, hetero_overhead, macro_overhead
from .delaunay import Triangulation, delaunay
from .montecarlo import MonteCarloReport, monte_carlo_overhead, sample_ppp

__all__ = [
    "OverheadParams",
    "OverheadReport",
    "MonteCarloReport",
    "Triangulation",
    "delaunay",
    "hetero_overhead",
    "macro_overhead",
    "monte_carlo_overhead",
    "sample_ppp",
]

"""Gibbs-sampler self-optimisation of heterogeneous cellular networks."""

__version__ = "0.1.0"

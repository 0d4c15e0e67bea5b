"""Volumetric stretch energy minimization for mass-preserving n-ball and (n-1)-sphere maps."""

__version__ = "0.1.0"

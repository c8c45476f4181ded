"""Numerical laboratory for discrete L2 Hodge theory on simplicial surfaces
and 1-D mode reductions of warped-product ends."""

__version__ = "0.1.0"

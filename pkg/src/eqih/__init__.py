"""Exact-arithmetic engine for the equivariant intersection cohomology of a
modelled circle action, computed from a finite model of the orbit-space data.
"""

__version__ = "0.1.0"

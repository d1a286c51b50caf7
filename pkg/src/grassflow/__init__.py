"""Discrete loop-space geometry: filament flows, moment maps, cocycles and holonomy."""

from .ambient import AmbientSpace, DifferentialForm, Diffeo, VectorField
from .errors import GrassflowError
from .loops import DiscreteLoop

__all__ = ["AmbientSpace", "DifferentialForm", "Diffeo", "DiscreteLoop", "GrassflowError", "VectorField"]
__version__ = "0.1.0"

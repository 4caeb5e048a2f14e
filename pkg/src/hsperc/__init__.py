"""Hard-sphere point processes, disagreement couplings and continuum percolation."""

from .estimate import Estimate, Method
from .geometry import Configuration, Region
from .hardcore import BoundaryCondition, is_hard_core
from .sampling import RngStream, sample_hard_sphere_rejection, sample_poisson

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition",
    "Configuration",
    "Estimate",
    "Method",
    "Region",
    "RngStream",
    "is_hard_core",
    "sample_hard_sphere_rejection",
    "sample_poisson",
]

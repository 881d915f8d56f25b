"""Voxel-based 3D topology optimization.

Minimizes structural volume under compliance, p-norm stress, eigenvalue and
buckling constraints (hard or soft) plus optional casting constraints, by
combining per-constraint topological sensitivity fields into an augmented-
Lagrangian-weighted level set and tracing decreasing volume fractions with
an assembly-free finite element core.
"""

__version__ = "0.1.0"

from .backends import backend_name
from .elements import Material
from .mesh import Domain, LoadCase, RegionSelector, Topology, build_domain, select

__all__ = [
    "Material",
    "Domain",
    "Topology",
    "RegionSelector",
    "LoadCase",
    "build_domain",
    "select",
    "backend_name",
    "__version__",
]

"""Kac-Ward operators on planar graphs and isoradial lattices."""

__version__ = "0.1.0"

from .exceptions import KacWardError, NumericalError, PreconditionError
from .geometry import PlanarGraph, turning_angle, validate
from .isoradial import IsoradialLattice, build_lattice, build_square, weights
from .operator import assemble, determinant, invert, kac_ward, partition_Z
from .walks import oracle_Z
from .estimators import DecayProfiler, FermionicObservable, KacWardOperator

__all__ = [
    "DecayProfiler",
    "FermionicObservable",
    "IsoradialLattice",
    "KacWardError",
    "KacWardOperator",
    "NumericalError",
    "PlanarGraph",
    "PreconditionError",
    "assemble",
    "build_lattice",
    "build_square",
    "determinant",
    "invert",
    "kac_ward",
    "oracle_Z",
    "partition_Z",
    "turning_angle",
    "validate",
    "weights",
]

"""Minimal disks bounded by three straight lines and their CMC-1 trinoid cousins."""

from .geometry import (DegenerateTripleError, OrientedLine, TripleConfig, classify_triple,
                       lines_from_config)
from .solver import PqrSolution, construct, solve_pqr
from .surface import WeierstrassEvaluator, generate_mesh
from .trinoid import TrinoidSpec, trinoid_mesh

__version__ = "0.1.0"

__all__ = [
    "DegenerateTripleError", "OrientedLine", "TripleConfig", "classify_triple", "lines_from_config",
    "PqrSolution", "construct", "solve_pqr", "WeierstrassEvaluator", "generate_mesh",
    "TrinoidSpec", "trinoid_mesh",
]

"""Unfitted XFEM solver for 2D elliptic interface problems on the unit disk."""

from .mesh import Mesh, build_coarse_disk, refine, disk_mesh
from .levelset import CircleLevelSet, EnrichmentKind, Side
from .space import CellCategory, SpaceMode, EnrichedSpace, build_space
from .assembly import ProblemSpec, SparseSystem, assemble_system
from .solver import SolverConfig, solve
from .post import ErrorReport, measure_errors, rate_table, write_vtk

__version__ = "0.1.0"

__all__ = [
    "Mesh",
    "build_coarse_disk",
    "refine",
    "disk_mesh",
    "CircleLevelSet",
    "EnrichmentKind",
    "Side",
    "CellCategory",
    "SpaceMode",
    "EnrichedSpace",
    "build_space",
    "ProblemSpec",
    "SparseSystem",
    "assemble_system",
    "SolverConfig",
    "solve",
    "ErrorReport",
    "measure_errors",
    "rate_table",
    "write_vtk",
]

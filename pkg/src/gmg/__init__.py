"""Matrix-free geometric multigrid on uniform periodic high-order meshes."""

from .basis import lagrange_values, lgl_nodes, reference_matrices
from .cycle import CycleParams, PcgResult, assemble_rhs, history_csv, jacobi_smooth, pcg_solve, vcycle
from .hierarchy import MGHierarchy, assemble_hierarchy, default_levels
from .mesh import MeshLevel
from .transfer import prolong, prolongation_1d, restrict

__all__ = [
    "CycleParams",
    "MGHierarchy",
    "MeshLevel",
    "PcgResult",
    "assemble_hierarchy",
    "assemble_rhs",
    "default_levels",
    "history_csv",
    "jacobi_smooth",
    "lagrange_values",
    "lgl_nodes",
    "pcg_solve",
    "prolong",
    "prolongation_1d",
    "reference_matrices",
    "restrict",
    "vcycle",
]

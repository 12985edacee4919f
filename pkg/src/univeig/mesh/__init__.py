"""Immersed triangle meshes, their operators, and test geometries."""

from .core import ImmersedMesh, MeshError, read_mesh, write_mesh
from .generators import (
    make_clifford_torus,
    make_disk,
    make_ellipsoid,
    make_flat_torus,
    make_icosphere,
    make_spherical_cap,
)
from .operators import (
    DiscreteOperator,
    EigenmapData,
    EigenmapValidation,
    MeanCurvatureField,
    apply_dirichlet,
    assemble_laplacian,
    assemble_schrodinger,
    delta_integrals,
    mean_curvature,
    triangle_energy_density,
    validate_eigenmap,
)

__all__ = [
    "ImmersedMesh",
    "MeshError",
    "read_mesh",
    "write_mesh",
    "make_clifford_torus",
    "make_disk",
    "make_ellipsoid",
    "make_flat_torus",
    "make_icosphere",
    "make_spherical_cap",
    "DiscreteOperator",
    "EigenmapData",
    "EigenmapValidation",
    "MeanCurvatureField",
    "apply_dirichlet",
    "assemble_laplacian",
    "assemble_schrodinger",
    "delta_integrals",
    "mean_curvature",
    "triangle_energy_density",
    "validate_eigenmap",
]

"""Piecewise-linear Laplace-Beltrami and Schrodinger operators on immersed meshes.

Conventions: ``stiffness`` discretizes ``-Laplacian`` (positive semidefinite),
``mass`` is the lumped vertex-area diagonal, and the mean curvature vector
is ``h = Laplacian X`` so that ``|h|^2 = 4`` on the unit 2-sphere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import ImmersedMesh, MeshError

__all__ = [
    "DiscreteOperator",
    "MeanCurvatureField",
    "EigenmapData",
    "EigenmapValidation",
    "assemble_laplacian",
    "mean_curvature",
    "assemble_schrodinger",
    "apply_dirichlet",
    "delta_integrals",
    "triangle_energy_density",
    "validate_eigenmap",
]


@dataclass(frozen=True)
class DiscreteOperator:
    """Stiffness/mass pair for a mesh plus the Dirichlet index map.

    ``interior`` lists the vertex ids kept by the Dirichlet restriction, in
    row order; on a closed mesh it is every vertex.
    """

    stiffness: sp.csr_matrix
    mass: np.ndarray
    interior: np.ndarray
    n_vertices: int

    @property
    def mass_matrix(self) -> sp.dia_matrix:
        return sp.diags(self.mass)

    @property
    def has_boundary(self) -> bool:
        return len(self.interior) < self.n_vertices


def _corner_geometry(mesh: ImmersedMesh):
    """Per-triangle cotangents at each corner and doubled areas, in any R^m."""
    X = mesh.vertices
    t = mesh.triangles
    cots = np.empty((len(t), 3))
    double_area = None
    for corner in range(3):
        a = X[t[:, corner]]
        b = X[t[:, (corner + 1) % 3]]
        c = X[t[:, (corner + 2) % 3]]
        u, v = b - a, c - a
        uv = np.einsum("ij,ij->i", u, v)
        cross_sq = np.einsum("ij,ij->i", u, u) * np.einsum("ij,ij->i", v, v) - uv * uv
        da = np.sqrt(np.maximum(cross_sq, 0.0))
        if double_area is None:
            double_area = da
        cots[:, corner] = uv / np.where(da > 0, da, 1.0)
    return cots, double_area


def assemble_laplacian(mesh: ImmersedMesh) -> DiscreteOperator:
    """Cotangent stiffness matrix and barycentric lumped mass of a mesh.

    Raises :class:`MeshError` naming the first degenerate (zero-area) triangle.
    """
    cots, double_area = _corner_geometry(mesh)
    scale = np.max(double_area)
    bad = np.flatnonzero(double_area <= 1e-14 * scale)
    if len(bad):
        raise MeshError(f"degenerate triangle {int(bad[0])}: vertices {mesh.triangles[bad[0]].tolist()}")
    t = mesh.triangles
    n = mesh.n_vertices
    rows, cols, vals = [], [], []
    for corner in range(3):
        # the corner's cotangent weights the opposite edge
        i = t[:, (corner + 1) % 3]
        j = t[:, (corner + 2) % 3]
        w = 0.5 * cots[:, corner]
        rows += [i, j]
        cols += [j, i]
        vals += [-w, -w]
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    off = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    diag = -np.asarray(off.sum(axis=1)).ravel()
    stiffness = (off + sp.diags(diag)).tocsr()
    stiffness.sum_duplicates()
    stiffness.sort_indices()

    mass = np.bincount(t.ravel(), weights=np.repeat(double_area / 6.0, 3), minlength=n)
    if np.any(mass <= 0):
        raise MeshError("vertex with zero lumped area (isolated vertex?)")
    interior = np.flatnonzero(mesh.interior_mask())
    if len(interior) == 0:
        raise MeshError("mesh has no interior vertices")
    return DiscreteOperator(stiffness, mass, interior, n)


def assemble_schrodinger(op: DiscreteOperator, q) -> sp.csr_matrix:
    """``H = S + M diag(q)`` on all vertices; ``q`` is a per-vertex potential."""
    q = np.broadcast_to(np.asarray(q, dtype=float), (op.n_vertices,))
    if not np.all(np.isfinite(q)):
        raise ValueError("potential must be finite")
    return (op.stiffness + sp.diags(op.mass * q)).tocsr()


def apply_dirichlet(op: DiscreteOperator, H=None):
    """Restrict ``H`` (default: the stiffness) and the mass to interior vertices.

    Returns ``(H_interior, mass_interior, interior_index)``.  Closed meshes
    come back unchanged.
    """
    H = op.stiffness if H is None else sp.csr_matrix(H)
    idx = op.interior
    if len(idx) == 0:
        raise ValueError("Dirichlet restriction leaves no interior vertices")
    if len(idx) == op.n_vertices:
        return H, op.mass, idx
    return H[idx][:, idx].tocsr(), op.mass[idx], idx


@dataclass
class MeanCurvatureField:
    vectors: np.ndarray
    squared: np.ndarray
    sup_sq: float
    mean_sq: float
    mask: np.ndarray  # vertices entering the sup statistic

    def potential(self, g: float) -> np.ndarray:
        """Geometric potential ``g |h|^2``."""
        return g * self.squared


def mean_curvature(mesh: ImmersedMesh, op: DiscreteOperator | None = None) -> MeanCurvatureField:
    """Discrete mean curvature vector ``h_v = -(S X)_v / M_vv``.

    The sup statistic runs over interior vertices of valence 6; the mean
    ``(1/V) int |h|^2`` is mass-weighted over interior vertices.
    """
    op = op or assemble_laplacian(mesh)
    h = -(op.stiffness @ mesh.vertices) / op.mass[:, None]
    sq = np.einsum("ij,ij->i", h, h)
    mask = mesh.regular_mask()
    if not mask.any():
        mask = mesh.interior_mask()
    interior = mesh.interior_mask()
    mean = float(np.sum(sq[interior] * op.mass[interior]) / np.sum(op.mass[interior]))
    return MeanCurvatureField(h, sq, float(sq[mask].max()), mean, mask)


def delta_integrals(eigvecs, h_sq, q, mass, tol: float = 1e-6) -> np.ndarray:
    """Moments ``delta_i = sum_v (|h_v|^2/4 - q_v) u_i(v)^2 M_vv``.

    ``eigvecs`` holds ``M``-orthonormal eigenvectors as columns; a column
    whose ``M``-norm differs from 1 by more than ``tol`` is rejected.
    """
    U = np.asarray(eigvecs, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    mass = np.asarray(mass, dtype=float)
    norms = np.einsum("ij,ij,i->j", U, U, mass)
    if np.any(np.abs(norms - 1.0) > tol):
        raise ValueError(f"eigenvectors are not M-normalized (norms {norms.min():.6g}..{norms.max():.6g})")
    integrand = np.asarray(h_sq, dtype=float) / 4 - np.broadcast_to(np.asarray(q, dtype=float), mass.shape)
    return np.einsum("ij,ij,i->j", U, U, integrand * mass)


@dataclass
class EigenmapData:
    """Component functions ``phi_1..phi_{m+1}`` (columns) and their eigenvalue."""

    components: np.ndarray
    eigenvalue: float


@dataclass
class EigenmapValidation:
    norm_deviation: float
    energy_deviation: float
    norm_tol: float
    energy_tol: float

    @property
    def passed(self) -> bool:
        return self.norm_deviation <= self.norm_tol and self.energy_deviation <= self.energy_tol


def triangle_energy_density(mesh: ImmersedMesh, fields) -> np.ndarray:
    """Per-triangle ``sum_a |grad phi_a|^2`` of the piecewise-linear interpolants.

    Gradients are intrinsic to each flat triangle (metric from the embedded
    edge vectors), so the result does not depend on the ambient dimension.
    """
    F = np.asarray(fields, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    X = mesh.vertices
    t = mesh.triangles
    e1 = X[t[:, 1]] - X[t[:, 0]]
    e2 = X[t[:, 2]] - X[t[:, 0]]
    g11 = np.einsum("ij,ij->i", e1, e1)
    g12 = np.einsum("ij,ij->i", e1, e2)
    g22 = np.einsum("ij,ij->i", e2, e2)
    det = g11 * g22 - g12 * g12
    d1 = F[t[:, 1]] - F[t[:, 0]]
    d2 = F[t[:, 2]] - F[t[:, 0]]
    # |grad f|^2 = d^T G^{-1} d with d the edge differences
    quad = (g22[:, None] * d1 * d1 - 2 * g12[:, None] * d1 * d2 + g11[:, None] * d2 * d2) / det[:, None]
    return quad.sum(axis=1)


def validate_eigenmap(
    mesh: ImmersedMesh, data: EigenmapData, norm_tol: float = 1e-8, energy_tol: float = 1e-2
) -> EigenmapValidation:
    """Check that a map into a sphere has unit norm and constant energy density.

    Reports the largest per-vertex deviation of ``sum phi_a^2`` from 1 and the
    largest per-triangle deviation of the energy density from the eigenvalue.
    """
    F = np.asarray(data.components, dtype=float)
    if F.ndim != 2 or F.shape[1] < 2:
        raise ValueError("an eigenmap needs at least two component fields")
    if F.shape[0] != mesh.n_vertices:
        raise ValueError("component fields must be sampled at every vertex")
    norm_dev = float(np.abs(np.sum(F * F, axis=1) - 1.0).max())
    energy = triangle_energy_density(mesh, F)
    energy_dev = float(np.abs(energy - data.eigenvalue).max())
    return EigenmapValidation(norm_dev, energy_dev, norm_tol, energy_tol)

"""Triangle meshes immersed in R^m and their ASCII file format."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = ["MeshError", "ImmersedMesh", "read_mesh", "write_mesh"]


class MeshError(ValueError):
    """Invalid mesh data (bad indices, degenerate triangles, non-manifold edges)."""


@dataclass
class ImmersedMesh:
    """A triangulated surface (intrinsic dimension 2) with vertices in R^m.

    ``boundary_vertices`` is derived from edge incidence; a supplied set must
    agree with it.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_vertices: np.ndarray | None = None
    name: str = ""
    parameters: np.ndarray | None = None  # intrinsic coordinates, when known
    _edges: np.ndarray = field(init=False, repr=False)
    _edge_counts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] < 2:
            raise MeshError("vertices must be an (N, m) array with m >= 2")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshError("triangles must be a (T, 3) index array")
        if len(self.triangles) == 0:
            raise MeshError("mesh has no triangles")
        if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
            raise MeshError("triangle index out of range")
        if not np.all(np.isfinite(self.vertices)):
            raise MeshError("vertex coordinates must be finite")
        t = self.triangles
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            raise MeshError("triangle with repeated vertex")

        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        if len(np.unique(directed, axis=0)) != len(directed):
            raise MeshError("triangles are not consistently oriented (repeated directed edge)")
        undirected = np.sort(directed, axis=1)
        edges, counts = np.unique(undirected, axis=0, return_counts=True)
        if counts.max() > 2:
            raise MeshError("non-manifold edge shared by more than two triangles")
        self._edges = edges
        self._edge_counts = counts

        computed = np.unique(edges[counts == 1])
        if self.boundary_vertices is None:
            self.boundary_vertices = computed
        else:
            given = np.unique(np.asarray(self.boundary_vertices, dtype=np.int64))
            if not np.array_equal(given, computed):
                raise MeshError("boundary vertex list does not match the boundary edges")
            self.boundary_vertices = given

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def intrinsic_dim(self) -> int:
        return 2

    @property
    def is_closed(self) -> bool:
        return len(self.boundary_vertices) == 0

    @property
    def edges(self) -> np.ndarray:
        return self._edges

    def interior_mask(self) -> np.ndarray:
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[self.boundary_vertices] = False
        return mask

    def valence(self) -> np.ndarray:
        return np.bincount(self._edges.ravel(), minlength=self.n_vertices)

    def regular_mask(self) -> np.ndarray:
        """Interior vertices of valence 6."""
        return self.interior_mask() & (self.valence() == 6)

    def triangle_areas(self) -> np.ndarray:
        X = self.vertices
        u = X[self.triangles[:, 1]] - X[self.triangles[:, 0]]
        v = X[self.triangles[:, 2]] - X[self.triangles[:, 0]]
        uu = np.einsum("ij,ij->i", u, u)
        vv = np.einsum("ij,ij->i", v, v)
        uv = np.einsum("ij,ij->i", u, v)
        return 0.5 * np.sqrt(np.maximum(uu * vv - uv * uv, 0.0))

    def area(self) -> float:
        return float(self.triangle_areas().sum())

    def euler_characteristic(self) -> int:
        used = len(np.unique(self.triangles))
        return used - len(self._edges) + len(self.triangles)

    def adjacency(self) -> sp.csr_matrix:
        i, j = self._edges.T
        n = self.n_vertices
        data = np.ones(2 * len(i))
        return sp.csr_matrix((data, (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n))


def read_mesh(path: str | os.PathLike, name: str | None = None) -> ImmersedMesh:
    """Read the ASCII mesh format.

    Layout (``#`` starts a comment)::

        <n_vertices> <n_triangles> <m>
        x_1 ... x_m                 one row per vertex
        i j k                       one row per triangle, 0-based
        boundary <count>            optional
        b_1 b_2 ...                 boundary vertex indices
    """
    tokens_by_line = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                tokens_by_line.append((lineno, line.split()))
    if not tokens_by_line:
        raise MeshError(f"{path}: empty mesh file")
    lineno, header = tokens_by_line[0]
    try:
        nv, nt, m = (int(x) for x in header)
    except ValueError as exc:
        raise MeshError(f"{path}:{lineno}: header must be '<nv> <nt> <m>'") from exc
    body = tokens_by_line[1:]
    if len(body) < nv + nt:
        raise MeshError(f"{path}: expected {nv} vertex rows and {nt} triangle rows")

    def parse(rows, width, kind, conv):
        out = []
        for ln, toks in rows:
            if len(toks) != width:
                raise MeshError(f"{path}:{ln}: {kind} row needs {width} values, got {len(toks)}")
            try:
                out.append([conv(x) for x in toks])
            except ValueError as exc:
                raise MeshError(f"{path}:{ln}: malformed {kind} row") from exc
        return out

    verts = parse(body[:nv], m, "vertex", float)
    tris = parse(body[nv : nv + nt], 3, "triangle", int)
    rest = body[nv + nt :]
    boundary = None
    if rest:
        ln, toks = rest[0]
        if toks[0] != "boundary" or len(toks) != 2:
            raise MeshError(f"{path}:{ln}: expected 'boundary <count>'")
        count = int(toks[1])
        boundary = [int(x) for _, row in rest[1:] for x in row]
        if len(boundary) != count:
            raise MeshError(f"{path}: boundary lists {len(boundary)} indices, header says {count}")
    return ImmersedMesh(
        np.array(verts, dtype=float).reshape(nv, m),
        np.array(tris, dtype=np.int64).reshape(nt, 3),
        boundary_vertices=boundary,
        name=name or os.path.basename(str(path)),
    )


def write_mesh(mesh: ImmersedMesh, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_vertices} {len(mesh.triangles)} {mesh.ambient_dim}\n")
        for row in mesh.vertices:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")
        for tri in mesh.triangles:
            fh.write(f"{tri[0]} {tri[1]} {tri[2]}\n")
        if not mesh.is_closed:
            fh.write(f"boundary {len(mesh.boundary_vertices)}\n")
            fh.write(" ".join(str(int(b)) for b in mesh.boundary_vertices) + "\n")

"""Test geometries: spheres, ellipsoids, flat and Clifford tori, disks, caps."""

from __future__ import annotations

import numpy as np
from scipy.spatial import Delaunay

from .core import ImmersedMesh

__all__ = [
    "make_icosphere",
    "make_ellipsoid",
    "make_clifford_torus",
    "make_flat_torus",
    "make_disk",
    "make_spherical_cap",
]


def _icosahedron():
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=float,
    )
    f = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    return v / np.linalg.norm(v, axis=1, keepdims=True), f


def _subdivide(vertices, faces):
    verts = list(vertices)
    cache = {}

    def midpoint(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in cache:
            p = 0.5 * (verts[a] + verts[b])
            verts.append(p / np.linalg.norm(p))
            cache[key] = len(verts) - 1
        return cache[key]

    out = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]])
    return np.array(verts), np.array(out, dtype=np.int64)


def make_icosphere(subdivisions: int = 4, radius: float = 1.0) -> ImmersedMesh:
    """Subdivided icosahedron projected onto the sphere of the given radius."""
    if subdivisions < 0:
        raise ValueError("subdivisions must be >= 0")
    if radius <= 0:
        raise ValueError("radius must be positive")
    v, f = _icosahedron()
    for _ in range(subdivisions):
        v, f = _subdivide(v, f)
    return ImmersedMesh(radius * v, f, name=f"icosphere-{subdivisions}")


def make_ellipsoid(a: float, b: float, c: float, subdivisions: int = 4) -> ImmersedMesh:
    if min(a, b, c) <= 0:
        raise ValueError("semi-axes must be positive")
    sphere = make_icosphere(subdivisions)
    return ImmersedMesh(
        sphere.vertices * np.array([a, b, c]), sphere.triangles, name=f"ellipsoid-{a}-{b}-{c}"
    )


def _periodic_grid_triangles(nx: int, ny: int) -> np.ndarray:
    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    i, j = i.ravel(), j.ravel()
    v00 = i * ny + j
    v10 = ((i + 1) % nx) * ny + j
    v11 = ((i + 1) % nx) * ny + (j + 1) % ny
    v01 = i * ny + (j + 1) % ny
    return np.concatenate([np.stack([v00, v10, v11], 1), np.stack([v00, v11, v01], 1)])


def make_flat_torus(
    lx: float = 2 * np.pi, ly: float = 2 * np.pi, resolution: int | tuple[int, int] = 64
) -> ImmersedMesh:
    """Flat ``lx`` x ``ly`` torus, isometrically embedded in R^4 as a product of circles.

    Vertex ``(x, y)`` maps to ``(rx cos(x/rx), rx sin(x/rx), ry cos(y/ry), ry sin(y/ry))``
    with ``r = l / 2pi``.
    """
    nx, ny = (resolution, resolution) if np.isscalar(resolution) else resolution
    if min(nx, ny) < 3:
        raise ValueError("flat torus needs at least 3 samples per direction")
    if min(lx, ly) <= 0:
        raise ValueError("side lengths must be positive")
    rx, ry = lx / (2 * np.pi), ly / (2 * np.pi)
    s = 2 * np.pi * np.arange(nx) / nx
    t = 2 * np.pi * np.arange(ny) / ny
    S, T = np.meshgrid(s, t, indexing="ij")
    S, T = S.ravel(), T.ravel()
    X = np.stack([rx * np.cos(S), rx * np.sin(S), ry * np.cos(T), ry * np.sin(T)], axis=1)
    return ImmersedMesh(
        X,
        _periodic_grid_triangles(nx, ny),
        name=f"flat-torus-{lx:g}x{ly:g}",
        parameters=np.stack([rx * S, ry * T], axis=1),
    )


def make_clifford_torus(resolution: int = 64) -> ImmersedMesh:
    """Clifford torus ``S^1(1/sqrt2) x S^1(1/sqrt2)`` in the unit sphere of R^4."""
    side = 2 * np.pi / np.sqrt(2)
    mesh = make_flat_torus(side, side, resolution)
    mesh.name = f"clifford-torus-{resolution}"
    return mesh


def _polar_disk(resolution: int):
    """Points on concentric rings of the unit disk and their Delaunay triangles."""
    if resolution < 2:
        raise ValueError("resolution (ring count) must be >= 2")
    pts = [np.zeros(2)]
    for ring in range(1, resolution + 1):
        r = ring / resolution
        m = 6 * ring
        ang = 2 * np.pi * (np.arange(m) + 0.5 * (ring % 2)) / m
        pts.extend(np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1))
    pts = np.array(pts)
    tri = Delaunay(pts).simplices.astype(np.int64)
    # counter-clockwise orientation in the parameter plane
    a, b, c = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    tri[cross < 0] = tri[cross < 0][:, [0, 2, 1]]
    return pts, tri


def make_disk(resolution: int = 24, radius: float = 1.0) -> ImmersedMesh:
    """Planar disk in R^2 triangulated on ``resolution`` concentric rings."""
    pts, tri = _polar_disk(resolution)
    return ImmersedMesh(radius * pts, tri, name=f"disk-{resolution}")


def make_spherical_cap(angle: float, resolution: int = 24) -> ImmersedMesh:
    """Geodesic cap ``{theta <= angle}`` of the unit sphere around the north pole."""
    if not 0 < angle < np.pi:
        raise ValueError("cap angle must lie in (0, pi)")
    pts, tri = _polar_disk(resolution)
    r = np.linalg.norm(pts, axis=1)
    theta = r * angle
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    X = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=1)
    return ImmersedMesh(X, tri, name=f"cap-{angle:.4g}-{resolution}")

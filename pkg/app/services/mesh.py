"""
Triangulation of simple polygons for the P1 eigensolver.

Level 0 is the triangle itself, a fan from the centroid for other convex
polygons, or ear clipping for everything else. Each further level splits
every triangle into four through its edge midpoints, which keeps the mesh
conforming and halves the mesh size.
"""
from __future__ import annotations

import logging
import math

import numpy as np
from shapely.geometry import Polygon as ShapelyPolygon

from app.errors import InvalidShapeError
from app.models import Mesh, Polygon
from app.services import polygon as geometry

logger = logging.getLogger(__name__)


def _orientation(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _min_angle(a, b, c) -> float:
    angles = []
    for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
        u = (q[0] - p[0], q[1] - p[1])
        v = (r[0] - p[0], r[1] - p[1])
        angles.append(abs(math.atan2(u[0] * v[1] - u[1] * v[0], u[0] * v[0] + u[1] * v[1])))
    return min(angles)


def _touches_triangle(p, a, b, c, eps: float) -> bool:
    """True if p lies inside the CCW triangle abc or on its boundary."""
    return (
        _orientation(a, b, p) >= -eps
        and _orientation(b, c, p) >= -eps
        and _orientation(c, a, p) >= -eps
    )


def ear_clip(vertices: np.ndarray) -> list[tuple[int, int, int]]:
    """
    Triangulate a counter-clockwise simple polygon by repeatedly cutting ears.

    Among the valid ears the one with the largest minimum angle is cut first;
    ties go to the earliest vertex, so the result is deterministic.
    """
    pts = [tuple(map(float, v)) for v in vertices]
    extent = float(np.ptp(vertices, axis=0).max())
    eps = 1e-12 * extent * extent
    remaining = list(range(len(pts)))
    triangles: list[tuple[int, int, int]] = []

    while len(remaining) > 3:
        m = len(remaining)
        best: tuple[float, int] | None = None
        for k in range(m):
            i, j, l = remaining[k - 1], remaining[k], remaining[(k + 1) % m]
            a, b, c = pts[i], pts[j], pts[l]
            if _orientation(a, b, c) <= eps:
                continue
            if any(
                _touches_triangle(pts[o], a, b, c, eps)
                for o in remaining
                if o not in (i, j, l)
            ):
                continue
            quality = _min_angle(a, b, c)
            if best is None or quality > best[0] + 1e-12:
                best = (quality, k)
        if best is None:
            raise InvalidShapeError(f"Ear clipping found no ear with {m} vertices left; polygon is degenerate.")
        k = best[1]
        triangles.append((remaining[k - 1], remaining[k], remaining[(k + 1) % m]))
        del remaining[k]

    i, j, l = remaining
    if _orientation(pts[i], pts[j], pts[l]) <= eps:
        raise InvalidShapeError("Ear clipping left a degenerate final triangle.")
    triangles.append((i, j, l))
    return triangles


def boundary_mask(n_nodes: int, triangles: np.ndarray) -> np.ndarray:
    """Nodes on edges that belong to exactly one triangle."""
    edges = np.sort(triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
    unique, counts = np.unique(edges, axis=0, return_counts=True)
    mask = np.zeros(n_nodes, dtype=bool)
    mask[unique[counts == 1].ravel()] = True
    return mask


def base_mesh(p: Polygon) -> Mesh:
    vertices = np.array(p.vertices)
    if p.n == 3:
        nodes, triangles = vertices, np.array([[0, 1, 2]])
    elif geometry.is_convex(p):
        centroid = ShapelyPolygon(vertices).centroid
        nodes = np.vstack([vertices, [[centroid.x, centroid.y]]])
        idx = np.arange(p.n)
        triangles = np.column_stack([idx, np.roll(idx, -1), np.full(p.n, p.n)])
    else:
        nodes, triangles = vertices, np.array(ear_clip(vertices))
    return Mesh(
        nodes=nodes,
        triangles=triangles,
        boundary=boundary_mask(len(nodes), triangles),
        level=0,
        polygon=p,
    )


def refine(mesh: Mesh) -> Mesh:
    """Split every triangle into four through its edge midpoints."""
    tri = mesh.triangles
    n_nodes = len(mesh.nodes)
    edges = np.sort(tri[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
    unique, inverse, counts = np.unique(edges, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)

    midpoints = 0.5 * (mesh.nodes[unique[:, 0]] + mesh.nodes[unique[:, 1]])
    nodes = np.vstack([mesh.nodes, midpoints])
    boundary = np.concatenate([mesh.boundary, counts == 1])

    mid = (n_nodes + inverse).reshape(-1, 3)  # midpoints of edges (0,1), (1,2), (2,0)
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    ab, bc, ca = mid[:, 0], mid[:, 1], mid[:, 2]
    children = np.stack(
        [
            np.column_stack([a, ab, ca]),
            np.column_stack([ab, b, bc]),
            np.column_stack([ca, bc, c]),
            np.column_stack([ab, bc, ca]),
        ],
        axis=1,
    ).reshape(-1, 3)
    return Mesh(nodes=nodes, triangles=children, boundary=boundary, level=mesh.level + 1, polygon=mesh.polygon)


def triangulate(p: Polygon, level: int) -> Mesh:
    if level < 0:
        raise InvalidShapeError(f"Refinement level must be nonnegative, got {level}.")
    mesh = base_mesh(p)
    for _ in range(level):
        mesh = refine(mesh)
    logger.debug("Mesh level %d: %d nodes, %d triangles", level, len(mesh.nodes), len(mesh.triangles))
    return mesh


def triangle_areas(mesh: Mesh) -> np.ndarray:
    """Signed areas; positive for every triangle of a valid mesh."""
    p = mesh.nodes[mesh.triangles]
    return 0.5 * (
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    )


def max_diameter(mesh: Mesh) -> float:
    p = mesh.nodes[mesh.triangles]
    sides = np.linalg.norm(p - np.roll(p, -1, axis=1), axis=2)
    return float(sides.max())


def interpolate(mesh: Mesh, fn) -> np.ndarray:
    """Nodal values of fn(x, y) (vectorised over arrays)."""
    return np.asarray(fn(mesh.nodes[:, 0], mesh.nodes[:, 1]), dtype=float)

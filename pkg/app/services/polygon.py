"""
Planar polygon geometry.

Constructors for the shape families used across the package, exact
measurements, convexity, extents (diameter, width, inradius) and congruence.
All functions are pure; polygons are immutable values from app.models.
"""
from __future__ import annotations

import logging
import math
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog
from scipy.spatial.distance import pdist

from app.config import settings
from app.errors import ConvergenceError, InvalidShapeError
from app.models import ParallelogramParams, Polygon, TrapezoidParams

logger = logging.getLogger(__name__)

# The two drums of the classic isospectral pair. Each is glued from seven
# right isosceles triangles with unit legs; the gluing patterns are the point
# and line graphs of three transvections acting on the Fano plane.
GWW_VERTICES = (
    ((0, -1), (1, 0), (1, 1), (-1, 1), (-1, 2), (-2, 1), (-1, 0), (0, 0)),
    ((1, -1), (1, 0), (-1, 2), (-1, 1), (-2, 1), (-1, 0), (0, 0), (0, -1)),
)


class Measurements(NamedTuple):
    area: float
    perimeter: float
    angles: np.ndarray  # interior angles, radians


class Extents(NamedTuple):
    diameter: float
    inradius: float
    width: float


def make_polygon(points) -> Polygon:
    return Polygon(np.asarray(points, dtype=float))


def edge_vectors(p: Polygon) -> np.ndarray:
    """Edge i runs from vertex i to vertex i + 1."""
    return np.roll(p.vertices, -1, axis=0) - p.vertices


def edge_lengths(p: Polygon) -> np.ndarray:
    e = edge_vectors(p)
    return np.hypot(e[:, 0], e[:, 1])


def signed_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def interior_angles(p: Polygon) -> np.ndarray:
    """Interior angle at every vertex, in (0, 2 pi); reflex corners exceed pi."""
    v = p.vertices
    to_prev = np.roll(v, 1, axis=0) - v
    to_next = np.roll(v, -1, axis=0) - v
    cross = to_next[:, 0] * to_prev[:, 1] - to_next[:, 1] * to_prev[:, 0]
    dot = np.sum(to_next * to_prev, axis=1)
    return np.mod(np.arctan2(cross, dot), 2 * math.pi)


def measurements(p: Polygon) -> Measurements:
    return Measurements(
        area=signed_area(p.vertices),
        perimeter=float(math.fsum(edge_lengths(p))),
        angles=interior_angles(p),
    )


def shape_functional(p: Polygon) -> float:
    """Area over squared perimeter; depends only on the shape, not the size."""
    m = measurements(p)
    return m.area / m.perimeter ** 2


def regular_shape_functional(n: int) -> float:
    return 1.0 / (4 * n * math.tan(math.pi / n))


def is_convex(p: Polygon) -> bool:
    return bool(np.all(interior_angles(p) < math.pi))


def make_regular_ngon(n: int, side: float = 1.0) -> Polygon:
    """Regular n-gon with one horizontal edge at the bottom, centred on the origin."""
    if n < 3:
        raise InvalidShapeError(f"A regular polygon needs n >= 3, got {n}.")
    if not side > 0:
        raise InvalidShapeError(f"Side length must be positive, got {side}.")
    radius = side / (2 * math.sin(math.pi / n))
    theta = -math.pi / 2 - math.pi / n + 2 * math.pi * np.arange(n) / n
    return Polygon(np.column_stack([radius * np.cos(theta), radius * np.sin(theta)]))


def make_rectangle(length: float, width: float) -> Polygon:
    if not (length > 0 and width > 0):
        raise InvalidShapeError("Rectangle sides must be positive.")
    return Polygon([(0.0, 0.0), (length, 0.0), (length, width), (0.0, width)])


def make_parallelogram(params: ParallelogramParams) -> Polygon:
    """Long side on the x-axis, smallest angle at the origin."""
    dx = params.W * math.cos(params.alpha)
    dy = params.W * math.sin(params.alpha)
    return Polygon([(0.0, 0.0), (params.L, 0.0), (params.L + dx, dy), (dx, dy)])


def make_trapezoid(params: TrapezoidParams) -> Polygon:
    """Base on the x-axis from the origin; angle alpha at the origin, beta at (B, 0)."""
    left = params.h / math.tan(params.alpha)
    right = params.B - params.h / math.tan(params.beta)
    return Polygon([(0.0, 0.0), (params.B, 0.0), (right, params.h), (left, params.h)])


def thin_triangle(w: float, d: float) -> Polygon:
    """Triangle spanned by a width-w segment on the y-axis and the point (d/3, 0)."""
    if not (w > 0 and d > 0):
        raise InvalidShapeError("Triangle width and length must be positive.")
    return Polygon([(0.0, w / 2), (0.0, -w / 2), (d / 3, 0.0)])


def gww_pair() -> tuple[Polygon, Polygon]:
    return Polygon(GWW_VERTICES[0]), Polygon(GWW_VERTICES[1])


def random_convex_polygon(n: int, rng: np.random.Generator) -> Polygon:
    """
    Random convex n-gon: a cyclic polygon with bounded angular gaps, then a
    random stretch, rotation and shift (affine maps keep convexity).
    """
    if n < 3:
        raise InvalidShapeError(f"A polygon needs n >= 3, got {n}.")
    gaps = rng.uniform(0.5, 1.5, n)
    theta = rng.uniform(0, 2 * math.pi) + 2 * math.pi * np.cumsum(gaps) / gaps.sum()
    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    pts[:, 0] *= rng.uniform(0.6, 1.4)
    return transform(Polygon(pts), angle=rng.uniform(0, 2 * math.pi), shift=rng.uniform(-1, 1, 2))


def scale(p: Polygon, c: float) -> Polygon:
    if not c > 0:
        raise InvalidShapeError(f"Scale factor must be positive, got {c}.")
    return Polygon(p.vertices * c)


def transform(p: Polygon, angle: float = 0.0, shift=(0.0, 0.0), reflect: bool = False) -> Polygon:
    """Rigid motion: optional reflection in the y-axis, rotation about the origin, then shift."""
    pts = np.array(p.vertices)
    if reflect:
        pts[:, 0] = -pts[:, 0]
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return Polygon(pts @ rot.T + np.asarray(shift, dtype=float))


def diameter(p: Polygon) -> float:
    return float(pdist(p.vertices).max())


def outward_normals(p: Polygon) -> np.ndarray:
    e = edge_vectors(p)
    lengths = np.hypot(e[:, 0], e[:, 1])
    return np.column_stack([e[:, 1], -e[:, 0]]) / lengths[:, None]


def width(p: Polygon) -> float:
    """Thinnest enclosing strip; for a convex polygon one side of it is flush with an edge."""
    _require_convex(p, "width")
    normals = outward_normals(p)
    # depth[i, j] = n_i . (v_i - v_j), how far vertex j lies behind edge line i
    depth = np.einsum("ik,ijk->ij", normals, p.vertices[:, None, :] - p.vertices[None, :, :])
    return float(depth.max(axis=1).min())


def inscribed_disk(p: Polygon) -> tuple[np.ndarray, float]:
    """Largest inscribed disk as a linear program: maximise r with n_i.(c - v_i) + r <= 0."""
    _require_convex(p, "inradius")
    normals = outward_normals(p)
    a_ub = np.column_stack([normals, np.ones(p.n)])
    b_ub = np.einsum("ij,ij->i", normals, p.vertices)
    res = linprog(
        c=[0.0, 0.0, -1.0],
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=[(None, None), (None, None), (0, None)],
        method="highs-ds",
    )
    if res.status != 0:
        raise ConvergenceError(f"Inradius linear program failed: {res.message}")
    return np.asarray(res.x[:2]), float(res.x[2])


def extents(p: Polygon) -> Extents:
    _, r = inscribed_disk(p)
    return Extents(diameter=diameter(p), inradius=r, width=width(p))


def _require_convex(p: Polygon, what: str):
    if not is_convex(p):
        raise InvalidShapeError(f"The {what} is only computed for convex polygons.")


def congruence_sequence(p: Polygon) -> np.ndarray:
    """Pairs (length of edge i, interior angle at the far end of edge i)."""
    return np.column_stack([edge_lengths(p), np.roll(interior_angles(p), -1)])


def _mirror(p: Polygon) -> Polygon:
    return Polygon(p.vertices * np.array([-1.0, 1.0]))


def _rotations(seq: np.ndarray):
    for k in range(len(seq)):
        yield np.roll(seq, -k, axis=0)


def congruence_signature(p: Polygon, digits: int = 9) -> tuple[tuple[float, float], ...]:
    """Lexicographically smallest rounded sequence over start vertex and reflection."""
    candidates = []
    for seq in (congruence_sequence(p), congruence_sequence(_mirror(p))):
        for rotated in _rotations(seq):
            candidates.append(tuple((round(a, digits), round(b, digits)) for a, b in rotated))
    return min(candidates)


def congruent(p: Polygon, q: Polygon, tol: float | None = None) -> bool:
    """True iff p and q agree up to rigid motion and reflection, entrywise within relative tol."""
    tol = settings.congruence_tol if tol is None else tol
    if p.n != q.n:
        return False
    target = congruence_sequence(q)
    for seq in (congruence_sequence(p), congruence_sequence(_mirror(p))):
        for rotated in _rotations(seq):
            scale_ = np.maximum(np.abs(rotated), np.abs(target))
            if np.all(np.abs(rotated - target) <= tol * np.maximum(scale_, 1e-300)):
                return True
    return False

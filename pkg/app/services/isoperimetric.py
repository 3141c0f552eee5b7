"""
Maximising the shape functional f = A / L^2 over convex n-gons.

Two local adjustments never decrease f: Steiner's move of a vertex parallel
to the chord of its neighbours (area kept, perimeter shortened) and the
parallel translation of an edge, whose first variation is
    df/dt = e/L^2 - (2A/L^3) (phi(a_i) + phi(a_{i+1})),  phi(x) = tan(x/2),
with a_i, a_{i+1} the exterior angles at the ends of the edge. Sweeps of both
moves stall at equilateral polygons that are not equiangular (rhombi for
n = 4), so each iteration also takes a backtracked step along the full
gradient in vertex coordinates.

Angles inside this module are exterior angles; conversion from the interior
angles of app.services.polygon happens only in `exterior_angles`.
"""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy.optimize import least_squares

from app.config import settings
from app.errors import AdjustmentRejected, InvalidShapeError
from app.models import AdjustmentStep, OptimizationResult, Polygon, StepKind
from app.services import polygon as geometry

logger = logging.getLogger(__name__)

_MAX_HALVINGS = 40


def regular_f(n: int) -> float:
    return geometry.regular_shape_functional(n)


def exterior_angles(p: Polygon) -> np.ndarray:
    return math.pi - geometry.interior_angles(p)


def phi(x):
    return np.tan(np.asarray(x) / 2)


def _check_admissible(p: Polygon, guard: float):
    angles = geometry.interior_angles(p)
    if np.any(angles < guard) or np.any(angles > math.pi - guard):
        raise AdjustmentRejected(
            f"Interior angles must stay in [{guard:g}, pi - {guard:g}]; got range "
            f"[{angles.min():.6g}, {angles.max():.6g}]."
        )


def _admissible(p: Polygon, guard: float) -> bool:
    try:
        _check_admissible(p, guard)
    except AdjustmentRejected:
        return False
    return True


def steiner_side_equalize(p: Polygon, vertex_index: int) -> Polygon:
    """
    Slide a vertex parallel to the chord of its neighbours onto the chord's
    perpendicular bisector. The triangle on the chord keeps its height, so the
    area is unchanged while the two adjacent sides become equal.
    """
    n = p.n
    j = vertex_index % n
    a, v, c = p.vertices[j - 1], p.vertices[j], p.vertices[(j + 1) % n]
    chord = c - a
    u = chord / np.hypot(*chord)
    mid = 0.5 * (a + c)
    moved = v + np.dot(mid - v, u) * u
    pts = np.array(p.vertices)
    pts[j] = moved
    try:
        q = Polygon(pts)
    except InvalidShapeError as e:
        raise AdjustmentRejected(f"Side equalization at vertex {j} breaks the polygon: {e}") from e
    if not geometry.is_convex(q):
        raise AdjustmentRejected(f"Side equalization at vertex {j} breaks convexity.")
    return q


def edge_translate(p: Polygon, edge_index: int, t: float) -> Polygon:
    """Move edge i (vertex i to i+1) by t along its outward normal, sliding its ends along the neighbouring edges."""
    if t == 0:
        return Polygon(np.array(p.vertices))
    if not geometry.is_convex(p):
        raise InvalidShapeError("Edge translation is defined for convex polygons.")
    n = p.n
    i = edge_index % n
    k = (i + 1) % n
    ext = exterior_angles(p)
    e = geometry.edge_vectors(p)
    d_prev = e[i - 1] / np.hypot(*e[i - 1])
    d_next = e[k] / np.hypot(*e[k])
    pts = np.array(p.vertices)
    pts[i] = pts[i] + (t / math.sin(ext[i])) * d_prev
    pts[k] = pts[k] - (t / math.sin(ext[k])) * d_next
    try:
        q = Polygon(pts)
    except InvalidShapeError as err:
        raise AdjustmentRejected(f"Translating edge {i} by {t:g} breaks the polygon: {err}") from err
    if q.n != n or not geometry.is_convex(q):
        raise AdjustmentRejected(f"Translating edge {i} by {t:g} breaks convexity.")
    return q


def f_first_variation(p: Polygon, edge_index: int) -> float:
    if not geometry.is_convex(p):
        raise InvalidShapeError("The first variation is stated for convex polygons.")
    m = geometry.measurements(p)
    i = edge_index % p.n
    e = float(geometry.edge_lengths(p)[i])
    ext = exterior_angles(p)
    s = float(phi(ext[i]) + phi(ext[(i + 1) % p.n]))
    return e / m.perimeter ** 2 - (2 * m.area / m.perimeter ** 3) * s


def stationarity_residual(p: Polygon) -> float:
    """max_i |phi(a_i) + phi(a_{i+1}) - e_i L / (2A)|; zero for the regular n-gon."""
    m = geometry.measurements(p)
    ext = exterior_angles(p)
    s = phi(ext) + phi(np.roll(ext, -1))
    e = geometry.edge_lengths(p)
    return float(np.max(np.abs(s - e * m.perimeter / (2 * m.area))))


def f_gradient(vertices: np.ndarray) -> np.ndarray:
    """Gradient of A/L^2 with respect to the vertex coordinates (counter-clockwise order)."""
    v = np.asarray(vertices, dtype=float)
    prev, nxt = np.roll(v, 1, axis=0), np.roll(v, -1, axis=0)
    area = geometry.signed_area(v)
    to_prev, to_next = v - prev, v - nxt
    lp = np.hypot(to_prev[:, 0], to_prev[:, 1])
    perimeter = float(lp.sum())
    grad_a = 0.5 * np.column_stack([nxt[:, 1] - prev[:, 1], prev[:, 0] - nxt[:, 0]])
    grad_l = to_prev / lp[:, None] + to_next / np.hypot(to_next[:, 0], to_next[:, 1])[:, None]
    return grad_a / perimeter ** 2 - 2 * area * grad_l / perimeter ** 3


def gradient_residual(p: Polygon) -> float:
    """Scale-free size of the full gradient, L * max |grad f|; also vanishes only at critical points."""
    return float(geometry.measurements(p).perimeter * np.abs(f_gradient(p.vertices)).max())


def _normalized(p: Polygon) -> Polygon:
    m = geometry.measurements(p)
    return Polygon(p.vertices * (p.n / m.perimeter))


def _steiner_sweep(p: Polygon, guard: float, steps: list[AdjustmentStep]) -> Polygon:
    for j in range(p.n):
        before = geometry.shape_functional(p)
        try:
            q = steiner_side_equalize(p, j)
        except AdjustmentRejected:
            continue
        if not _admissible(q, guard):
            continue
        after = geometry.shape_functional(q)
        if after > before:
            magnitude = float(np.hypot(*(q.vertices[j] - p.vertices[j])))
            steps.append(AdjustmentStep(StepKind.SIDE_EQUALIZE, j, magnitude, before, after))
            p = q
    return p


def _edge_sweep(p: Polygon, guard: float, steps: list[AdjustmentStep]) -> Polygon:
    for i in range(p.n):
        m = geometry.measurements(p)
        e = float(geometry.edge_lengths(p)[i])
        ext = exterior_angles(p)
        a, b = ext[i], ext[(i + 1) % p.n]
        s = float(phi(a) + phi(b))
        c = 1 / math.tan(a) + 1 / math.tan(b)
        num = e * m.perimeter - 2 * s * m.area
        if abs(num) <= 1e-14 * e * m.perimeter:
            continue
        max_step = 0.25 * float(geometry.edge_lengths(p).min())
        den = c * m.perimeter + s * e
        # f(t) = (A + t e - c t^2/2) / (L + s t)^2 is maximal at t = num / den when den > 0
        t = num / den if den > 0 else math.copysign(max_step, num)
        t = max(-max_step, min(max_step, t))
        before = m.area / m.perimeter ** 2
        for _ in range(_MAX_HALVINGS):
            try:
                q = edge_translate(p, i, t)
            except AdjustmentRejected:
                t /= 2
                continue
            after = geometry.shape_functional(q)
            if _admissible(q, guard) and after > before:
                steps.append(AdjustmentStep(StepKind.EDGE_TRANSLATE, i, t, before, after))
                p = q
                break
            t /= 2
    return p


def _gradient_step(p: Polygon, guard: float, steps: list[AdjustmentStep]) -> Polygon:
    g = f_gradient(p.vertices)
    g_max = float(np.abs(g).max())
    if g_max == 0:
        return p
    before = geometry.shape_functional(p)
    eta = 0.1 * float(geometry.edge_lengths(p).min()) / g_max
    for _ in range(_MAX_HALVINGS):
        try:
            q = Polygon(p.vertices + eta * g)
        except InvalidShapeError:
            eta /= 2
            continue
        after = geometry.shape_functional(q)
        if q.n == p.n and _admissible(q, guard) and after > before:
            steps.append(AdjustmentStep(StepKind.GRADIENT_ASCENT, -1, eta * g_max, before, after))
            return q
        eta /= 2
    return p


def _polish(p: Polygon, guard: float, steps: list[AdjustmentStep]) -> Polygon:
    """Drive the full gradient to zero with Levenberg-Marquardt; kept only if f does not drop."""
    n = p.n
    fit = least_squares(
        lambda x: f_gradient(x.reshape(n, 2)).ravel(),
        p.vertices.ravel(),
        method="lm",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=200 * (2 * n + 1),
    )
    try:
        q = _normalized(Polygon(fit.x.reshape(n, 2)))
    except InvalidShapeError:
        return p
    before, after = geometry.shape_functional(p), geometry.shape_functional(q)
    if q.n != n or not _admissible(q, guard) or after < before:
        logger.debug("Polish rejected (f %.16g -> %.16g)", before, after)
        return p
    step = float(np.abs(q.vertices - p.vertices).max())
    steps.append(AdjustmentStep(StepKind.GRADIENT_ASCENT, -1, step, before, after))
    return q


def maximize_f(
    n: int,
    seed_polygon: Polygon,
    max_iter: int | None = None,
    tol: float | None = None,
    angle_guard: float | None = None,
) -> OptimizationResult:
    """
    Ascend f from a convex seed until the polygon is stationary.

    Each iteration runs a Steiner sweep, an edge-translation sweep with the
    exact one-dimensional maximiser, and a backtracked gradient step, then
    rescales to perimeter n. When the sweeps stall the iterate is polished by
    solving grad f = 0. Convergence requires both the edge-translation
    stationarity residual and the full gradient residual below `tol`.
    """
    max_iter = settings.optimizer_max_iter if max_iter is None else max_iter
    tol = settings.optimizer_tol if tol is None else tol
    guard = settings.angle_guard if angle_guard is None else angle_guard
    if n < 3:
        raise InvalidShapeError(f"Need n >= 3, got {n}.")
    if seed_polygon.n != n:
        raise InvalidShapeError(f"Seed has {seed_polygon.n} vertices, expected {n}.")
    if not geometry.is_convex(seed_polygon):
        raise InvalidShapeError("Seed polygon must be convex.")
    _check_admissible(seed_polygon, guard)

    p = _normalized(seed_polygon)
    steps: list[AdjustmentStep] = []

    def converged(q: Polygon) -> bool:
        return stationarity_residual(q) < tol and gradient_residual(q) < tol

    trajectory = [(0, geometry.shape_functional(p), stationarity_residual(p))]
    iteration = 0
    while not converged(p) and iteration < max_iter:
        iteration += 1
        before = geometry.shape_functional(p)
        p = _steiner_sweep(p, guard, steps)
        p = _edge_sweep(p, guard, steps)
        p = _gradient_step(p, guard, steps)
        p = _normalized(p)
        f = geometry.shape_functional(p)
        trajectory.append((iteration, f, stationarity_residual(p)))
        logger.debug("Iteration %d: f = %.16g, residual = %.3g", iteration, f, trajectory[-1][2])
        if f - before > 1e-9 * before or converged(p):
            continue
        # sweeps stalled
        q = _polish(p, guard, steps)
        if q is p:
            break
        p = q
        trajectory.append((iteration, geometry.shape_functional(p), stationarity_residual(p)))

    if not converged(p) and iteration >= max_iter:
        q = _polish(p, guard, steps)
        if q is not p:
            p = q
            trajectory.append((iteration, geometry.shape_functional(p), stationarity_residual(p)))

    f = geometry.shape_functional(p)
    residual = stationarity_residual(p)
    done = converged(p)
    if done:
        logger.info("maximize_f n=%d converged in %d iterations: f = %.16g", n, iteration, f)
    else:
        logger.warning("maximize_f n=%d stopped after %d iterations: residual %.3g", n, iteration, residual)
    return OptimizationResult(
        polygon=p,
        f=f,
        residual=residual,
        converged=done,
        iterations=iteration,
        trajectory=tuple(trajectory),
        steps=tuple(steps),
    )

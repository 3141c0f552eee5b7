"""
Closed billiard geodesics in trapezoids.

The shortest closed geodesic of an acute trapezoid (alpha + beta < pi/2) is
the bouncing-ball orbit between the parallel sides, of length 2h. The only
competitors are period-3 orbits, one bounce on each of three sides; the
search below looks for those so the claim can be audited numerically.
"""
from __future__ import annotations

import itertools
import logging
import math

import numpy as np
from scipy.optimize import least_squares

from app.config import settings
from app.errors import InvalidShapeError, LemmaViolationError
from app.models import OrbitCertificate, OrbitKind, TrapezoidParams
from app.services import polygon as geometry

logger = logging.getLogger(__name__)

# Fractions this close to a side's endpoints count as hitting a corner
_CORNER_MARGIN = 1e-6
_SEEDS_PER_TRIPLE = 8


def _require_trapezoid(t) -> TrapezoidParams:
    if not isinstance(t, TrapezoidParams):
        raise InvalidShapeError(f"Expected trapezoid parameters, got {type(t).__name__}.")
    return t


def _require_acute(t: TrapezoidParams):
    if not t.is_acute:
        raise InvalidShapeError(
            f"Trapezoid is not acute: alpha + beta = {t.alpha + t.beta:.6g} >= pi/2."
        )


def trapezoid_sides(t: TrapezoidParams) -> tuple[np.ndarray, np.ndarray]:
    """Start points and direction vectors of the four sides: base, right leg, top, left leg."""
    v = geometry.make_trapezoid(t).vertices
    return np.array(v), np.roll(v, -1, axis=0) - v


def bouncing_ball_orbit(t: TrapezoidParams) -> OrbitCertificate:
    """Vertical orbit through the midpoint of the top side."""
    _require_trapezoid(t)
    _require_acute(t)
    v = geometry.make_trapezoid(t).vertices
    x0 = 0.5 * (v[2, 0] + v[3, 0])
    return OrbitCertificate(
        kind=OrbitKind.BOUNCING_BALL,
        length=2 * t.h,
        bounce_points=((float(x0), 0.0), (float(x0), float(t.h))),
        # the segment is vertical and both sides horizontal
        reflection_defects=(0.0, 0.0),
    )


def bouncing_ball_length(t: TrapezoidParams) -> float:
    return bouncing_ball_orbit(t).length


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _defects(points: np.ndarray, tangents: np.ndarray) -> np.ndarray:
    """
    Reflection-law defects of the closed path points[..., 0] -> 1 -> 2 -> 0.

    At each bounce the unit vectors to the previous and next bounce must make
    equal angles with the side, i.e. their sum has no tangential component.
    """
    prev = np.roll(points, 1, axis=-2) - points
    nxt = np.roll(points, -1, axis=-2) - points
    return np.sum((_unit(prev) + _unit(nxt)) * tangents, axis=-1)


def _path_points(fractions: np.ndarray, starts: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    return starts + fractions[..., None] * dirs


def _perimeter(points: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1)))


def _grid_seeds(starts, dirs, tangents, resolution: int) -> list[tuple[float, tuple[int, int, int]]]:
    """Best grid points by squared defect, scanned one slab of the first fraction at a time."""
    s = (np.arange(resolution) + 0.5) / resolution
    s1, s2 = np.meshgrid(s, s, indexing="ij")
    best: list[tuple[float, tuple[int, int, int]]] = []
    for i, first in enumerate(s):
        fractions = np.stack([np.full_like(s1, first), s1, s2], axis=-1)
        pts = _path_points(fractions, starts, dirs)
        with np.errstate(invalid="ignore", divide="ignore"):
            score = np.sum(_defects(pts, tangents) ** 2, axis=-1)
        score = np.where(np.isfinite(score), score, np.inf)
        flat = score.ravel()
        keep = np.argpartition(flat, min(_SEEDS_PER_TRIPLE, flat.size - 1))[:_SEEDS_PER_TRIPLE]
        for k in keep:
            j, l = divmod(int(k), resolution)
            best.append((float(flat[k]), (i, j, l)))
    best.sort()
    return best[:_SEEDS_PER_TRIPLE]


def _refine(x0, starts, dirs, tangents):
    def residuals(x):
        with np.errstate(invalid="ignore", divide="ignore"):
            r = _defects(_path_points(x, starts, dirs), tangents)
        return np.where(np.isfinite(r), r, 10.0)

    return least_squares(residuals, x0, bounds=(0.0, 1.0), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)


def search_triangular_orbits(
    t: TrapezoidParams,
    resolution: int | None = None,
    defect_tol: float | None = None,
) -> OrbitCertificate | None:
    """
    Shortest period-3 billiard orbit with one bounce on each of three sides.

    Every side triple is seeded on a resolution^3 grid of arc-length fractions;
    the best seeds are refined by least squares on the reflection defects. A
    candidate is admissible when every defect is below defect_tol, no bounce
    sits on a corner and the triangle is not degenerate. Returns None when no
    admissible orbit exists.
    """
    _require_trapezoid(t)
    resolution = settings.orbit_resolution if resolution is None else resolution
    defect_tol = settings.orbit_defect_tol if defect_tol is None else defect_tol
    if resolution < 32:
        raise InvalidShapeError(f"Orbit search resolution must be at least 32, got {resolution}.")

    all_starts, all_dirs = trapezoid_sides(t)
    all_tangents = _unit(all_dirs)

    found: list[tuple[float, tuple[int, ...], OrbitCertificate]] = []
    for triple in itertools.combinations(range(4), 3):
        idx = list(triple)
        starts, dirs, tangents = all_starts[idx], all_dirs[idx], all_tangents[idx]
        for _, (i, j, l) in _grid_seeds(starts, dirs, tangents, resolution):
            x0 = (np.array([i, j, l]) + 0.5) / resolution
            fit = _refine(x0, starts, dirs, tangents)
            x = fit.x
            if np.any(x < _CORNER_MARGIN) or np.any(x > 1 - _CORNER_MARGIN):
                continue
            pts = _path_points(x, starts, dirs)
            defects = np.abs(_defects(pts, tangents))
            if not np.all(defects < defect_tol):
                continue
            twice_area = abs(
                (pts[1, 0] - pts[0, 0]) * (pts[2, 1] - pts[0, 1]) - (pts[1, 1] - pts[0, 1]) * (pts[2, 0] - pts[0, 0])
            )
            # collinear bounce triples (a vertical chord grazing a leg) also have zero defects
            if twice_area <= 1e-8 * _perimeter(pts) ** 2:
                continue
            cert = OrbitCertificate(
                kind=OrbitKind.TRIANGLE_CANDIDATE,
                length=_perimeter(pts),
                bounce_points=tuple((float(px), float(py)) for px, py in pts),
                reflection_defects=tuple(float(d) for d in defects),
            )
            found.append((cert.length, triple + (i, j, l), cert))

    if not found:
        logger.info("No triangular orbit in trapezoid (alpha=%.6g, beta=%.6g)", t.alpha, t.beta)
        return None
    # deterministic: shortest first, then by side triple and seed
    found.sort(key=lambda item: (item[0], item[1]))
    best = found[0][2]
    logger.info("Triangular orbit of length %.10g found (2h = %.10g)", best.length, 2 * t.h)
    return best


def shortest_closed_geodesic(t: TrapezoidParams, resolution: int | None = None) -> tuple[float, OrbitCertificate]:
    """2h with its bouncing-ball certificate, audited against the triangular-orbit search."""
    _require_trapezoid(t)
    _require_acute(t)
    certificate = bouncing_ball_orbit(t)
    rival = search_triangular_orbits(t, resolution=resolution)
    if rival is not None and rival.length < certificate.length * (1 - 1e-12):
        raise LemmaViolationError(
            f"Triangular orbit of length {rival.length:.12g} is shorter than the bouncing ball "
            f"2h = {certificate.length:.12g} in an acute trapezoid."
        )
    return certificate.length, certificate

"""
Immutable domain types shared by the services.

Every type validates itself on construction, so an instance that exists is an
instance whose invariants hold. Arrays are stored read-only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from shapely.geometry import LinearRing

from app.config import settings
from app.errors import InvalidShapeError


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple polygon with counter-clockwise vertices and no collinear corners."""

    vertices: np.ndarray

    def __post_init__(self):
        pts = np.array(self.vertices, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidShapeError("Polygon vertices must be a list of [x, y] pairs.")
        n = len(pts)
        if n < 3:
            raise InvalidShapeError(f"A polygon needs at least 3 vertices, got {n}.")
        if not np.all(np.isfinite(pts)):
            raise InvalidShapeError("Polygon vertices must be finite numbers.")

        tol = settings.geometry_tol
        extent = max(float(np.ptp(pts, axis=0).max()), tol)

        edges = np.roll(pts, -1, axis=0) - pts
        lengths = np.hypot(edges[:, 0], edges[:, 1])
        if np.any(lengths <= tol * extent):
            i = int(np.argmin(lengths))
            raise InvalidShapeError(f"Duplicate vertices at index {i} and {(i + 1) % n}.")

        # sine of the turn at each vertex, between incoming and outgoing edge
        prev = np.roll(edges, 1, axis=0)
        cross = prev[:, 0] * edges[:, 1] - prev[:, 1] * edges[:, 0]
        sines = np.abs(cross) / (np.roll(lengths, 1) * lengths)
        if np.any(sines <= tol):
            i = int(np.argmin(sines))
            raise InvalidShapeError(f"Vertex {i} is collinear with its neighbours.")

        if not LinearRing(pts).is_simple:
            raise InvalidShapeError("Polygon boundary intersects itself.")

        x, y = pts[:, 0], pts[:, 1]
        signed = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
        if abs(signed) <= tol * extent * extent:
            raise InvalidShapeError("Polygon has zero area.")
        if signed < 0:
            pts = pts[::-1].copy()

        object.__setattr__(self, "vertices", _frozen_array(pts))

    @property
    def n(self) -> int:
        return len(self.vertices)

    def to_list(self) -> list[list[float]]:
        return [[float(x), float(y)] for x, y in self.vertices]


@dataclass(frozen=True)
class ParallelogramParams:
    """Parallelogram with longer side L, adjacent side W and smallest angle alpha."""

    L: float
    W: float
    alpha: float

    def __post_init__(self):
        if not (self.W > 0 and self.L > 0):
            raise InvalidShapeError("Parallelogram sides must be positive.")
        if self.W > self.L * (1 + 1e-12):
            raise InvalidShapeError(f"Parallelogram needs W <= L, got W={self.W}, L={self.L}.")
        if not (0 < self.alpha <= math.pi / 2 + 1e-12):
            raise InvalidShapeError(f"Parallelogram angle must lie in (0, pi/2], got {self.alpha}.")

    @property
    def height(self) -> float:
        return self.W * math.sin(self.alpha)


@dataclass(frozen=True)
class TrapezoidParams:
    """
    Trapezoid with base B on the x-axis, opposite side b, height h and base
    angles alpha >= beta.

    Both base angles must be below pi/2. The stricter condition
    alpha + beta < pi/2 (an "acute" trapezoid for the hearing procedures) is
    exposed as `is_acute` and enforced by the operations that rely on it.
    """

    B: float
    b: float
    h: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not self.h > 0:
            raise InvalidShapeError(f"Trapezoid height must be positive, got {self.h}.")
        if not (0 < self.beta <= self.alpha):
            raise InvalidShapeError(
                f"Trapezoid angles must satisfy 0 < beta <= alpha, got alpha={self.alpha}, beta={self.beta}."
            )
        if not self.alpha < math.pi / 2:
            raise InvalidShapeError(
                "Trapezoid base angles must be below pi/2 (alpha + beta < pi/2 for an acute trapezoid); "
                f"got alpha={self.alpha}."
            )
        if not (self.b > 0 and self.B >= self.b):
            raise InvalidShapeError(f"Trapezoid needs B >= b > 0, got B={self.B}, b={self.b}.")
        expected = self.B - self.h * (1 / math.tan(self.alpha) + 1 / math.tan(self.beta))
        if abs(expected - self.b) > 1e-9 * max(1.0, self.B):
            raise InvalidShapeError(
                f"Side b={self.b} is inconsistent with B, h and the base angles (expected {expected})."
            )

    @classmethod
    def from_base_angles(cls, B: float, h: float, alpha: float, beta: float) -> TrapezoidParams:
        """Build from base, height and base angles; the angles are put in canonical order."""
        alpha, beta = max(alpha, beta), min(alpha, beta)
        if not (0 < beta and alpha < math.pi / 2):
            raise InvalidShapeError(
                f"Trapezoid base angles must lie in (0, pi/2), got {alpha} and {beta}."
            )
        b = B - h * (1 / math.tan(alpha) + 1 / math.tan(beta))
        return cls(B=B, b=b, h=h, alpha=alpha, beta=beta)

    @property
    def is_acute(self) -> bool:
        return self.alpha + self.beta < math.pi / 2

    @property
    def legs(self) -> tuple[float, float]:
        return self.h / math.sin(self.alpha), self.h / math.sin(self.beta)

    @property
    def area(self) -> float:
        return 0.5 * (self.B + self.b) * self.h

    @property
    def perimeter(self) -> float:
        return self.B + self.b + sum(self.legs)

    def scaled(self, c: float) -> TrapezoidParams:
        return TrapezoidParams(B=c * self.B, b=c * self.b, h=c * self.h, alpha=self.alpha, beta=self.beta)


class Provenance(str, Enum):
    EXACT = "exact"
    FEM = "fem"
    FITTED = "fitted"


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Sorted Dirichlet eigenvalues, repeated by multiplicity.

    `ceiling` is set when the list holds every eigenvalue up to that value;
    otherwise the list is the first `count` eigenvalues.
    """

    eigenvalues: np.ndarray
    error_estimates: np.ndarray
    provenance: Provenance
    ceiling: float | None = None

    def __post_init__(self):
        lam = np.array(self.eigenvalues, dtype=float).ravel()
        err = np.array(self.error_estimates, dtype=float).ravel()
        if lam.size == 0:
            raise InvalidShapeError("A spectrum needs at least one eigenvalue.")
        if err.shape != lam.shape:
            raise InvalidShapeError("Need exactly one error estimate per eigenvalue.")
        if not np.all(np.isfinite(lam)) or lam[0] <= 0:
            raise InvalidShapeError("Dirichlet eigenvalues must be finite and positive.")
        if np.any(np.diff(lam) < 0):
            raise InvalidShapeError("Eigenvalues must be sorted in nondecreasing order.")
        if lam.size > 1 and not lam[1] > lam[0]:
            raise InvalidShapeError("The first Dirichlet eigenvalue must be simple (lambda_1 < lambda_2).")
        if np.any(err < 0):
            raise InvalidShapeError("Error estimates must be nonnegative.")
        provenance = Provenance(self.provenance)
        if provenance is Provenance.EXACT and np.any(err != 0):
            raise InvalidShapeError("Exact spectra carry zero error estimates.")
        if self.ceiling is not None and self.ceiling < lam[-1]:
            raise InvalidShapeError("Ceiling lies below the largest listed eigenvalue.")
        object.__setattr__(self, "eigenvalues", _frozen_array(lam))
        object.__setattr__(self, "error_estimates", _frozen_array(err))
        object.__setattr__(self, "provenance", provenance)

    @property
    def count(self) -> int:
        return len(self.eigenvalues)

    @property
    def complete_through(self) -> float:
        """Largest value up to which no eigenvalue is missing."""
        return self.ceiling if self.ceiling is not None else float(self.eigenvalues[-1])

    def scaled(self, c: float) -> Spectrum:
        """Spectrum of the domain dilated by c."""
        factor = 1.0 / (c * c)
        return Spectrum(
            eigenvalues=self.eigenvalues * factor,
            error_estimates=self.error_estimates * factor,
            provenance=self.provenance,
            ceiling=None if self.ceiling is None else self.ceiling * factor,
        )


@dataclass(frozen=True)
class HeatInvariants:
    """Area, perimeter and corner constant of the small-time heat expansion."""

    area: float
    perimeter: float
    a0: float

    def __post_init__(self):
        if not (self.area > 0 and self.perimeter > 0):
            raise InvalidShapeError("Area and perimeter must be positive.")
        if not math.isfinite(self.a0):
            raise InvalidShapeError("Constant term a0 must be finite.")
        if self.area > self.perimeter ** 2 / (4 * math.pi) * (1 + 1e-9):
            raise InvalidShapeError(
                f"Area {self.area} exceeds the isoperimetric bound P^2/(4 pi) for perimeter {self.perimeter}."
            )


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation of a polygon with Dirichlet boundary marking."""

    nodes: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray  # boolean mask over nodes
    level: int
    polygon: Polygon

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen_array(self.nodes))
        object.__setattr__(self, "triangles", _frozen_array(self.triangles, dtype=np.int64))
        object.__setattr__(self, "boundary", _frozen_array(self.boundary, dtype=bool))

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    @property
    def boundary_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.boundary)


@dataclass(frozen=True, eq=False)
class FemResult:
    spectrum: Spectrum
    level: int
    extrapolated: bool
    # history[r] holds the raw eigenvalues computed on the level listed in levels[r]
    levels: tuple[int, ...]
    history: np.ndarray
    interior_nodes: int


class OrbitKind(str, Enum):
    BOUNCING_BALL = "bouncing_ball"
    TRIANGLE_CANDIDATE = "triangle_candidate"


@dataclass(frozen=True)
class OrbitCertificate:
    kind: OrbitKind
    length: float
    bounce_points: tuple[tuple[float, float], ...]
    reflection_defects: tuple[float, ...]

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidShapeError("Orbit length must be positive.")
        if self.kind is OrbitKind.BOUNCING_BALL and len(self.bounce_points) != 2:
            raise InvalidShapeError("A bouncing-ball orbit has exactly two bounce points.")


@dataclass(frozen=True)
class TrapezoidSystem:
    """Right-hand sides of csc(a) + csc(b) = p and 1/(a(pi-a)) + 1/(b(pi-b)) = q."""

    p: float
    q: float

    def __post_init__(self):
        if not self.p > 2:
            raise InvalidShapeError(f"Need p > 2 since each cosecant exceeds 1, got p={self.p}.")
        if not self.q > 0:
            raise InvalidShapeError(f"Need q > 0, got q={self.q}.")


class StepKind(str, Enum):
    SIDE_EQUALIZE = "side_equalize"
    EDGE_TRANSLATE = "edge_translate"
    GRADIENT_ASCENT = "gradient_ascent"


@dataclass(frozen=True)
class AdjustmentStep:
    kind: StepKind
    index: int
    magnitude: float
    f_before: float
    f_after: float


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    polygon: Polygon
    f: float
    residual: float
    converged: bool
    iterations: int
    trajectory: tuple[tuple[int, float, float], ...]
    steps: tuple[AdjustmentStep, ...] = field(default=())

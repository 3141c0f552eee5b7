"""
Batch experiments behind the CLI: fundamental-gap decay on thin triangles,
acute trapezoids that share their heat invariants, and the isospectral GWW
pair against a perturbed control.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from app.config import settings
from app.errors import ConvergenceError, DrumheadError, InvalidShapeError, NotInClassError
from app.models import Polygon, TrapezoidParams
from app.services import fem
from app.services import polygon as geometry
from app.services.heat_trace import geometric_heat_invariants
from app.services.inverse_hearing import find_isoinvariant_trapezoid, invariant_mismatch

logger = logging.getLogger(__name__)

# The trapezoid of the worked example: B = 6, h = 1, base angles pi/5 and pi/10
WORKED_TRAPEZOID = TrapezoidParams.from_base_angles(B=6.0, h=1.0, alpha=math.pi / 5, beta=math.pi / 10)

GWW_CONTROL_VERTEX = (4, (-1.0, 2.3))  # vertex (-1, 2) of the first drum, moved up
ISOSPECTRAL_TOL = 0.01


@dataclass(frozen=True)
class GapRow:
    shape: str
    d: float
    lambda1: float | None
    lambda2: float | None
    error: str | None = None

    @property
    def gap(self) -> float | None:
        return None if self.error else self.lambda2 - self.lambda1

    @property
    def scaled_gap(self) -> float | None:
        return None if self.error else self.gap * self.d ** (2 / 3)


@dataclass(frozen=True)
class GapScan:
    rows: tuple[GapRow, ...]
    slope: float | None  # log-log slope of gap against d over the triangle rows
    c_fit: float | None  # smallest c with gap <= c d^(-2/3) on the triangle rows


@dataclass(frozen=True)
class TrapezoidPair:
    first: TrapezoidParams
    second: TrapezoidParams
    mismatch: float

    @property
    def geodesics(self) -> tuple[float, float]:
        return 2 * self.first.h, 2 * self.second.h


@dataclass(frozen=True)
class GwwReport:
    level: int
    eigenvalues: np.ndarray  # rows: first drum, second drum, control
    pair_difference: np.ndarray
    control_difference: np.ndarray

    @property
    def isospectral(self) -> bool:
        return bool(np.max(self.pair_difference) <= ISOSPECTRAL_TOL)

    @property
    def control_distinguished(self) -> bool:
        return bool(np.max(self.control_difference) > ISOSPECTRAL_TOL)


def _gap_row(shape: str, p: Polygon, d: float, level: int) -> GapRow:
    try:
        lam = fem.dirichlet_eigenvalues(p, count=2, level=level).spectrum.eigenvalues
    except DrumheadError as e:
        logger.warning("Gap scan row %s d=%g failed: %s", shape, d, e)
        return GapRow(shape=shape, d=d, lambda1=None, lambda2=None, error=str(e))
    return GapRow(shape=shape, d=d, lambda1=float(lam[0]), lambda2=float(lam[1]))


def gap_scan(ds, w: float = 1.0, level: int = 6, include_square: bool = False) -> GapScan:
    """Extrapolated fundamental gaps of thin_triangle(w, d) for each d; failing rows are kept with their error."""
    ds = [float(d) for d in ds]
    if not ds:
        raise InvalidShapeError("The gap scan needs at least one value of d.")
    rows = [_gap_row("triangle", geometry.thin_triangle(w, d), d, level) for d in ds]
    if include_square:
        rows.append(_gap_row("square", geometry.make_rectangle(1.0, 1.0), math.sqrt(2), level))

    ok = [r for r in rows if r.shape == "triangle" and r.error is None and r.gap > 0]
    slope = c_fit = None
    if len(ok) >= 2:
        slope = float(np.polyfit(np.log([r.d for r in ok]), np.log([r.gap for r in ok]), 1)[0])
    if ok:
        c_fit = max(r.scaled_gap for r in ok)
    logger.info("Gap scan over %d rows: slope %s", len(rows), "n/a" if slope is None else f"{slope:.4f}")
    return GapScan(rows=tuple(rows), slope=slope, c_fit=c_fit)


def is_trivial_pair(a: TrapezoidParams, b: TrapezoidParams) -> bool:
    return geometry.congruent(geometry.make_trapezoid(a), geometry.make_trapezoid(b))


def trapezoid_pairs(
    base: TrapezoidParams = WORKED_TRAPEZOID,
    budget: int = 200,
    tol: float = 1e-8,
    step: float = 0.01,
) -> TrapezoidPair | None:
    """
    Look for a second acute trapezoid with the area, perimeter and a0 of
    `base` but a different height, trying heights h (1 +- k step) for
    k = 1..budget. Returns None when the budget runs out or when tol <= 0,
    since equality cannot be certified without a positive tolerance.
    """
    if tol <= 0:
        logger.info("Tolerance %g cannot certify equal invariants; no pair reported", tol)
        return None
    inv = geometric_heat_invariants(geometry.make_trapezoid(base))
    for k in range(1, budget + 1):
        for sign in (1, -1):
            h = base.h * (1 + sign * k * step)
            if h <= 0:
                continue
            try:
                other = find_isoinvariant_trapezoid(base, 2 * h)
            except (NotInClassError, InvalidShapeError, ConvergenceError) as e:
                logger.debug("Height %.6g: %s", h, e)
                continue
            if is_trivial_pair(base, other):
                continue
            mismatch = invariant_mismatch(inv, geometry.make_trapezoid(other))
            if mismatch <= tol:
                logger.info("Pair found at h = %.10g (mismatch %.2g)", h, mismatch)
                return TrapezoidPair(first=base, second=other, mismatch=mismatch)
    logger.info("No trapezoid pair within a budget of %d", budget)
    return None


def gww_control() -> Polygon:
    index, moved = GWW_CONTROL_VERTEX
    pts = [list(v) for v in geometry.GWW_VERTICES[0]]
    pts[index] = list(moved)
    return Polygon(pts)


def gww_check(level: int = 5, count: int | None = None) -> GwwReport:
    count = settings.default_count if count is None else count
    first, second = geometry.gww_pair()
    spectra = [
        fem.dirichlet_eigenvalues(p, count=count, level=level).spectrum.eigenvalues
        for p in (first, second, gww_control())
    ]
    values = np.vstack(spectra)

    def rel(a, b):
        return np.abs(a - b) / np.maximum(np.abs(a), np.abs(b))

    report = GwwReport(
        level=level,
        eigenvalues=values,
        pair_difference=rel(values[0], values[1]),
        control_difference=rel(values[0], values[2]),
    )
    logger.info(
        "GWW check at level %d: pair max diff %.3g, control max diff %.3g",
        level, report.pair_difference.max(), report.control_difference.max(),
    )
    return report

"""
Heat-trace invariants of polygons.

Forward direction: area, perimeter and the corner constant a0 from geometry,
and the three-term small-time expansion A/(4 pi t) - P/(8 sqrt(pi t)) + a0.
Inverse direction: sum a truncated spectrum's heat trace and fit the three
coefficients back by weighted least squares on an admissible t-window.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from app.config import settings
from app.errors import ConvergenceError, InvalidShapeError, PreconditionError
from app.models import HeatInvariants, Polygon, Spectrum
from app.services import polygon as geometry

logger = logging.getLogger(__name__)

# Weyl density inflation used for the omitted tail
_TAIL_INFLATION = 2.0


class TraceValue(NamedTuple):
    value: float
    tail_bound: float


class TraceRow(NamedTuple):
    t: float
    trace: float
    tail_bound: float


class TWindow(NamedTuple):
    t_grid: np.ndarray
    headroom_t: float  # smallest t with A/(4 pi t) within the headroom
    tail_t: float  # smallest t whose tail bound is admitted


@dataclass(frozen=True)
class HeatFit:
    invariants: HeatInvariants
    residual: float
    window: tuple[float, float]
    points: int
    condition: float
    outside_hypothesis: bool = False


def corner_term(angle: float) -> float:
    """Contribution (pi^2 - angle^2) / (24 pi angle) of one interior angle to a0."""
    if not 0 < angle < 2 * math.pi:
        raise InvalidShapeError(f"Corner angle must lie in (0, 2 pi), got {angle}.")
    return (math.pi ** 2 - angle ** 2) / (24 * math.pi * angle)


def parallelogram_a0(alpha: float) -> float:
    """a0 of a parallelogram with smallest angle alpha (two corners alpha, two pi - alpha)."""
    return math.pi ** 2 / (12 * alpha * (math.pi - alpha)) - 1.0 / 12


def trapezoid_a0(alpha: float, beta: float) -> float:
    """a0 of a trapezoid with base angles alpha, beta (top angles pi - alpha, pi - beta)."""
    return (math.pi ** 2 / 24) * (1 / (alpha * (math.pi - alpha)) + 1 / (beta * (math.pi - beta))) - 1.0 / 12


def has_reflex_corner(p: Polygon) -> bool:
    return not geometry.is_convex(p)


def geometric_heat_invariants(p: Polygon) -> HeatInvariants:
    m = geometry.measurements(p)
    a0 = math.fsum(corner_term(float(a)) for a in m.angles)
    return HeatInvariants(area=m.area, perimeter=m.perimeter, a0=a0)


def heat_trace_expansion(inv: HeatInvariants, t: float) -> float:
    if not t > 0:
        raise InvalidShapeError(f"Time must be positive, got {t}.")
    return inv.area / (4 * math.pi * t) - inv.perimeter / (8 * math.sqrt(math.pi * t)) + inv.a0


def _density(s: Spectrum) -> tuple[float, float]:
    """(ceiling, eigenvalues per unit lambda below it)."""
    ceiling = s.complete_through
    counted = int(np.searchsorted(s.eigenvalues, ceiling, side="right"))
    return ceiling, counted / ceiling


def truncated_heat_trace(s: Spectrum, t: float) -> TraceValue:
    """
    Sum of exp(-lambda t) over the listed eigenvalues, with a bound on the rest.

    Beyond the ceiling the eigenvalue density is taken as twice the average
    density N/ceiling below it, and exp(-lambda t) is integrated against it.
    """
    if not t > 0:
        raise InvalidShapeError(f"Time must be positive, got {t}.")
    value = math.fsum(np.exp(-s.eigenvalues * t))
    ceiling, density = _density(s)
    tail = _TAIL_INFLATION * density * math.exp(-ceiling * t) / t
    return TraceValue(value=value, tail_bound=tail)


def trace_table(s: Spectrum, t_grid) -> list[TraceRow]:
    rows = []
    for t in np.asarray(t_grid, dtype=float):
        value, tail = truncated_heat_trace(s, float(t))
        rows.append(TraceRow(t=float(t), trace=value, tail_bound=tail))
    return rows


def _admitted(s: Spectrum, t: float, tail_ratio: float) -> bool:
    value, tail = truncated_heat_trace(s, t)
    return tail < tail_ratio * value


def default_t_window(
    s: Spectrum,
    points: int = 20,
    decades: float = 2.0,
    tail_ratio: float | None = None,
    max_leading: float | None = None,
) -> TWindow:
    """
    Log-spaced window starting at the smallest admissible t.

    The start honours both the tail admission (tail < tail_ratio * trace) and
    the headroom A/(4 pi t) <= max_leading, with A estimated from the
    eigenvalue density. The window spans `decades` decades.
    """
    tail_ratio = settings.heat_tail_ratio if tail_ratio is None else tail_ratio
    max_leading = settings.heat_max_leading if max_leading is None else max_leading
    if points < 3:
        raise InvalidShapeError(f"A fit window needs at least 3 points, got {points}.")

    ceiling, density = _density(s)
    area_estimate = 4 * math.pi * density
    headroom_t = area_estimate / (4 * math.pi * max_leading)

    tail_t = 1.0 / ceiling
    for _ in range(2000):
        if _admitted(s, tail_t, tail_ratio):
            break
        tail_t *= 1.01
    else:
        raise PreconditionError("No t admits the heat-trace tail; the spectrum is too short.")

    t_min = max(headroom_t, tail_t)
    grid = np.logspace(math.log10(t_min), math.log10(t_min) + decades, points)
    logger.info(
        "Heat window [%.4g, %.4g] from %d eigenvalues (ceiling %.4g)", grid[0], grid[-1], s.count, ceiling,
    )
    return TWindow(t_grid=grid, headroom_t=headroom_t, tail_t=tail_t)


def fit_heat_invariants(
    s: Spectrum,
    t_grid,
    polygon: Polygon | None = None,
    tail_ratio: float | None = None,
    max_condition: float | None = None,
) -> HeatFit:
    """
    Fit (area, perimeter, a0) to the truncated heat trace on t_grid.

    Each row is divided by the trace value so that the fit is relative.
    `polygon`, when the spectrum is known to come from one, only sets the
    `outside_hypothesis` flag for reflex corners.
    """
    tail_ratio = settings.heat_tail_ratio if tail_ratio is None else tail_ratio
    max_condition = settings.heat_max_condition if max_condition is None else max_condition

    t = np.sort(np.asarray(t_grid, dtype=float).ravel())
    if t.size < 3:
        raise PreconditionError(f"The t-grid needs at least 3 points, got {t.size}.")
    if t[0] <= 0:
        raise PreconditionError("Every t in the grid must be positive.")
    if t[-1] < 10 * t[0]:
        raise PreconditionError(f"The t-window [{t[0]:.4g}, {t[-1]:.4g}] spans less than one decade.")

    values = np.empty_like(t)
    for i, ti in enumerate(t):
        value, tail = truncated_heat_trace(s, float(ti))
        if not tail < tail_ratio * value:
            raise PreconditionError(
                f"At t = {ti:.4g} the omitted tail (<= {tail:.3g}) exceeds {tail_ratio:g} of the trace "
                f"{value:.6g}; the spectrum (complete through {s.complete_through:.4g}) is too short "
                "for this window. Use larger t or more eigenvalues."
            )
        values[i] = value

    design = np.column_stack([1 / (4 * math.pi * t), -1 / (8 * np.sqrt(math.pi * t)), np.ones_like(t)])
    weighted = design / values[:, None]
    target = np.ones_like(t)
    condition = float(np.linalg.cond(weighted))
    if not condition <= max_condition:
        raise PreconditionError(
            f"Fit design matrix is ill-conditioned (cond {condition:.3g}) on the t-window "
            f"[{t[0]:.4g}, {t[-1]:.4g}]; widen the window."
        )
    coef, *_ = np.linalg.lstsq(weighted, target, rcond=None)
    residual = float(np.linalg.norm(weighted @ coef - target) / math.sqrt(t.size))

    area, perimeter, a0 = (float(c) for c in coef)
    try:
        invariants = HeatInvariants(area=area, perimeter=perimeter, a0=a0)
    except InvalidShapeError as e:
        raise ConvergenceError(f"Heat-trace fit produced impossible invariants: {e}") from e

    outside = polygon is not None and has_reflex_corner(polygon)
    logger.info(
        "Heat fit on %d points: A=%.8g P=%.8g a0=%.6g residual=%.3g", t.size, area, perimeter, a0, residual,
    )
    return HeatFit(
        invariants=invariants,
        residual=residual,
        window=(float(t[0]), float(t[-1])),
        points=int(t.size),
        condition=condition,
        outside_hypothesis=outside,
    )

"""
Closed-form Dirichlet spectra used as oracles.

String, rectangle and disk spectra are enumerated exactly: every candidate
below a provable ceiling is generated and sorted, so multiplicities are never
lost. Disk eigenvalues come from Bessel zeros that are bracketed by a sign
change before they are refined.
"""
from __future__ import annotations

import logging
import math
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import jv, jvp

from app.errors import ConvergenceError, InvalidShapeError, PreconditionError
from app.models import Polygon, Provenance, Spectrum
from app.services import polygon as geometry

logger = logging.getLogger(__name__)

# Bessel zeros of any order are more than 3 apart, so this scan step never
# jumps over a pair of roots.
_SCAN_STEP = 0.5


class EigenvalueBounds(NamedTuple):
    lower: float
    upper: float


def _exact(values: np.ndarray, ceiling: float | None = None) -> Spectrum:
    return Spectrum(
        eigenvalues=values,
        error_estimates=np.zeros_like(values),
        provenance=Provenance.EXACT,
        ceiling=ceiling,
    )


def _check_count_or_ceiling(count, ceiling):
    if (count is None) == (ceiling is None):
        raise InvalidShapeError("Give exactly one of count or ceiling.")
    if count is not None and count < 1:
        raise InvalidShapeError(f"Count must be at least 1, got {count}.")
    if ceiling is not None and not ceiling > 0:
        raise InvalidShapeError(f"Ceiling must be positive, got {ceiling}.")


def string_spectrum(length: float, count: int) -> Spectrum:
    """lambda_k = k^2 pi^2 / length^2 for k = 1..count."""
    if not length > 0:
        raise InvalidShapeError(f"String length must be positive, got {length}.")
    if count < 1:
        raise InvalidShapeError(f"Count must be at least 1, got {count}.")
    k = np.arange(1, count + 1, dtype=float)
    return _exact(k * k * math.pi ** 2 / length ** 2)


def string_length(s: Spectrum) -> float:
    """Recover the length of a string from its lowest eigenvalue."""
    return math.sqrt(math.pi ** 2 / float(s.eigenvalues[0]))


def weyl_count(area: float, perimeter: float, lam: float) -> float:
    """Two-term estimate of the number of Dirichlet eigenvalues up to lam."""
    return area * lam / (4 * math.pi) - perimeter * math.sqrt(lam) / (4 * math.pi)


def _initial_ceiling(area: float, perimeter: float, count: int) -> float:
    # positive root of weyl_count(area, perimeter, x**2) = count, with headroom
    x = (perimeter + math.sqrt(perimeter ** 2 + 16 * math.pi * area * count)) / (2 * area)
    return 1.2 * x * x


def _rectangle_below(l: float, w: float, ceiling: float) -> np.ndarray:
    m_max = int(math.floor(l * math.sqrt(ceiling) / math.pi))
    n_max = int(math.floor(w * math.sqrt(ceiling) / math.pi))
    if m_max < 1 or n_max < 1:
        return np.empty(0)
    m = np.arange(1, m_max + 1, dtype=float)[:, None]
    n = np.arange(1, n_max + 1, dtype=float)[None, :]
    values = math.pi ** 2 * (m * m / (l * l) + n * n / (w * w))
    return np.sort(values[values <= ceiling])


def rectangle_spectrum(l: float, w: float, count: int | None = None, ceiling: float | None = None) -> Spectrum:
    """
    Eigenvalues pi^2 (m^2/l^2 + n^2/w^2), m, n >= 1.

    Args:
        l, w: side lengths.
        count: return the first `count` eigenvalues, or
        ceiling: return every eigenvalue up to `ceiling`.
    """
    if not (l > 0 and w > 0):
        raise InvalidShapeError("Rectangle sides must be positive.")
    _check_count_or_ceiling(count, ceiling)
    if ceiling is not None:
        values = _rectangle_below(l, w, ceiling)
        if values.size == 0:
            raise InvalidShapeError(f"No rectangle eigenvalue lies below {ceiling}.")
        return _exact(values, ceiling=ceiling)

    bound = _initial_ceiling(l * w, 2 * (l + w), count)
    values = _rectangle_below(l, w, bound)
    while values.size < count:
        bound *= 2
        values = _rectangle_below(l, w, bound)
    return _exact(values[:count])


def _refine_zero(order: int, a: float, b: float) -> float:
    root = brentq(lambda x: jv(order, x), a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    # one Newton step, kept only if it improves the residual and stays in the bracket
    polished = root - jv(order, root) / jvp(order, root)
    if a < polished < b and abs(jv(order, polished)) < abs(jv(order, root)):
        root = polished
    return float(root)


def bessel_zeros(order: int, count: int | None = None, below: float | None = None) -> np.ndarray:
    """
    Positive zeros of J_order, either the first `count` or all below `below`.

    Every zero is bracketed by a verified sign change on a scan grid before
    it is refined with Brent's method.
    """
    if order < 0:
        raise InvalidShapeError(f"Bessel order must be nonnegative, got {order}.")
    if (count is None) == (below is None):
        raise InvalidShapeError("Give exactly one of count or below.")
    if count is not None and count < 1:
        raise InvalidShapeError(f"Zero index must be at least 1, got {count}.")

    if below is not None:
        upper = below
    else:
        # McMahon's leading term overshoots slightly; the loop below extends if not
        upper = (count + order / 2 + 1) * math.pi + 5.0

    zeros: list[float] = []
    start = max(float(order), _SCAN_STEP)
    for _ in range(64):
        grid = np.arange(start, upper + _SCAN_STEP, _SCAN_STEP)
        values = jv(order, grid)
        if not np.all(np.isfinite(values)):
            raise ConvergenceError(f"Bessel function J_{order} not finite on the scan grid.")
        for i in np.flatnonzero(values[:-1] * values[1:] < 0):
            zeros.append(_refine_zero(order, grid[i], grid[i + 1]))
            if count is not None and len(zeros) == count:
                return np.asarray(zeros)
        if below is not None:
            return np.asarray([z for z in zeros if z <= below])
        start = grid[-1]
        upper = start + max(10.0, upper - start)
    raise ConvergenceError(f"Could not bracket {count} zeros of J_{order}.")


def bessel_zero(order: int, index: int) -> float:
    """
    j_{index, order}: the index-th positive zero of J_order.

    The index comes first in j_{m,n} ("the m-th zero of J_n"), so j_{1,0},
    the first zero of J_0, is bessel_zero(order=0, index=1).
    """
    if index < 1:
        raise InvalidShapeError(f"Zero index must be at least 1, got {index}.")
    return float(bessel_zeros(order, count=index)[-1])


def _disk_below(radius: float, ceiling: float) -> np.ndarray:
    k_max = radius * math.sqrt(ceiling)
    values: list[np.ndarray] = []
    order = 0
    # the first zero of J_n exceeds n, so orders beyond k_max contribute nothing
    while order < k_max:
        zeros = bessel_zeros(order, below=k_max)
        if zeros.size == 0:
            break
        lam = (zeros / radius) ** 2
        values.append(lam if order == 0 else np.repeat(lam, 2))
        order += 1
    if not values:
        return np.empty(0)
    merged = np.sort(np.concatenate(values))
    return merged[merged <= ceiling]


def disk_spectrum(radius: float, count: int | None = None, ceiling: float | None = None) -> Spectrum:
    """Eigenvalues j_{m,n}^2 / R^2; orders n >= 1 appear twice (cos and sin modes)."""
    if not radius > 0:
        raise InvalidShapeError(f"Disk radius must be positive, got {radius}.")
    _check_count_or_ceiling(count, ceiling)
    if ceiling is not None:
        values = _disk_below(radius, ceiling)
        if values.size == 0:
            raise InvalidShapeError(f"No disk eigenvalue lies below {ceiling}.")
        return _exact(values, ceiling=ceiling)

    bound = _initial_ceiling(math.pi * radius ** 2, 2 * math.pi * radius, count)
    values = _disk_below(radius, bound)
    while values.size < count:
        bound *= 2
        values = _disk_below(radius, bound)
    logger.debug("Disk spectrum: %d values enumerated below %.6g", values.size, bound)
    return _exact(values[:count])


def weyl_ratio(s: Spectrum, lambda_cut: float) -> float:
    """N(lambda_cut) / lambda_cut; tends to area/(4 pi) as the cut grows."""
    if not lambda_cut > 0:
        raise InvalidShapeError(f"Cut must be positive, got {lambda_cut}.")
    if lambda_cut > s.complete_through:
        raise PreconditionError(
            f"Spectrum is only complete through {s.complete_through:.6g}, cannot count up to {lambda_cut:.6g}."
        )
    counted = int(np.searchsorted(s.eigenvalues, lambda_cut, side="right"))
    return counted / lambda_cut


def first_eigenvalue_bounds(p: Polygon) -> EigenvalueBounds:
    """
    Bracket lambda_1 of a convex polygon by domain monotonicity.

    The polygon sits inside a strip of its width w (lambda_1 > pi^2/w^2) and
    contains a disk of its inradius r (lambda_1 <= j_{1,0}^2 / r^2).
    """
    ext = geometry.extents(p)
    j10 = bessel_zero(0, 1)
    return EigenvalueBounds(lower=math.pi ** 2 / ext.width ** 2, upper=j10 ** 2 / ext.inradius ** 2)

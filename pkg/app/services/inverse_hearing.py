"""
Reconstruct shapes from spectral invariants.

* Parallelograms from (area, perimeter, a0).
* Acute trapezoids from (area, perimeter, a0) and the shortest closed
  geodesic 2h: the invariants reduce to the angle system
      csc(alpha) + csc(beta) = p,   1/(alpha(pi-alpha)) + 1/(beta(pi-beta)) = q,
  which has a unique solution with alpha >= beta.
* Regular n-gons from (area, perimeter), since area/perimeter^2 attains its
  n-gon maximum only at the regular polygon.
* Rectangles from (area, perimeter).

Every reconstruction is fed back through the forward map and must regenerate
its input.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import mpmath
import numpy as np
from scipy.optimize import brentq

from app.config import settings
from app.errors import ConvergenceError, InvalidShapeError, LemmaViolationError, NotInClassError
from app.models import HeatInvariants, ParallelogramParams, TrapezoidParams, TrapezoidSystem
from app.services import polygon as geometry
from app.services.heat_trace import geometric_heat_invariants

logger = logging.getLogger(__name__)

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class ToleranceProfile:
    """
    Guards used by the reconstructions.

    `discriminant` is the relative amount by which a square-root radicand may
    fall below zero and still be clamped to zero; `regeneration` is the
    relative mismatch allowed when the result is fed back through the forward
    map. The default profile is for exact invariants.
    """

    discriminant: float = field(default_factory=lambda: settings.algebraic_tol)
    regeneration: float = field(default_factory=lambda: settings.regeneration_tol)

    @classmethod
    def exact(cls) -> ToleranceProfile:
        return cls()

    @classmethod
    def noisy(cls, rel: float) -> ToleranceProfile:
        """Widen both guards in proportion to a relative noise level on the invariants."""
        if not rel > 0:
            raise InvalidShapeError(f"Noise level must be positive, got {rel}.")
        return cls(
            discriminant=max(rel, settings.algebraic_tol),
            regeneration=max(10 * rel, settings.regeneration_tol),
        )


class AnglePair(NamedTuple):
    alpha: float
    beta: float


class TrapezoidData(NamedTuple):
    system: TrapezoidSystem
    h: float
    sum_parallel: float
    sum_legs: float


class AlphaDomain(NamedTuple):
    isosceles: float  # lower end: the angle where beta(alpha) = alpha
    upper: float  # right end of the scan
    pole: float | None  # alpha where 1 - q alpha (pi - alpha) vanishes, if inside (0, pi/2)


@dataclass(frozen=True)
class UniquenessReport:
    grid_size: int
    u_max: float
    u_max_at: float
    v_prime_min: float
    v_prime_min_at: float
    u_second_min: float
    u_second_min_at: float
    violations: tuple[tuple[str, float, float], ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _clamped_sqrt(radicand: float, scale: float, slack: float, what: str) -> float:
    if radicand >= 0:
        return math.sqrt(radicand)
    if radicand >= -slack * scale:
        return 0.0
    raise NotInClassError(f"Negative discriminant ({radicand:.6g}): not a {what}'s invariants.")


def _mismatch(inv: HeatInvariants, other: HeatInvariants) -> float:
    return max(
        abs(inv.area - other.area) / inv.area,
        abs(inv.perimeter - other.perimeter) / inv.perimeter,
        abs(inv.a0 - other.a0) / max(1.0, abs(inv.a0)),
    )


def invariant_mismatch(inv: HeatInvariants, p) -> float:
    """Largest relative difference between inv and the invariants of polygon p."""
    return _mismatch(inv, geometric_heat_invariants(p))


def _check_regenerates(inv: HeatInvariants, p, profile: ToleranceProfile, what: str) -> float:
    mismatch = invariant_mismatch(inv, p)
    if mismatch > profile.regeneration:
        raise ConvergenceError(
            f"Reconstructed {what} regenerates the invariants only to {mismatch:.3g} "
            f"(allowed {profile.regeneration:.3g})."
        )
    return mismatch


def hear_parallelogram(inv: HeatInvariants, profile: ToleranceProfile | None = None) -> ParallelogramParams:
    """
    The angle comes from a0 = pi^2/(12 alpha (pi - alpha)) - 1/12, taking the
    root in (0, pi/2]; the sides are the two roots of the area/perimeter
    system, the shorter one being W.
    """
    profile = profile or ToleranceProfile.exact()
    shifted = inv.a0 + 1.0 / 12
    if not shifted > 0:
        raise NotInClassError(f"a0 = {inv.a0:.6g} is below -1/12; not a parallelogram's invariants.")
    k = math.pi ** 2 / (12 * shifted)
    alpha = HALF_PI - _clamped_sqrt(HALF_PI ** 2 - k, HALF_PI ** 2, profile.discriminant, "parallelogram")
    s = math.sin(alpha)

    quarter = inv.perimeter ** 2 / 4
    root = _clamped_sqrt(quarter - 4 * inv.area / s, quarter, profile.discriminant, "parallelogram")
    h = inv.perimeter * s / 4 - (s / 2) * root
    W = h / s
    L = inv.perimeter / 2 - W
    if L < W * (1 - 1e-12):
        raise LemmaViolationError(f"Reconstructed parallelogram has L={L} < W={W}.")
    params = ParallelogramParams(L=max(L, W), W=W, alpha=alpha)
    mismatch = _check_regenerates(inv, geometry.make_parallelogram(params), profile, "parallelogram")
    logger.info("Heard parallelogram L=%.12g W=%.12g alpha=%.12g (mismatch %.2g)", L, W, alpha, mismatch)
    return params


def hear_rectangle(inv: HeatInvariants, profile: ToleranceProfile | None = None) -> tuple[float, float]:
    """Sides as the roots of x^2 - (P/2) x + A = 0; a0 must be the rectangle value 1/4."""
    profile = profile or ToleranceProfile.exact()
    if abs(inv.a0 - 0.25) > profile.regeneration * max(1.0, abs(inv.a0)):
        raise NotInClassError(f"a0 = {inv.a0:.6g} differs from 1/4; not a rectangle's invariants.")
    quarter = inv.perimeter / 4
    root = _clamped_sqrt(quarter ** 2 - inv.area, quarter ** 2, profile.discriminant, "rectangle")
    length, width = quarter + root, quarter - root
    if not width > 0:
        raise NotInClassError("Rectangle reconstruction gives a nonpositive side.")
    _check_regenerates(inv, geometry.make_rectangle(length, width), profile, "rectangle")
    return length, width


def trapezoid_system_from_invariants(inv: HeatInvariants, geodesic: float) -> TrapezoidData:
    if not geodesic > 0:
        raise InvalidShapeError(f"Geodesic length must be positive, got {geodesic}.")
    h = geodesic / 2
    sum_parallel = 2 * inv.area / h
    sum_legs = inv.perimeter - sum_parallel
    if not sum_legs > 0:
        raise NotInClassError(
            f"Legs would sum to {sum_legs:.6g} <= 0: height {h:.6g} is inconsistent with any trapezoid."
        )
    p = sum_legs / h
    q = 24 * (inv.a0 + 1.0 / 12) / math.pi ** 2
    try:
        system = TrapezoidSystem(p=p, q=q)
    except InvalidShapeError as e:
        raise NotInClassError(f"No trapezoid has these invariants: {e}") from e
    return TrapezoidData(system=system, h=h, sum_parallel=sum_parallel, sum_legs=sum_legs)


def beta_of_alpha(alpha, q: float):
    """beta(alpha) from the a0 equation; nan where the radicand is negative or past the pole."""
    alpha = np.asarray(alpha, dtype=float)
    k = alpha * (math.pi - alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        paired = k / (q * k - 1)  # beta (pi - beta)
        radicand = np.where(paired > 0, HALF_PI ** 2 - paired, np.nan)
        return HALF_PI - np.sqrt(radicand)


def _g(alpha, q: float):
    beta = beta_of_alpha(alpha, q)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1 / np.sin(alpha) + 1 / np.sin(beta)


def _F(x: float) -> float:
    return x ** 2 * (math.pi - x) ** 2 * math.cos(x) / ((2 * x - math.pi) * math.sin(x) ** 2)


def g_prime(alpha: float, q: float) -> float:
    """d/dalpha of csc(alpha) + csc(beta(alpha)); vanishes at the isosceles point."""
    beta = float(beta_of_alpha(alpha, q))
    factor = (math.pi - 2 * alpha) / (alpha ** 2 * (math.pi - alpha) ** 2)
    return factor * (_F(alpha) - _F(beta))


def alpha_domain(q: float) -> AlphaDomain:
    """Canonical branch alpha >= beta(alpha): from the isosceles angle up to pi/2."""
    if q < 8 / math.pi ** 2:
        raise NotInClassError(f"q = {q:.6g} is below 8/pi^2; no pair of angles in (0, pi/2) fits a0.")
    isosceles = HALF_PI - math.sqrt(max(HALF_PI ** 2 - 2 / q, 0.0))
    # q alpha (pi - alpha) = 1
    pole_k = 1 / q
    pole = HALF_PI - math.sqrt(HALF_PI ** 2 - pole_k) if pole_k < HALF_PI ** 2 else None
    return AlphaDomain(isosceles=isosceles, upper=HALF_PI, pole=pole)


def solve_angle_system(
    system: TrapezoidSystem,
    scan_points: int | None = None,
    profile: ToleranceProfile | None = None,
) -> AnglePair:
    """
    Solve for (alpha, beta) with alpha >= beta.

    On the canonical branch g(alpha) = csc(alpha) + csc(beta(alpha)) increases
    from its minimum 2 csc(alpha_iso) at the isosceles angle, so the scan
    brackets at most one root; Brent's method finds it and one guarded Newton
    step with the closed-form derivative polishes it.
    """
    scan_points = settings.angle_scan_points if scan_points is None else scan_points
    profile = profile or ToleranceProfile.exact()
    p, q = system.p, system.q
    domain = alpha_domain(q)
    iso = domain.isosceles
    logger.debug(
        "Angle domain [%.12g, pi/2), pole at %s", iso, "none" if domain.pole is None else f"{domain.pole:.12g}",
    )

    g_iso = 2 / math.sin(iso)
    if abs(g_iso - p) <= max(profile.discriminant, settings.root_tol) * p:
        return AnglePair(iso, iso)
    if p < g_iso:
        raise NotInClassError(
            f"p = {p:.10g} lies below the isosceles minimum 2 csc({iso:.6g}) = {g_iso:.10g}; "
            "no acute trapezoid with these invariants."
        )

    grid = (np.arange(scan_points) + 0.5) * (HALF_PI / scan_points)
    alphas = np.concatenate([[iso], grid[grid > iso]])
    residual = _g(alphas, q) - p
    # scan points where beta is undefined are skipped
    valid = np.isfinite(residual)
    alphas, residual = alphas[valid], residual[valid]
    above = np.flatnonzero(residual > 0)
    if above.size == 0:
        raise NotInClassError(f"csc(alpha) + csc(beta) never reaches p = {p:.10g}; no trapezoid fits.")
    i = int(above[0])
    if i == 0:
        raise NotInClassError(
            f"csc(alpha) + csc(beta) already exceeds p = {p:.10g} at the isosceles angle; no root to bracket."
        )
    lo, hi = float(alphas[i - 1]), float(alphas[i])

    def objective(a: float) -> float:
        return float(_g(a, q)) - p

    alpha = brentq(objective, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    slope = g_prime(alpha, q)
    if slope != 0:
        polished = alpha - objective(alpha) / slope
        if lo <= polished <= hi and abs(objective(polished)) < abs(objective(alpha)):
            alpha = polished
    beta = float(beta_of_alpha(alpha, q))

    res_p = abs(1 / math.sin(alpha) + 1 / math.sin(beta) - p)
    res_q = abs(1 / (alpha * (math.pi - alpha)) + 1 / (beta * (math.pi - beta)) - q)
    if max(res_p / p, res_q / q) > settings.root_tol:
        raise ConvergenceError(f"Angle system residuals {res_p:.3g}, {res_q:.3g} exceed the root tolerance.")
    if not alpha + beta < HALF_PI:
        raise NotInClassError(
            f"The solution alpha={alpha:.10g}, beta={beta:.10g} is not acute (alpha + beta >= pi/2)."
        )
    return AnglePair(alpha, beta)


def hear_acute_trapezoid(
    inv: HeatInvariants, geodesic: float, profile: ToleranceProfile | None = None
) -> TrapezoidParams:
    profile = profile or ToleranceProfile.exact()
    data = trapezoid_system_from_invariants(inv, geodesic)
    alpha, beta = solve_angle_system(data.system, profile=profile)
    h, total = data.h, data.sum_parallel
    overhang = h * (1 / math.tan(alpha) + 1 / math.tan(beta))
    B = (total + overhang) / 2
    b = total - B
    if not b > 0:
        raise NotInClassError(f"Reconstructed top side b = {b:.6g} <= 0; geodesic inconsistent with invariants.")
    params = TrapezoidParams(B=B, b=b, h=h, alpha=alpha, beta=beta)
    mismatch = _check_regenerates(inv, geometry.make_trapezoid(params), profile, "trapezoid")
    logger.info(
        "Heard trapezoid B=%.12g b=%.12g h=%.12g alpha=%.12g beta=%.12g (mismatch %.2g)",
        B, b, h, alpha, beta, mismatch,
    )
    return params


def find_isoinvariant_trapezoid(
    t: TrapezoidParams, geodesic: float, profile: ToleranceProfile | None = None
) -> TrapezoidParams:
    """Acute trapezoid sharing area, perimeter and a0 with t but with the given geodesic."""
    inv = geometric_heat_invariants(geometry.make_trapezoid(t))
    return hear_acute_trapezoid(inv, geodesic, profile=profile)


def detect_regular(n: int, area: float, perimeter: float, tol: float | None = None) -> float | None:
    """Side length perimeter/n if area/perimeter^2 sits at the regular n-gon maximum, else None."""
    tol = settings.algebraic_tol if tol is None else tol
    if n < 3:
        raise InvalidShapeError(f"Need n >= 3, got {n}.")
    if not (area > 0 and perimeter > 0):
        raise InvalidShapeError("Area and perimeter must be positive.")
    f = area / perimeter ** 2
    target = geometry.regular_shape_functional(n)
    if f > target + tol:
        logger.warning("f = %.12g exceeds the %d-gon maximum %.12g; no %d-gon has these values", f, n, target, n)
    if abs(f - target) <= tol:
        return perimeter / n
    return None


def _u(a):
    pi = mpmath.pi
    return 2 / (pi - 2 * a) + 2 / a + 2 / (a - pi) - 2 * mpmath.cot(a) - mpmath.tan(a)


def _u_second(a):
    pi = mpmath.pi
    return (
        16 / (pi - 2 * a) ** 3
        + 4 / a ** 3
        + 4 / (a - pi) ** 3
        - 4 * mpmath.cos(a) / mpmath.sin(a) ** 3
        - 2 * mpmath.sin(a) / mpmath.cos(a) ** 3
    )


def _v_prime(a):
    return -3 / a ** 4 - 2 / mpmath.sin(a) ** 2 + 3 / mpmath.sin(a) ** 4


def uniqueness_scan(grid_size: int | None = None, dps: int = 40) -> UniquenessReport:
    """
    Check on a grid of (0, pi/2) that u = (log f)' < 0, u'' > 0 and v' >= 0.

    These quantities cancel catastrophically near both ends of the interval,
    so they are evaluated in mpmath with `dps` decimal digits.
    """
    grid_size = settings.angle_scan_points if grid_size is None else grid_size
    if grid_size < 100:
        raise InvalidShapeError(f"Grid size must be at least 100, got {grid_size}.")

    violations: list[tuple[str, float, float]] = []
    u_max = v_min = w_min = None
    with mpmath.workdps(dps):
        step = mpmath.pi / 2 / grid_size
        for i in range(grid_size):
            a = (i + mpmath.mpf("0.5")) * step
            u, w, v = _u(a), _u_second(a), _v_prime(a)
            x = float(a)
            if u_max is None or u > u_max[0]:
                u_max = (u, x)
            if w_min is None or w < w_min[0]:
                w_min = (w, x)
            if v_min is None or v < v_min[0]:
                v_min = (v, x)
            if not u < 0:
                violations.append(("u", x, float(u)))
            if not w > 0:
                violations.append(("u''", x, float(w)))
            if not v >= 0:
                violations.append(("v'", x, float(v)))

    report = UniquenessReport(
        grid_size=grid_size,
        u_max=float(u_max[0]),
        u_max_at=u_max[1],
        v_prime_min=float(v_min[0]),
        v_prime_min_at=v_min[1],
        u_second_min=float(w_min[0]),
        u_second_min_at=w_min[1],
        violations=tuple(violations),
    )
    logger.info(
        "Uniqueness scan on %d points: max u = %.3g, min u'' = %.3g, min v' = %.3g, %d violations",
        grid_size, report.u_max, report.u_second_min, report.v_prime_min, len(violations),
    )
    return report

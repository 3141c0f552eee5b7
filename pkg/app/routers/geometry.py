import numpy as np
from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.config import settings
from app.routers.common import service_errors
from app.services import isoperimetric
from app.services import polygon as geometry
from app.services.exact_spectra import first_eigenvalue_bounds
from app.services.heat_trace import geometric_heat_invariants, has_reflex_corner

router = APIRouter(prefix="/geometry", tags=["geometry"])


class PolygonRequest(BaseModel):
    vertices: list[tuple[float, float]] = Field(min_length=3)


class MaximizeRequest(BaseModel):
    n: int = Field(ge=3, le=64)
    seed: int = settings.random_seed
    tol: float | None = None


@router.post("/measure")
def measure(request: PolygonRequest):
    """
    Measurements of a simple polygon.

    Extents and the first-eigenvalue bracket are only defined for convex
    polygons and are null otherwise.
    """
    with service_errors():
        p = geometry.make_polygon(request.vertices)
        m = geometry.measurements(p)
        inv = geometric_heat_invariants(p)
        convex = geometry.is_convex(p)
        extents = bounds = None
        if convex:
            ext = geometry.extents(p)
            extents = {"diameter": ext.diameter, "inradius": ext.inradius, "width": ext.width}
            lower, upper = first_eigenvalue_bounds(p)
            bounds = {"lower": lower, "upper": upper}

    return {
        "vertices": p.to_list(),
        "area": m.area,
        "perimeter": m.perimeter,
        "angles": [float(a) for a in m.angles],
        "convex": convex,
        "shape_functional": geometry.shape_functional(p),
        "regular_shape_functional": geometry.regular_shape_functional(p.n),
        "extents": extents,
        "heat_invariants": {"area": inv.area, "perimeter": inv.perimeter, "a0": inv.a0},
        "outside_hypothesis": has_reflex_corner(p),
        "first_eigenvalue_bounds": bounds,
    }


@router.post("/maximize")
def maximize(request: MaximizeRequest):
    """Ascend area/perimeter^2 from a seeded random convex n-gon."""
    with service_errors():
        seed_polygon = geometry.random_convex_polygon(request.n, np.random.default_rng(request.seed))
        result = isoperimetric.maximize_f(request.n, seed_polygon, tol=request.tol)

    return {
        "n": request.n,
        "seed": request.seed,
        "f": result.f,
        "regular_f": isoperimetric.regular_f(request.n),
        "converged": result.converged,
        "iterations": result.iterations,
        "residual": result.residual,
        "vertices": result.polygon.to_list(),
    }

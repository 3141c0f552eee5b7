from typing import Literal

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from app.config import settings
from app.models import Spectrum
from app.routers.common import service_errors
from app.services import exact_spectra, fem
from app.services import polygon as geometry

router = APIRouter(prefix="/spectra", tags=["spectra"])


class ExactRequest(BaseModel):
    family: Literal["string", "rectangle", "disk"]
    length: float | None = None  # string length, or rectangle side
    width: float | None = None
    radius: float | None = None
    count: int | None = Field(default=None, ge=1, le=10_000)
    ceiling: float | None = None


class FemRequest(BaseModel):
    vertices: list[tuple[float, float]] = Field(min_length=3)
    count: int = Field(default=settings.default_count, ge=1, le=200)
    level: int = Field(default=settings.default_level, ge=0, le=6)
    extrapolate: bool = True


def spectrum_payload(s: Spectrum) -> dict:
    return {
        "eigenvalues": [float(v) for v in s.eigenvalues],
        "error_estimates": [float(e) for e in s.error_estimates],
        "provenance": s.provenance.value,
        "ceiling": s.ceiling,
    }


def _require(value, name: str, family: str):
    if value is None:
        raise HTTPException(status_code=400, detail=f"The {family} spectrum needs '{name}'.")
    return value


@router.post("/exact")
def exact(request: ExactRequest):
    if request.family == "string":
        length = _require(request.length, "length", "string")
        count = _require(request.count, "count", "string")
        with service_errors():
            s = exact_spectra.string_spectrum(length, count)
    elif request.family == "rectangle":
        length = _require(request.length, "length", "rectangle")
        width = _require(request.width, "width", "rectangle")
        with service_errors():
            s = exact_spectra.rectangle_spectrum(length, width, count=request.count, ceiling=request.ceiling)
    else:
        radius = _require(request.radius, "radius", "disk")
        with service_errors():
            s = exact_spectra.disk_spectrum(radius, count=request.count, ceiling=request.ceiling)
    return {"family": request.family, **spectrum_payload(s)}


@router.post("/fem")
def finite_elements(request: FemRequest):
    """Lowest Dirichlet eigenvalues by P1 finite elements, with the per-level history."""
    with service_errors():
        p = geometry.make_polygon(request.vertices)
        result = fem.dirichlet_eigenvalues(
            p, count=request.count, level=request.level, extrapolate=request.extrapolate,
        )
    return {
        **spectrum_payload(result.spectrum),
        "level": result.level,
        "extrapolated": result.extrapolated,
        "levels": list(result.levels),
        "history": result.history.tolist(),
        "interior_nodes": result.interior_nodes,
    }

import math

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.errors import NotInClassError
from app.models import HeatInvariants
from app.routers.common import service_errors
from app.services import inverse_hearing as hearing

router = APIRouter(prefix="/hear", tags=["hearing"])


class InvariantsRequest(BaseModel):
    area: float
    perimeter: float
    a0: float
    noise: float | None = Field(default=None, gt=0)  # relative noise on the invariants


class TrapezoidRequest(InvariantsRequest):
    geodesic: float


class RegularRequest(BaseModel):
    n: int = Field(ge=3)
    area: float
    perimeter: float


def _inputs(request: InvariantsRequest) -> tuple[HeatInvariants, hearing.ToleranceProfile]:
    inv = HeatInvariants(area=request.area, perimeter=request.perimeter, a0=request.a0)
    profile = hearing.ToleranceProfile.noisy(request.noise) if request.noise else hearing.ToleranceProfile.exact()
    return inv, profile


@router.post("/parallelogram")
def parallelogram(request: InvariantsRequest):
    with service_errors():
        inv, profile = _inputs(request)
        params = hearing.hear_parallelogram(inv, profile)
    return {"L": params.L, "W": params.W, "alpha": params.alpha}


@router.post("/rectangle")
def rectangle(request: InvariantsRequest):
    with service_errors():
        inv, profile = _inputs(request)
        length, width = hearing.hear_rectangle(inv, profile)
    return {"L": length, "W": width, "alpha": math.pi / 2}


@router.post("/trapezoid")
def trapezoid(request: TrapezoidRequest):
    """Acute trapezoid from its heat invariants and its shortest closed geodesic 2h."""
    with service_errors():
        inv, profile = _inputs(request)
        t = hearing.hear_acute_trapezoid(inv, request.geodesic, profile)
    return {"B": t.B, "b": t.b, "h": t.h, "alpha": t.alpha, "beta": t.beta}


@router.post("/regular")
def regular(request: RegularRequest):
    with service_errors():
        side = hearing.detect_regular(request.n, request.area, request.perimeter)
        if side is None:
            raise NotInClassError(f"Area and perimeter do not belong to a regular {request.n}-gon.")
    return {"n": request.n, "side": side}

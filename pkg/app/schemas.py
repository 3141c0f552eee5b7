"""Pydantic models for the JSON documents read by the CLI and the run configuration echo."""
from __future__ import annotations

from pydantic import BaseModel, Field

from app.config import settings


class PolygonFile(BaseModel):
    vertices: list[tuple[float, float]] = Field(min_length=3)


class HeatInvariantsFile(BaseModel):
    area: float
    perimeter: float
    a0: float
    geodesic: float | None = None  # shortest closed geodesic, needed for trapezoids


class RunConfig(BaseModel):
    """Everything that determines a run's outputs; echoed as config.json."""

    subcommand: str
    inputs: list[str] = []
    level: int = settings.default_level
    count: int = settings.default_count
    extrapolate: bool = True
    t_min: float | None = None
    t_max: float | None = None
    t_points: int = Field(default=20, ge=3)
    tol: float | None = None
    out: str = settings.output_dir
    seed: int = settings.random_seed
    # subcommand specific
    shape: str | None = None
    n: int | None = None
    d: list[float] = []
    include_square: bool = False
    geodesic: float | None = None
    ground_truth: str | None = None
    resolution: int = Field(default=settings.orbit_resolution, ge=32)
    budget: int = Field(default=200, ge=1)
    export_mesh: bool = False

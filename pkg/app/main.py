import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI

from app.config import settings
from app.routers import geometry, hearing, spectra


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Configure logging before the app begins serving requests."""
    logging.basicConfig(level=settings.log_level.upper())
    yield


app = FastAPI(
    title="Drumhead API",
    description="Dirichlet spectra of polygons and the shapes that can be heard from them.",
    version="0.1.0",
    lifespan=lifespan,
)

# Register all routers
app.include_router(geometry.router)
app.include_router(spectra.router)
app.include_router(hearing.router)


@app.get("/")
def root():
    return {"message": "Drumhead API is running.", "docs": "/docs"}

from contextlib import contextmanager

from fastapi import HTTPException


@contextmanager
def service_errors():
    """Map service exceptions onto HTTP errors: bad input 400, numeric failure 422."""
    try:
        yield
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except RuntimeError as e:
        raise HTTPException(status_code=422, detail=str(e))

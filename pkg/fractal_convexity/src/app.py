from typing import Optional

import pydantic
from fastapi import FastAPI, HTTPException, Request, status
from fastapi.responses import JSONResponse

from fractal_core import components
from fractal_core.exceptions import FractalError
from fractal_core.models import (
    CalcRequest,
    ClassifyRequest,
    ExamplesRequest,
    SandwichRequest,
    TheoremsRequest,
)
from fractal_core.utils import reporting

app = FastAPI(docs_url=None)


@app.exception_handler(FractalError)
def fractal_error_handler(request: Request, error: FractalError):
    return JSONResponse(status_code=status.HTTP_400_BAD_REQUEST, content={"detail": str(error)})


@app.exception_handler(pydantic.ValidationError)
def validation_error_handler(request: Request, error: pydantic.ValidationError):
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"detail": error.errors(include_url=False, include_context=False)},
    )


@app.get("/health")
def health():
    return JSONResponse(status_code=status.HTTP_200_OK, content={"status": "Online"})


@app.post("/classify")
def classify_endpoint(request: ClassifyRequest) -> dict:
    """
    Certifies GK_s^1 / GK_s^2 membership of a DSL function
    """
    return reporting.to_plain(components.classify(request))


@app.post("/calc/{operation}")
def calc_endpoint(operation: str, request: CalcRequest) -> dict:
    """
    Local fractional derivative, integral, continuity, ratio limit or ftc residual
    """
    if operation not in ("derive", "integrate", "continuity", "ratio-limit", "ftc"):
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=f"unknown operation {operation}")
    try:
        return reporting.to_plain(components.calculate(operation, request))
    except ValueError as error:
        if isinstance(error, (FractalError, pydantic.ValidationError)):
            raise
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(error))


@app.post("/theorems")
def theorems_endpoint(request: TheoremsRequest) -> list:
    try:
        return reporting.to_plain(components.run_theorems(request))
    except ValueError as error:
        if isinstance(error, (FractalError, pydantic.ValidationError)):
            raise
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(error))


@app.post("/sandwich")
def sandwich_endpoint(request: SandwichRequest) -> dict:
    return reporting.to_plain(components.sandwich(request))


@app.get("/examples")
def examples_endpoint(which: str = "4.1", k: float = 2.0, s: Optional[float] = None) -> dict:
    """
    Example gallery; the regression matrix is only run on request (which=matrix)
    """
    request = ExamplesRequest(which=which, k=k, s=s)
    return reporting.to_plain(components.examples(request))

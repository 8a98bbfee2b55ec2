import time
from typing import Callable, TypeVar

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, PlainTextResponse

from .config import settings
from .constants import APP_VERSION
from .convergence_lab import convergence_matrix
from .convergence_lab import fixtures as sequence_fixture
from .errors import CpintError
from .expressions import compile_expression
from .fixture_utils import load_fixture_specs, source_distribution
from .function_core import parse_extended
from .integral_core import NormKind, integral, norm
from .lattice_order import abs_norm
from .logging_utils import log_error, log_run_event
from .schemas import (
    ConvergeRequest,
    ConvergenceReport,
    FixtureInfo,
    FixtureListResponse,
    IntegrateRequest,
    LaplaceRequest,
    LaplaceResponse,
    NormRequest,
    PoissonRequest,
    PoissonResponse,
    ValueResponse,
    WeightedRequest,
    WeightedResponse,
)
from .transforms import (
    ComplexPoint,
    HalfPlanePoint,
    laplace,
    laplace_derivative,
    poisson,
    weighted_integral,
    weighted_laplace,
)


app = FastAPI(title=settings.app_name, version=APP_VERSION)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

T = TypeVar("T")


def _handle(endpoint: str, body, compute: Callable[[], T]) -> T:
    """Runs one request: CpintError -> 422, anything else -> 500, both logged."""
    started = time.perf_counter()
    status = 200
    try:
        return compute()
    except CpintError as e:
        status = 422
        log_error(f"{endpoint} failed", {"error": e.message, "type": type(e).__name__, "witness": e.witness})
        raise HTTPException(status_code=422, detail=e.message)
    except ValueError as e:
        status = 422
        log_error(f"{endpoint} failed", {"error": str(e)})
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        status = 500
        log_error(f"{endpoint} failed", {"error": str(e)})
        raise HTTPException(status_code=500, detail="Internal error")
    finally:
        log_run_event({
            "endpoint": endpoint,
            "request": body.model_dump() if body is not None else None,
            "status": status,
            "elapsed_ms": round(1000.0 * (time.perf_counter() - started), 3),
        })


@app.post("/integrate", response_model=ValueResponse)
def integrate(body: IntegrateRequest):
    def compute() -> ValueResponse:
        a, b = parse_extended(body.a), parse_extended(body.b)
        f = source_distribution(body.primitive, body.primitive_of, body.fixture, None, a, b, body.hake, body.tol)
        return ValueResponse(value=integral(f, a, b))

    return _handle("integrate", body, compute)


@app.post("/norm", response_model=ValueResponse)
def norm_endpoint(body: NormRequest):
    def compute() -> ValueResponse:
        f = source_distribution(body.primitive, None, body.fixture, body.support, tol=body.tol)
        if body.kind == "abs":
            result = abs_norm(f, tol=body.tol)
            return ValueResponse(value=result.value, divergent=result.divergent, lower_bound=result.lower_bound)
        value = norm(f, NormKind(body.kind), body.tol)
        return ValueResponse(value=value, lower_bound=value)

    return _handle("norm", body, compute)


@app.post("/poisson", response_model=PoissonResponse)
def poisson_endpoint(body: PoissonRequest):
    def compute() -> PoissonResponse:
        f = source_distribution(body.primitive, None, body.fixture, tol=body.tol)
        return PoissonResponse(values=[poisson(f, HalfPlanePoint(x, y), body.tol) for x, y in body.points])

    return _handle("poisson", body, compute)


@app.post("/laplace", response_model=LaplaceResponse)
def laplace_endpoint(body: LaplaceRequest):
    def compute() -> LaplaceResponse:
        f = source_distribution(body.primitive, None, body.fixture, tol=body.tol)
        values = []
        for re_z, im_z in body.points:
            z = ComplexPoint(re_z, im_z)
            value = laplace(f, z, body.tol) if body.derivative == 0 else laplace_derivative(f, z, body.derivative, body.tol)
            values.append((value.real, value.imag))
        return LaplaceResponse(values=values)

    return _handle("laplace", body, compute)


@app.post("/weighted", response_model=WeightedResponse)
def weighted_endpoint(body: WeightedRequest):
    """Without points, the weighted integral; with points, the weighted Laplace transform at each."""

    def compute() -> WeightedResponse:
        F_loc = compile_expression(body.primitive)
        if not body.points:
            return WeightedResponse(value=weighted_integral(F_loc, body.r, body.tol))
        values = []
        for re_z, im_z in body.points:
            value = weighted_laplace(F_loc, ComplexPoint(re_z, im_z), body.r, body.tol)
            values.append((value.real, value.imag))
        return WeightedResponse(values=values)

    return _handle("weighted", body, compute)


@app.post("/converge", response_model=ConvergenceReport)
def converge(body: ConvergeRequest):
    def compute() -> ConvergenceReport:
        seq = sequence_fixture(body.fixture, body.params)
        return convergence_matrix(seq, modes=body.modes, n_max=body.n_max)

    return _handle("converge", body, compute)


@app.get("/fixtures", response_model=FixtureListResponse)
def list_fixtures():
    def compute() -> FixtureListResponse:
        specs = load_fixture_specs()
        return FixtureListResponse(fixtures=[
            FixtureInfo(name=name, kind=spec.kind, description=spec.description) for name, spec in specs.items()
        ])

    return _handle("fixtures", None, compute)


@app.get("/health")
def health():
    return {"status": "ok", "app": settings.app_name, "version": APP_VERSION}


@app.get("/logs/runs")
def get_run_logs(download: bool = False):
    try:
        path = settings.run_log_path
        if download:
            return FileResponse(path=path, media_type="text/plain", filename="runs.ndjson")
        with open(path, "r", encoding="utf-8") as f:
            content = f.read()
        return PlainTextResponse(content, media_type="text/plain")
    except FileNotFoundError:
        return PlainTextResponse("", media_type="text/plain")
    except Exception as e:
        log_error("get_run_logs failed", {"error": str(e)})
        raise HTTPException(status_code=500, detail="Internal error")

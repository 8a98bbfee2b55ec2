import os
from contextlib import contextmanager
from contextvars import ContextVar
from pathlib import Path
from typing import Any, Iterator

from dotenv import load_dotenv
from pydantic_settings import BaseSettings


BASE_DIR = Path(__file__).resolve().parents[2]

load_dotenv(BASE_DIR / ".env")


class Settings(BaseSettings):
    app_name: str = os.getenv("CPINT_APP_NAME", "Continuous Primitive Integral")
    environment: str = os.getenv("CPINT_ENVIRONMENT", "dev")

    # Tolerances and refinement budget
    tol: float = float(os.getenv("CPINT_TOL", "1e-10"))
    budget: int = int(os.getenv("CPINT_BUDGET", "40"))
    equality_tol: float = float(os.getenv("CPINT_EQUALITY_TOL", "1e-9"))
    max_cells: int = int(os.getenv("CPINT_MAX_CELLS", str(2**21)))

    # Audits
    audit_grid_points: int = int(os.getenv("CPINT_AUDIT_GRID_POINTS", "1025"))
    tail_window: int = int(os.getenv("CPINT_TAIL_WINDOW", "32"))
    stall_refinements: int = int(os.getenv("CPINT_STALL_REFINEMENTS", "8"))

    # Convergence lab
    n_max: int = int(os.getenv("CPINT_N_MAX", "64"))
    verdict_tol: float = float(os.getenv("CPINT_VERDICT_TOL", "0.05"))

    # Randomized suites
    seed: int = int(os.getenv("CPINT_SEED", "20240611"))

    # Fixture data
    fixture_specs_path: str = os.getenv("CPINT_FIXTURE_SPECS_PATH", str(BASE_DIR / "fixture_data" / "fixtures.json"))

    # Logging
    run_log_path: str = os.getenv("CPINT_RUN_LOG_PATH", str(BASE_DIR / "logs" / "runs.ndjson"))
    error_log_path: str = os.getenv("CPINT_ERROR_LOG_PATH", str(BASE_DIR / "logs" / "error.log"))
    log_runs: bool = os.getenv("CPINT_LOG_RUNS", "true").lower() in ("1", "true", "yes")


_current: ContextVar[Settings] = ContextVar("cpint_settings", default=Settings())


class _ContextSettings:
    """Attribute access to the settings in force for the current context."""

    def __getattr__(self, name: str) -> Any:
        return getattr(_current.get(), name)

    def __setattr__(self, name: str, value: Any) -> None:
        setattr(_current.get(), name, value)


settings = _ContextSettings()


@contextmanager
def overridden(**updates: Any) -> Iterator[Settings]:
    """Scopes a copy of the current settings with `updates` applied; the shared instance is never touched."""
    scoped = _current.get().model_copy(update=updates)
    token = _current.set(scoped)
    try:
        yield scoped
    finally:
        _current.reset(token)

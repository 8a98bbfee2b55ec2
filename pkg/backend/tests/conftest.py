import pytest

from cpint.config import settings
from cpint.fixture_utils import catalog, seeded_rng


@pytest.fixture(autouse=True)
def isolated_logs(tmp_path, monkeypatch):
    """Run and error logs go to a per-test directory."""
    monkeypatch.setattr(settings, "run_log_path", str(tmp_path / "runs.ndjson"))
    monkeypatch.setattr(settings, "error_log_path", str(tmp_path / "error.log"))
    return tmp_path


@pytest.fixture
def rng():
    return seeded_rng()


@pytest.fixture
def arctan():
    return catalog("arctan")


@pytest.fixture
def gaussian():
    return catalog("gaussian")


@pytest.fixture
def sin_bump():
    return catalog("sin_bump")

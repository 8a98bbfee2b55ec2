import pytest

from cpint.config import overridden, settings


def test_overridden_scopes_a_copy():
    before = settings.tol
    with overridden(tol=1e-6, budget=12) as scoped:
        assert settings.tol == 1e-6
        assert settings.budget == 12
        assert scoped.tol == 1e-6
    assert settings.tol == before


def test_overridden_restores_after_an_error():
    before = settings.budget
    with pytest.raises(RuntimeError):
        with overridden(budget=3):
            raise RuntimeError("boom")
    assert settings.budget == before


def test_overridden_sees_monkeypatched_paths(isolated_logs):
    with overridden(tol=1e-6):
        assert settings.run_log_path == str(isolated_logs / "runs.ndjson")


def test_nested_overrides_unwind_in_order():
    before = settings.tol
    with overridden(tol=1e-4):
        with overridden(tol=1e-5):
            assert settings.tol == 1e-5
        assert settings.tol == 1e-4
    assert settings.tol == before

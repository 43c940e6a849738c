import pytest


@pytest.fixture(autouse=True)
def _isolated_worker_env(monkeypatch):
    # worker count must come from test arguments, not the caller's shell
    monkeypatch.delenv("FBBAI_WORKERS", raising=False)

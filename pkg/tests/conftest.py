"""Shared fixtures and the hermetic test-mode guard.

Every test runs with stub providers forced on, so no test can open a
network connection through the provider layer: constructing a live client
under stub mode raises StubModeViolation.
"""

import os

# Must happen before any groundmem import in the test process.
os.environ["MEM_PROVIDER_MODE"] = "stub"
os.environ.pop("MEM_PROVIDER_BASE_URL", None)
os.environ.pop("MEM_PROVIDER_API_KEY", None)

import pytest
from hypothesis import HealthCheck, settings

from groundmem.fixtures import home_scene_path
from groundmem.store import MemoryStore, items_from_fixture

# The first jitted-kernel call compiles; without a deadline waiver that one
# slow example would flake the property run that happens to hit it first.
settings.register_profile(
    "groundmem",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("groundmem")


@pytest.fixture(autouse=True)
def _force_stub_mode(monkeypatch):
    monkeypatch.setenv("MEM_PROVIDER_MODE", "stub")


@pytest.fixture(scope="session")
def home_items():
    return items_from_fixture(home_scene_path())


@pytest.fixture(scope="session")
def home_store(home_items):
    """The 329-caption home-scene corpus, ingested once per session."""
    store = MemoryStore()
    report = store.ingest(home_items)
    assert report.notes_created == 329, report.as_dict()
    assert not report.failures
    return store

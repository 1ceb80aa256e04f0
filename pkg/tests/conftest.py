from __future__ import annotations

import pytest
from hypothesis import settings

from finloc.families import catalog

settings.register_profile("finloc", max_examples=60, deadline=None)
settings.load_profile("finloc")


@pytest.fixture(scope="session")
def small_groups():
    return [G for G in catalog(200) if G.order <= 24]

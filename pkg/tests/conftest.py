import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SPECS = Path(__file__).resolve().parent.parent / "specs"


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def spec_path():
    def get(name: str) -> Path:
        return SPECS / name
    return get


def load_spec(name: str) -> dict:
    return json.loads((SPECS / name).read_text())

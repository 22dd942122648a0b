from __future__ import annotations

import pytest

from controlroom.config import PipelineConfig
from controlroom.harness import default_model


@pytest.fixture(scope="session")
def config() -> PipelineConfig:
    return PipelineConfig()


@pytest.fixture(scope="session")
def model():
    # one trained model for the whole run; training is deterministic
    return default_model()

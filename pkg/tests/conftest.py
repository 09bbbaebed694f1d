from __future__ import annotations

import numpy as np
import pytest

from speckletk import FrameStack


def random_stack(rng: np.random.Generator, width: int, height: int, frames: int) -> FrameStack:
    return FrameStack(rng.integers(0, 256, size=(frames, height, width), dtype=np.uint8))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(17)

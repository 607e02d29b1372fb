import numpy as np
import pytest

from surrex import Image


@pytest.fixture
def textured_128():
    """Fixed textured gray 128x128 image for metric tests."""
    rng = np.random.default_rng(42)
    y, x = np.mgrid[0:128, 0:128] / 127.0
    base = 0.5 + 0.2 * np.sin(2 * np.pi * 5 * x) * np.cos(2 * np.pi * 3 * y)
    noise = rng.uniform(-0.15, 0.15, size=(128, 128))
    return Image(np.clip(base + noise, 0.0, 1.0))


@pytest.fixture
def rgb_16():
    rng = np.random.default_rng(7)
    return Image(rng.uniform(0.0, 1.0, size=(16, 16, 3)))

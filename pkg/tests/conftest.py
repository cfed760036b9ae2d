import numpy as np
import pytest

from vprbench import ImageGray


@pytest.fixture
def rng():
    return np.random.default_rng(20240813)


def random_image(rng, width=32, height=24, lo=0.2, hi=0.8) -> ImageGray:
    return ImageGray(rng.uniform(lo, hi, size=(height, width)))

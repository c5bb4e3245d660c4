import numpy as np
import pytest
from hypothesis import settings

from powerline_hough.raster import BinaryImage

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def edges_from_points(width, height, points):
    mask = np.zeros((height, width), dtype=bool)
    for x, y in points:
        mask[y, x] = True
    return BinaryImage(mask)


def horizontal_lines(width, height, rows):
    mask = np.zeros((height, width), dtype=bool)
    mask[list(rows), :] = True
    return BinaryImage(mask)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

from __future__ import annotations

import pytest

from mirrorqm.core import gaussian_spectrum, make_grid


@pytest.fixture(scope="session")
def gaussian_plus():
    """P0 = 5, sigma = 0.25 right-moving spectrum on (0.01, 10) with 2048 samples."""
    return gaussian_spectrum(5.0, 0.25, make_grid(0.01, 10.0, 2048), "plus")

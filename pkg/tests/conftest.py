"""Shared helpers for the test suite."""

import numpy as np
import pytest

from avpress.geometry import AudioTokenStream, VideoTokenGrid


def make_grid(rng, frames, positions, dim):
    return VideoTokenGrid(rng.standard_normal((frames, positions, dim)))


def make_stream(rng, count, frames, dim, alignment=None):
    if alignment is None:
        alignment = np.sort(rng.integers(1, frames + 1, size=count)).astype(np.int64)
    return AudioTokenStream(rng.standard_normal((count, dim)), np.asarray(alignment, dtype=np.int64))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

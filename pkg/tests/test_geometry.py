import math

import numpy as np
import pytest

from avpress.errors import InvalidInputError
from avpress.geometry import (
    AudioTokenStream,
    CompressionConfig,
    VideoTokenGrid,
    as_embedding,
    cosine,
    mean_pool,
    round_half_up,
    softmax_weights,
)
from oracles import o_cosine, o_mean_pool, o_softmax


def test_round_half_up():
    assert round_half_up(0.5) == 1
    assert round_half_up(1.5) == 2
    assert round_half_up(2.5) == 3
    assert round_half_up(2.4) == 2
    assert round_half_up(-0.5) == 0
    assert round_half_up(-1.5) == -1
    assert round_half_up(9.6) == 10


def test_cosine_identity_orthogonal_and_derived():
    assert cosine([1.0, 0.0], [1.0, 0.0]) == 1.0
    assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0
    assert abs(cosine([1.0, 1.0], [1.0, 0.0]) - 0.70710678) < 1e-8
    assert abs(cosine([1.0, 1.0], [1.0, 0.0]) - 1.0 / math.sqrt(2.0)) < 1e-12


def test_cosine_zero_norm_is_zero():
    assert cosine([0.0, 0.0], [1.0, 2.0]) == 0.0
    assert cosine([1.0, 2.0], [0.0, 0.0]) == 0.0


def test_cosine_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        cosine([1.0, 0.0], [1.0, 0.0, 0.0])


def test_cosine_properties_random(rng):
    for _ in range(200):
        d = int(rng.integers(1, 8))
        u = rng.standard_normal(d)
        v = rng.standard_normal(d)
        c = cosine(u, v)
        assert abs(c) <= 1.0 + 1e-12
        assert abs(c - cosine(v, u)) < 1e-12
        assert abs(cosine(u, u) - 1.0) < 1e-9
        scale = float(rng.uniform(0.1, 10.0))
        assert abs(cosine(scale * u, v) - c) < 1e-9
        assert abs(c - o_cosine(u.tolist(), v.tolist())) < 1e-12


def test_mean_pool_cases():
    assert np.allclose(mean_pool([[1.0, 0.0], [0.0, 1.0]]), [0.5, 0.5])
    assert np.allclose(mean_pool([[2.0, 2.0]]), [2.0, 2.0])
    assert np.allclose(mean_pool([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]), [3.0, 4.0])


def test_mean_pool_of_copies_is_identity(rng):
    x = rng.standard_normal(5)
    pooled = mean_pool(np.tile(x, (7, 1)))
    assert np.allclose(pooled, x, atol=1e-12)


def test_mean_pool_rejects_empty_and_ragged():
    with pytest.raises(InvalidInputError):
        mean_pool([])
    with pytest.raises(InvalidInputError):
        mean_pool([[1.0, 2.0], [1.0]])


def test_mean_pool_matches_oracle(rng):
    for _ in range(100):
        rows = rng.standard_normal((int(rng.integers(1, 7)), int(rng.integers(1, 5))))
        assert np.allclose(mean_pool(rows), o_mean_pool(rows.tolist()), atol=1e-12)


def test_softmax_cases():
    assert np.allclose(softmax_weights([0.0, 0.0]), [0.5, 0.5])
    assert np.allclose(softmax_weights([3.7]), [1.0])
    assert np.allclose(softmax_weights([0.0, math.log(3.0)]), [0.25, 0.75])


def test_softmax_properties(rng):
    for _ in range(100):
        scores = rng.standard_normal(int(rng.integers(1, 9)))
        w = softmax_weights(scores)
        assert abs(float(np.sum(w)) - 1.0) < 1e-9
        assert np.all(w > 0)
        shifted = softmax_weights(scores + 17.3)
        assert np.allclose(w, shifted, atol=1e-9)
        assert np.allclose(w, o_softmax(scores.tolist()), atol=1e-12)


def test_softmax_is_stable_for_large_scores():
    w = softmax_weights([1000.0, 1000.0, 999.0])
    assert np.isfinite(w).all()
    assert abs(float(np.sum(w)) - 1.0) < 1e-9


def test_as_embedding_validation():
    v = as_embedding([1.0, 2.0])
    assert v.dtype == np.float64
    assert not v.flags.writeable
    with pytest.raises(InvalidInputError):
        as_embedding([[1.0, 2.0]])
    with pytest.raises(InvalidInputError):
        as_embedding([1.0, float("nan")])
    with pytest.raises(InvalidInputError):
        as_embedding([])


def test_video_grid_validation(rng):
    grid = VideoTokenGrid(rng.standard_normal((2, 3, 4)))
    assert (grid.frames, grid.positions_per_frame, grid.dim) == (2, 3, 4)
    with pytest.raises(InvalidInputError):
        VideoTokenGrid(rng.standard_normal((2, 3)))
    bad = rng.standard_normal((2, 3, 4))
    bad[1, 2, 0] = np.inf
    with pytest.raises(InvalidInputError):
        VideoTokenGrid(bad)


def test_audio_stream_validation(rng):
    tokens = rng.standard_normal((4, 3))
    stream = AudioTokenStream(tokens, np.array([1, 1, 2, 2]))
    assert stream.count == 4 and stream.dim == 3
    with pytest.raises(InvalidInputError):
        AudioTokenStream(tokens, np.array([1, 2]))
    with pytest.raises(InvalidInputError):
        AudioTokenStream(tokens, np.array([1, 2, 2, 1]))
    with pytest.raises(InvalidInputError):
        AudioTokenStream(tokens, np.array([0, 1, 1, 2]))
    empty = AudioTokenStream(np.zeros((0, 3)), np.zeros(0, dtype=np.int64))
    assert empty.count == 0


def test_config_validation():
    config = CompressionConfig()
    assert config.retain_video == 0.3
    assert config.guidance_mode == "full-omac"
    with pytest.raises(InvalidInputError):
        CompressionConfig(retain_video=0.0)
    with pytest.raises(InvalidInputError):
        CompressionConfig(retain_audio=1.5)
    with pytest.raises(InvalidInputError):
        CompressionConfig(coverage_bins=0)
    with pytest.raises(InvalidInputError):
        CompressionConfig(tokens_per_selected_frame=0)
    with pytest.raises(InvalidInputError):
        CompressionConfig(guidance_mode="omnizip")
    with pytest.raises(InvalidInputError):
        CompressionConfig(unselected_frame_weight=-0.1)

"""Domain types and similarity/pooling primitives.

Conventions used all over the package:

* Embeddings are 1-D float64 numpy arrays. Bundles store float32 on disk;
  everything is upcast to float64 on construction so that pooled summaries
  of long frames do not drift.
* Frame indices, token positions, and audio token indices are 1-based in
  every public structure (matching how results are reported); numpy array
  storage is 0-based internally.
* Finiteness is validated once, when a grid/stream is constructed, not in
  each operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from avpress.errors import InvalidInputError

VALID_GUIDANCE_MODES = ("audio-guided", "visual-guided", "full-omac")


def round_half_up(x: float) -> int:
    """Round with halves going up, identically on every platform."""
    return int(math.floor(x + 0.5))


def as_embedding(values) -> np.ndarray:
    """Coerce to a validated float64 embedding vector."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise InvalidInputError("embedding must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("embedding contains non-finite values")
    arr.setflags(write=False)
    return arr


def _token_matrix(values, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class VideoTokenGrid:
    """T frames x P positions x d dims of visual token embeddings."""

    tokens: np.ndarray  # (T, P, d) float64, read-only

    def __post_init__(self):
        arr = _token_matrix(self.tokens, "video tokens")
        if arr.ndim != 3 or arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
            raise InvalidInputError("video grid must have shape (T, P, d) with T, P, d >= 1")
        object.__setattr__(self, "tokens", arr)

    @property
    def frames(self) -> int:
        return self.tokens.shape[0]

    @property
    def positions_per_frame(self) -> int:
        return self.tokens.shape[1]

    @property
    def dim(self) -> int:
        return self.tokens.shape[2]


@dataclass(frozen=True)
class AudioTokenStream:
    """N_a audio token embeddings plus the frame-alignment map.

    ``alignment[i]`` is the 1-based video frame index the i-th audio token
    overlaps; entries must be non-decreasing (audio tokens are temporal).
    """

    tokens: np.ndarray  # (N_a, d) float64, read-only
    alignment: np.ndarray  # (N_a,) int64, 1-based, non-decreasing

    def __post_init__(self):
        arr = _token_matrix(self.tokens, "audio tokens")
        if arr.ndim != 2 or arr.shape[1] < 1:
            raise InvalidInputError("audio stream must have shape (N_a, d) with d >= 1")
        align = np.ascontiguousarray(self.alignment, dtype=np.int64)
        if align.ndim != 1 or align.shape[0] != arr.shape[0]:
            raise InvalidInputError("alignment must map every audio token to a frame")
        if align.size and (np.any(align < 1) or np.any(np.diff(align) < 0)):
            raise InvalidInputError("alignment must be non-decreasing with entries >= 1")
        align.setflags(write=False)
        object.__setattr__(self, "tokens", arr)
        object.__setattr__(self, "alignment", align)

    @property
    def count(self) -> int:
        return self.tokens.shape[0]

    @property
    def dim(self) -> int:
        return self.tokens.shape[1]


@dataclass(frozen=True)
class CompressionConfig:
    """All scalar knobs of the compression pipeline.

    retain_video is the fraction of frames kept as memory slots;
    tokens_per_selected_frame is the per-frame explicit token budget (see
    ``avpress.visual.default_tokens_per_frame`` for the ratio-matching
    default the CLI applies). unselected_frame_weight is the floor weight
    audio budgeting gives to frames that kept no visual memory.
    """

    retain_video: float = 0.3
    retain_audio: float = 0.3
    coverage_bins: int = 4
    tokens_per_selected_frame: int = 1
    guidance_mode: str = "full-omac"
    unselected_frame_weight: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.retain_video <= 1.0:
            raise InvalidInputError("retain_video must be in (0, 1]")
        if not 0.0 < self.retain_audio <= 1.0:
            raise InvalidInputError("retain_audio must be in (0, 1]")
        if self.coverage_bins < 1:
            raise InvalidInputError("coverage_bins must be >= 1")
        if self.tokens_per_selected_frame < 1:
            raise InvalidInputError("tokens_per_selected_frame must be >= 1")
        if self.guidance_mode not in VALID_GUIDANCE_MODES:
            raise InvalidInputError(
                f"guidance_mode must be one of {VALID_GUIDANCE_MODES}, got {self.guidance_mode!r}"
            )
        if self.unselected_frame_weight < 0.0:
            raise InvalidInputError("unselected_frame_weight must be >= 0")


def cosine(u, v) -> float:
    """Cosine similarity in [-1, 1]; zero-norm vectors score 0.

    Degenerate (all-zero) padding tokens stay score-neutral instead of
    producing NaN.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise InvalidInputError(f"cosine needs equal-dimension vectors, got {u.shape} and {v.shape}")
    norm_u = float(np.linalg.norm(u))
    norm_v = float(np.linalg.norm(v))
    if norm_u == 0.0 or norm_v == 0.0:
        return 0.0
    return float(np.dot(u, v) / (norm_u * norm_v))


def mean_pool(tokens) -> np.ndarray:
    """Coordinate-wise arithmetic mean of a non-empty token sequence."""
    try:
        arr = np.asarray(tokens, dtype=np.float64)
    except ValueError as exc:
        raise InvalidInputError(f"mean_pool needs uniform-dimension vectors: {exc}") from exc
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise InvalidInputError("mean_pool needs a non-empty sequence of equal-length vectors")
    return arr.mean(axis=0)


def softmax_weights(scores) -> np.ndarray:
    """Exp-normalized weights over scores, max-subtracted for stability.

    Output entries are positive and sum to 1; adding a constant to every
    score leaves the result unchanged.
    """
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise InvalidInputError("softmax_weights needs a non-empty score vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("softmax_weights needs finite scores")
    shifted = np.exp(arr - arr.max())
    return shifted / shifted.sum()

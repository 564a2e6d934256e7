"""Frame scoring, coverage-aware key-frame selection, contrast filtering,
and per-frame memory token construction.

The selection rules are deliberately deterministic so an exhaustive oracle
can reproduce them: every score tie breaks toward the smaller index, frames
are binned contiguously for temporal coverage, and rounding is half-up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from avpress import kernels
from avpress.errors import InvalidInputError
from avpress.geometry import (
    CompressionConfig,
    VideoTokenGrid,
    as_embedding,
    round_half_up,
    softmax_weights,
)


@dataclass(frozen=True)
class FrameScore:
    frame_index: int  # 1-based
    score: float


@dataclass(frozen=True)
class SelectedFrame:
    """Visual memory kept for one selected frame.

    ``kept_positions`` are 1-based, strictly increasing. The memory token
    sits at ``memory_slot`` (the lowest-contrast dropped position); frames
    with a single position keep their token verbatim and carry no memory
    token.
    """

    frame_index: int
    kept_positions: tuple[int, ...]
    kept_tokens: np.ndarray  # (k, d)
    memory_token: np.ndarray | None
    memory_slot: int | None

    @property
    def retained_count(self) -> int:
        return len(self.kept_positions) + (1 if self.memory_token is not None else 0)


@dataclass(frozen=True)
class VisualCompressionResult:
    frames: tuple[SelectedFrame, ...]  # ascending frame_index
    retained_per_frame: np.ndarray  # (T,) int64, 0 for unselected frames
    frame_scores: np.ndarray  # (T,) float64, raw query-relevance scores

    @property
    def selected_frames(self) -> tuple[int, ...]:
        return tuple(f.frame_index for f in self.frames)


def frame_summaries(grid: VideoTokenGrid) -> np.ndarray:
    """Mean-pooled summary per frame, (T, d)."""
    return kernels.frame_mean(grid.tokens)


def frame_scores(summaries, query) -> list[FrameScore]:
    """Query relevance of each frame summary (cosine)."""
    summaries = np.ascontiguousarray(summaries, dtype=np.float64)
    query = as_embedding(query)
    if summaries.ndim != 2 or summaries.shape[1] != query.shape[0]:
        raise InvalidInputError("summaries and query must share one dimension")
    scores = kernels.cosine_rows(summaries, query)
    return [FrameScore(t + 1, float(s)) for t, s in enumerate(scores)]


def coverage_bin_edges(frames: int, bins: int) -> list[tuple[int, int]]:
    """Contiguous near-equal bins over frames 1..T, earlier bins larger.

    Returns (first, last) inclusive 1-based bounds per bin.
    """
    base, rem = divmod(frames, bins)
    edges = []
    start = 1
    for b in range(bins):
        size = base + (1 if b < rem else 0)
        edges.append((start, start + size - 1))
        start += size
    return edges


def select_key_frames(scores, retain_video: float, coverage_bins: int) -> tuple[int, ...]:
    """Pick max(1, round(retain_video * T)) frames, spread over the video.

    The top-scoring frame of each contiguous coverage bin enters first (in
    decreasing score order, so a small budget still covers the best bins);
    the remaining budget goes to the globally best unselected frames. All
    ties break toward the smaller frame index.
    """
    score_arr = np.asarray([s.score for s in scores], dtype=np.float64)
    total = score_arr.shape[0]
    if total < 1:
        raise InvalidInputError("select_key_frames needs at least one frame score")
    if not 0.0 < retain_video <= 1.0:
        raise InvalidInputError("retain_video must be in (0, 1]")
    if not 1 <= coverage_bins <= total:
        raise InvalidInputError("coverage_bins must be in [1, T]")

    budget = max(1, round_half_up(retain_video * total))
    # Bin leaders, best score first; tie -> smaller frame index.
    leaders = []
    for first, last in coverage_bin_edges(total, coverage_bins):
        segment = score_arr[first - 1 : last]
        best = first + int(np.argmax(segment))  # argmax takes first max: smaller index
        leaders.append(best)
    leaders.sort(key=lambda t: (-score_arr[t - 1], t))

    chosen: list[int] = leaders[:budget]
    if budget > len(chosen):
        chosen_set = set(chosen)
        rest = [t for t in range(1, total + 1) if t not in chosen_set]
        rest.sort(key=lambda t: (-score_arr[t - 1], t))
        chosen.extend(rest[: budget - len(chosen)])
    return tuple(sorted(chosen))


def contrast_scores(frame_tokens) -> np.ndarray:
    """1 - cosine(token, frame centroid) per token; high = distinctive."""
    tokens = np.ascontiguousarray(frame_tokens, dtype=np.float64)
    if tokens.ndim != 2 or tokens.shape[0] == 0:
        raise InvalidInputError("contrast_scores needs a non-empty frame")
    centroid = tokens.mean(axis=0)
    return 1.0 - kernels.cosine_rows(tokens, centroid)


def normalize_contrast(alpha) -> np.ndarray:
    """Min-max normalize to [0, 1]; a constant frame normalizes to zeros."""
    arr = np.asarray(alpha, dtype=np.float64)
    if arr.shape[0] == 0:
        raise InvalidInputError("normalize_contrast needs a non-empty sequence")
    lo, hi = float(arr.min()), float(arr.max())
    if hi == lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)


def select_frame_tokens(alpha_hat, k: int) -> tuple[int, ...]:
    """Positions (1-based, ascending) of the k largest normalized contrasts.

    Ties go to the smaller position.
    """
    arr = np.asarray(alpha_hat, dtype=np.float64)
    if not 1 <= k <= arr.shape[0]:
        raise InvalidInputError(f"k must be in [1, P], got k={k} for P={arr.shape[0]}")
    order = np.argsort(-arr, kind="stable")  # stable: equal scores keep position order
    return tuple(sorted(int(p) + 1 for p in order[:k]))


def frame_memory_token(frame_tokens, kept, alpha_hat) -> np.ndarray:
    """Softmax-weighted pool of the kept tokens (weights from contrast)."""
    tokens = np.asarray(frame_tokens, dtype=np.float64)
    arr = np.asarray(alpha_hat, dtype=np.float64)
    kept = tuple(kept)
    if len(kept) == 0:
        raise InvalidInputError("frame_memory_token needs a non-empty kept set")
    rows = np.array([p - 1 for p in kept], dtype=np.intp)
    weights = softmax_weights(arr[rows])
    return kernels.weighted_rows_sum(np.ascontiguousarray(tokens[rows]), weights)


def default_tokens_per_frame(retain_video: float, frames: int, positions: int) -> int:
    """Per-frame explicit token budget that lands the overall video ratio.

    Selected frames retain k explicit tokens plus one memory token, so the
    video-side retained count is K * (k + 1) where K is the selected frame
    count. Solving K * (k + 1) ~= retain_video * T * P for k and clamping
    to [1, P - 1] gives the default the CLI uses when --tokens-per-frame is
    not passed.
    """
    selected = max(1, round_half_up(retain_video * frames))
    per_frame = round_half_up(retain_video * frames * positions / selected)
    return max(1, min(positions - 1, per_frame - 1)) if positions > 1 else 1


def compress_video(grid: VideoTokenGrid, query, config: CompressionConfig) -> VisualCompressionResult:
    """Full visual pass: score frames, select with coverage, filter tokens.

    Per selected frame keeps min(tokens_per_selected_frame, P - 1) explicit
    tokens plus one memory token in the lowest-contrast dropped slot.
    Deterministic: identical inputs give bit-identical results.
    """
    query = as_embedding(query)
    if query.shape[0] != grid.dim:
        raise InvalidInputError("query dimension does not match grid")
    if config.coverage_bins > grid.frames:
        raise InvalidInputError("coverage_bins exceeds frame count")

    summaries = kernels.frame_mean(grid.tokens)
    scores = kernels.cosine_rows(summaries, query)
    score_list = [FrameScore(t + 1, float(s)) for t, s in enumerate(scores)]
    selected = select_key_frames(score_list, config.retain_video, config.coverage_bins)

    positions = grid.positions_per_frame
    keep_k = min(config.tokens_per_selected_frame, positions - 1) if positions > 1 else 1

    retained = np.zeros(grid.frames, dtype=np.int64)
    frames = []
    for t in selected:
        tokens_t = grid.tokens[t - 1]
        if positions == 1:
            frames.append(
                SelectedFrame(
                    frame_index=t,
                    kept_positions=(1,),
                    kept_tokens=tokens_t.copy(),
                    memory_token=None,
                    memory_slot=None,
                )
            )
            retained[t - 1] = 1
            continue

        alpha = 1.0 - kernels.cosine_rows(tokens_t, summaries[t - 1])
        alpha_hat = normalize_contrast(alpha)
        kept = select_frame_tokens(alpha_hat, keep_k)
        kept_rows = np.array([p - 1 for p in kept], dtype=np.intp)
        dropped = [p for p in range(1, positions + 1) if p not in set(kept)]
        # Memory token takes over the least distinctive dropped slot.
        slot = min(dropped, key=lambda p: (alpha_hat[p - 1], p))
        memory = frame_memory_token(tokens_t, kept, alpha_hat)
        frames.append(
            SelectedFrame(
                frame_index=t,
                kept_positions=kept,
                kept_tokens=np.ascontiguousarray(tokens_t[kept_rows]),
                memory_token=memory,
                memory_slot=slot,
            )
        )
        retained[t - 1] = keep_k + 1

    retained.setflags(write=False)
    scores.setflags(write=False)
    return VisualCompressionResult(frames=tuple(frames), retained_per_frame=retained, frame_scores=scores)

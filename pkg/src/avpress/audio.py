"""Audio importance, budget apportionment, anchor selection, and merging.

The per-frame audio budget follows the visual memory distribution: frames
that kept more visual evidence get a larger share of the retained audio
tokens. Real-valued targets are turned into integers by largest-remainder
apportionment with per-frame capacity clamping, so the budget identity
sum(b_t) == B_a holds exactly for every input.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from avpress import kernels
from avpress.errors import InvalidInputError
from avpress.geometry import (
    AudioTokenStream,
    CompressionConfig,
    as_embedding,
    cosine,
    round_half_up,
)
from avpress.visual import VisualCompressionResult


@dataclass(frozen=True)
class AudioAnchor:
    """A retained audio token, with nearby dropped tokens folded in.

    ``merged_from`` lists the dropped token indices (1-based) whose mass
    was merged into this anchor; disjoint across anchors.
    """

    original_index: int  # 1-based
    feature: np.ndarray
    merged_from: tuple[int, ...]


@dataclass(frozen=True)
class AudioCompressionResult:
    anchors: tuple[AudioAnchor, ...]  # ascending original_index
    per_frame_budget: np.ndarray  # (T,) int64
    total_budget: int
    discarded: tuple[int, ...]  # dropped tokens in zero-budget frames (1-based)
    used_uniform_fallback: bool = False

    @classmethod
    def empty(cls, frames: int) -> "AudioCompressionResult":
        budgets = np.zeros(frames, dtype=np.int64)
        budgets.setflags(write=False)
        return cls(anchors=(), per_frame_budget=budgets, total_budget=0, discarded=())


def audio_importance(stream: AudioTokenStream, query) -> np.ndarray:
    """Query relevance of each audio token (cosine), (N_a,)."""
    query = as_embedding(query)
    if query.shape[0] != stream.dim:
        raise InvalidInputError("query dimension does not match audio stream")
    return kernels.cosine_rows(stream.tokens, query)


def visual_weights(visual: VisualCompressionResult, epsilon_w: float) -> np.ndarray:
    """Per-frame weight: retained visual count, or epsilon_w if unselected."""
    if epsilon_w < 0.0:
        raise InvalidInputError("epsilon_w must be >= 0")
    counts = visual.retained_per_frame
    return np.where(counts > 0, counts.astype(np.float64), float(epsilon_w))


def allocate_budget(n, w, total_budget: int) -> np.ndarray:
    """Apportion ``total_budget`` units to frames, proportional to n_t * w_t.

    Largest-remainder rounding; ties on equal remainders (and on equal
    remaining capacity during clamping) go to the smaller frame index.
    Guarantees sum(b) == total_budget and 0 <= b_t <= n_t. If every
    n_t * w_t is zero the weights fall back to n alone, with a warning.
    """
    n = np.asarray(n, dtype=np.int64)
    w = np.asarray(w, dtype=np.float64)
    if n.shape != w.shape or n.ndim != 1 or n.shape[0] == 0:
        raise InvalidInputError("n and w must be equal-length non-empty sequences")
    if np.any(n < 0) or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidInputError("counts and weights must be non-negative and finite")
    capacity = int(n.sum())
    if not 1 <= total_budget <= capacity:
        raise InvalidInputError(f"budget {total_budget} outside [1, {capacity}]")

    mass = n * w
    if not np.any(mass > 0):
        warnings.warn("all n_t * w_t are zero; falling back to weights proportional to n", stacklevel=2)
        mass = n.astype(np.float64)

    frames = n.shape[0]
    mass_sum = 0.0
    for t in range(frames):
        mass_sum += float(mass[t])
    targets = [total_budget * float(mass[t]) / mass_sum for t in range(frames)]

    b = [int(np.floor(targets[t])) for t in range(frames)]
    remainders = [targets[t] - b[t] for t in range(frames)]
    short = total_budget - sum(b)
    for t in sorted(range(frames), key=lambda t: (-remainders[t], t))[:short]:
        b[t] += 1

    # Clamp to capacity; hand the excess back one unit at a time to the
    # frame with the most remaining room (tie -> smaller index).
    for t in range(frames):
        if b[t] > n[t]:
            b[t] = int(n[t])
    excess = total_budget - sum(b)  # clamped units plus any rounding residue
    while excess > 0:
        t = max(range(frames), key=lambda t: (int(n[t]) - b[t], -t))
        if b[t] >= n[t]:
            raise InvalidInputError("budget exceeds total capacity")  # unreachable: checked above
        b[t] += 1
        excess -= 1

    out = np.array(b, dtype=np.int64)
    out.setflags(write=False)
    return out


def frame_segments(alignment: np.ndarray, frames: int) -> list[tuple[int, int]]:
    """Half-open [start, stop) row ranges of each frame's audio segment."""
    boundaries = np.searchsorted(alignment, np.arange(1, frames + 2), side="left")
    return [(int(boundaries[t]), int(boundaries[t + 1])) for t in range(frames)]


def select_anchors_per_frame(stream: AudioTokenStream, importance, budgets) -> list[tuple[int, ...]]:
    """Per frame, the b_t most important tokens of its aligned segment.

    Ties go to the smaller token index; each frame's anchors are returned
    in ascending original (1-based) index.
    """
    importance = np.asarray(importance, dtype=np.float64)
    budgets = np.asarray(budgets, dtype=np.int64)
    if importance.shape[0] != stream.count:
        raise InvalidInputError("importance must score every audio token")
    per_frame: list[tuple[int, ...]] = []
    for t, (start, stop) in enumerate(frame_segments(stream.alignment, budgets.shape[0])):
        b = int(budgets[t])
        if b > stop - start:
            raise InvalidInputError(f"budget {b} exceeds segment size of frame {t + 1}")
        if b == 0:
            per_frame.append(())
            continue
        segment = importance[start:stop]
        order = np.argsort(-segment, kind="stable")[:b]
        per_frame.append(tuple(sorted(start + int(i) + 1 for i in order)))
    return per_frame


def merge_weights(dropped, anchor) -> float:
    """Merge weight of a dropped token: non-negative cosine to its anchor."""
    return max(0.0, cosine(dropped, anchor))


def merge_anchor(anchor, group) -> np.ndarray:
    """(a_j + sum w_i a_i) / (1 + sum w_i) over the assigned dropped tokens."""
    anchor = np.asarray(anchor, dtype=np.float64)
    num = anchor.copy()
    den = 1.0
    for token, weight in group:
        if weight < 0 or not np.isfinite(weight):
            raise InvalidInputError("merge weights must be non-negative and finite")
        num += weight * np.asarray(token, dtype=np.float64)
        den += weight
    return num / den


def compress_audio(
    stream: AudioTokenStream,
    importance,
    visual: VisualCompressionResult,
    config: CompressionConfig,
) -> AudioCompressionResult:
    """Full audio pass: budget per frame, anchors per segment, local merging.

    Dropped tokens fold into the nearest anchor of their own frame (by index
    distance, tie -> earlier anchor); frames whose budget is zero discard
    their tokens outright, reported via ``discarded``.
    """
    frames = visual.retained_per_frame.shape[0]
    if stream.count == 0:
        return AudioCompressionResult.empty(frames)
    importance = np.asarray(importance, dtype=np.float64)
    if importance.shape[0] != stream.count:
        raise InvalidInputError("importance must score every audio token")
    if int(stream.alignment.max()) > frames:
        raise InvalidInputError("audio alignment references frames beyond the grid")

    total_budget = max(1, round_half_up(config.retain_audio * stream.count))
    segments = frame_segments(stream.alignment, frames)
    n = np.array([stop - start for start, stop in segments], dtype=np.int64)

    if config.guidance_mode == "full-omac":
        w = visual_weights(visual, config.unselected_frame_weight)
    elif config.guidance_mode == "visual-guided":
        w = np.maximum(visual.frame_scores, 0.0)
    else:  # audio-guided: budget ignores the visual branch entirely
        w = np.ones(frames, dtype=np.float64)

    fallback = not np.any(n * w > 0)
    with warnings.catch_warnings():
        if fallback:
            warnings.simplefilter("ignore")
        budgets = allocate_budget(n, w, total_budget)
    if fallback:
        warnings.warn("audio budget weights were all zero; allocated proportionally to n", stacklevel=2)

    anchors_per_frame = select_anchors_per_frame(stream, importance, budgets)

    anchor_indices: list[int] = [i for frame in anchors_per_frame for i in frame]
    anchor_rows = np.array([i - 1 for i in anchor_indices], dtype=np.int64)
    anchor_pos = {i: j for j, i in enumerate(anchor_indices)}

    assign = np.full(stream.count, -1, dtype=np.int64)
    merged_from: list[list[int]] = [[] for _ in anchor_indices]
    discarded: list[int] = []
    for t, (start, stop) in enumerate(segments):
        frame_anchors = anchors_per_frame[t]
        if not frame_anchors:
            discarded.extend(range(start + 1, stop + 1))
            continue
        anchor_set = set(frame_anchors)
        for i in range(start + 1, stop + 1):
            if i in anchor_set:
                continue
            nearest = min(frame_anchors, key=lambda j: (abs(i - j), j))
            assign[i - 1] = anchor_pos[nearest]
            merged_from[anchor_pos[nearest]].append(i)

    merged = kernels.merge_into_anchors(stream.tokens, anchor_rows, assign)

    anchors = tuple(
        AudioAnchor(original_index=idx, feature=merged[j], merged_from=tuple(merged_from[j]))
        for j, idx in enumerate(anchor_indices)
    )
    return AudioCompressionResult(
        anchors=anchors,
        per_frame_budget=budgets,
        total_budget=total_budget,
        discarded=tuple(discarded),
        used_uniform_fallback=fallback,
    )

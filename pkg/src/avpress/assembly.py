"""Interleave retained audio and video memory into the final sequence.

Ordering contract (documented so downstream consumers can rely on it):
tokens appear frame by frame in original temporal order, and within a frame
the audio anchors aligned to it precede that frame's video tokens; video
tokens are ordered by position, with the frame memory token occupying its
replaced slot's position.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from avpress.audio import AudioCompressionResult
from avpress.errors import InvalidInputError
from avpress.visual import VisualCompressionResult

MODALITY_AUDIO = "audio"
MODALITY_VIDEO = "video"
MODALITY_VIDEO_MEMORY = "video-memory"

SOURCE_ORIGINAL = "original"
SOURCE_POOLED = "pooled"
SOURCE_MERGED = "merged"


@dataclass(frozen=True)
class CompressedToken:
    """One retained token with its provenance.

    ``frame`` is the owning/aligned frame (1-based). ``index`` is the
    within-frame position for video tokens and the original stream index
    for audio tokens, so ``original_position`` is unique per modality.
    """

    modality: str
    frame: int
    index: int
    feature: np.ndarray
    source: str

    @property
    def original_position(self):
        if self.modality == MODALITY_AUDIO:
            return self.index
        return (self.frame, self.index)


@dataclass(frozen=True)
class SequenceStats:
    original_video_tokens: int
    original_audio_tokens: int
    retained_video: int
    retained_audio: int
    retained_ratio_overall: float
    discarded_zero_budget_audio: int


@dataclass(frozen=True)
class CompressedSequence:
    tokens: tuple[CompressedToken, ...]
    stats: SequenceStats


def assemble(
    visual: VisualCompressionResult,
    audio: AudioCompressionResult,
    grid_meta: tuple[int, int],
    stream_meta: tuple[int, np.ndarray],
) -> CompressedSequence:
    """Merge both branches into one sequence in original temporal order."""
    frames, positions = grid_meta
    audio_count, alignment = stream_meta
    alignment = np.asarray(alignment, dtype=np.int64)

    if visual.retained_per_frame.shape[0] != frames:
        raise InvalidInputError("visual result does not match the grid's frame count")
    if audio.per_frame_budget.shape[0] != frames:
        raise InvalidInputError("audio result does not match the grid's frame count")
    if alignment.shape[0] != audio_count:
        raise InvalidInputError("alignment length does not match the audio token count")
    if audio_count and (alignment.min() < 1 or alignment.max() > frames):
        raise InvalidInputError("alignment references frames outside the grid")
    for anchor in audio.anchors:
        if not 1 <= anchor.original_index <= audio_count:
            raise InvalidInputError("audio anchor index outside the stream")

    anchors_by_frame: dict[int, list] = {}
    for anchor in audio.anchors:
        frame = int(alignment[anchor.original_index - 1])
        anchors_by_frame.setdefault(frame, []).append(anchor)

    visual_by_frame = {f.frame_index: f for f in visual.frames}

    tokens: list[CompressedToken] = []
    for t in range(1, frames + 1):
        for anchor in anchors_by_frame.get(t, ()):
            source = SOURCE_MERGED if anchor.merged_from else SOURCE_ORIGINAL
            tokens.append(
                CompressedToken(MODALITY_AUDIO, t, anchor.original_index, anchor.feature, source)
            )
        frame = visual_by_frame.get(t)
        if frame is None:
            continue
        slots = [
            (p, CompressedToken(MODALITY_VIDEO, t, p, frame.kept_tokens[i], SOURCE_ORIGINAL))
            for i, p in enumerate(frame.kept_positions)
        ]
        if frame.memory_token is not None:
            slots.append(
                (
                    frame.memory_slot,
                    CompressedToken(
                        MODALITY_VIDEO_MEMORY, t, frame.memory_slot, frame.memory_token, SOURCE_POOLED
                    ),
                )
            )
        slots.sort(key=lambda pair: pair[0])
        tokens.extend(tok for _, tok in slots)

    retained_video = int(visual.retained_per_frame.sum())
    retained_audio = len(audio.anchors)
    original_total = frames * positions + audio_count
    stats = SequenceStats(
        original_video_tokens=frames * positions,
        original_audio_tokens=audio_count,
        retained_video=retained_video,
        retained_audio=retained_audio,
        retained_ratio_overall=(retained_video + retained_audio) / original_total,
        discarded_zero_budget_audio=len(audio.discarded),
    )
    return CompressedSequence(tokens=tuple(tokens), stats=stats)

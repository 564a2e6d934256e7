"""Bundle file format, synthetic bundles, pipeline driver, and reports.

A bundle is a directory: a JSON manifest plus raw little-endian float32
blobs for the video grid, the audio stream, and the query embedding. The
format is deliberately dumb so any language can read it and tests can
byte-diff it. All validation happens here, at load time; the in-memory
types then guarantee finite, well-shaped data to the rest of the package.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from avpress.assembly import CompressedSequence, assemble
from avpress.audio import AudioCompressionResult, audio_importance, compress_audio
from avpress.errors import (
    AlignmentError,
    BundleFormatError,
    BundleIOError,
    InvalidInputError,
    PayloadError,
    RolloutParseError,
    SizeMismatchError,
)
from avpress.geometry import AudioTokenStream, CompressionConfig, VideoTokenGrid, as_embedding
from avpress.shaping import RolloutGroup, RolloutRecord
from avpress.visual import VisualCompressionResult, compress_video

MANIFEST_NAME = "manifest.json"
REPORT_NAME = "report.json"
COMPRESSED_NAME = "compressed.json"
FEATURES_BLOB = "features.f32"

# Upper bound on P * d, the per-frame feature payload accepted at load time.
MAX_FRAME_PAYLOAD = 50_174

# Synthetic defaults: 1 frame per second, a 16 kHz audio front end emitting
# ~25 embeddings per second, and 14x14 visual patches per frame.
DEFAULT_FRAMES = 32
DEFAULT_POSITIONS = 196
DEFAULT_DIM = 64
AUDIO_TOKENS_PER_FRAME = 25

_F32 = np.dtype("<f4")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _read_blob(path: Path, expected_values: int, what: str) -> np.ndarray:
    if not path.is_file():
        raise BundleIOError(f"missing blob file: {path}")
    data = path.read_bytes()
    expected_bytes = expected_values * 4
    if len(data) != expected_bytes:
        raise SizeMismatchError(
            f"{what} blob {path.name} holds {len(data)} bytes, manifest implies {expected_bytes}"
        )
    values = np.frombuffer(data, dtype=_F32).astype(np.float64)
    if not np.all(np.isfinite(values)):
        raise PayloadError(f"{what} blob {path.name} contains NaN/Inf values")
    return values


def save_bundle(path, grid: VideoTokenGrid, stream: AudioTokenStream, query) -> Path:
    """Write manifest + float32 blobs; round-trips bit-exactly."""
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    query = as_embedding(query)
    manifest = {
        "dim": grid.dim,
        "frames": grid.frames,
        "positions_per_frame": grid.positions_per_frame,
        "audio_tokens": stream.count,
        "alignment": [int(a) for a in stream.alignment],
        "video_blob": "video.f32",
        "audio_blob": "audio.f32",
        "query_blob": "query.f32",
    }
    (directory / "video.f32").write_bytes(grid.tokens.astype(_F32).tobytes())
    (directory / "audio.f32").write_bytes(stream.tokens.astype(_F32).tobytes())
    (directory / "query.f32").write_bytes(query.astype(_F32).tobytes())
    _write_json(directory / MANIFEST_NAME, manifest)
    return directory


def load_bundle(path) -> tuple[VideoTokenGrid, AudioTokenStream, np.ndarray]:
    """Load and fully validate a bundle directory."""
    directory = Path(path)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.is_file():
        raise BundleIOError(f"missing manifest: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise BundleFormatError(f"manifest {manifest_path} is not valid JSON: {exc}") from exc

    try:
        dim = int(manifest["dim"])
        frames = int(manifest["frames"])
        positions = int(manifest["positions_per_frame"])
        audio_tokens = int(manifest["audio_tokens"])
        alignment = [int(a) for a in manifest["alignment"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise BundleFormatError(f"manifest {manifest_path} is missing or mistypes a field: {exc}") from exc
    if dim < 1 or frames < 1 or positions < 1 or audio_tokens < 0:
        raise BundleFormatError("manifest sizes must be positive (audio_tokens may be 0)")
    if positions * dim > MAX_FRAME_PAYLOAD:
        raise PayloadError(
            f"frame payload {positions * dim} exceeds the limit of {MAX_FRAME_PAYLOAD} values"
        )
    if len(alignment) != audio_tokens:
        raise AlignmentError("alignment length disagrees with audio_tokens")
    if alignment and (min(alignment) < 1 or max(alignment) > frames):
        raise AlignmentError("alignment entries must be within [1, frames]")
    if any(b < a for a, b in zip(alignment, alignment[1:])):
        raise AlignmentError("alignment must be non-decreasing")

    video = _read_blob(directory / manifest["video_blob"], frames * positions * dim, "video")
    audio = _read_blob(directory / manifest["audio_blob"], audio_tokens * dim, "audio")
    query = _read_blob(directory / manifest["query_blob"], dim, "query")

    grid = VideoTokenGrid(video.reshape(frames, positions, dim))
    stream = AudioTokenStream(audio.reshape(audio_tokens, dim), np.array(alignment, dtype=np.int64))
    return grid, stream, as_embedding(query)


def spread_alignment(frames: int, audio_tokens: int) -> np.ndarray:
    """Spread audio tokens evenly over frames, remainder to earlier frames."""
    base, rem = divmod(audio_tokens, frames)
    counts = [base + (1 if t < rem else 0) for t in range(frames)]
    return np.repeat(np.arange(1, frames + 1, dtype=np.int64), counts)


def generate_synthetic(
    frames: int = DEFAULT_FRAMES,
    positions: int = DEFAULT_POSITIONS,
    dim: int = DEFAULT_DIM,
    audio_tokens: int | None = None,
    seed: int = 0,
    out_dir=None,
) -> Path:
    """Write a deterministic pseudo-random bundle; same seed, same bytes."""
    if frames < 1 or positions < 1 or dim < 1:
        raise BundleFormatError("frames, positions, and dim must be positive")
    if audio_tokens is None:
        audio_tokens = frames * AUDIO_TOKENS_PER_FRAME
    if audio_tokens < frames:
        raise BundleFormatError("need at least one audio token per frame")
    rng = np.random.default_rng(seed)
    # Generate in float32 directly so the on-disk bytes are the RNG output.
    video = rng.standard_normal((frames, positions, dim), dtype=np.float32)
    audio = rng.standard_normal((audio_tokens, dim), dtype=np.float32)
    query = rng.standard_normal(dim, dtype=np.float32)
    grid = VideoTokenGrid(video)
    stream = AudioTokenStream(audio, spread_alignment(frames, audio_tokens))
    if out_dir is None:
        out_dir = Path(f"bundle-seed{seed}")
    return save_bundle(out_dir, grid, stream, query)


@dataclass(frozen=True)
class PipelineOutput:
    sequence: CompressedSequence
    visual: VisualCompressionResult
    audio: AudioCompressionResult
    wall_time_ms: float


def compress_bundle(
    grid: VideoTokenGrid, stream: AudioTokenStream, query, config: CompressionConfig
) -> PipelineOutput:
    """Run the full pipeline; wall time covers compression only, not I/O."""
    start = time.perf_counter()
    visual = compress_video(grid, query, config)
    if stream.count > 0:
        importance = audio_importance(stream, query)
        audio = compress_audio(stream, importance, visual, config)
    else:
        audio = AudioCompressionResult.empty(grid.frames)
    sequence = assemble(
        visual,
        audio,
        (grid.frames, grid.positions_per_frame),
        (stream.count, stream.alignment),
    )
    wall_time_ms = (time.perf_counter() - start) * 1000.0
    return PipelineOutput(sequence=sequence, visual=visual, audio=audio, wall_time_ms=wall_time_ms)


def build_report(output: PipelineOutput, config: CompressionConfig) -> dict:
    """Report dict with stable key order (sorted on serialization)."""
    stats = output.sequence.stats
    return {
        "retained_ratio_overall": stats.retained_ratio_overall,
        "compression_ratio": 1.0 - stats.retained_ratio_overall,
        "retained_video": stats.retained_video,
        "retained_audio": stats.retained_audio,
        "original_video_tokens": stats.original_video_tokens,
        "original_audio_tokens": stats.original_audio_tokens,
        "discarded_zero_budget_audio": stats.discarded_zero_budget_audio,
        "per_frame_budgets": [int(b) for b in output.audio.per_frame_budget],
        "selected_frames": list(output.visual.selected_frames),
        "guidance_mode": config.guidance_mode,
        "wall_time_ms": output.wall_time_ms,
        "config": {
            "retain_video": config.retain_video,
            "retain_audio": config.retain_audio,
            "coverage_bins": config.coverage_bins,
            "tokens_per_selected_frame": config.tokens_per_selected_frame,
            "guidance_mode": config.guidance_mode,
            "unselected_frame_weight": config.unselected_frame_weight,
        },
    }


def save_compressed(sequence: CompressedSequence, report: dict, path) -> Path:
    """Write the compressed sequence (manifest + feature blob) and report."""
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    stats = sequence.stats
    dim = int(sequence.tokens[0].feature.shape[0]) if sequence.tokens else 0
    manifest = {
        "dim": dim,
        "token_count": len(sequence.tokens),
        "feature_blob": FEATURES_BLOB,
        "columns": ["modality", "frame", "index", "source"],
        "tokens": [[tok.modality, tok.frame, tok.index, tok.source] for tok in sequence.tokens],
        "stats": {
            "original_video_tokens": stats.original_video_tokens,
            "original_audio_tokens": stats.original_audio_tokens,
            "retained_video": stats.retained_video,
            "retained_audio": stats.retained_audio,
            "retained_ratio_overall": stats.retained_ratio_overall,
            "discarded_zero_budget_audio": stats.discarded_zero_budget_audio,
        },
    }
    if sequence.tokens:
        features = np.stack([tok.feature for tok in sequence.tokens])
    else:
        features = np.zeros((0, 0))
    (directory / FEATURES_BLOB).write_bytes(features.astype(_F32).tobytes())
    _write_json(directory / COMPRESSED_NAME, manifest)
    _write_json(directory / REPORT_NAME, report)
    return directory


def load_compressed(path) -> tuple[list[tuple[str, int, int, str]], np.ndarray, dict]:
    """Read back a compressed directory (token table, features, stats)."""
    directory = Path(path)
    manifest = json.loads((directory / COMPRESSED_NAME).read_text())
    records = [tuple(row) for row in manifest["tokens"]]
    dim = int(manifest["dim"])
    raw = (directory / manifest["feature_blob"]).read_bytes()
    features = np.frombuffer(raw, dtype=_F32).astype(np.float64)
    features = features.reshape(len(records), dim) if records else features.reshape(0, 0)
    return records, features, manifest["stats"]


def load_rollout_groups(path) -> list[RolloutGroup]:
    """Parse a JSON-lines rollout file: one group object per line.

    Each line is {"rollouts": [{reward_full, reward_comp, logprob_new,
    logprob_old, logprob_ref}, ...]}. Blank lines are skipped. Errors carry
    the 1-based line number.
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise BundleIOError(f"missing rollout file: {file_path}")
    groups = []
    for lineno, line in enumerate(file_path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RolloutParseError(f"not valid JSON: {exc}", line=lineno) from exc
        if not isinstance(payload, dict) or "rollouts" not in payload:
            raise RolloutParseError('expected an object with a "rollouts" list', line=lineno)
        rollouts = []
        for i, entry in enumerate(payload["rollouts"]):
            try:
                rollouts.append(
                    RolloutRecord(
                        reward_full=float(entry["reward_full"]),
                        reward_comp=float(entry["reward_comp"]),
                        logprob_new=float(entry["logprob_new"]),
                        logprob_old=float(entry["logprob_old"]),
                        logprob_ref=float(entry["logprob_ref"]),
                    )
                )
            except (KeyError, TypeError, ValueError, InvalidInputError) as exc:
                raise RolloutParseError(f"rollout {i}: {exc}", line=lineno) from exc
        if len(rollouts) < 2:
            raise RolloutParseError("a group needs at least 2 rollouts", line=lineno)
        groups.append(RolloutGroup(tuple(rollouts)))
    if not groups:
        raise RolloutParseError(f"no rollout groups found in {file_path}")
    return groups

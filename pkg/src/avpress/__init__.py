"""Training-free audiovisual token compression with shaped RL advantages."""

from avpress.assembly import CompressedSequence, CompressedToken, SequenceStats, assemble
from avpress.audio import (
    AudioAnchor,
    AudioCompressionResult,
    allocate_budget,
    audio_importance,
    compress_audio,
)
from avpress.bundle import (
    PipelineOutput,
    build_report,
    compress_bundle,
    generate_synthetic,
    load_bundle,
    load_rollout_groups,
    save_bundle,
    save_compressed,
)
from avpress.errors import (
    AlignmentError,
    AvpressError,
    BundleFormatError,
    BundleIOError,
    InvalidInputError,
    PayloadError,
    RolloutParseError,
    SizeMismatchError,
)
from avpress.geometry import (
    VALID_GUIDANCE_MODES,
    AudioTokenStream,
    CompressionConfig,
    VideoTokenGrid,
)
from avpress.kernels import BACKEND, use_backend
from avpress.shaping import (
    RolloutDiagnostics,
    RolloutGroup,
    RolloutRecord,
    ShapingConfig,
    clipped_group_loss,
    grpo_advantages,
)
from avpress.visual import VisualCompressionResult, compress_video, default_tokens_per_frame

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "AudioAnchor",
    "AudioCompressionResult",
    "AudioTokenStream",
    "AvpressError",
    "BACKEND",
    "BundleFormatError",
    "BundleIOError",
    "CompressedSequence",
    "CompressedToken",
    "CompressionConfig",
    "InvalidInputError",
    "PayloadError",
    "PipelineOutput",
    "RolloutDiagnostics",
    "RolloutGroup",
    "RolloutParseError",
    "RolloutRecord",
    "SequenceStats",
    "ShapingConfig",
    "SizeMismatchError",
    "VALID_GUIDANCE_MODES",
    "VideoTokenGrid",
    "VisualCompressionResult",
    "allocate_budget",
    "assemble",
    "audio_importance",
    "build_report",
    "compress_audio",
    "compress_bundle",
    "compress_video",
    "default_tokens_per_frame",
    "generate_synthetic",
    "grpo_advantages",
    "load_bundle",
    "load_rollout_groups",
    "save_bundle",
    "save_compressed",
    "use_backend",
    "clipped_group_loss",
    "__version__",
]

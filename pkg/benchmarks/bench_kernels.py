"""Benchmark the native extension kernels against the pure numpy fallback.

Times each hot kernel on default-bundle shapes (32 frames x 196 positions
x 64 dims, 800 audio tokens), plus the whole compression pipeline, under
both backends. Run from the repo root:

    python3 benchmarks/bench_kernels.py --repeats 200
"""

import argparse
import time

import numpy as np

from avpress import kernels
from avpress.bundle import compress_bundle
from avpress.geometry import AudioTokenStream, CompressionConfig, VideoTokenGrid


def time_call(fn, repeats):
    # one warm-up call, then best-of-repeats wall time in ms
    fn()
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best * 1e3


def build_inputs(seed, frames, positions, dim, audio_tokens):
    rng = np.random.default_rng(seed)
    grid_tokens = rng.standard_normal((frames, positions, dim))
    audio = rng.standard_normal((audio_tokens, dim))
    query = rng.standard_normal(dim)
    # realistic merge shape: ~30% of rows are anchors, the rest fold into one
    anchors = np.sort(rng.choice(audio_tokens, size=max(1, audio_tokens * 3 // 10), replace=False))
    assign = rng.integers(0, anchors.shape[0], audio_tokens)
    assign[anchors] = -1
    weights = rng.uniform(0.0, 1.0, audio_tokens)
    return grid_tokens, audio, query, anchors, assign, weights


def kernel_cases(grid_tokens, audio, query, anchors, assign, weights):
    frame = np.ascontiguousarray(grid_tokens[0])
    return {
        "frame_mean": lambda: kernels.frame_mean(grid_tokens),
        "cosine_rows": lambda: kernels.cosine_rows(audio, query),
        "weighted_rows_sum": lambda: kernels.weighted_rows_sum(frame, weights[: frame.shape[0]]),
        "merge_into_anchors": lambda: kernels.merge_into_anchors(audio, anchors, assign),
    }


def pipeline_case(grid_tokens, audio, query, frames, audio_tokens):
    grid = VideoTokenGrid(grid_tokens)
    alignment = np.repeat(np.arange(1, frames + 1), audio_tokens // frames)
    stream = AudioTokenStream(audio, alignment)
    config = CompressionConfig(retain_video=0.3, retain_audio=0.3)
    return lambda: compress_bundle(grid, stream, query, config)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=100)
    parser.add_argument("--frames", type=int, default=32)
    parser.add_argument("--positions", type=int, default=196)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--audio-tokens", type=int, default=800)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    grid_tokens, audio, query, anchors, assign, weights = build_inputs(
        args.seed, args.frames, args.positions, args.dim, args.audio_tokens
    )
    cases = kernel_cases(grid_tokens, audio, query, anchors, assign, weights)
    cases["full_pipeline"] = pipeline_case(
        grid_tokens, audio, query, args.frames, args.audio_tokens
    )

    backends = ["pure"]
    try:
        kernels.use_backend("native")
        backends.insert(0, "native")
    except Exception:
        print("native backend unavailable; timing pure only")

    results = {}
    for backend in backends:
        kernels.use_backend(backend)
        for name, fn in cases.items():
            results[(backend, name)] = time_call(fn, args.repeats)
    kernels.use_backend(backends[0])

    width = max(len(n) for n in cases)
    header = f"{'kernel':<{width}}  " + "".join(f"{b + ' (ms)':>14}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name in cases:
        row = f"{name:<{width}}  "
        row += "".join(f"{results[(b, name)]:>14.4f}" for b in backends)
        if len(backends) == 2:
            pure, native = results[("pure", name)], results[("native", name)]
            row += f"{pure / native:>9.2f}x"
        print(row)


if __name__ == "__main__":
    main()

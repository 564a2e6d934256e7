"""Command-line surface: compress a bundle, generate one, shape rollouts.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 I/O error.
``main`` is callable in-process with an argv list and returns the exit
code instead of raising, so tests and batch drivers can skip subprocesses.
"""

from __future__ import annotations

import argparse
import json
import sys

from avpress.bundle import (
    AUDIO_TOKENS_PER_FRAME,
    DEFAULT_DIM,
    DEFAULT_FRAMES,
    DEFAULT_POSITIONS,
    build_report,
    compress_bundle,
    generate_synthetic,
    load_bundle,
    load_rollout_groups,
    save_compressed,
)
from avpress.errors import AvpressError, BundleIOError
from avpress.geometry import VALID_GUIDANCE_MODES, CompressionConfig
from avpress.shaping import ShapingConfig, clipped_group_loss
from avpress.visual import default_tokens_per_frame

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; remap usage problems to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _print_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def build_parser() -> _Parser:
    parser = _Parser(prog="avpress", description="Audiovisual token compression toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    comp = sub.add_parser("compress", help="compress a token bundle")
    comp.add_argument("--input", required=True, help="bundle directory to read")
    comp.add_argument("--output", required=True, help="directory for compressed output")
    comp.add_argument("--retain", type=float, default=None, help="retained ratio for both modalities (default 0.3)")
    comp.add_argument("--retain-video", type=float, default=None, help="video retained ratio override")
    comp.add_argument("--retain-audio", type=float, default=None, help="audio retained ratio override")
    comp.add_argument("--coverage-bins", type=int, default=4, help="temporal bins for key-frame coverage")
    comp.add_argument("--tokens-per-frame", type=int, default=None, help="explicit tokens kept per selected frame")
    comp.add_argument("--mode", choices=list(VALID_GUIDANCE_MODES), default="full-omac", help="audio budget guidance mode")
    comp.add_argument("--epsilon-w", type=float, default=1.0, help="weight for frames outside the key-frame set")

    gen = sub.add_parser("generate", help="write a synthetic bundle")
    gen.add_argument("--output", required=True, help="bundle directory to create")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--frames", type=int, default=DEFAULT_FRAMES)
    gen.add_argument("--positions", type=int, default=DEFAULT_POSITIONS)
    gen.add_argument("--dim", type=int, default=DEFAULT_DIM)
    gen.add_argument("--audio-tokens", type=int, default=None)

    shape = sub.add_parser("shape", help="compute shaped advantages for rollout groups")
    shape.add_argument("--rollouts", required=True, help="JSON-lines file, one rollout group per line")
    shape.add_argument("--tau", type=float, default=1e-4, help="stabilizer in the degradation denominator")
    shape.add_argument("--lambda", dest="lambda_shape", type=float, default=1.0, help="strength of the shaping term")
    shape.add_argument("--epsilon", type=float, default=0.2, help="ratio clip half-width")
    shape.add_argument("--beta", type=float, default=0.04, help="KL penalty coefficient")

    return parser


def _cmd_compress(args) -> int:
    grid, stream, query = load_bundle(args.input)

    retain_video = args.retain_video
    retain_audio = args.retain_audio
    if retain_video is None:
        retain_video = args.retain if args.retain is not None else 0.3
    if retain_audio is None:
        retain_audio = args.retain if args.retain is not None else 0.3

    tokens_per_frame = args.tokens_per_frame
    if tokens_per_frame is None:
        tokens_per_frame = default_tokens_per_frame(
            retain_video, grid.frames, grid.positions_per_frame
        )
    config = CompressionConfig(
        retain_video=retain_video,
        retain_audio=retain_audio,
        coverage_bins=min(args.coverage_bins, grid.frames),
        tokens_per_selected_frame=tokens_per_frame,
        guidance_mode=args.mode,
        unselected_frame_weight=args.epsilon_w,
    )
    output = compress_bundle(grid, stream, query, config)
    report = build_report(output, config)
    save_compressed(output.sequence, report, args.output)
    _print_json(report)
    return EXIT_OK


def _cmd_generate(args) -> int:
    path = generate_synthetic(
        frames=args.frames,
        positions=args.positions,
        dim=args.dim,
        audio_tokens=args.audio_tokens,
        seed=args.seed,
        out_dir=args.output,
    )
    audio_tokens = (
        args.audio_tokens
        if args.audio_tokens is not None
        else args.frames * AUDIO_TOKENS_PER_FRAME
    )
    _print_json(
        {
            "output": str(path),
            "frames": args.frames,
            "positions_per_frame": args.positions,
            "dim": args.dim,
            "audio_tokens": audio_tokens,
            "seed": args.seed,
        }
    )
    return EXIT_OK


def _cmd_shape(args) -> int:
    config = ShapingConfig(
        tau=args.tau,
        lambda_shape=args.lambda_shape,
        epsilon_clip=args.epsilon,
        beta_kl=args.beta,
    )
    groups = load_rollout_groups(args.rollouts)
    rendered = []
    for group in groups:
        loss, diagnostics = clipped_group_loss(group, config)
        rendered.append(
            {
                "loss": loss,
                "rollouts": [
                    {
                        "advantage": diag.advantage,
                        "degradation": diag.degradation,
                        "distill_weight": diag.distill_weight,
                        "shaped_advantage": diag.shaped_advantage,
                        "clipped_ratio": diag.clipped_ratio,
                        "kl": diag.kl,
                    }
                    for diag in diagnostics
                ],
            }
        )
    _print_json(
        {
            "groups": rendered,
            "mean_loss": sum(g["loss"] for g in rendered) / len(rendered),
            "config": {
                "tau": config.tau,
                "lambda": config.lambda_shape,
                "epsilon": config.epsilon_clip,
                "beta": config.beta_kl,
            },
        }
    )
    return EXIT_OK


_COMMANDS = {"compress": _cmd_compress, "generate": _cmd_generate, "shape": _cmd_shape}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "compress" and args.retain is not None and (
        args.retain_video is not None or args.retain_audio is not None
    ):
        print(
            "avpress compress: error: --retain cannot be combined with "
            "--retain-video/--retain-audio",
            file=sys.stderr,
        )
        return EXIT_USAGE

    try:
        return _COMMANDS[args.command](args)
    except BundleIOError as exc:
        print(f"avpress: error ({exc.code}): {exc}", file=sys.stderr)
        return EXIT_IO
    except AvpressError as exc:
        print(f"avpress: error ({exc.code}): {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"avpress: error (io): {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Bridge command line. Flags mirror BridgeConfig."""

from __future__ import annotations

import argparse
import logging
import sys

from .bridge import BridgeConfig, run_bridge


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capture-bridge",
        description="webcam hand landmarks to NDJSON (stdout or service)")
    parser.add_argument("--camera", default="0",
                        help="camera index or video file path (default 0)")
    parser.add_argument("--fps", type=float, default=30.0)
    parser.add_argument("--out", default="stdout",
                        help='"stdout" or a ws:// frames endpoint URL')
    parser.add_argument("--min-confidence", type=float, default=0.5,
                        help="tracker detection confidence")
    parser.add_argument("--max-frames", type=int, default=None)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING)
    args = build_parser().parse_args(argv)
    camera: int | str = int(args.camera) if args.camera.isdigit() else args.camera
    cfg = BridgeConfig(camera=camera, fps=args.fps, output=args.out,
                       min_confidence=args.min_confidence,
                       max_frames=args.max_frames)
    try:
        from .trackers import MediaPipeTracker
        tracker = MediaPipeTracker(min_confidence=cfg.min_confidence)
    except ImportError:
        print("capture-bridge: mediapipe is not installed "
              "(pip install 'capture-bridge[tracker]')", file=sys.stderr)
        return 1
    try:
        emitted = run_bridge(cfg, tracker)
    except RuntimeError as exc:
        print(f"capture-bridge: {exc}", file=sys.stderr)
        return 1
    print(f"emitted {emitted} records", file=sys.stderr)
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

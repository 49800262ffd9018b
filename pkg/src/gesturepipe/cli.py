"""Command-line entry point.

Subcommands:
    extract     landmark NDJSON -> keyframe log NDJSON
    gen-corpus  write the synthetic gesture corpus
    bench       run the full pipeline over a corpus and score it
    replay      offline end-to-end run producing the command log
    serve       run the session service
    cache       stats / clear for the recognition cache file

Exit codes: 0 success, 1 usage or config error, 2 data error,
3 backend or transport error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cache import RecognitionCache
from .config import AppConfig, ConfigError, load_config
from .corpus import (
    DEFAULT_FRAMES_PER_SAMPLE,
    GESTURE_LABELS,
    generate_corpus,
)
from .errors import (
    CorpusLayoutError,
    MalformedRecord,
    PipelineError,
    RegistryError,
    SchemaViolation,
    TransportError,
)
from .features import extract_features
from .gateway import Gateway, RemoteBackend, RulesBackend
from .keyframes import KeyframeSelector
from .landmarks import accept_frame, parse_frame
from .pipeline import GesturePipeline, PipelineConfig, keyframe_summary
from .rendering import PromptLibrary
from .router import load_registry

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BACKEND = 3


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> CliParser:
    parser = CliParser(prog="gesturepipe",
                       description="gesture-to-command pipeline tools")
    parser.add_argument("--config", help="global config file (JSON)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="landmark NDJSON to keyframe log")
    p.add_argument("input", help="landmark session NDJSON file")
    p.add_argument("output", help="keyframe log NDJSON path")

    p = sub.add_parser("gen-corpus", help="write the synthetic gesture corpus")
    p.add_argument("output_dir")
    p.add_argument("--per-class", type=int, default=200)
    p.add_argument("--noise-sigma", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--frames", type=int, default=DEFAULT_FRAMES_PER_SAMPLE)

    p = sub.add_parser("bench", help="score the pipeline over a corpus directory")
    p.add_argument("corpus_dir")
    p.add_argument("--backend", choices=("rules", "remote"), default="rules")
    p.add_argument("--report", help="write the report JSON here (default stdout)")

    p = sub.add_parser("replay", help="offline run producing the command log")
    p.add_argument("session", help="landmark session NDJSON file")
    p.add_argument("--out", help="command log NDJSON path (default stdout)")
    p.add_argument("--cache", help="recognition cache file (enables caching)")

    p = sub.add_parser("serve", help="run the session service")

    p = sub.add_parser("cache", help="cache file maintenance")
    p.add_argument("action", choices=("stats", "clear"))
    p.add_argument("--cache", required=True, help="recognition cache file")

    return parser


def _make_gateway(cfg: AppConfig, backend_flag: str | None = None) -> Gateway:
    kind = backend_flag or cfg.backend
    if kind == "remote":
        return Gateway(RemoteBackend(cfg.backend_cfg), PromptLibrary(cfg.template_dir))
    return Gateway(RulesBackend(), PromptLibrary(cfg.template_dir))


def cmd_extract(args, cfg: AppConfig) -> int:
    src = Path(args.input)
    if not src.exists():
        print(f"extract: input not found: {src}", file=sys.stderr)
        return EXIT_DATA
    selector = KeyframeSelector()
    records = []
    for lineno, line in enumerate(src.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            frame = parse_frame(line)
            if not accept_frame(frame, cfg.min_confidence):
                continue
            kf = selector.push(extract_features(frame))
        except (MalformedRecord, SchemaViolation, PipelineError) as exc:
            print(f"extract: line {lineno}: {exc}", file=sys.stderr)
            return EXIT_DATA
        if kf is not None:
            records.append(keyframe_summary(kf))
    Path(args.output).write_text(
        "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records),
        encoding="utf-8")
    return EXIT_OK


def cmd_gen_corpus(args, cfg: AppConfig) -> int:
    if args.per_class <= 0:
        print("gen-corpus: --per-class must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        written = generate_corpus(args.output_dir, args.per_class,
                                  args.noise_sigma, args.seed, frames=args.frames)
    except OSError as exc:
        print(f"gen-corpus: {exc}", file=sys.stderr)
        return EXIT_DATA
    total = sum(written.values())
    print(f"wrote {total} sessions across {len(written)} classes to {args.output_dir}")
    return EXIT_OK


def label_matches_name(label: str, name: str) -> bool:
    return label.replace("_", " ").casefold() == name.casefold()


def run_bench(corpus_dir: str | Path, gateway: Gateway, cfg: AppConfig) -> dict:
    """Score every session in <corpus_dir>/<label>/*.ndjson; raises
    CorpusLayoutError on layout problems."""
    root = Path(corpus_dir)
    if not root.is_dir():
        raise CorpusLayoutError(f"corpus directory not found: {root}")
    class_dirs = sorted(d for d in root.iterdir() if d.is_dir())
    if not class_dirs:
        raise CorpusLayoutError(f"no class directories in {root}")

    per_gesture = {}
    total = correct_total = 0
    for class_dir in class_dirs:
        samples = sorted(class_dir.glob("*.ndjson"))
        if not samples:
            raise CorpusLayoutError(f"class directory has no samples: {class_dir}")
        correct = 0
        for sample in samples:
            pipeline = GesturePipeline(
                gateway=gateway, registry=None, cache=None,
                config=PipelineConfig(min_confidence=cfg.min_confidence,
                                      window_size=cfg.window_size,
                                      route_commands=False))
            for line in sample.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    pipeline.process_line(line)
            predicted = (pipeline.last_interpretation.name
                         if pipeline.last_interpretation else "")
            if label_matches_name(class_dir.name, predicted):
                correct += 1
        per_gesture[class_dir.name] = {
            "samples": len(samples),
            "correct": correct,
            "accuracy_pct": round(100.0 * correct / len(samples), 2),
        }
        total += len(samples)
        correct_total += correct

    return {
        "backend": gateway.backend.kind.value,
        "per_gesture": per_gesture,
        "overall": {
            "samples": total,
            "correct": correct_total,
            "accuracy_pct": round(100.0 * correct_total / total, 2),
        },
        "config": {
            "min_confidence": cfg.min_confidence,
            "window_size": cfg.window_size,
        },
    }


def cmd_bench(args, cfg: AppConfig) -> int:
    gateway = _make_gateway(cfg, args.backend)
    try:
        report = run_bench(args.corpus_dir, gateway, cfg)
    except CorpusLayoutError as exc:
        print(f"bench: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TransportError as exc:
        print(f"bench: backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


REPLAY_EVENT_TYPES = ("KeyframeEmitted", "CacheHit", "InterpretationReady",
                      "CommandPending", "CommandDispatched", "CommandRejected",
                      "Error")


def run_replay(session_path: str | Path, cfg: AppConfig,
               cache_path: str | Path | None = None,
               gateway: Gateway | None = None) -> tuple[list[dict], Gateway]:
    """Offline end-to-end run; returns (command log records, gateway)."""
    gateway = gateway or _make_gateway(cfg)
    registry = load_registry(cfg.registry_path)
    cache = RecognitionCache(path=cache_path, threshold=cfg.cache_threshold) \
        if cache_path else None
    pipeline = GesturePipeline(
        gateway=gateway, registry=registry, cache=cache,
        config=PipelineConfig(min_confidence=cfg.min_confidence,
                              window_size=cfg.window_size, auto_dispatch=True))
    records = []
    cache_hits = 0
    for line in Path(session_path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        for event in pipeline.process_line(line):
            if event.type not in REPLAY_EVENT_TYPES:
                continue
            payload = dict(event.payload)
            payload.pop("latency_us", None)  # wall-clock; keep the log stable
            if event.type == "CacheHit":
                cache_hits += 1
            records.append({"type": event.type, **payload})
    records.append({
        "type": "summary",
        "frames": pipeline.frames_seen,
        "frames_rejected": pipeline.frames_rejected,
        "backend_interpretations": gateway.interpretations,
        "completion_calls": gateway.backend.calls,
        "cache_hits": cache_hits,
        "cache_entries": len(cache) if cache else 0,
    })
    return records, gateway


def cmd_replay(args, cfg: AppConfig) -> int:
    src = Path(args.session)
    if not src.exists():
        print(f"replay: session not found: {src}", file=sys.stderr)
        return EXIT_DATA
    try:
        records, _ = run_replay(src, cfg, cache_path=args.cache)
    except TransportError as exc:
        print(f"replay: backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    text = "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_serve(args, cfg: AppConfig) -> int:
    import uvicorn

    from .service import build_app

    app = build_app(cfg)
    try:
        uvicorn.run(app, host=cfg.serve.host, port=cfg.serve.port, log_level="warning")
    except (OSError, SystemExit) as exc:
        print(f"serve: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    return EXIT_OK


def cmd_cache(args, cfg: AppConfig) -> int:
    path = Path(args.cache)
    if args.action == "clear":
        if path.exists():
            path.unlink()
        print(f"cleared {path}")
        return EXIT_OK
    try:
        cache = RecognitionCache(path=path)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"cache: unreadable cache file: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(json.dumps({"path": str(path), "entries": len(cache)}))
    return EXIT_OK


COMMANDS = {
    "extract": cmd_extract,
    "gen-corpus": cmd_gen_corpus,
    "bench": cmd_bench,
    "replay": cmd_replay,
    "serve": cmd_serve,
    "cache": cmd_cache,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, cfg)
    except RegistryError as exc:
        print(f"registry error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

"""Command-line entry points: run one utterance end to end, or serve the API."""

from __future__ import annotations

import argparse
import os
import sys
import threading
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, GatewayConfig, apply_env_overrides, load_config, parse_instant
from .intent import UnreachableChatBackend
from .pipeline import TERMINAL_STAGES, Gateway

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdwaist",
        description="Voice-command scheduling gateway: keyword trigger, intent "
        "extraction, temporal resolution, calendar event creation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    once = sub.add_parser(
        "once", help="run one utterance through the pipeline, printing stage events as JSON lines"
    )
    source = once.add_mutually_exclusive_group(required=True)
    source.add_argument("--text", help="utterance text (skips speech-to-text)")
    source.add_argument("--audio", type=Path, help="path to a 16-bit PCM WAV file")
    once.add_argument("--now", help="ISO-8601 reference instant override, e.g. 2025-01-15T10:00:00-07:00")
    once.add_argument("--stt", choices=["mock", "cloud"], help="override the speech-to-text mode")
    once.add_argument(
        "--llm",
        choices=["mock", "live"],
        help="mock: offline, extraction falls back to the rule grammar; live: call the configured endpoint",
    )
    once.add_argument("--confirm", action="store_true", help="hold the event for operator confirmation")
    once.add_argument("--config", type=Path, help="JSON config file")

    serve_cmd = sub.add_parser("serve", help="run the HTTP/SSE gateway service")
    serve_cmd.add_argument("--config", type=Path, help="JSON config file")
    serve_cmd.add_argument("--ui", type=Path, help="directory of built monitor UI files to serve")
    return parser


def _load(args) -> GatewayConfig:
    if args.config is not None:
        config = load_config(args.config)
    else:
        config = apply_env_overrides(GatewayConfig(), os.environ)
    if getattr(args, "now", None):
        config = replace(config, fixed_now=parse_instant(args.now))
    if getattr(args, "stt", None):
        config = replace(config, stt=replace(config.stt, mode=args.stt))
    if getattr(args, "confirm", False):
        config = replace(config, confirm_mode=True)
    return config


def run_once(args) -> int:
    config = _load(args)
    llm_backend = None
    if args.llm == "mock":
        llm_backend = UnreachableChatBackend()
    elif args.llm == "live" and config.llm is None:
        raise ConfigError("--llm live needs an llm section in the config file")
    gateway = Gateway(config, llm_backend=llm_backend)

    subscription = gateway.bus.subscribe()
    outcome: list = []

    def work():
        if args.text is not None:
            outcome.append(gateway.handle_utterance(args.text))
        else:
            audio = args.audio.read_bytes()
            outcome.append(gateway.handle_audio(audio, source_path=args.audio))

    worker = threading.Thread(target=work, daemon=True)
    worker.start()
    terminal = None
    while terminal is None:
        try:
            event = subscription.get(timeout=0.2)
        except Exception:
            if not worker.is_alive() and not outcome:
                print("error: pipeline stopped without a terminal stage", file=sys.stderr)
                return EXIT_FAILED
            continue
        print(event.to_json(), flush=True)
        if event.stage in TERMINAL_STAGES:
            terminal = event
    worker.join()
    return EXIT_FAILED if terminal.stage == "failed" else EXIT_OK


def run_serve(args) -> int:
    from .server import serve  # deferred: keeps `once` startup light

    config = _load(args)
    serve(config, static_dir=args.ui)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "once":
            return run_once(args)
        return run_serve(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

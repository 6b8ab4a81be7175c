"""Operator entry point: run batches, replay traces, regenerate reports,
validate the grammar corpus, and probe remote backends.

Exit codes: 0 success, 2 config/input error, 3 backend failure,
4 verification mismatch.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from importlib import resources
from pathlib import Path

from .errors import GatewayError
from .gateway import CompletionRequest, RemoteBackend, RemoteConfig
from .grammar import Valid, parse_command
from .harness import RunConfig, compute_metrics, report_csv_text, run_batch
from .trace_io import read_trace, replay_trace

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_MISMATCH = 4

DEFAULT_BASE_URL = os.environ.get("AEROAGENT_BASE_URL",
                                  "http://127.0.0.1:11434")


def default_corpus_path() -> Path:
    return Path(str(resources.files("aeroagent").joinpath(
        "data/command_corpus.jsonl")))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aeroagent",
        description="Renderer-free natural-language drone control harness")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a batch of episodes")
    run.add_argument("--config", help="JSON config file; flags override it")
    run.add_argument("--out", default="runs", help="output directory")
    for f in dataclasses.fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type == "bool":
            run.add_argument(flag, action="store_true", default=None)
        else:
            run.add_argument(flag, default=None)

    replay = sub.add_parser("replay", help="re-simulate recorded traces")
    replay.add_argument("traces", nargs="+")

    report = sub.add_parser("report", help="recompute the report of a run directory")
    report.add_argument("run_dir")

    corpus = sub.add_parser("validate-corpus",
                            help="check the grammar against a labeled corpus")
    corpus.add_argument("corpus", nargs="?", default=None)

    probe = sub.add_parser("probe", help="send one request to a remote backend")
    probe.add_argument("--base-url", default=DEFAULT_BASE_URL)
    probe.add_argument("--model", required=True)
    probe.add_argument("--timeout-ms", type=int, default=10_000)
    return parser


def _resolve_run_config(args) -> RunConfig:
    doc: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ValueError(f"config file not found: {path}")
        doc = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(doc, dict):
            raise ValueError("config file must hold a JSON object")
    defaults = RunConfig()
    for f in dataclasses.fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is None:
            continue
        current = getattr(defaults, f.name)
        if isinstance(current, bool):
            doc[f.name] = bool(value)
        elif isinstance(current, int):
            doc[f.name] = int(value)
        elif isinstance(current, float):
            doc[f.name] = float(value)
        else:
            doc[f.name] = value
    if "base_url" not in doc:
        doc["base_url"] = DEFAULT_BASE_URL
    return RunConfig.from_dict(doc)


def cmd_run(args) -> int:
    try:
        config = _resolve_run_config(args)
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report, _ = run_batch(config, args.out)
    sys.stdout.write(report_csv_text(report, config))
    if report.aborted == report.episodes:
        print("all episodes aborted (backend unreachable)", file=sys.stderr)
        return EXIT_BACKEND
    return EXIT_OK


def cmd_replay(args) -> int:
    worst = EXIT_OK
    for trace_path in args.traces:
        try:
            trace = read_trace(trace_path)
        except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
            print(f"{trace_path}: unreadable trace ({exc})", file=sys.stderr)
            return EXIT_CONFIG
        ok, divergence = replay_trace(trace)
        if ok:
            print(f"{trace_path}: replay OK ({trace.steps_used} steps,"
                  f" outcome {trace.outcome.value})")
        else:
            where = "outcome" if divergence == -1 else f"step {divergence}"
            print(f"{trace_path}: replay DIVERGED at {where}", file=sys.stderr)
            worst = EXIT_MISMATCH
    return worst


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    trace_paths = sorted(run_dir.glob("episode_*.jsonl"))
    if not trace_paths:
        print(f"no traces found in {run_dir}", file=sys.stderr)
        return EXIT_CONFIG
    config_path = run_dir / "config.json"
    config = None
    if config_path.exists():
        doc = json.loads(config_path.read_text(encoding="utf-8"))
        doc.pop("prompt_version", None)
        config = RunConfig.from_dict(doc)
    traces = [read_trace(p) for p in trace_paths]
    report = compute_metrics(
        traces, cell_size=config.cell_size if config else 0.25)
    sys.stdout.write(report_csv_text(report, config or RunConfig()))
    return EXIT_OK


def cmd_validate_corpus(args) -> int:
    corpus_path = Path(args.corpus) if args.corpus else default_corpus_path()
    try:
        lines = [ln for ln in corpus_path.read_text(encoding="utf-8").splitlines()
                 if ln.strip()]
    except OSError as exc:
        print(f"cannot read corpus: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not lines:
        print("corpus is empty", file=sys.stderr)
        return EXIT_CONFIG
    mismatches = 0
    for idx, line in enumerate(lines):
        try:
            record = json.loads(line)
            raw, expect = record["raw"], record["expect"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            print(f"corpus line {idx}: unparseable record ({exc})",
                  file=sys.stderr)
            return EXIT_CONFIG
        result = parse_command(raw)
        got = "Valid" if isinstance(result, Valid) else result.reason.value
        if got != expect:
            mismatches += 1
            print(f"line {idx}: raw={raw!r} expected={expect} got={got}",
                  file=sys.stderr)
    if mismatches:
        print(f"{mismatches}/{len(lines)} corpus records mismatched",
              file=sys.stderr)
        return EXIT_MISMATCH
    print(f"corpus OK: {len(lines)} records match")
    return EXIT_OK


def cmd_probe(args) -> int:
    backend = RemoteBackend(RemoteConfig(
        base_url=args.base_url, model_name=args.model,
        timeout_ms=args.timeout_ms, retries=0))
    request = CompletionRequest(
        system_prompt="Reply with the single word OK.",
        user_messages=("Say OK.",),
        model_name=args.model,
    )
    started = time.perf_counter()
    try:
        response = backend.complete(request)
    except GatewayError as exc:
        print(f"probe failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    print(f"latency: {elapsed_ms:.1f} ms")
    print(f"reply: {response.text}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": cmd_run,
        "replay": cmd_replay,
        "report": cmd_report,
        "validate-corpus": cmd_validate_corpus,
        "probe": cmd_probe,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

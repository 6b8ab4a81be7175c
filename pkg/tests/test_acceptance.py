"""End-to-end acceptance checks for the simulator and evaluation harness.

Each test covers one release criterion and records a single PASS or FAIL
verdict line, printed in an "acceptance criteria" section at the end of
the pytest run. The fuzzing budget is controlled by
AEROAGENT_FUZZ_SECONDS (default 5; the release run uses 600).
"""

from __future__ import annotations

import dataclasses
import math
import os
import random
import string
import time
from contextlib import contextmanager

import pytest

import conftest
from aeroagent.cli import main as cli_main
from aeroagent.errors import (
    BackendTimeout,
    ConnectionRefused,
    HTTPStatusError,
    MalformedReply,
)
from aeroagent.gateway import (
    CompletionRequest,
    NoisyBackend,
    RemoteBackend,
    RemoteConfig,
)
from aeroagent.grammar import Invalid, Valid, parse_command
from aeroagent.harness import RunConfig, compute_metrics, run_batch
from aeroagent.planning import astar_shortest_path
from aeroagent.trace_io import read_trace
from aeroagent.world import NedPose, VehicleState, enu_to_ned, ned_to_enu
from fixture_traces import build_fixture_traces
from test_planning import dijkstra_cost, random_grid

FUZZ_SECONDS = float(os.environ.get("AEROAGENT_FUZZ_SECONDS", "5"))


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        conftest.ACCEPTANCE_LINES.append(f"FAIL: {name}")
        raise
    conftest.ACCEPTANCE_LINES.append(f"PASS: {name}")


def test_closed_loop_oracle_pilot(tmp_path):
    with criterion("closed-loop oracle pilot: >=95% success, <=20 steps, "
                   "no collisions, <60 s"):
        config = RunConfig(episodes=100, base_seed=1000, obstacle_count=5)
        started = time.perf_counter()
        report, paths = run_batch(config, tmp_path)
        elapsed = time.perf_counter() - started
        assert report.success_pct >= 95.0, report
        traces = [read_trace(p) for p in paths]
        for trace in traces:
            assert trace.steps_used <= 20
            assert all("collision" not in [e.value for e in r.events]
                       for r in trace.records)
        assert elapsed < 60.0, f"batch took {elapsed:.1f} s"


def test_grammar_corpus_and_fuzz(capsys):
    with criterion("grammar: 100% corpus agreement and "
                   f"{FUZZ_SECONDS:.0f} s fuzz without crashes"):
        assert cli_main(["validate-corpus"]) == 0
        capsys.readouterr()

        rng = random.Random(20260826)
        alphabet = (string.printable + "Ππ∆°±  \U0001f600")
        fragments = ["Turn", "Move", "(", ")", ";", ".", "-", "+",
                     "1", "9", "0", "e", " ", "\n", "\t", "Turn(45);",
                     "Move(1.5);", "inf", "nan", "1e3", "_", "\x00"]
        deadline = time.perf_counter() + FUZZ_SECONDS
        attempts = 0
        while time.perf_counter() < deadline:
            for _ in range(2000):
                attempts += 1
                mode = rng.random()
                if mode < 0.5:
                    raw = "".join(rng.choice(alphabet)
                                  for _ in range(rng.randrange(0, 40)))
                else:
                    raw = "".join(rng.choice(fragments)
                                  for _ in range(rng.randrange(1, 8)))
                result = parse_command(raw)
                assert isinstance(result, (Valid, Invalid))
                if isinstance(result, Valid):
                    round_trip = parse_command(result.canonical_text)
                    assert isinstance(round_trip, Valid)
                    assert round_trip.action == result.action
        assert attempts >= 2000


def test_metrics_fixture_exact():
    with criterion("metrics pipeline: engineered fixture reports exactly "
                   "40.0/38.0/97.0"):
        report = compute_metrics(build_fixture_traces())
        assert report.success_pct == 40.0
        assert report.llm_valid_pct == 38.0
        assert report.vlm_valid_pct == 97.0
        assert report.episodes == 20


def test_astar_oracle_equivalence():
    with criterion("path planner: exact agreement with uniform-cost oracle "
                   "and admissible heuristic on 20 random grids"):
        rng = random.Random(7)
        checked = 0
        while checked < 20:
            grid = random_grid(rng)
            free = [(ix, iy) for ix in range(grid.width)
                    for iy in range(grid.height) if not grid.occupied(ix, iy)]
            start, goal = rng.sample(free, 2)
            oracle = dijkstra_cost(grid, start, goal)
            if oracle is None:
                continue
            path = astar_shortest_path(grid, start, goal)
            assert math.isclose(path.length, oracle,
                                rel_tol=0.0, abs_tol=1e-9)
            # Admissibility: the heuristic from any free cell must not
            # exceed the true remaining cost along the optimal path.
            from aeroagent.planning import octile
            for cell in path.cells:
                est = octile(cell, goal) * grid.cell_size
                true = dijkstra_cost(grid, cell, goal)
                assert est <= true + 1e-9
            checked += 1


def test_noisy_backend_statistics(tmp_path):
    with criterion("statistical emulation: 38% validity within 3 sigma over "
                   "10,000 calls and <=10% closed-loop success"):
        backend = NoisyBackend(0.38, seed=424242)
        request = CompletionRequest(system_prompt="", user_messages=("go",))
        valid = sum(
            isinstance(parse_command(backend.complete(request).text), Valid)
            for _ in range(10_000))
        p_hat = valid / 10_000
        sigma = math.sqrt(0.38 * 0.62 / 10_000)
        assert abs(p_hat - 0.38) <= 3 * sigma, p_hat

        config = RunConfig(episodes=100, base_seed=5000, obstacle_count=5,
                           llm="noisy:0.38")
        report, _ = run_batch(config, tmp_path)
        assert report.success_pct <= 10.0, report


def test_determinism_and_replay(tmp_path, capsys):
    with criterion("determinism: repeated mock-backend runs are "
                   "byte-identical and every trace replays cleanly"):
        clean = RunConfig(episodes=8, base_seed=77, obstacle_count=4)
        noisy = dataclasses.replace(clean, dynamics_noise=True,
                                    llm="noisy:0.6", vlm="noisy:0.1,0.1,0.05")
        all_paths = []
        for tag, config in (("clean", clean), ("noisy", noisy)):
            _, paths_a = run_batch(config, tmp_path / f"{tag}_a")
            _, paths_b = run_batch(config, tmp_path / f"{tag}_b")
            for a, b in zip(paths_a, paths_b, strict=True):
                assert a.read_bytes() == b.read_bytes()
            csv_a = (paths_a[0].parent / "report.csv").read_bytes()
            csv_b = (paths_b[0].parent / "report.csv").read_bytes()
            assert csv_a == csv_b
            all_paths.extend(paths_a)
        code = cli_main(["replay"] + [str(p) for p in all_paths])
        capsys.readouterr()
        assert code == 0


def test_frame_transform_round_trip():
    with criterion("frame transforms: worked examples bit-exact and "
                   "1,000-pose round-trip identity"):
        state = ned_to_enu(NedPose(north=1.0, east=2.0, down=-1.0,
                                   yaw_ned=0.0))
        assert (state.x, state.y, state.z, state.yaw) == (2.0, 1.0, 1.0, 90.0)

        state = ned_to_enu(NedPose(north=0.0, east=0.0, down=0.0,
                                   yaw_ned=90.0))
        assert (state.x, state.y, state.z, state.yaw) == (0.0, 0.0, 0.0, 0.0)

        pose = enu_to_ned(VehicleState(x=2.0, y=1.0, z=1.0, yaw=90.0))
        assert (pose.north, pose.east, pose.down, pose.yaw_ned) \
            == (1.0, 2.0, -1.0, 0.0)

        rng = random.Random(31337)
        for _ in range(1000):
            pose = NedPose(
                north=rng.uniform(-100.0, 100.0),
                east=rng.uniform(-100.0, 100.0),
                down=rng.uniform(-50.0, 50.0),
                yaw_ned=rng.randrange(-180 * 2**16 + 1, 180 * 2**16 + 1)
                / 2**16,
            )
            back = enu_to_ned(ned_to_enu(pose))
            assert back == pose, (pose, back)


def test_gateway_protocol_conformance(stub_server):
    with criterion("gateway protocol: happy path, timeout, HTTP 500, "
                   "malformed JSON and generate fallback each surface "
                   "a distinct error class"):
        request = CompletionRequest(system_prompt="sys",
                                    user_messages=("hello",),
                                    model_name="m")

        def happy(path, body):
            assert path == "/api/chat"
            assert body["model"] == "m"
            assert body["stream"] is False
            return 200, {"message": {"role": "assistant", "content": " ok "}}

        backend = RemoteBackend(RemoteConfig(
            base_url=stub_server(happy).base_url, model_name="m"))
        assert backend.complete(request).text == " ok "

        def slow(path, body):
            time.sleep(1.0)
            return 200, {"message": {"content": "late"}}

        backend = RemoteBackend(RemoteConfig(
            base_url=stub_server(slow).base_url, model_name="m",
            timeout_ms=200, retries=0))
        with pytest.raises(BackendTimeout):
            backend.complete(request)

        def erroring(path, body):
            return 500, {"error": "boom"}

        backend = RemoteBackend(RemoteConfig(
            base_url=stub_server(erroring).base_url, model_name="m"))
        with pytest.raises(HTTPStatusError) as exc_info:
            backend.complete(request)
        assert exc_info.value.status == 500

        def garbled(path, body):
            return 200, "this is not the document you are looking for"

        backend = RemoteBackend(RemoteConfig(
            base_url=stub_server(garbled).base_url, model_name="m"))
        with pytest.raises(MalformedReply):
            backend.complete(request)

        seen = []

        def chat_missing(path, body):
            seen.append(path)
            if path == "/api/chat":
                return 404, {"error": "unknown route"}
            assert path == "/api/generate"
            assert "hello" in body["prompt"]
            return 200, {"response": "fallback ok"}

        backend = RemoteBackend(RemoteConfig(
            base_url=stub_server(chat_missing).base_url, model_name="m"))
        assert backend.complete(request).text == "fallback ok"
        assert seen == ["/api/chat", "/api/generate"]

        backend = RemoteBackend(RemoteConfig(
            base_url="http://127.0.0.1:9", model_name="m", timeout_ms=500))
        with pytest.raises(ConnectionRefused):
            backend.complete(request)

        errors = {BackendTimeout, HTTPStatusError, MalformedReply,
                  ConnectionRefused}
        assert len(errors) == 4

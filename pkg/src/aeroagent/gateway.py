"""Uniform completion interface over four backend kinds: a remote
Ollama-compatible REST server, a scripted replay backend, a ground-truth
oracle pilot, and a stochastic backend emulating a target validity rate.

All backends are stateless across calls (history travels inside the request)
and return the completion text verbatim; parsing happens downstream.
"""

from __future__ import annotations

import json
import math
import time
import random
from dataclasses import dataclass, field

import requests

from .errors import (
    BackendTimeout,
    ConnectionRefused,
    HTTPStatusError,
    MalformedReply,
    NoPathExists,
    ResponsesExhausted,
)
from .grammar import Action, Move, Turn, canonicalize
from .planning import astar_shortest_path
from .world import (
    OccupancyGrid,
    Scenario,
    VehicleState,
    VEHICLE_RADIUS,
    normalize_yaw,
    segment_collides,
)

DEFAULT_TEMPERATURE = 0.2
DEFAULT_TIMEOUT_MS = 60_000

# Bearing error (degrees) below which the oracle pilot translates instead
# of turning first.
ORACLE_BEARING_TOLERANCE = 5.0


@dataclass(frozen=True)
class CompletionRequest:
    system_prompt: str
    user_messages: tuple[str, ...]
    temperature: float = DEFAULT_TEMPERATURE
    model_name: str = ""

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class ModelResponse:
    text: str
    latency_ms: float
    backend_id: str


class ScriptedBackend:
    """Replays a canned response list in order; raises ResponsesExhausted
    past the end."""

    def __init__(self, responses: list[str] | tuple[str, ...],
                 backend_id: str = "scripted"):
        self._responses = list(responses)
        self._index = 0
        self.backend_id = backend_id

    def complete(self, request: CompletionRequest) -> ModelResponse:
        if self._index >= len(self._responses):
            raise ResponsesExhausted(
                f"scripted backend exhausted after {self._index} responses")
        text = self._responses[self._index]
        self._index += 1
        return ModelResponse(text=text, latency_ms=0.0,
                             backend_id=self.backend_id)


_DISCLAIMERS = (
    "I'm sorry, but as an AI language model I cannot directly control a drone.",
    "Sure! Here is the command you asked for: Move one meter forward.",
    "```\nMove(1.0);\n```",
    "Let me think about the best action. The drone should probably turn.",
    "Move(1.0); Turn(10);",
)


class NoisyBackend:
    """Emits a valid random in-range command with probability valid_rate,
    otherwise a disclaimer-style invalid string. Deterministic in seed."""

    def __init__(self, valid_rate: float, seed: int = 0):
        if not (0.0 <= valid_rate <= 1.0):
            raise ValueError("valid_rate must be a probability")
        self.valid_rate = valid_rate
        self._rng = random.Random(seed)
        self.backend_id = f"noisy:{valid_rate}"

    def complete(self, request: CompletionRequest) -> ModelResponse:
        rng = self._rng
        if rng.random() < self.valid_rate:
            if rng.random() < 0.5:
                action: Action = Turn(round(rng.uniform(-90.0, 90.0), 1))
            else:
                action = Move(round(rng.uniform(-3.0, 3.0), 1))
            text = canonicalize(action)
        else:
            text = _DISCLAIMERS[rng.randrange(len(_DISCLAIMERS))]
        return ModelResponse(text=text, latency_ms=0.0,
                             backend_id=self.backend_id)


def _nearest_free_cell(grid: OccupancyGrid, x: float, y: float) -> tuple[int, int]:
    best = None
    best_dist = math.inf
    for iy in range(grid.height):
        for ix in range(grid.width):
            if grid.occupied(ix, iy):
                continue
            cx, cy = grid.center_of(ix, iy)
            d = (cx - x) ** 2 + (cy - y) ** 2
            if d < best_dist or (d == best_dist and (ix, iy) < best):
                best, best_dist = (ix, iy), d
    if best is None:
        raise NoPathExists("grid has no free cells")
    return best


def oracle_pilot_command(state: VehicleState, scenario: Scenario,
                         grid: OccupancyGrid) -> Action:
    """Ground-truth controller: follow the A* path with legal primitives.

    Picks the farthest path waypoint reachable along a collision-free
    straight line (the final waypoint being the target center itself), then
    turns if the bearing error exceeds the tolerance, else moves.
    """
    target = scenario.target
    start_cell = grid.cell_of(state.x, state.y)
    if grid.occupied(*start_cell):
        # The vehicle keeps 0.28 m of true clearance, but its cell can still
        # intersect the inflation band; plan from the nearest free cell.
        start_cell = _nearest_free_cell(grid, state.x, state.y)
    goal_cell = grid.cell_of(target.x, target.y)
    path = astar_shortest_path(grid, start_cell, goal_cell)

    waypoints = [grid.center_of(*c) for c in path.cells[1:]]
    waypoints.append((target.x, target.y))
    chosen = waypoints[0]
    for wp in reversed(waypoints):
        if not segment_collides((state.x, state.y), wp, VEHICLE_RADIUS,
                                scenario.obstacles):
            chosen = wp
            break

    dx = chosen[0] - state.x
    dy = chosen[1] - state.y
    dist = math.hypot(dx, dy)
    if dist < 1e-9:
        return Move(0.0)
    bearing = math.degrees(math.atan2(dy, dx))
    error = normalize_yaw(bearing - state.yaw)
    if abs(error) > ORACLE_BEARING_TOLERANCE:
        # Command convention is CW-positive, ENU yaw is CCW-positive.
        return Turn(max(-90.0, min(90.0, -error)))
    d = min(dist, 3.0)
    # The vehicle flies along its body axis, not along the checked ray; a
    # residual bearing error can make the flown segment unsafe, so verify
    # it and align exactly first if needed.
    yaw_rad = math.radians(state.yaw)
    end = (state.x + d * math.cos(yaw_rad), state.y + d * math.sin(yaw_rad))
    b = scenario.boundary
    flown_unsafe = (
        segment_collides((state.x, state.y), end, VEHICLE_RADIUS,
                         scenario.obstacles)
        or not (b.x_min <= end[0] <= b.x_max and b.y_min <= end[1] <= b.y_max)
    )
    if flown_unsafe and abs(error) > 1e-9:
        return Turn(max(-90.0, min(90.0, -error)))
    return Move(d)


class OraclePilotBackend:
    """Wraps the oracle pilot as a completion backend. The episode loop
    supplies ground truth out-of-band via observe_state()."""

    backend_id = "oracle"

    def __init__(self, scenario: Scenario, grid: OccupancyGrid):
        self._scenario = scenario
        self._grid = grid
        self._state: VehicleState | None = None

    def observe_state(self, state: VehicleState) -> None:
        self._state = state

    def complete(self, request: CompletionRequest) -> ModelResponse:
        if self._state is None:
            raise NoPathExists("oracle pilot has no current state")
        action = oracle_pilot_command(self._state, self._scenario, self._grid)
        return ModelResponse(text=canonicalize(action), latency_ms=0.0,
                             backend_id=self.backend_id)


@dataclass(frozen=True)
class RemoteConfig:
    base_url: str
    model_name: str
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    retries: int = 1

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be > 0")


class RemoteBackend:
    """Client for an Ollama-compatible REST server.

    POSTs {base_url}/api/chat with streaming disabled; on HTTP 404 falls
    back to /api/generate with the messages concatenated into one prompt.
    Retries apply to timeouts only, never to malformed replies, so model
    misbehavior is never double-counted.
    """

    def __init__(self, config: RemoteConfig, session: requests.Session | None = None):
        self.config = config
        self._session = session or requests.Session()
        self.backend_id = f"remote:{config.model_name}"

    def complete(self, request: CompletionRequest) -> ModelResponse:
        model = request.model_name or self.config.model_name
        started = time.perf_counter()
        reply = self._post_with_retry("/api/chat", {
            "model": model,
            "messages": self._messages(request),
            "stream": False,
            "options": {"temperature": request.temperature},
        })
        if reply.status_code == 404:
            reply = self._post_with_retry("/api/generate", {
                "model": model,
                "prompt": self._flat_prompt(request),
                "stream": False,
                "options": {"temperature": request.temperature},
            })
            content_path = ("response",)
        else:
            content_path = ("message", "content")
        latency_ms = (time.perf_counter() - started) * 1000.0
        if reply.status_code >= 400:
            raise HTTPStatusError(reply.status_code, reply.text[:200])
        try:
            doc = reply.json()
        except (json.JSONDecodeError, requests.exceptions.JSONDecodeError) as exc:
            raise MalformedReply(f"non-JSON reply: {exc}") from exc
        node = doc
        for key in content_path:
            if not isinstance(node, dict) or key not in node:
                raise MalformedReply(
                    f"reply missing field {'.'.join(content_path)!r}")
            node = node[key]
        if not isinstance(node, str):
            raise MalformedReply("completion content is not a string")
        return ModelResponse(text=node, latency_ms=latency_ms,
                             backend_id=self.backend_id)

    def _messages(self, request: CompletionRequest) -> list[dict]:
        msgs = [{"role": "system", "content": request.system_prompt}]
        msgs.extend({"role": "user", "content": u} for u in request.user_messages)
        return msgs

    def _flat_prompt(self, request: CompletionRequest) -> str:
        return "\n\n".join([request.system_prompt, *request.user_messages])

    def _post_with_retry(self, path: str, body: dict) -> requests.Response:
        url = self.config.base_url.rstrip("/") + path
        timeout_s = self.config.timeout_ms / 1000.0
        attempts = self.config.retries + 1
        for attempt in range(attempts):
            try:
                return self._session.post(url, json=body, timeout=timeout_s)
            except requests.exceptions.Timeout as exc:
                if attempt + 1 >= attempts:
                    raise BackendTimeout(
                        f"no reply from {url} within {timeout_s}s") from exc
            except requests.exceptions.ConnectionError as exc:
                raise ConnectionRefused(f"cannot connect to {url}") from exc
        raise AssertionError("unreachable")

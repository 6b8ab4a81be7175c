"""The closed control loop: per step it queries the vision channel, builds
the language-model prompt (context + recent valid-command history), parses
the reply, applies the motion, and enforces termination, producing a
complete, replayable episode trace.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum

from .dynamics import NoiseConfig, apply_action, takeoff
from .errors import GatewayError, NoPathExists
from .gateway import CompletionRequest, DEFAULT_TEMPERATURE, ModelResponse
from .grammar import Invalid, ParseResult, Valid, parse_command
from .perception import (
    CameraModel,
    Detection,
    DetectionResult,
    DetectorNoise,
    parse_vlm_response,
    simulate_detection,
    visible,
)
from .world import Scenario, VehicleState, goal_reached

PROMPT_VERSION = "1"

DEFAULT_K_MAX = 20
DEFAULT_HISTORY_N = 5

LLM_SYSTEM_PROMPT = (
    "You are the navigation controller of a quadcopter.\n"
    "Respond with exactly one command and nothing else.\n"
    "The only two allowed output formats are:\n"
    "Turn(<angle>); with <angle> in degrees between -90 and 90"
    " (negative = left/counter-clockwise, positive = right/clockwise).\n"
    "Move(<distance>); with <distance> in meters between -3.0 and 3.0"
    " (negative = backward, positive = forward).\n"
    "Do not explain. Do not output reasoning, markdown, apologies,"
    " or any text other than the single command."
)

VLM_SYSTEM_PROMPT = (
    "You are an image analyst. Answer with exactly one word, Yes or No,"
    " and nothing else."
)


class Event(str, Enum):
    COLLISION = "Collision"
    OUT_OF_BOUNDS = "OutOfBounds"
    GOAL_REACHED = "GoalReached"
    BACKEND_ERROR = "BackendError"


class Outcome(str, Enum):
    SUCCESS = "Success"
    COLLISION = "Collision"
    OUT_OF_BOUNDS = "OutOfBounds"
    TIMEOUT = "Timeout"
    ABORTED = "Aborted"


@dataclass(frozen=True)
class PromptContext:
    """Deterministic textual rendering of the step's context; byte-stable
    for identical inputs."""

    mission_text: str
    state_metadata: str
    environmental_cues: str
    detection_line: str


class CommandHistory:
    """Sliding window of the N most recent *valid* canonical commands;
    invalid outputs are never admitted."""

    def __init__(self, capacity: int = DEFAULT_HISTORY_N):
        if capacity < 0:
            raise ValueError("capacity must be >= 0")
        self.capacity = capacity
        self.entries: list[str] = []

    def push(self, canonical_text: str) -> None:
        self.entries.append(canonical_text)
        if len(self.entries) > self.capacity:
            del self.entries[: len(self.entries) - self.capacity]

    def render(self) -> str:
        if not self.entries:
            return "Recent valid commands: (none)"
        return "Recent valid commands: " + " ".join(self.entries)


def build_vlm_query(object_class: str) -> tuple[str, str]:
    """(system, user) prompt pair for the binary presence question."""
    noun = object_class.replace("_", " ")
    return (VLM_SYSTEM_PROMPT,
            f"Is there a {noun} in the image? Answer Yes or No.")


def build_prompt_context(state: VehicleState, scenario: Scenario,
                         detection: DetectionResult) -> PromptContext:
    b = scenario.boundary
    t = scenario.target
    noun = t.object_class.replace("_", " ")
    return PromptContext(
        mission_text=(
            f"Mission: locate the {noun} and approach the goal at"
            f" x={t.x:.2f} m, y={t.y:.2f} m."
        ),
        state_metadata=(
            f"Current state: x={state.x:.2f} m, y={state.y:.2f} m,"
            f" yaw={state.yaw:.2f} degrees."
        ),
        environmental_cues=(
            f"Arena bounds: x in [{b.x_min:.2f}, {b.x_max:.2f}] m,"
            f" y in [{b.y_min:.2f}, {b.y_max:.2f}] m."
            f" Obstacles present: {len(scenario.obstacles)}."
        ),
        detection_line=f"Target visible: {'Yes' if detection.as_bool else 'No'}",
    )


def build_llm_prompt(context: PromptContext,
                     history: CommandHistory) -> tuple[str, tuple[str, ...]]:
    users = (
        context.mission_text,
        " ".join((context.state_metadata, context.environmental_cues,
                  context.detection_line)),
        history.render(),
    )
    return (LLM_SYSTEM_PROMPT, users)


class SimulatedVlmChannel:
    """Ground-truth visibility, optionally corrupted by detector noise; the
    raw reply is the text a real model would have produced."""

    def __init__(self, camera: CameraModel = CameraModel(),
                 noise: DetectorNoise = DetectorNoise(), seed: int = 0):
        self.camera = camera
        self.noise = noise
        self.seed = seed
        self._rng = random.Random(seed)
        self.channel_id = "simulated"

    def query(self, state: VehicleState, scenario: Scenario) -> str:
        truth = visible(state, scenario.target, scenario.obstacles, self.camera)
        return simulate_detection(truth, self.noise, self._rng).raw


class ScriptedVlmChannel:
    """Replays recorded raw replies; entries of None reproduce a backend
    failure at that step."""

    def __init__(self, raws: list[str | None]):
        self._raws = list(raws)
        self._index = 0
        self.channel_id = "scripted"

    def query(self, state: VehicleState, scenario: Scenario) -> str:
        if self._index >= len(self._raws):
            raise GatewayError("scripted VLM channel exhausted")
        raw = self._raws[self._index]
        self._index += 1
        if raw is None:
            raise GatewayError("recorded VLM backend failure")
        return raw


class RemoteVlmChannel:
    """Sends a textual scene description to a real VLM backend in place of
    pixels (no renderer exists); reports produced from this channel are
    labeled non-faithful."""

    non_faithful = True

    def __init__(self, backend, camera: CameraModel = CameraModel()):
        self._backend = backend
        self.camera = camera
        self.channel_id = f"remote-text:{backend.backend_id}"

    def query(self, state: VehicleState, scenario: Scenario) -> str:
        system, question = build_vlm_query(scenario.target.object_class)
        truth = visible(state, scenario.target, scenario.obstacles, self.camera)
        scene = (
            "The image shows the view from a drone camera inside an indoor"
            f" arena with {len(scenario.obstacles)} box obstacles."
            f" A {scenario.target.object_class.replace('_', ' ')} is"
            f" {'clearly visible ahead' if truth else 'not in view'}."
        )
        request = CompletionRequest(system_prompt=system,
                                    user_messages=(scene, question))
        return self._backend.complete(request).text


@dataclass(frozen=True)
class StepRecord:
    k: int
    pre_state: VehicleState
    vlm_raw: str | None
    detection: DetectionResult | None
    llm_system: str
    llm_users: tuple[str, ...]
    llm_raw: str | None
    parse: ParseResult | None
    post_state: VehicleState
    events: tuple[Event, ...]


@dataclass(frozen=True)
class EpisodeConfig:
    k_max: int = DEFAULT_K_MAX
    history_n: int = DEFAULT_HISTORY_N
    temperature: float = DEFAULT_TEMPERATURE
    model_name: str = ""
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    dynamics_seed: int = 0


@dataclass(frozen=True)
class EpisodeTrace:
    scenario: Scenario
    config: EpisodeConfig
    prompt_version: str
    llm_backend_id: str
    vlm_channel_id: str
    records: tuple[StepRecord, ...]
    outcome: Outcome
    steps_used: int


class EpisodeRunner:
    """One strictly sequential episode; owns its state, history, and noise
    generator."""

    def __init__(self, scenario: Scenario, llm_backend, vlm_channel,
                 config: EpisodeConfig = EpisodeConfig()):
        self.scenario = scenario
        self.llm_backend = llm_backend
        self.vlm_channel = vlm_channel
        self.config = config
        self.state = takeoff(scenario)
        self.history = CommandHistory(config.history_n)
        self.records: list[StepRecord] = []
        self.outcome: Outcome | None = None
        self._rng = random.Random(config.dynamics_seed)

    @property
    def k(self) -> int:
        return len(self.records)

    def step(self) -> StepRecord:
        """One inference step. Invalid commands and backend errors consume
        the step with the state unchanged."""
        if self.outcome is not None:
            raise RuntimeError("episode already terminated")
        if self.k >= self.config.k_max:
            raise RuntimeError("step budget exhausted")
        pre = self.state
        events: list[Event] = []

        vlm_raw: str | None = None
        detection: DetectionResult | None = None
        llm_raw: str | None = None
        parse: ParseResult | None = None
        llm_system = ""
        llm_users: tuple[str, ...] = ()
        post = pre
        try:
            vlm_raw = self.vlm_channel.query(pre, self.scenario)
            detection = parse_vlm_response(vlm_raw)
            context = build_prompt_context(pre, self.scenario, detection)
            llm_system, llm_users = build_llm_prompt(context, self.history)
            if hasattr(self.llm_backend, "observe_state"):
                self.llm_backend.observe_state(pre)
            request = CompletionRequest(
                system_prompt=llm_system,
                user_messages=llm_users,
                temperature=self.config.temperature,
                model_name=self.config.model_name,
            )
            response: ModelResponse = self.llm_backend.complete(request)
            llm_raw = response.text
        except (GatewayError, NoPathExists):
            events.append(Event.BACKEND_ERROR)
        else:
            parse = parse_command(llm_raw)
            if isinstance(parse, Valid):
                transition = apply_action(pre, parse.action, self.scenario,
                                          self.config.noise, self._rng)
                post = transition.new_state
                self.history.push(parse.canonical_text)
                if transition.collided:
                    events.append(Event.COLLISION)
                    self.outcome = Outcome.COLLISION
                elif transition.out_of_bounds:
                    events.append(Event.OUT_OF_BOUNDS)
                    self.outcome = Outcome.OUT_OF_BOUNDS
                elif goal_reached(post, self.scenario.target):
                    events.append(Event.GOAL_REACHED)
                    self.outcome = Outcome.SUCCESS

        record = StepRecord(
            k=self.k, pre_state=pre, vlm_raw=vlm_raw, detection=detection,
            llm_system=llm_system, llm_users=llm_users, llm_raw=llm_raw,
            parse=parse, post_state=post, events=tuple(events),
        )
        self.records.append(record)
        self.state = post
        return record

    def run(self) -> EpisodeTrace:
        while self.outcome is None and self.k < self.config.k_max:
            self.step()
        outcome = self.outcome if self.outcome is not None else Outcome.TIMEOUT
        return EpisodeTrace(
            scenario=self.scenario,
            config=self.config,
            prompt_version=PROMPT_VERSION,
            llm_backend_id=getattr(self.llm_backend, "backend_id", "unknown"),
            vlm_channel_id=getattr(self.vlm_channel, "channel_id", "unknown"),
            records=tuple(self.records),
            outcome=outcome,
            steps_used=len(self.records),
        )


def run_episode(scenario: Scenario, llm_backend, vlm_channel,
                config: EpisodeConfig = EpisodeConfig()) -> EpisodeTrace:
    """Run one full episode from takeoff to a terminal event or timeout."""
    return EpisodeRunner(scenario, llm_backend, vlm_channel, config).run()

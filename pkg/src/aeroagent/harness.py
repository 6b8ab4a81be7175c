"""Batch episode runner, pooled metrics computation, the shortest-path
optimality oracle, and report/trace persistence."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .agent import (
    EpisodeConfig,
    EpisodeTrace,
    Event,
    Outcome,
    PROMPT_VERSION,
    RemoteVlmChannel,
    SimulatedVlmChannel,
    run_episode,
)
from .dynamics import NoiseConfig
from .errors import EmptyRun, NotApplicable
from .gateway import (
    NoisyBackend,
    OraclePilotBackend,
    RemoteBackend,
    RemoteConfig,
    ScriptedBackend,
)
from .grammar import Valid
from .perception import DetectorNoise
from .planning import GridPath, astar_shortest_path, octile  # re-export
from .world import (
    DEFAULT_CELL_SIZE,
    OccupancyGrid,
    Scenario,
    ScenarioConfig,
    generate_scenario,
    rasterize,
)

__all__ = [
    "GridPath", "astar_shortest_path", "octile", "path_optimality",
    "compute_metrics", "MetricsReport", "RunConfig", "run_batch",
    "report_csv_text",
]

CSV_HEADER = ("llm_model,llm_params,llm_valid_pct,vlm_model,vlm_params,"
              "vlm_valid_pct,success_pct,episodes,mean_steps,mean_optimality")


def path_optimality(trace: EpisodeTrace, grid: OccupancyGrid) -> float:
    """Total Move distance actually flown divided by the A* shortest-path
    length from the start cell to the cell of the first goal-reaching
    position. Turns contribute zero length. Undefined for non-success
    traces."""
    if trace.outcome is not Outcome.SUCCESS:
        raise NotApplicable(f"trace outcome is {trace.outcome.value}")
    flown = 0.0
    goal_state = None
    for r in trace.records:
        flown += math.hypot(r.post_state.x - r.pre_state.x,
                            r.post_state.y - r.pre_state.y)
        if Event.GOAL_REACHED in r.events:
            goal_state = r.post_state
            break
    assert goal_state is not None
    start_cell = grid.cell_of(trace.scenario.start.x, trace.scenario.start.y)
    goal_cell = grid.cell_of(goal_state.x, goal_state.y)
    optimal = astar_shortest_path(grid, start_cell, goal_cell).length
    if optimal == 0.0:
        # Goal fell in the start cell; the discretized optimum is degenerate.
        return 1.0
    return flown / optimal


@dataclass(frozen=True)
class MetricsReport:
    llm_valid_pct: float
    vlm_valid_pct: float
    success_pct: float
    episodes: int
    mean_steps_on_success: float | None
    mean_path_optimality: float | None
    aborted: int = 0


def _zero_steps_completed(trace: EpisodeTrace) -> bool:
    return all(Event.BACKEND_ERROR in r.events for r in trace.records)


def compute_metrics(traces: list[EpisodeTrace],
                    cell_size: float = DEFAULT_CELL_SIZE) -> MetricsReport:
    """Pooled (micro-averaged) percentages over all inferences of all
    episodes. Aborted episodes leave the success denominator only when they
    completed zero steps."""
    if not traces:
        raise EmptyRun("no traces to compute metrics over")
    llm_total = llm_valid = vlm_total = vlm_valid = 0
    successes = 0
    success_steps: list[int] = []
    optimalities: list[float] = []
    aborted = 0
    denominator = 0
    for trace in traces:
        for r in trace.records:
            if r.parse is not None:
                llm_total += 1
                if isinstance(r.parse, Valid):
                    llm_valid += 1
            if r.detection is not None:
                vlm_total += 1
                if r.detection.is_valid:
                    vlm_valid += 1
        if trace.outcome is Outcome.ABORTED:
            aborted += 1
            if not _zero_steps_completed(trace):
                denominator += 1
            continue
        denominator += 1
        if trace.outcome is Outcome.SUCCESS:
            successes += 1
            success_steps.append(trace.steps_used)
            grid = rasterize(trace.scenario, cell_size)
            optimalities.append(path_optimality(trace, grid))
    return MetricsReport(
        llm_valid_pct=100.0 * llm_valid / llm_total if llm_total else 0.0,
        vlm_valid_pct=100.0 * vlm_valid / vlm_total if vlm_total else 0.0,
        success_pct=100.0 * successes / denominator if denominator else 0.0,
        episodes=len(traces),
        mean_steps_on_success=(sum(success_steps) / len(success_steps)
                               if success_steps else None),
        mean_path_optimality=(sum(optimalities) / len(optimalities)
                              if optimalities else None),
        aborted=aborted,
    )


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved batch configuration; episode i derives all of its
    seeds from base_seed + i."""

    episodes: int = 20
    base_seed: int = 0
    workers: int = 1
    obstacle_count: int = 5
    object_class: str = "drone"
    llm: str = "oracle"
    vlm: str = "noiseless"
    base_url: str = "http://127.0.0.1:11434"
    llm_model: str = ""
    vlm_model: str = ""
    timeout_ms: int = 60_000
    retries: int = 1
    k_max: int = 20
    history_n: int = 5
    temperature: float = 0.2
    dynamics_noise: bool = False
    yaw_sigma: float = 2.0
    dist_sigma: float = 0.05
    cell_size: float = DEFAULT_CELL_SIZE

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def config_hash(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def _episode_seeds(config: RunConfig, i: int) -> dict:
    s = config.base_seed + i
    return {
        "scenario": s,
        "dynamics": s * 1_000_003 + 1,
        "llm": s * 1_000_003 + 2,
        "vlm": s * 1_000_003 + 3,
    }


def make_llm_backend(config: RunConfig, seed: int, scenario: Scenario,
                     grid: OccupancyGrid):
    kind = config.llm
    if kind == "oracle":
        return OraclePilotBackend(scenario, grid)
    if kind.startswith("noisy:"):
        return NoisyBackend(valid_rate=float(kind.split(":", 1)[1]), seed=seed)
    if kind.startswith("scripted:"):
        path = kind.split(":", 1)[1]
        return ScriptedBackend(Path(path).read_text(encoding="utf-8").splitlines())
    if kind == "remote":
        return RemoteBackend(RemoteConfig(
            base_url=config.base_url, model_name=config.llm_model,
            timeout_ms=config.timeout_ms, retries=config.retries))
    raise ValueError(f"unknown llm backend kind: {kind!r}")


def make_vlm_channel(config: RunConfig, seed: int):
    kind = config.vlm
    if kind == "noiseless":
        return SimulatedVlmChannel(seed=seed)
    if kind.startswith("noisy:"):
        parts = kind.split(":", 1)[1].split(",")
        fp, fn, inv = (float(p) for p in parts)
        return SimulatedVlmChannel(
            noise=DetectorNoise(false_positive_rate=fp,
                                false_negative_rate=fn, invalid_rate=inv),
            seed=seed)
    if kind == "remote":
        return RemoteVlmChannel(RemoteBackend(RemoteConfig(
            base_url=config.base_url, model_name=config.vlm_model,
            timeout_ms=config.timeout_ms, retries=config.retries)))
    raise ValueError(f"unknown vlm channel kind: {kind!r}")


def run_single_episode(config: RunConfig, i: int) -> EpisodeTrace:
    seeds = _episode_seeds(config, i)
    scenario = generate_scenario(ScenarioConfig(
        obstacle_count=config.obstacle_count,
        object_class=config.object_class,
        seed=seeds["scenario"]))
    grid = rasterize(scenario, config.cell_size)
    llm = make_llm_backend(config, seeds["llm"], scenario, grid)
    vlm = make_vlm_channel(config, seeds["vlm"])
    episode_config = EpisodeConfig(
        k_max=config.k_max,
        history_n=config.history_n,
        temperature=config.temperature,
        model_name=config.llm_model,
        noise=NoiseConfig(enabled=config.dynamics_noise,
                          yaw_sigma=config.yaw_sigma,
                          dist_sigma=config.dist_sigma),
        dynamics_seed=seeds["dynamics"],
    )
    trace = run_episode(scenario, llm, vlm, episode_config)
    if trace.outcome is Outcome.TIMEOUT and trace.records and _zero_steps_completed(trace):
        # Pure connectivity failure, not model behavior.
        trace = dataclasses.replace(trace, outcome=Outcome.ABORTED)
    return trace


def _fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.4f}"


def report_csv_text(report: MetricsReport, config: RunConfig) -> str:
    llm_name = config.llm_model if config.llm == "remote" else config.llm
    vlm_name = config.vlm_model if config.vlm == "remote" else config.vlm
    row = ",".join([
        llm_name, "-",
        f"{report.llm_valid_pct:.4f}",
        vlm_name, "-",
        f"{report.vlm_valid_pct:.4f}",
        f"{report.success_pct:.4f}",
        str(report.episodes),
        _fmt(report.mean_steps_on_success),
        _fmt(report.mean_path_optimality),
    ])
    return CSV_HEADER + "\n" + row + "\n"


def run_batch(config: RunConfig, out_dir: str | Path) -> tuple[MetricsReport, list[Path]]:
    """Execute the configured batch into out_dir/run_<hash>/. Episodes whose
    trace file already exists are loaded instead of re-run, so interrupted
    runs resume."""
    from .trace_io import read_trace, write_trace

    run_dir = Path(out_dir) / f"run_{config.config_hash()}"
    run_dir.mkdir(parents=True, exist_ok=True)
    echo = dict(config.to_dict(), prompt_version=PROMPT_VERSION)
    (run_dir / "config.json").write_text(
        json.dumps(echo, sort_keys=True, indent=2) + "\n", encoding="utf-8")

    paths = [run_dir / f"episode_{i:03d}.jsonl" for i in range(config.episodes)]

    def produce(i: int) -> EpisodeTrace:
        if paths[i].exists():
            return read_trace(paths[i])
        trace = run_single_episode(config, i)
        write_trace(trace, paths[i])
        return trace

    if config.workers == 1:
        traces = [produce(i) for i in range(config.episodes)]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            traces = list(pool.map(produce, range(config.episodes)))

    report = compute_metrics(traces, cell_size=config.cell_size)
    (run_dir / "report.csv").write_text(report_csv_text(report, config),
                                        encoding="utf-8")
    return report, paths

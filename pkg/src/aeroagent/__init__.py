"""Renderer-free simulator and evaluation harness for natural-language
drone control."""

from .agent import EpisodeConfig, EpisodeTrace, Outcome, run_episode
from .grammar import Move, Turn, parse_command
from .harness import MetricsReport, RunConfig, compute_metrics, run_batch
from .world import Scenario, ScenarioConfig, generate_scenario

__version__ = "0.1.0"

__all__ = [
    "EpisodeConfig", "EpisodeTrace", "Outcome", "run_episode",
    "Move", "Turn", "parse_command",
    "MetricsReport", "RunConfig", "compute_metrics", "run_batch",
    "Scenario", "ScenarioConfig", "generate_scenario",
    "__version__",
]

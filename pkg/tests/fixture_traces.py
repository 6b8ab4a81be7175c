"""Engineered scripted episodes with exactly known pooled metrics:
20 episodes, 8 successes (40.0%), 100 LLM inferences with 38 valid
(38.0%), 100 VLM replies with 97 binary (97.0%)."""

from __future__ import annotations

from aeroagent.agent import EpisodeConfig, ScriptedVlmChannel, run_episode
from aeroagent.gateway import ScriptedBackend
from conftest import make_scenario

INVALID = "I cannot comply with this request."
VLM_INVALID = "I think there might be something there."

SUCCESS_SCRIPT = ["Move(1.0);", "Move(2.0);"]
# Ends out of bounds (x = 0.6 - 3.0 < 0): 7 steps, 2 valid commands.
FAILURE_TWO_VALID = ["Move(0.1);"] + [INVALID] * 5 + ["Move(-3.0);"]
# 7 steps, 1 valid command.
FAILURE_ONE_VALID = [INVALID] * 6 + ["Move(-3.0);"]


def build_fixture_traces():
    scenario = make_scenario(target=(3.5, 2.25))
    scripts = ([SUCCESS_SCRIPT] * 8 + [FAILURE_TWO_VALID] * 10
               + [FAILURE_ONE_VALID] * 2)
    traces = []
    vlm_budget = 0
    for i, script in enumerate(scripts):
        vlm_raws = []
        for k in range(len(script)):
            if i == 8 and k < 3:  # exactly 3 non-binary VLM replies overall
                vlm_raws.append(VLM_INVALID)
            else:
                vlm_raws.append("Yes" if (vlm_budget + k) % 2 else "No")
        vlm_budget += len(script)
        trace = run_episode(
            scenario,
            ScriptedBackend(script),
            ScriptedVlmChannel(vlm_raws),
            EpisodeConfig(),
        )
        traces.append(trace)
    return traces

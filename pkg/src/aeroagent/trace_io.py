"""Episode trace persistence: JSON Lines with a header record, one step
record per line, and a trailer carrying the outcome. Round-trips are
bit-exact (floats serialize via repr) so a persisted trace can be replayed
and must reproduce identical states.
"""

from __future__ import annotations

import json
from pathlib import Path

from .agent import (
    EpisodeConfig,
    EpisodeTrace,
    Event,
    Outcome,
    ScriptedVlmChannel,
    StepRecord,
    run_episode,
)
from .dynamics import NoiseConfig
from .errors import GatewayError
from .gateway import CompletionRequest, ModelResponse
from .grammar import Invalid, InvalidReason, Valid, parse_command
from .perception import parse_vlm_response
from .world import Scenario, VehicleState

TRACE_FORMAT = "aeroagent-trace-v1"


def _state_to_list(s: VehicleState) -> list[float]:
    return [s.x, s.y, s.z, s.yaw]


def _state_from_list(v: list[float]) -> VehicleState:
    return VehicleState(*v)


def _parse_to_dict(p) -> dict | None:
    if p is None:
        return None
    if isinstance(p, Valid):
        return {"valid": True, "canonical": p.canonical_text}
    return {"valid": False, "reason": p.reason.value, "detail": p.detail}


def _parse_from_dict(d: dict | None, llm_raw: str | None):
    if d is None:
        return None
    if d["valid"]:
        result = parse_command(d["canonical"])
        assert isinstance(result, Valid)
        return result
    return Invalid(InvalidReason(d["reason"]), d["detail"])


def trace_to_lines(trace: EpisodeTrace) -> list[str]:
    header = {
        "type": "header",
        "format": TRACE_FORMAT,
        "scenario": json.loads(trace.scenario.to_json()),
        "config": {
            "k_max": trace.config.k_max,
            "history_n": trace.config.history_n,
            "temperature": trace.config.temperature,
            "model_name": trace.config.model_name,
            "noise": {
                "enabled": trace.config.noise.enabled,
                "yaw_sigma": trace.config.noise.yaw_sigma,
                "dist_sigma": trace.config.noise.dist_sigma,
            },
            "dynamics_seed": trace.config.dynamics_seed,
        },
        "prompt_version": trace.prompt_version,
        "llm_backend_id": trace.llm_backend_id,
        "vlm_channel_id": trace.vlm_channel_id,
    }
    lines = [json.dumps(header, sort_keys=True)]
    for r in trace.records:
        lines.append(json.dumps({
            "type": "step",
            "k": r.k,
            "pre_state": _state_to_list(r.pre_state),
            "vlm_raw": r.vlm_raw,
            "detection": r.detection.kind.value if r.detection else None,
            "llm_system": r.llm_system,
            "llm_users": list(r.llm_users),
            "llm_raw": r.llm_raw,
            "parse": _parse_to_dict(r.parse),
            "post_state": _state_to_list(r.post_state),
            "events": [e.value for e in r.events],
        }, sort_keys=True))
    lines.append(json.dumps({
        "type": "end",
        "outcome": trace.outcome.value,
        "steps_used": trace.steps_used,
    }, sort_keys=True))
    return lines


def write_trace(trace: EpisodeTrace, path: str | Path) -> None:
    Path(path).write_text("\n".join(trace_to_lines(trace)) + "\n",
                          encoding="utf-8")


def read_trace(path: str | Path) -> EpisodeTrace:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValueError(f"trace file {path} is truncated")
    header = json.loads(lines[0])
    if header.get("type") != "header" or header.get("format") != TRACE_FORMAT:
        raise ValueError(f"trace file {path} has no valid header")
    trailer = json.loads(lines[-1])
    if trailer.get("type") != "end":
        raise ValueError(f"trace file {path} has no trailer (truncated?)")
    scenario = Scenario.from_json(json.dumps(header["scenario"]))
    cfg = header["config"]
    config = EpisodeConfig(
        k_max=cfg["k_max"],
        history_n=cfg["history_n"],
        temperature=cfg["temperature"],
        model_name=cfg["model_name"],
        noise=NoiseConfig(enabled=cfg["noise"]["enabled"],
                          yaw_sigma=cfg["noise"]["yaw_sigma"],
                          dist_sigma=cfg["noise"]["dist_sigma"]),
        dynamics_seed=cfg["dynamics_seed"],
    )
    records = []
    for ln in lines[1:-1]:
        d = json.loads(ln)
        if d.get("type") != "step":
            raise ValueError(f"unexpected record type {d.get('type')!r}")
        records.append(StepRecord(
            k=d["k"],
            pre_state=_state_from_list(d["pre_state"]),
            vlm_raw=d["vlm_raw"],
            detection=(parse_vlm_response(d["vlm_raw"])
                       if d["detection"] is not None else None),
            llm_system=d["llm_system"],
            llm_users=tuple(d["llm_users"]),
            llm_raw=d["llm_raw"],
            parse=_parse_from_dict(d["parse"], d["llm_raw"]),
            post_state=_state_from_list(d["post_state"]),
            events=tuple(Event(e) for e in d["events"]),
        ))
    return EpisodeTrace(
        scenario=scenario,
        config=config,
        prompt_version=header["prompt_version"],
        llm_backend_id=header["llm_backend_id"],
        vlm_channel_id=header["vlm_channel_id"],
        records=tuple(records),
        outcome=Outcome(trailer["outcome"]),
        steps_used=trailer["steps_used"],
    )


class _ReplayLlmBackend:
    """Feeds recorded raw completions back into the loop; None entries
    reproduce a recorded backend failure."""

    def __init__(self, raws: list[str | None], backend_id: str):
        self._raws = list(raws)
        self._index = 0
        self.backend_id = backend_id

    def complete(self, request: CompletionRequest) -> ModelResponse:
        if self._index >= len(self._raws):
            raise GatewayError("replay backend exhausted")
        raw = self._raws[self._index]
        self._index += 1
        if raw is None:
            raise GatewayError("recorded LLM backend failure")
        return ModelResponse(text=raw, latency_ms=0.0,
                             backend_id=self.backend_id)


def replay_trace(trace: EpisodeTrace) -> tuple[bool, int | None]:
    """Re-simulate from the recorded raw outputs and recorded seeds.

    Returns (True, None) when every recomputed post-state, event set, and
    the outcome match the recording; otherwise (False, first divergent
    step index), with -1 denoting an outcome/step-count mismatch.
    """
    llm = _ReplayLlmBackend([r.llm_raw for r in trace.records],
                            trace.llm_backend_id)
    vlm = ScriptedVlmChannel([r.vlm_raw for r in trace.records])
    redone = run_episode(trace.scenario, llm, vlm, trace.config)
    for k, (a, b) in enumerate(zip(redone.records, trace.records)):
        if (_state_to_list(a.post_state) != _state_to_list(b.post_state)
                or a.events != b.events):
            return (False, k)
    if (redone.outcome != trace.outcome
            or redone.steps_used != trace.steps_used):
        return (False, -1)
    return (True, None)

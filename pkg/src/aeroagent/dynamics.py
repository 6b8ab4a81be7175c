"""Discrete-time stand-in for the flight-stack state transition: one action
in, one new state out, with optional additive actuation noise.

Actions are instantaneous kinematic jumps; mid-step safety is covered by the
swept-segment collision test, not by intra-step dynamics.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .grammar import Action, Move, Turn
from .world import (
    FLIGHT_ALTITUDE,
    Scenario,
    VehicleState,
    VEHICLE_RADIUS,
    check_bounds,
    normalize_yaw,
    segment_collides,
)


@dataclass(frozen=True)
class NoiseConfig:
    """Additive Gaussian noise on the commanded magnitudes. Disabled means
    the transition is exactly deterministic."""

    enabled: bool = False
    yaw_sigma: float = 2.0
    dist_sigma: float = 0.05

    def __post_init__(self):
        if self.yaw_sigma < 0 or self.dist_sigma < 0:
            raise ValueError("noise sigmas must be >= 0")


@dataclass(frozen=True)
class TransitionResult:
    new_state: VehicleState
    collided: bool
    out_of_bounds: bool
    path_segment: tuple[tuple[float, float], tuple[float, float]]


def takeoff(scenario: Scenario) -> VehicleState:
    """Instantaneous takeoff to the fixed flight altitude; the climb phase
    precedes agent control and is not simulated."""
    s = scenario.start
    return VehicleState(x=s.x, y=s.y, z=FLIGHT_ALTITUDE, yaw=s.yaw)


def apply_action(state: VehicleState, action: Action, scenario: Scenario,
                 noise: NoiseConfig = NoiseConfig(),
                 rng: random.Random | None = None) -> TransitionResult:
    """Apply one motion primitive.

    Turn's angle argument is CW-positive (the command convention), so it is
    subtracted from the CCW-positive ENU yaw. Move displaces along the
    body-forward axis. Collision and bounds violations are reported in the
    result; the episode layer decides what they mean.
    """
    if isinstance(action, Turn):
        eps = rng.gauss(0.0, noise.yaw_sigma) if (noise.enabled and rng) else 0.0
        new_state = VehicleState(
            x=state.x, y=state.y, z=state.z,
            yaw=normalize_yaw(state.yaw - action.theta + eps),
        )
        seg = ((state.x, state.y), (state.x, state.y))
        return TransitionResult(new_state=new_state, collided=False,
                                out_of_bounds=False, path_segment=seg)
    if isinstance(action, Move):
        eps = rng.gauss(0.0, noise.dist_sigma) if (noise.enabled and rng) else 0.0
        d = action.distance + eps
        yaw_rad = math.radians(state.yaw)
        nx = state.x + d * math.cos(yaw_rad)
        ny = state.y + d * math.sin(yaw_rad)
        new_state = VehicleState(x=nx, y=ny, z=state.z, yaw=state.yaw)
        seg = ((state.x, state.y), (nx, ny))
        collided = segment_collides(seg[0], seg[1], VEHICLE_RADIUS,
                                    scenario.obstacles)
        return TransitionResult(
            new_state=new_state,
            collided=collided,
            out_of_bounds=not check_bounds(new_state, scenario.boundary),
            path_segment=seg,
        )
    raise TypeError(f"unknown action type: {action!r}")

"""Stand-in for the vision channel: ground-truth visibility from camera
geometry and line of sight, optional detector noise, and classification of
raw text replies into binary detections.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum

from shapely.geometry import LineString

from .world import Obstacle, Target, VehicleState, normalize_yaw


@dataclass(frozen=True)
class CameraModel:
    """Forward-mounted camera; defaults are config stand-ins (the range
    exceeds the arena diagonal, so it never limits the stock arena)."""

    horizontal_fov: float = 90.0
    max_range: float = 8.0

    def __post_init__(self):
        if not (0.0 < self.horizontal_fov <= 180.0):
            raise ValueError("horizontal_fov must be in (0, 180]")
        if self.max_range <= 0.0:
            raise ValueError("max_range must be > 0")


class Detection(Enum):
    YES = "Yes"
    NO = "No"
    INVALID = "Invalid"


@dataclass(frozen=True)
class DetectionResult:
    kind: Detection
    raw: str = ""

    @property
    def is_valid(self) -> bool:
        return self.kind is not Detection.INVALID

    @property
    def as_bool(self) -> bool:
        """Binary signal for control; Invalid degrades to False."""
        return self.kind is Detection.YES


@dataclass(frozen=True)
class DetectorNoise:
    false_positive_rate: float = 0.0
    false_negative_rate: float = 0.0
    invalid_rate: float = 0.0

    def __post_init__(self):
        for r in (self.false_positive_rate, self.false_negative_rate,
                  self.invalid_rate):
            if not (0.0 <= r <= 1.0):
                raise ValueError("rates must be probabilities")
        if self.invalid_rate + max(self.false_positive_rate,
                                   self.false_negative_rate) > 1.0:
            raise ValueError("applicable corruption rates must sum to <= 1")


def visible(state: VehicleState, target: Target,
            obstacles: tuple[Obstacle, ...] | list[Obstacle],
            camera: CameraModel = CameraModel()) -> bool:
    """True iff the target is in range, within the horizontal FOV of the
    body-forward axis, and the sight line clears every obstacle footprint.
    The occlusion ray has zero width: a visible sliver counts."""
    dx = target.x - state.x
    dy = target.y - state.y
    dist = math.hypot(dx, dy)
    if dist > camera.max_range:
        return False
    if dist > 0.0:
        bearing = math.degrees(math.atan2(dy, dx))
        if abs(normalize_yaw(bearing - state.yaw)) > camera.horizontal_fov / 2.0:
            return False
        ray = LineString([(state.x, state.y), (target.x, target.y)])
        if any(ray.intersects(o.footprint()) for o in obstacles):
            return False
    return True


def simulate_detection(ground_truth_visible: bool, noise: DetectorNoise,
                       rng: random.Random) -> DetectionResult:
    """Corrupt the ground truth per the configured rates: first an invalid
    (non-binary) reply, then a false positive/negative flip."""
    u = rng.random()
    if u < noise.invalid_rate:
        return DetectionResult(Detection.INVALID,
                               raw="There appears to be an object in view.")
    if ground_truth_visible:
        if u < noise.invalid_rate + noise.false_negative_rate:
            return DetectionResult(Detection.NO, raw="No")
        return DetectionResult(Detection.YES, raw="Yes")
    if u < noise.invalid_rate + noise.false_positive_rate:
        return DetectionResult(Detection.YES, raw="Yes")
    return DetectionResult(Detection.NO, raw="No")


def parse_vlm_response(raw: str) -> DetectionResult:
    """Classify a raw reply: outer whitespace and at most one trailing
    period are tolerated; the match is case-insensitive and exact."""
    text = raw.strip(" \t\r\n\x0b\x0c")
    if text.endswith("."):
        text = text[:-1]
    lowered = text.lower()
    if lowered == "yes":
        return DetectionResult(Detection.YES, raw=raw)
    if lowered == "no":
        return DetectionResult(Detection.NO, raw=raw)
    return DetectionResult(Detection.INVALID, raw=raw)

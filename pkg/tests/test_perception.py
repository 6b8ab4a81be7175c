from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aeroagent.perception import (
    CameraModel,
    Detection,
    DetectorNoise,
    parse_vlm_response,
    simulate_detection,
    visible,
)
from aeroagent.world import Obstacle, Target, VehicleState


def state(x=0.0, y=0.0, yaw=0.0):
    return VehicleState(x, y, 1.0, yaw)


class TestVisible:
    def test_dead_ahead(self):
        assert visible(state(), Target(2, 0), ())

    def test_behind_outside_fov(self):
        assert not visible(state(), Target(-2, 0), ())

    def test_occluded(self):
        assert not visible(state(), Target(2, 0), (Obstacle(1, 0),))

    def test_beyond_range(self):
        assert not visible(state(), Target(2, 0), (),
                           CameraModel(max_range=1.5))

    def test_edge_of_fov(self):
        # Bearing exactly 45 deg with a 90 deg FOV: inclusive.
        assert visible(state(), Target(1, 1), ())
        assert not visible(state(), Target(1, 1), (),
                           CameraModel(horizontal_fov=89.0))

    @given(st.floats(min_value=1.0, max_value=179.0),
           st.floats(min_value=1.0, max_value=179.0),
           st.floats(min_value=-180.0, max_value=180.0),
           st.floats(min_value=0.5, max_value=6.0),
           st.floats(min_value=0.5, max_value=4.0))
    @settings(max_examples=300, deadline=None)
    def test_monotone_in_fov(self, fov, extra, yaw, tx, ty):
        wider = min(fov + extra, 180.0)
        s = state(3.5, 2.25, yaw)
        target = Target(tx, ty)
        if visible(s, target, (), CameraModel(horizontal_fov=fov)):
            assert visible(s, target, (), CameraModel(horizontal_fov=wider))

    def test_removing_obstacle_never_hides(self):
        rng = random.Random(2)
        for _ in range(300):
            s = state(rng.uniform(0, 7), rng.uniform(0, 4.5),
                      rng.uniform(-180, 180))
            target = Target(rng.uniform(0, 7), rng.uniform(0, 4.5))
            obstacles = [Obstacle(rng.uniform(0.5, 6.5), rng.uniform(0.5, 4.0))
                         for _ in range(3)]
            if visible(s, target, obstacles):
                assert visible(s, target, obstacles[:2])
                assert visible(s, target, ())


class TestSimulateDetection:
    def test_zero_noise_identity(self):
        rng = random.Random(0)
        zero = DetectorNoise()
        assert simulate_detection(True, zero, rng).kind is Detection.YES
        assert simulate_detection(False, zero, rng).kind is Detection.NO

    def test_false_positive_rate_binomial(self):
        rng = random.Random(123)
        noise = DetectorNoise(false_positive_rate=0.02)
        n = 10_000
        yes = sum(simulate_detection(False, noise, rng).kind is Detection.YES
                  for _ in range(n))
        p = 0.02
        sigma = (n * p * (1 - p)) ** 0.5
        assert abs(yes - n * p) <= 3 * sigma

    def test_invalid_rate(self):
        rng = random.Random(5)
        noise = DetectorNoise(invalid_rate=0.1)
        n = 5000
        invalid = sum(
            simulate_detection(True, noise, rng).kind is Detection.INVALID
            for _ in range(n))
        sigma = (n * 0.1 * 0.9) ** 0.5
        assert abs(invalid - n * 0.1) <= 3 * sigma

    def test_rate_validation(self):
        with pytest.raises(ValueError):
            DetectorNoise(false_positive_rate=1.5)
        with pytest.raises(ValueError):
            DetectorNoise(invalid_rate=0.6, false_negative_rate=0.6)


class TestParseVlmResponse:
    @pytest.mark.parametrize("raw,kind", [
        ("Yes", Detection.YES),
        ("  no.\n", Detection.NO),
        ("YES", Detection.YES),
        ("No.", Detection.NO),
        ("There appears to be a drone.", Detection.INVALID),
        ("Yes, I can see it.", Detection.INVALID),
        ("", Detection.INVALID),
    ])
    def test_classification(self, raw, kind):
        assert parse_vlm_response(raw).kind is kind

    @given(st.sampled_from(["yes", "no"]),
           st.sampled_from(["", " ", "\n", "\t  "]),
           st.sampled_from(["", " ", "\n"]),
           st.booleans(), st.booleans())
    @settings(deadline=None)
    def test_case_and_whitespace_invariance(self, word, pre, post, upper, dot):
        text = word.upper() if upper else word.capitalize()
        raw = pre + text + ("." if dot else "") + post
        expected = Detection.YES if word == "yes" else Detection.NO
        assert parse_vlm_response(raw).kind is expected

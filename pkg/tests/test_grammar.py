from __future__ import annotations

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aeroagent.cli import default_corpus_path
from aeroagent.grammar import (
    Invalid,
    InvalidReason,
    Move,
    Turn,
    Valid,
    canonicalize,
    parse_command,
)


def reason_of(result):
    return result.reason if isinstance(result, Invalid) else None


class TestValid:
    @pytest.mark.parametrize("raw,expected", [
        ("Move(2.5);", Move(2.5)),
        ("Turn(-90);", Turn(-90.0)),
        ("Turn(90);", Turn(90.0)),
        ("Move(3.0);", Move(3.0)),
        ("Move(-3.0);", Move(-3.0)),
        ("  Move(1.0);  ", Move(1.0)),
        ("Move(1.0);\n", Move(1.0)),
        ("Move(.5);", Move(0.5)),
        ("Turn(+45);", Turn(45.0)),
    ])
    def test_accepts(self, raw, expected):
        result = parse_command(raw)
        assert isinstance(result, Valid)
        assert result.action == expected

    def test_canonical_round_trips(self):
        result = parse_command("Move(2.5);")
        assert isinstance(result, Valid)
        reparsed = parse_command(result.canonical_text)
        assert isinstance(reparsed, Valid)
        assert reparsed.action == result.action


class TestInvalid:
    @pytest.mark.parametrize("raw,reason", [
        ("Turn(120);", InvalidReason.OUT_OF_RANGE),
        ("Turn(90.0001);", InvalidReason.OUT_OF_RANGE),
        ("Move(3.0001);", InvalidReason.OUT_OF_RANGE),
        ("Sure! Move(1.0);", InvalidReason.EXTRANEOUS_TEXT),
        ("```Move(1.0);```", InvalidReason.EXTRANEOUS_TEXT),
        ("Move(1.0); Turn(10);", InvalidReason.EXTRANEOUS_TEXT),
        ("move(1.0);", InvalidReason.MALFORMED),
        ("Move (1.0);", InvalidReason.MALFORMED),
        ("Move(1.0)", InvalidReason.MALFORMED),
        ("I cannot comply with this request.", InvalidReason.MALFORMED),
        ("Move(abc);", InvalidReason.NOT_A_NUMBER),
        ("Turn(1e2);", InvalidReason.NOT_A_NUMBER),
        ("", InvalidReason.EMPTY),
        ("   \n", InvalidReason.EMPTY),
    ])
    def test_rejects(self, raw, reason):
        result = parse_command(raw)
        assert isinstance(result, Invalid)
        assert result.reason is reason

    def test_range_exactness(self):
        assert isinstance(parse_command("Turn(90);"), Valid)
        assert isinstance(parse_command("Turn(-90);"), Valid)
        assert isinstance(parse_command("Move(3.0);"), Valid)
        assert isinstance(parse_command("Move(-3.0);"), Valid)
        assert reason_of(parse_command("Turn(90.0001);")) is InvalidReason.OUT_OF_RANGE
        assert reason_of(parse_command("Turn(-90.0001);")) is InvalidReason.OUT_OF_RANGE
        assert reason_of(parse_command("Move(3.0001);")) is InvalidReason.OUT_OF_RANGE
        assert reason_of(parse_command("Move(-3.0001);")) is InvalidReason.OUT_OF_RANGE

    def test_interior_space_invalid_outer_ok(self):
        assert isinstance(parse_command("  Move(1.0);  "), Valid)
        assert isinstance(parse_command("Move (1.0);"), Invalid)


class TestCorpus:
    def test_shipped_corpus_matches(self):
        lines = default_corpus_path().read_text().splitlines()
        records = [json.loads(ln) for ln in lines if ln.strip()]
        assert len(records) == 50
        reasons_seen = set()
        for record in records:
            result = parse_command(record["raw"])
            got = "Valid" if isinstance(result, Valid) else result.reason.value
            assert got == record["expect"], record
            reasons_seen.add(got)
        assert reasons_seen == {"Valid", "ExtraneousText", "Malformed",
                                "OutOfRange", "NotANumber", "Empty"}


def in_range_actions():
    return st.one_of(
        st.builds(Turn, st.floats(min_value=-90.0, max_value=90.0,
                                  allow_nan=False)),
        st.builds(Move, st.floats(min_value=-3.0, max_value=3.0,
                                  allow_nan=False)),
    )


class TestProperties:
    @given(in_range_actions())
    @settings(max_examples=2000, deadline=None)
    def test_parse_canonicalize_identity(self, action):
        result = parse_command(canonicalize(action))
        assert isinstance(result, Valid)
        value = (result.action.theta if isinstance(result.action, Turn)
                 else result.action.distance)
        original = (action.theta if isinstance(action, Turn)
                    else action.distance)
        assert type(result.action) is type(action)
        assert value == original or (math.isnan(value) and math.isnan(original))

    @given(st.text(max_size=200))
    @settings(max_examples=2000, deadline=None)
    def test_total_on_arbitrary_text(self, raw):
        result = parse_command(raw)
        assert isinstance(result, (Valid, Invalid))

    @given(st.binary(max_size=200))
    @settings(max_examples=1000, deadline=None)
    def test_total_on_arbitrary_bytes(self, blob):
        result = parse_command(blob.decode("utf-8", errors="replace"))
        assert isinstance(result, (Valid, Invalid))

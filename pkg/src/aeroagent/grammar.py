"""Strict parser for raw model output: exactly `Turn(<num>);` or
`Move(<num>);`, in range, nothing else. This is the valid-command metric
made executable, so there is deliberately no fuzzy repair.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum

TURN_RANGE = (-90.0, 90.0)
MOVE_RANGE = (-3.0, 3.0)

# Plain decimal: optional sign, optional fraction, no exponent.
_NUM = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)"
_COMMAND_RE = re.compile(rf"(Turn|Move)\(({_NUM})\);")
_EXACT_RE = re.compile(rf"(Turn|Move)\(({_NUM})\);\Z")
# Command-shaped but the argument is not a plain decimal.
_SHAPE_RE = re.compile(r"(Turn|Move)\((.*)\);\Z", re.DOTALL)


@dataclass(frozen=True)
class Turn:
    theta: float


@dataclass(frozen=True)
class Move:
    distance: float


Action = Turn | Move


class InvalidReason(str, Enum):
    EXTRANEOUS_TEXT = "ExtraneousText"
    MALFORMED = "Malformed"
    OUT_OF_RANGE = "OutOfRange"
    NOT_A_NUMBER = "NotANumber"
    EMPTY = "Empty"


@dataclass(frozen=True)
class Valid:
    action: Action
    canonical_text: str


@dataclass(frozen=True)
class Invalid:
    reason: InvalidReason
    detail: str


ParseResult = Valid | Invalid


def _format_value(v: float) -> str:
    s = repr(float(v))
    if "e" in s or "E" in s:
        # The grammar forbids exponents; re-render the shortest repr
        # positionally (exact, since Decimal parses the decimal string).
        s = format(Decimal(s), "f")
    if s.endswith(".0"):
        s = s[:-2]
    return s


def canonicalize(action: Action) -> str:
    """Shortest decimal text that re-parses to an equivalent action."""
    if isinstance(action, Turn):
        return f"Turn({_format_value(action.theta)});"
    if isinstance(action, Move):
        return f"Move({_format_value(action.distance)});"
    raise TypeError(f"unknown action type: {action!r}")


def in_range(action: Action) -> bool:
    if isinstance(action, Turn):
        return TURN_RANGE[0] <= action.theta <= TURN_RANGE[1]
    return MOVE_RANGE[0] <= action.distance <= MOVE_RANGE[1]


def parse_command(raw: str) -> ParseResult:
    """Classify a raw model output. Never raises.

    Valid requires the whole string, after trimming outer whitespace, to be
    a single in-range command. Anything containing a well-formed command
    plus extra text (disclaimers, markdown, a second statement) is
    ExtraneousText; a command-shaped string with a bad argument is
    NotANumber; out-of-range values are OutOfRange; other non-empty input
    is Malformed.
    """
    if not isinstance(raw, str):
        return Invalid(InvalidReason.MALFORMED, f"non-string input: {type(raw).__name__}")
    text = raw.strip(" \t\r\n\x0b\x0c")  # ASCII whitespace only
    if not text:
        return Invalid(InvalidReason.EMPTY, "no content after trimming whitespace")

    m = _EXACT_RE.match(text)
    if m:
        keyword, num_text = m.group(1), m.group(2)
        value = float(num_text)
        action: Action = Turn(value) if keyword == "Turn" else Move(value)
        if not in_range(action):
            lo, hi = TURN_RANGE if keyword == "Turn" else MOVE_RANGE
            return Invalid(InvalidReason.OUT_OF_RANGE,
                           f"{keyword} argument {num_text} outside [{lo}, {hi}]")
        return Valid(action=action, canonical_text=canonicalize(action))

    if _COMMAND_RE.search(text):
        return Invalid(InvalidReason.EXTRANEOUS_TEXT,
                       "contains a command plus extra text")
    shape = _SHAPE_RE.match(text)
    if shape:
        return Invalid(InvalidReason.NOT_A_NUMBER,
                       f"argument {shape.group(2)!r} is not a plain decimal")
    return Invalid(InvalidReason.MALFORMED, f"unrecognized input: {text[:80]!r}")

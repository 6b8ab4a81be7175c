#!/usr/bin/env python3
"""Time-bounded fuzz of the command parser.

Feeds random unicode soup and mutated command fragments into
parse_command and checks that it always returns a classification,
never raises, and that canonical text of every Valid result re-parses
to the same action.
"""

from __future__ import annotations

import argparse
import random
import string
import sys
import time

from aeroagent.grammar import Invalid, Valid, parse_command

FRAGMENTS = ["Turn", "Move", "(", ")", ";", ".", "-", "+", "0", "1", "9",
             "e", "E", " ", "\t", "\n", "Turn(45);", "Move(1.5);",
             "inf", "nan", "1e3", "_", "\x00", " "]
ALPHABET = string.printable + "Ππ∆°±  \U0001f600"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seconds", type=float, default=60.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    deadline = time.perf_counter() + args.seconds
    attempts = 0
    valid = 0
    while time.perf_counter() < deadline:
        for _ in range(5000):
            attempts += 1
            if rng.random() < 0.5:
                raw = "".join(rng.choice(ALPHABET)
                              for _ in range(rng.randrange(0, 40)))
            else:
                raw = "".join(rng.choice(FRAGMENTS)
                              for _ in range(rng.randrange(1, 8)))
            result = parse_command(raw)
            assert isinstance(result, (Valid, Invalid)), raw
            if isinstance(result, Valid):
                valid += 1
                again = parse_command(result.canonical_text)
                assert isinstance(again, Valid) and again.action == result.action
    print(f"{attempts} inputs fuzzed, {valid} parsed Valid, no crashes")
    return 0


if __name__ == "__main__":
    sys.exit(main())

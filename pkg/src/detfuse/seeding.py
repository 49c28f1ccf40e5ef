"""Deterministic seed derivation for Monte Carlo experiments.

Every random draw in an experiment descends from one root seed through
``derive_seed(root, *tags)``.  Tags name the purpose of the stream
("eval", "train", "proj", ...), the hypothesis, and the trial index, so
any single trial can be regenerated in isolation and streams for
different purposes are disjoint by construction.

The mixer is splitmix64: each tag is folded into the running 64-bit
state one 8-byte chunk at a time, and every fold passes through the
full avalanche function.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _fold(state: int, chunk: int) -> int:
    return _splitmix64(state ^ (chunk & _MASK64))


def derive_seed(root: int, *tags: int | str) -> int:
    """Mix ``root`` with an ordered sequence of tags into a new 64-bit seed.

    Tags may be integers (trial indices) or short strings (purpose and
    hypothesis labels).  The same (root, tags) always yields the same
    seed; differing in any tag or in tag order yields an unrelated one.
    """
    state = _splitmix64(root & _MASK64)
    for tag in tags:
        if isinstance(tag, str):
            data = tag.encode("utf-8")
            # length fold keeps "ab","c" distinct from "a","bc"
            state = _fold(state, len(data))
            for i in range(0, len(data), 8):
                state = _fold(state, int.from_bytes(data[i : i + 8], "little"))
        elif isinstance(tag, (int,)):
            state = _fold(state, 1)
            state = _fold(state, tag)
        else:
            raise TypeError(f"seed tags must be int or str, got {type(tag).__name__}")
    return state

"""Deterministic 64-bit seed derivation.

All randomness in the package funnels through a single base seed per
invocation.  Sub-streams (episodes, planner calls, network regeneration
attempts) get their own seeds via a splitmix64-style mix of the parent
seed and one or more integer labels, so results are reproducible across
runs and across worker counts.
"""

from __future__ import annotations

_MASK = 0xFFFFFFFFFFFFFFFF


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def mix64(*parts: int) -> int:
    """Fold integer labels into one 64-bit seed.

    Order-sensitive: mix64(a, b) != mix64(b, a) in general.  Negative
    labels are folded through two's complement.
    """
    state = 0x243F6A8885A308D3  # arbitrary non-zero start
    for part in parts:
        state = _splitmix64(state ^ (int(part) & _MASK))
    return state


def episode_seed(base_seed: int, index: int) -> int:
    """Seed for the index-th Monte-Carlo episode of a batch."""
    return mix64(base_seed, 0xE7150DE, index)

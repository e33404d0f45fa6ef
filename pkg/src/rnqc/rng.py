"""Deterministic, splittable random streams.

All sampling flows through counter-based Philox 4x64 generators keyed by
a (seed, stream_id) pair. The keyed construction gives independent
streams without any shared mutable state, so results cannot depend on
worker scheduling: a job that knows its stream id always draws the same
numbers, on any platform and at any parallelism level. The algorithm is
fixed here on purpose; swapping it would silently invalidate every
recorded report.

Stream ids are assigned by callers. The majsat sampler uses one stream
per (i, set, run) job and records the base id for each set in its
report.
"""

from __future__ import annotations

import secrets

import numpy as np

from .errors import InputError

_U64 = 2**64


def make_stream(seed: int, stream_id: int) -> np.random.Generator:
    """Generator for one job stream, fully determined by (seed, stream_id)."""
    if not 0 <= int(seed) < _U64:
        raise InputError(f"seed must fit in 64 bits, got {seed}")
    if not 0 <= int(stream_id) < _U64:
        raise InputError(f"stream id must fit in 64 bits, got {stream_id}")
    key = np.array([seed, stream_id], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def draw_seed() -> int:
    """Entropy-sourced seed, used when the caller does not supply one."""
    return secrets.randbits(63)

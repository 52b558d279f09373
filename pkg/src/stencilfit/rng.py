"""Deterministic random streams.

Everything random in an experiment flows from one seed through named
sub-streams, so partial re-runs reproduce bit-identically. Streams are
PCG64 generators keyed by (seed, stream id); the stream ids are fixed
constants rather than hashes so the mapping is stable across platforms.
"""

from __future__ import annotations

import numpy as np

_STREAM_IDS = {
    "data": 0,
    "warmstart": 1,
    "test": 2,
}


def stream(seed: int, name: str) -> np.random.Generator:
    """PCG64 generator for a named sub-stream of the experiment seed."""
    if name not in _STREAM_IDS:
        raise KeyError(f"unknown random stream {name!r}; known: {sorted(_STREAM_IDS)}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(_STREAM_IDS[name],))
    return np.random.Generator(np.random.PCG64(ss))

"""Counter-based random streams.

Each stream is a Philox generator keyed by (seed, stream id). Sample i of a
stream is drawn from the Philox block at counter i // 4, so any partition of
the sample range into chunks starting at multiples of 4 reproduces the same
values regardless of chunk size or worker count.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np
from numpy.typing import NDArray
from scipy.stats import norm

from zchannel_regions.errors import LatticeConfigError

# Offset keeping inverse-CDF normals finite when a uniform draw is exactly 0
_NORMAL_OFFSET = 2.0**-54


class Stream(IntEnum):
    """Stream ids; one independent substream per random quantity."""

    S = 0
    Z1 = 1
    Z2 = 2
    V0 = 3
    V1 = 4
    V2 = 5
    D0 = 6
    D1 = 7
    D2 = 8


def _generator(seed: int, stream: int, start: int) -> np.random.Generator:
    if start % 4:
        raise LatticeConfigError(f"chunk start {start} is not a multiple of 4")
    key = np.random.SeedSequence([seed, int(stream)]).generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=start // 4))


def uniforms(seed: int, stream: int, start: int, count: int) -> NDArray[np.float64]:
    """Uniforms on [0, 1) for samples start .. start + count - 1 of one stream."""
    return _generator(seed, stream, start).random(count)


def normals(seed: int, stream: int, start: int, count: int) -> NDArray[np.float64]:
    """Standard normals by inverse CDF of the same uniforms (one uniform per sample)."""
    return np.asarray(norm.ppf(uniforms(seed, stream, start, count) + _NORMAL_OFFSET))


def cell_uniforms(
    seed: int, stream: int, start: int, count: int, step: float
) -> NDArray[np.float64]:
    """Uniform on the scalar Voronoi cell [-step/2, step/2)."""
    return step * (uniforms(seed, stream, start, count) - 0.5)

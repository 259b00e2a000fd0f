"""Deterministic random streams for analyses.

Two generator families are used, kept in separate namespaces so they never
collide:

* numpy ``Philox`` keyed by ``[seed, (domain << 32) | index]`` for vectorized
  jitter and synthetic-data draws;
* the splitmix64 substreams of :mod:`votepeaks._kernels` for the Monte Carlo
  simulation loop.

Both are counter-based: a stream is fully determined by its key, so work can
be partitioned across workers in any order without changing results.
"""

import numpy as np

from . import _kernels

# Philox key domains.
DOMAIN_OBSERVED_JITTER = 1
DOMAIN_HISTOGRAM_JITTER = 2
DOMAIN_SYNTH = 3
DOMAIN_FRAUD = 4

_MASK64 = (1 << 64) - 1


def philox(seed: int, domain: int, index: int = 0) -> np.random.Generator:
    """Generator for the (seed, domain, index) substream."""
    key = ((domain << 32) | index) & _MASK64
    return np.random.Generator(np.random.Philox(key=[seed & _MASK64, key]))


class Substream:
    """Scalar draw interface over one splitmix64 substream.

    Thin Python wrapper around the compiled sampler used by the Monte Carlo
    kernel, so single-station simulation goes through the exact same
    algorithm as the bulk run.
    """

    def __init__(self, seed: int, a: int = 0, b: int = 0):
        # numba hands uint64 results back as Python ints; re-wrap so the
        # next call does not overflow the default int64 conversion
        self._state = np.uint64(_kernels.stream_state(
            np.uint64(seed & _MASK64), np.uint64(a & _MASK64),
            np.uint64(b & _MASK64)))

    def uniform(self) -> float:
        """Uniform draw in [0, 1)."""
        state, u = _kernels.uniform_draw(self._state)
        self._state = np.uint64(state)
        return float(u)

    def jitter(self) -> float:
        """Uniform draw in [-0.5, 0.5)."""
        return self.uniform() - 0.5

    def binomial(self, n: int, p: float) -> int:
        """Binomial(n, p) draw."""
        if n < 0:
            raise ValueError(f"binomial needs n >= 0, got {n}")
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"binomial needs p in [0, 1], got {p}")
        state, k = _kernels.binom_draw(self._state, n, p)
        self._state = np.uint64(state)
        return int(k)

"""Population initialization schemes: random, LHS, DLU, and chaotic DLU.

DLU places the population on the diagonal of the search space (individual 0
at all minima, individual N-1 at all maxima).  The chaotic variant keeps the
per-dimension value multisets but reorders each dimension with a
deterministic sine-map shuffle, so individuals mix low and high coordinates
without introducing run-to-run randomness.
"""

from __future__ import annotations

import math

import numpy as np

from .space import ParameterSpace, Position, snap_index

CHAOS_SEED = 0.7


class ChaosStream:
    """Deterministic sine-map sequence c <- sin(pi * c), seeded at 0.7.

    Every emitted value lies in (0, 1].
    """

    def __init__(self, seed: float = CHAOS_SEED):
        if not 0.0 < seed < 1.0:
            raise ValueError(f"chaos seed must lie in (0, 1), got {seed}")
        self.current = seed

    def next(self) -> float:
        self.current = math.sin(math.pi * self.current)
        return self.current

    def take(self, n: int) -> np.ndarray:
        return np.array([self.next() for _ in range(n)])


def chaos_next(stream: ChaosStream) -> float:
    """Emit the next sine-map value and advance the stream."""
    return stream.next()


def init_random(space: ParameterSpace, n: int, rng_seed: int) -> list[Position]:
    """Each coordinate drawn uniformly over its grid, independently."""
    _check_n(n)
    rng = np.random.default_rng(rng_seed)
    cols = [rng.integers(0, spec.count, size=n) for spec in space.specs]
    return [space.position(row) for row in np.stack(cols, axis=1)]


def init_lhs(space: ParameterSpace, n: int, rng_seed: int) -> list[Position]:
    """Latin hypercube sampling over grid indices.

    Each dimension's index range [0, count) is split into n equal strata and
    each stratum is sampled exactly once, in a randomly permuted order.  On
    grids with fewer than n points some strata contain no grid point; those
    samples fall back to the stratum's leading index.
    """
    _check_n(n)
    rng = np.random.default_rng(rng_seed)
    cols = []
    for spec in space.specs:
        count = spec.count
        perm = rng.permutation(n)
        col = np.empty(n, dtype=int)
        for i in range(n):
            s = perm[i]
            start = math.ceil(s * count / n)
            stop = math.ceil((s + 1) * count / n)
            candidates = np.arange(start, stop)
            if candidates.size == 0:
                candidates = np.array([min(count - 1, int(s * count // n))])
            col[i] = rng.choice(candidates)
        cols.append(col)
    return [space.position(row) for row in np.stack(cols, axis=1)]


def _dlu_index_columns(space: ParameterSpace, n: int) -> list[np.ndarray]:
    cols = []
    for spec in space.specs:
        raw = spec.lo + np.arange(n) * (spec.hi - spec.lo) / (n - 1)
        cols.append(np.array([snap_index(spec, v) for v in raw]))
    return cols


def init_dlu(space: ParameterSpace, n: int) -> list[Position]:
    """Diagonal arithmetic progression per dimension, snapped to the grid."""
    _check_n(n)
    cols = _dlu_index_columns(space, n)
    return [space.position(row) for row in np.stack(cols, axis=1)]


def init_cdlu(space: ParameterSpace, n: int) -> list[Position]:
    """Chaotic DLU: the DLU progression reordered per dimension by sine-map ranks.

    A single chaos stream supplies n values per dimension, consumed in
    dimension order; individual i receives the progression element whose rank
    equals the rank of the i-th chaos value (ties broken by draw order).
    """
    _check_n(n)
    cols = _dlu_index_columns(space, n)
    stream = ChaosStream()
    out = []
    for col in cols:
        chaos = stream.take(n)
        order = np.argsort(chaos, kind="stable")
        ranks = np.empty(n, dtype=int)
        ranks[order] = np.arange(n)
        out.append(col[ranks])
    return [space.position(row) for row in np.stack(out, axis=1)]


SCHEMES = ("random", "lhs", "dlu", "cdlu")


def initialize(space: ParameterSpace, n: int, scheme: str, rng_seed: int = 0) -> list[Position]:
    """Dispatch on the configured scheme name (dlu/cdlu ignore the seed)."""
    if scheme == "random":
        return init_random(space, n, rng_seed)
    if scheme == "lhs":
        return init_lhs(space, n, rng_seed)
    if scheme == "dlu":
        return init_dlu(space, n)
    if scheme == "cdlu":
        return init_cdlu(space, n)
    raise ValueError(f"unknown init scheme {scheme!r}; expected one of {SCHEMES}")


def _check_n(n: int) -> None:
    if n < 2:
        raise ValueError(f"population size must be >= 2, got {n}")

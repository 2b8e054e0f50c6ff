"""Discretized hyperparameter search spaces and the shipped algorithm presets.

Every tunable parameter lives on a uniform grid (min, max, step).  Grid
indices are the canonical internal representation; real values are only
materialized when a reconstruction is invoked, which keeps repeated
arithmetic from drifting off the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OffGridError

# Tolerances are in units of one grid step.
_COUNT_EPS = 1e-6
_ONGRID_TOL = 1e-6


@dataclass(frozen=True)
class ParameterSpec:
    """One parameter's uniform grid: values min + k*step for 0 <= k < count."""

    name: str
    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError(f"{self.name}: step must be positive, got {self.step}")
        if self.lo > self.hi:
            raise ValueError(f"{self.name}: min {self.lo} exceeds max {self.hi}")

    @property
    def count(self) -> int:
        return int(math.floor((self.hi - self.lo) / self.step + _COUNT_EPS)) + 1

    def value(self, k: int) -> float:
        """Materialize grid point k as a real value."""
        if not 0 <= k < self.count:
            raise IndexError(f"{self.name}: grid index {k} outside [0, {self.count})")
        return self.lo + k * self.step

    def grid_values(self) -> np.ndarray:
        """All grid values in index order."""
        return self.lo + self.step * np.arange(self.count)


def grid_index(spec: ParameterSpec, value: float) -> int:
    """Return k with value == min + k*step; raise OffGridError otherwise."""
    k = int(round((value - spec.lo) / spec.step))
    if k < 0 or k >= spec.count or abs(value - (spec.lo + k * spec.step)) > _ONGRID_TOL * spec.step:
        raise OffGridError(f"{spec.name}: {value} is not on grid [{spec.lo}, {spec.hi}, {spec.step}]")
    return k


@dataclass(frozen=True)
class Position:
    """A candidate parameter set, stored as one grid index per dimension."""

    indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class ParameterSpace:
    """Ordered collection of parameter grids defining the search space."""

    specs: tuple[ParameterSpec, ...]

    def __post_init__(self):
        names = [s.name for s in self.specs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names: {names}")

    @property
    def dimension(self) -> int:
        return len(self.specs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.specs)

    def counts(self) -> tuple[int, ...]:
        return tuple(s.count for s in self.specs)

    def values(self, position: Position) -> np.ndarray:
        """Materialize a Position into real parameter values."""
        self._check_dim(len(position))
        return np.array([s.value(k) for s, k in zip(self.specs, position.indices)])

    def value_map(self, position: Position) -> dict[str, float]:
        """Materialize a Position as a name -> value mapping."""
        self._check_dim(len(position))
        return {s.name: s.value(k) for s, k in zip(self.specs, position.indices)}

    def position(self, indices) -> Position:
        """Build a Position from per-dimension grid indices, with bounds checks."""
        idx = tuple(int(k) for k in indices)
        self._check_dim(len(idx))
        for s, k in zip(self.specs, idx):
            if not 0 <= k < s.count:
                raise IndexError(f"{s.name}: grid index {k} outside [0, {s.count})")
        return Position(idx)

    def from_values(self, values) -> Position:
        """Build a Position from exact on-grid values (raises OffGridError otherwise)."""
        vals = list(values)
        self._check_dim(len(vals))
        return Position(tuple(grid_index(s, v) for s, v in zip(self.specs, vals)))

    def _check_dim(self, n: int) -> None:
        if n != self.dimension:
            raise ValueError(f"expected {self.dimension} coordinates, got {n}")


def snap_index(spec: ParameterSpec, value: float) -> int:
    """Clamp to [min, max] and round to the nearest grid index.

    Exactly-halfway values round toward the grid minimum, so snapping is a
    deterministic function of its input.
    """
    v = min(max(value, spec.lo), spec.hi)
    t = (v - spec.lo) / spec.step
    base = math.floor(t)
    k = base + 1 if t - base > 0.5 else base
    return min(max(k, 0), spec.count - 1)


def snap(space: ParameterSpace, raw) -> Position:
    """Snap a raw coordinate vector onto the grid, one snap_index per dimension."""
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (space.dimension,):
        raise ValueError(f"expected {space.dimension} coordinates, got shape {raw.shape}")
    return Position(tuple(snap_index(spec, v) for spec, v in zip(space.specs, raw)))


ASD_POCS = "asd-pocs"
AWPCSD = "awpcsd"
PICCS = "piccs"

_ASD_POCS_GRIDS = (
    ("max_iter", 5, 50, 1),
    ("tv_iter", 5, 50, 1),
    ("epsilon", 50, 1500, 10),
    ("alpha", 0.0001, 0.1, 0.0001),
    ("alpha_red", 0.9, 0.99, 0.01),
    ("lambda", 0.9, 0.99, 0.01),
    ("lambda_red", 0.9, 0.99, 0.01),
    ("r_max", 0.9, 0.99, 0.01),
)

_AWPCSD_GRIDS = (
    ("max_iter", 5, 50, 1),
    ("tv_iter", 5, 50, 1),
    ("epsilon", 50, 1500, 10),
    ("lambda", 0.9, 0.99, 0.01),
    ("lambda_red", 0.9, 0.99, 0.01),
    ("delta", 0.005, 2, 0.005),
)

_PRESETS = {
    ASD_POCS: _ASD_POCS_GRIDS,
    AWPCSD: _AWPCSD_GRIDS,
    PICCS: _ASD_POCS_GRIDS,
}


def preset_space(algorithm: str) -> ParameterSpace:
    """Return the shipped search space for one reconstruction algorithm.

    ``asd-pocs`` and ``piccs`` share the same 8-dimensional space; ``awpcsd``
    has 6 dimensions (no alpha, alpha_red, r_max; adds delta).
    """
    key = algorithm.lower().replace("_", "-")
    if key not in _PRESETS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {sorted(_PRESETS)}")
    return ParameterSpace(tuple(ParameterSpec(*row) for row in _PRESETS[key]))

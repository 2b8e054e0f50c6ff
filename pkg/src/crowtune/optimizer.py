"""Crow search baseline and the search-space-aware variant (SSA-CSA).

Both drive a black-box evaluator over a discretized parameter space.  The
SSA variant replaces the baseline's three random ingredients:

* local moves follow a member of a superior set (Pareto front of memory
  objectives, filled or truncated by scalar fitness) instead of an arbitrary
  crow, with a deterministic sine-map factor instead of a uniform draw;
* global moves sample from a per-dimension weight map grown around superior
  memories instead of sampling uniformly;
* the local/global split is decided by each crow's fitness rank against a
  rising quantile instead of a coin flip.

Within an iteration all crows move from the previous iteration's state, so
their evaluations are independent and may run in parallel.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateImageError
from .fitness import FitnessReport
from .initpop import ChaosStream, initialize
from .space import ParameterSpace, Position, snap

LOCAL = "local"
GLOBAL = "global"

CSA_BASELINE_AP = 0.1  # canonical awareness probability of the original algorithm

# Degenerate reconstructions cost this much; the objective vector keeps them
# out of the Pareto front without perturbing valid comparisons.
PENALTY_FITNESS = 1e6
PENALTY_REPORT = FitnessReport(snr=0.0, hfer=0.0, laplacian_var=0.0,
                               fitness=PENALTY_FITNESS,
                               objective_vector=(PENALTY_FITNESS, 1.0))


@dataclass
class Crow:
    """Search agent: current position plus the best position it remembers."""

    position: Position
    memory: Position
    memory_fitness: float
    memory_objectives: tuple[float, float]
    memory_report: FitnessReport


@dataclass(frozen=True)
class SuperiorSet:
    """Crows eligible to be followed during local search, by index."""

    member_indices: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.member_indices)


@dataclass
class WeightMap:
    """Per-dimension sampling weights over each parameter grid."""

    space: ParameterSpace
    weights: list[np.ndarray]
    k: float
    omega_inc: float
    floor: float
    neighborhood: float

    @classmethod
    def create(cls, space: ParameterSpace, k0: float = 1.0, omega_inc: float = 1.05,
               floor: float = 1.0, neighborhood: float = 0.10) -> "WeightMap":
        if k0 <= 0 or floor <= 0 or omega_inc <= 1.0:
            raise ValueError("need k0 > 0, floor > 0 and omega_inc > 1")
        weights = [np.full(spec.count, float(floor)) for spec in space.specs]
        return cls(space=space, weights=weights, k=float(k0), omega_inc=float(omega_inc),
                   floor=float(floor), neighborhood=float(neighborhood))


@dataclass(frozen=True)
class OptimizerConfig:
    population: int = 25
    iterations: int = 30
    flight_length: float = 2.0
    ap0: float = 0.3
    ap_inc: float | None = None  # default: reach 0.9 at the final iteration
    kappa0: float = 0.4
    omega_inc: float = 1.05
    k0: float = 1.0
    weight_floor: float = 1.0
    neighborhood: float = 0.10
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.ap0 < 1.0:
            raise ValueError("ap0 must lie in (0, 1)")
        if self.ap_inc is None:
            object.__setattr__(self, "ap_inc", (0.9 / self.ap0) ** (1.0 / self.iterations))
        if self.ap_inc < 1.0:
            raise ValueError("ap_inc must be >= 1")
        if self.ap0 * self.ap_inc**self.iterations > 1.0 + 1e-9:
            raise ValueError("ap0 * ap_inc^T must stay <= 1")
        if not 0.0 < self.kappa0 <= 1.0:
            raise ValueError("kappa0 must lie in (0, 1]")
        if self.flight_length <= 0:
            raise ValueError("flight_length must be positive")

    @property
    def kappa_red(self) -> float:
        return 1.0 - 1.0 / self.iterations


@dataclass(frozen=True)
class IterationStats:
    iteration: int
    best_fitness: float
    mean_fitness: float
    superior_size: int
    explorations: int


@dataclass
class RunRecord:
    """Everything a run produces: per-iteration trace plus the final solution."""

    algorithm: str
    init_scheme: str
    config: OptimizerConfig
    iterations: list[IterationStats]
    best_position: Position
    best_values: dict[str, float]
    best_report: FitnessReport
    weight_map: WeightMap | None
    total_evaluations: int


Evaluator = Callable[[Position], FitnessReport]


def pareto_front(objectives) -> list[int]:
    """Indices of vectors not dominated by any other (componentwise minimization).

    A vector is dominated when another is <= in every component and < in at
    least one; exact duplicates are all kept.
    """
    arr = np.asarray(objectives, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("need a non-empty list of equal-arity objective vectors")
    le = (arr[:, None, :] <= arr[None, :, :]).all(axis=2)
    lt = (arr[:, None, :] < arr[None, :, :]).any(axis=2)
    dominated = (le & lt).any(axis=0)
    return [int(i) for i in np.flatnonzero(~dominated)]


def select_superior_set(crows: list[Crow], kappa_t: float) -> SuperiorSet:
    """Pareto front of memories, truncated or filled by scalar fitness to size
    ceil(N * kappa_t), minimum 1; ties break toward lower crow index.

    kappa_t = 0 is allowed (the one-iteration schedule reaches it) and yields
    the minimum size of 1.
    """
    if not 0.0 <= kappa_t <= 1.0:
        raise ValueError("kappa_t must lie in [0, 1]")
    n = len(crows)
    target = max(1, math.ceil(n * kappa_t - 1e-9))
    front = pareto_front([c.memory_objectives for c in crows])
    by_fitness = sorted(front, key=lambda i: (crows[i].memory_fitness, i))
    if len(front) > target:
        members = by_fitness[:target]
    else:
        rest = sorted((i for i in range(n) if i not in set(front)),
                      key=lambda i: (crows[i].memory_fitness, i))
        members = front + rest[: target - len(front)]
    return SuperiorSet(tuple(sorted(members)))


def csa_local_step(space: ParameterSpace, position: Position, followed_memory: Position,
                   flight_length: float, rng: np.random.Generator) -> Position:
    """Baseline move toward a followed memory with a uniform random factor."""
    r = rng.random()
    x = space.values(position)
    m = space.values(followed_memory)
    return snap(space, x + r * flight_length * (m - x))


def ssa_local_step(space: ParameterSpace, position: Position, superior_memory: Position,
                   flight_length: float, chaos: ChaosStream) -> Position:
    """Move toward a superior-set memory with the next sine-map factor."""
    c = chaos.next()
    x = space.values(position)
    m = space.values(superior_memory)
    return snap(space, x + c * flight_length * (m - x))


def weight_map_update(wmap: WeightMap, superior: SuperiorSet, crows: list[Crow]) -> WeightMap:
    """Grow weights around every superior memory.

    The update magnitude rises by omega_inc first; each memory's exact grid
    index gains the full magnitude and grid points within 10% of the
    dimension's value range (excluding the index itself) gain half.
    """
    if superior.size == 0:
        raise ValueError("superior set must be non-empty")
    wmap.k *= wmap.omega_inc
    for idx in superior.member_indices:
        memory = crows[idx].memory
        for d, spec in enumerate(wmap.space.specs):
            k = memory.indices[d]
            w = wmap.weights[d]
            w[k] += wmap.k
            band = wmap.neighborhood * (spec.hi - spec.lo)
            radius = int(math.floor(band / spec.step + 1e-9))
            lo = max(0, k - radius)
            hi = min(spec.count - 1, k + radius)
            if hi > lo:
                w[lo:k] += wmap.k / 2.0
                w[k + 1:hi + 1] += wmap.k / 2.0
    return wmap


def weighted_sample(wmap: WeightMap, rng: np.random.Generator) -> Position:
    """Draw each dimension's grid index with probability proportional to weight."""
    indices = []
    for w in wmap.weights:
        indices.append(int(rng.choice(len(w), p=w / w.sum())))
    return Position(tuple(indices))


def balance_decide(fitnesses, i: int, ap_t: float) -> str:
    """Local search iff crow i's fitness is strictly below the ap_t-quantile
    (linear interpolation) of the previous iteration's fitnesses."""
    if not 0.0 < ap_t <= 1.0:
        raise ValueError("ap_t must lie in (0, 1]")
    threshold = float(np.quantile(np.asarray(fitnesses, dtype=float), ap_t))
    return LOCAL if fitnesses[i] < threshold else GLOBAL


def _uniform_position(space: ParameterSpace, rng: np.random.Generator) -> Position:
    return Position(tuple(int(rng.integers(spec.count)) for spec in space.specs))


def _safe_evaluate(evaluator: Evaluator, position: Position) -> FitnessReport:
    try:
        return evaluator(position)
    except DegenerateImageError:
        return PENALTY_REPORT


def _evaluate_batch(evaluator: Evaluator, positions: list[Position], threads: int) -> list[FitnessReport]:
    if threads > 1 and len(positions) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda p: _safe_evaluate(evaluator, p), positions))
    return [_safe_evaluate(evaluator, p) for p in positions]


def run(space: ParameterSpace, evaluator: Evaluator, config: OptimizerConfig,
        algorithm: str = "ssa-csa", init_scheme: str = "cdlu", threads: int = 1) -> RunRecord:
    """Execute one full optimization and return its RunRecord.

    Every iteration evaluates each crow exactly once (N * (T + 1) evaluations
    including initialization); memories only ever improve, so the best-fitness
    trace is non-increasing.  Identical inputs produce identical records.
    """
    algorithm = algorithm.lower()
    if algorithm not in ("csa", "ssa-csa"):
        raise ValueError(f"unknown optimizer algorithm {algorithm!r}")
    ssa = algorithm == "ssa-csa"
    n = config.population
    rng = np.random.default_rng(config.seed)

    positions = initialize(space, n, init_scheme, config.seed)
    reports = _evaluate_batch(evaluator, positions, threads)
    crows = [
        Crow(position=p, memory=p, memory_fitness=rep.fitness,
             memory_objectives=rep.objective_vector, memory_report=rep)
        for p, rep in zip(positions, reports)
    ]
    total_evaluations = n

    wmap = WeightMap.create(space, config.k0, config.omega_inc,
                            config.weight_floor, config.neighborhood) if ssa else None
    chaos = ChaosStream() if ssa else None
    ap = config.ap0
    kappa = config.kappa0

    def snapshot(t: int, superior_size: int, explorations: int) -> IterationStats:
        fits = [c.memory_fitness for c in crows]
        return IterationStats(iteration=t, best_fitness=min(fits),
                              mean_fitness=float(np.mean(fits)),
                              superior_size=superior_size, explorations=explorations)

    stats = [snapshot(0, 0, 0)]
    for t in range(1, config.iterations + 1):
        prev_fitness = [c.memory_fitness for c in crows]
        prev_memories = [c.memory for c in crows]
        superior = None
        if ssa:
            ap *= config.ap_inc
            kappa *= config.kappa_red
            superior = select_superior_set(crows, kappa)
            weight_map_update(wmap, superior, crows)

        proposals = []
        explorations = 0
        for i in range(n):
            if ssa:
                if balance_decide(prev_fitness, i, ap) == LOCAL:
                    j = superior.member_indices[int(rng.integers(superior.size))]
                    pos = ssa_local_step(space, crows[i].position, prev_memories[j],
                                         config.flight_length, chaos)
                else:
                    pos = weighted_sample(wmap, rng)
                    explorations += 1
            else:
                if rng.random() >= CSA_BASELINE_AP:
                    j = int(rng.integers(n))
                    pos = csa_local_step(space, crows[i].position, prev_memories[j],
                                         config.flight_length, rng)
                else:
                    pos = _uniform_position(space, rng)
                    explorations += 1
            proposals.append(pos)

        reports = _evaluate_batch(evaluator, proposals, threads)
        total_evaluations += n
        for crow, pos, rep in zip(crows, proposals, reports):
            crow.position = pos
            if rep.fitness < crow.memory_fitness:
                crow.memory = pos
                crow.memory_fitness = rep.fitness
                crow.memory_objectives = rep.objective_vector
                crow.memory_report = rep
        stats.append(snapshot(t, superior.size if superior else 0, explorations))

    best = min(range(n), key=lambda i: (crows[i].memory_fitness, i))
    return RunRecord(
        algorithm=algorithm,
        init_scheme=init_scheme,
        config=config,
        iterations=stats,
        best_position=crows[best].memory,
        best_values=space.value_map(crows[best].memory),
        best_report=crows[best].memory_report,
        weight_map=wmap,
        total_evaluations=total_evaluations,
    )

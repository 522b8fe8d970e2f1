"""
Parameter sweeps and achievability regions

A ParameterGrid expands into concrete policies; evaluate_grid simulates each
of them over several seeds. The resulting MSE vectors are reduced to their
Pareto set, the time-sharing hull (two sensors) and the weighted-MSE optimum.
"""
import itertools
import logging
import math
import multiprocessing
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from . import config
from .exceptions import AllInfinite, ConfigError, DimensionUnsupported, GridTooLarge
from .simulators import SimulationConfig, simulate
from .strategies import AlohaPolicy, AlohaVariant, CoordinatedPolicy, CoordinatedVariant, format_policy
from .utils import standard_error

logger = logging.getLogger(__name__)

# Parameter names per family, in policy-spec list order
FAMILY_PARAMETERS = {
    CoordinatedVariant.MAX_TRIALS.value: ("max_trials",),
    CoordinatedVariant.MULTIPLE_SUCCESS.value: ("success_quota",),
    AlohaVariant.INDIVIDUAL_CAP.value: ("cap",),
    AlohaVariant.THRESHOLD_ADRA.value: ("cap", "threshold"),
}


def _build_policy(family, parameters):
    if family in (CoordinatedVariant.MAX_TRIALS.value, CoordinatedVariant.MULTIPLE_SUCCESS.value):
        return CoordinatedPolicy(CoordinatedVariant(family), **parameters)
    return AlohaPolicy(AlohaVariant(family), **parameters)


@dataclass(frozen=True)
class ParameterGrid:
    """
    Cartesian grid over the per-sensor parameters of one policy family

    Args:
        family: Policy family tag, e.g. "multiple-success"
        values: {parameter name: per-sensor candidate lists}, e.g.
            {"success_quota": [[1, 2, 3], [1, 2, 3]]}
        seeds: Replication seeds
        cap: Maximum number of parameter tuples
    """

    family: str
    values: Dict[str, Tuple[Tuple[float, ...], ...]]
    seeds: Tuple[int, ...] = tuple(range(config.DEFAULT_NUM_SEEDS))
    cap: int = config.GRID_SIZE_CAP

    def __post_init__(self):
        if self.family not in FAMILY_PARAMETERS:
            raise ConfigError(f"unknown policy family {self.family!r}")
        names = FAMILY_PARAMETERS[self.family]
        if set(self.values) != set(names):
            raise ConfigError(f"{self.family} grids need exactly the parameters {', '.join(names)}")
        values = {name: tuple(tuple(candidates) for candidates in self.values[name]) for name in names}
        sizes = {len(values[name]) for name in names}
        if len(sizes) != 1 or 0 in sizes:
            raise ConfigError(f"{self.family} grid needs one candidate list per sensor for every parameter")
        if any(not candidates for name in names for candidates in values[name]):
            raise ConfigError(f"{self.family} grid has an empty candidate list")
        if not self.seeds:
            raise ConfigError("grid needs at least one seed")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    @property
    def num_sensors(self) -> int:
        return len(next(iter(self.values.values())))

    @property
    def size(self) -> int:
        return math.prod(len(c) for name in FAMILY_PARAMETERS[self.family] for c in self.values[name])

    def check_size(self):
        if self.size > self.cap:
            raise GridTooLarge(f"{self.family} grid has {self.size} parameter tuples, cap is {self.cap}")

    def policies(self) -> Iterator:
        """Concrete policies in cartesian order (parameter-major, then sensor)"""
        self.check_size()
        names = FAMILY_PARAMETERS[self.family]
        lists = [candidates for name in names for candidates in self.values[name]]
        count = self.num_sensors
        for combo in itertools.product(*lists):
            parameters = {name: tuple(combo[i * count:(i + 1) * count]) for i, name in enumerate(names)}
            yield _build_policy(self.family, parameters)


@dataclass(frozen=True, eq=False)
class AchievablePoint:
    """
    MSE vector reached by one concrete policy

    Args:
        policy: CoordinatedPolicy or AlohaPolicy
        mse: Per-sensor MSE, mean over seeds
        stderr: Per-sensor standard error across seeds
    """

    policy: object
    mse: np.ndarray
    stderr: np.ndarray

    @property
    def params(self) -> str:
        return format_policy(self.policy)

    @property
    def family(self) -> str:
        return self.policy.variant.value

    @property
    def infinite(self) -> bool:
        return not bool(np.all(np.isfinite(self.mse)))

    def sort_key(self):
        return (tuple(float(v) for v in self.mse), self.params)


@dataclass(frozen=True, eq=False)
class Frontier:
    """Pareto-minimal points and the time-sharing hull vertices (two sensors only)"""

    points: List[AchievablePoint]
    hull: List[AchievablePoint] = field(default_factory=list)


def _run_task(task):
    index, policy, sim_config = task
    result = simulate(sim_config, policy)
    return index, result.mse, result.stderr


def evaluate_grid(grid: ParameterGrid, sim_config: SimulationConfig, workers: int = 1,
                  show_progress: bool = False) -> List[AchievablePoint]:
    """
    Simulate every parameter tuple of a grid for every seed

    Args:
        grid: ParameterGrid
        sim_config: SimulationConfig; its seed is replaced by each grid seed
        workers: Worker processes (1 runs in-process)
        show_progress: Display a tqdm progress bar

    Returns:
        One AchievablePoint per tuple, in grid order; infinite MSEs are kept

    Raises:
        GridTooLarge: more tuples than grid.cap
    """
    grid.check_size()
    if grid.num_sensors != sim_config.num_sensors:
        raise ConfigError(f"{grid.family} grid has {grid.num_sensors} sensors, config has {sim_config.num_sensors}")
    policies = list(grid.policies())
    tasks = [
        (i, policy, sim_config.with_seed(seed))
        for i, policy in enumerate(policies)
        for seed in grid.seeds
    ]
    logger.info("evaluating %d %s tuples x %d seeds", len(policies), grid.family, len(grid.seeds))

    progress = dict(total=len(tasks), desc=f"Sweeping {grid.family}", disable=not show_progress)
    if workers > 1:
        with multiprocessing.Pool(workers) as pool:
            # imap keeps task order, so the reduction matches a sequential run
            outcomes = list(tqdm(pool.imap(_run_task, tasks), **progress))
    else:
        outcomes = [_run_task(task) for task in tqdm(tasks, **progress)]

    runs: Dict[int, List] = {}
    for index, mse, stderr in outcomes:
        runs.setdefault(index, []).append((mse, stderr))

    points = []
    for i, policy in enumerate(policies):
        per_seed = np.array([mse for mse, _ in runs[i]])
        with np.errstate(invalid="ignore"):
            mse = per_seed.mean(axis=0)
        if len(runs[i]) > 1:
            stderr = np.array([standard_error(per_seed[:, g]) for g in range(per_seed.shape[1])])
        else:
            stderr = np.asarray(runs[i][0][1], dtype=float)
        points.append(AchievablePoint(policy=policy, mse=mse, stderr=stderr))
    return points


def _weakly_dominates(a, b):
    return bool(np.all(a <= b))


def pareto_filter(points: Sequence[AchievablePoint]) -> List[AchievablePoint]:
    """
    Points not dominated by any other, lexicographically ordered by MSE

    Equal MSE vectors are reduced to the first one in that order.
    """
    if not points:
        raise ConfigError("pareto_filter needs at least one point")
    kept: List[AchievablePoint] = []
    # a dominator always sorts before the point it dominates
    for point in sorted(points, key=AchievablePoint.sort_key):
        if not any(_weakly_dominates(other.mse, point.mse) for other in kept):
            kept.append(point)
    return kept


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def time_sharing_hull(points: Sequence[AchievablePoint]) -> List[AchievablePoint]:
    """
    Lower-left convex hull of the finite points, by increasing MSE_1

    Collinear vertices are kept. Only defined for two sensors.

    Raises:
        DimensionUnsupported: points with G != 2
    """
    if not points:
        raise ConfigError("time_sharing_hull needs at least one point")
    if any(len(p.mse) != 2 for p in points):
        raise DimensionUnsupported("time-sharing hull is only implemented for two sensors")
    finite = [p for p in points if not p.infinite]
    if not finite:
        return []
    hull: List[AchievablePoint] = []
    for point in pareto_filter(finite):
        while len(hull) >= 2:
            o, a = hull[-2].mse, hull[-1].mse
            scale = max(1.0, float(np.max(np.abs([o, a, point.mse]))))
            if _cross(o, a, point.mse) < -1e-12 * scale * scale:
                hull.pop()
            else:
                break
        hull.append(point)
    return hull


def _check_weights(alpha, size):
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (size,):
        raise ConfigError(f"weights need {size} entries, got {alpha.tolist()}")
    if np.any(alpha < 0) or abs(alpha.sum() - 1.0) > config.WEIGHT_SUM_TOL:
        raise ConfigError(f"weights must be non-negative and sum to 1, got {alpha.tolist()}")
    return alpha


def weighted_objective(point: AchievablePoint, alpha) -> float:
    """sum of alpha_g * MSE_g over the sensors with positive weight"""
    active = np.asarray(alpha) > 0
    return float(np.sum(np.asarray(alpha)[active] * point.mse[active]))


def weighted_best(points: Sequence[AchievablePoint], alpha) -> AchievablePoint:
    """
    Point minimizing the weighted MSE

    Args:
        points: Candidate AchievablePoints
        alpha: Non-negative weights summing to 1

    Returns:
        The argmin; ties go to the lexicographically smaller MSE vector, then params

    Raises:
        AllInfinite: every point has an infinite objective
    """
    if not points:
        raise ConfigError("weighted_best needs at least one point")
    alpha = _check_weights(alpha, len(points[0].mse))
    scored = [(weighted_objective(p, alpha), p) for p in points]
    finite = [(value, p) for value, p in scored if math.isfinite(value)]
    if not finite:
        raise AllInfinite("every candidate has an infinite weighted MSE")
    return min(finite, key=lambda item: (item[0],) + item[1].sort_key())[1]


def hull_objective(hull: Sequence[AchievablePoint], alpha,
                   points: Optional[Sequence[AchievablePoint]] = None) -> float:
    """
    Best weighted MSE reachable by time-sharing between hull vertices

    A linear objective over the convex closure is minimized at a vertex.
    The hull only holds finite points, so a point with an infinite MSE on a
    zero-weight sensor can still beat it; pass the candidate points to
    include those.
    """
    candidates = list(hull) + list(points or [])
    if not candidates:
        return math.inf
    alpha = _check_weights(alpha, len(candidates[0].mse))
    return min(weighted_objective(p, alpha) for p in candidates)


def build_frontier(points: Sequence[AchievablePoint]) -> Frontier:
    """Pareto set plus, for two sensors, the time-sharing hull"""
    pareto = pareto_filter(points)
    hull = time_sharing_hull(pareto) if len(pareto[0].mse) == 2 else []
    return Frontier(points=pareto, hull=hull)

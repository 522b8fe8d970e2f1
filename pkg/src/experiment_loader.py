"""
Experiment config and parameter-grid loading
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from . import config
from .delta_models import ConstantDelta, DeltaModel, delta_from_config, delta_to_config
from .exceptions import ConfigError
from .gauss_markov import LinearSystem
from .simulators import SimulationConfig
from .strategies import parse_policy
from .sweep import FAMILY_PARAMETERS, ParameterGrid

logger = logging.getLogger(__name__)


def default_weights(num_sensors: int) -> Tuple[Tuple[float, ...], ...]:
    """alpha_1 in 0.1..0.9 for two sensors, uniform weights otherwise"""
    if num_sensors == 2:
        return tuple((alpha, round(1.0 - alpha, 12)) for alpha in config.DEFAULT_ALPHAS)
    return ((1.0 / num_sensors,) * num_sensors,)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """
    One experiment as described by a JSON config file

    Args:
        systems: LinearSystem per sensor
        delta: Transmit-duration model
        epsilon: Decoding error probability
        num_packets: Packets per simulation run
        seeds: Replication seeds
        policy: Optional policy spec for the simulate command
        weights: alpha vectors for the weighted-MSE objective
        output_dir: Where CSV files are written (None: config.OUTPUT_DIR)
        warmup_fraction: Leading fraction of packets discarded
        num_batches: Batch count for the batch-means standard error
    """

    systems: Tuple[LinearSystem, ...]
    delta: DeltaModel = ConstantDelta(config.DEFAULT_DELTA)
    epsilon: float = config.DEFAULT_EPSILON
    num_packets: int = config.DEFAULT_NUM_PACKETS
    seeds: Tuple[int, ...] = tuple(range(config.DEFAULT_NUM_SEEDS))
    policy: Optional[str] = None
    weights: Tuple[Tuple[float, ...], ...] = field(default=())
    output_dir: Optional[str] = None
    warmup_fraction: float = config.DEFAULT_WARMUP_FRACTION
    num_batches: int = config.DEFAULT_NUM_BATCHES

    def __post_init__(self):
        object.__setattr__(self, "systems", tuple(self.systems))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.systems:
            raise ConfigError("config needs at least one system")
        if not self.seeds:
            raise ConfigError("config needs at least one seed")
        if not 0 <= self.epsilon < 1:
            raise ConfigError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        weights = tuple(tuple(float(a) for a in row) for row in self.weights) or default_weights(len(self.systems))
        for row in weights:
            if len(row) != len(self.systems):
                raise ConfigError(f"weight vector {list(row)} does not have {len(self.systems)} entries")
            if any(a < 0 for a in row) or abs(sum(row) - 1.0) > config.WEIGHT_SUM_TOL:
                raise ConfigError(f"weight vector {list(row)} must be non-negative and sum to 1")
        object.__setattr__(self, "weights", weights)
        if self.policy is not None:
            parse_policy(self.policy)

    @property
    def num_sensors(self) -> int:
        return len(self.systems)

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir) if self.output_dir else config.OUTPUT_DIR

    def to_simulation_config(self, seed: Optional[int] = None, record_events: bool = False) -> SimulationConfig:
        return SimulationConfig(
            systems=self.systems,
            delta_model=self.delta,
            epsilon=self.epsilon,
            num_packets=self.num_packets,
            seed=self.seeds[0] if seed is None else seed,
            warmup_fraction=self.warmup_fraction,
            num_batches=self.num_batches,
            record_events=record_events,
        )

    def to_dict(self) -> dict:
        data = {
            "systems": [system.to_config() for system in self.systems],
            "delta": delta_to_config(self.delta),
            "epsilon": self.epsilon,
            "num_packets": self.num_packets,
            "seeds": list(self.seeds),
            "weights": [list(row) for row in self.weights],
            "warmup_fraction": self.warmup_fraction,
            "num_batches": self.num_batches,
        }
        if self.policy is not None:
            data["policy"] = self.policy
        if self.output_dir is not None:
            data["output_dir"] = self.output_dir
        return data


def _require(data, key, path):
    if key not in data:
        raise ConfigError(f"{path}: missing required key {key!r}")
    return data[key]


def _integer(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not float(value).is_integer():
        raise ConfigError(f"{what} must be an integer, got {value!r}")
    return int(value)


def experiment_from_dict(data: dict, source="<dict>") -> ExperimentConfig:
    """
    Build an ExperimentConfig from parsed JSON

    Args:
        data: Mapping with the keys documented in README.md
        source: Name used in error messages

    Returns:
        ExperimentConfig
    """
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be an object")
    systems_data = _require(data, "systems", source)
    if not isinstance(systems_data, list):
        raise ConfigError(f"{source}: 'systems' must be a list")
    systems = []
    for i, entry in enumerate(systems_data):
        try:
            systems.append(LinearSystem(_require(entry, "drift", source), _require(entry, "diffusion", source)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source}: system {i + 1}: {exc}") from exc

    try:
        return ExperimentConfig(
            systems=tuple(systems),
            delta=delta_from_config(data.get("delta", config.DEFAULT_DELTA)),
            epsilon=float(data.get("epsilon", config.DEFAULT_EPSILON)),
            num_packets=_integer(data.get("num_packets", config.DEFAULT_NUM_PACKETS), "num_packets"),
            seeds=tuple(_integer(s, "seed") for s in data.get("seeds", range(config.DEFAULT_NUM_SEEDS))),
            policy=data.get("policy"),
            weights=tuple(tuple(row) for row in data.get("weights", ())),
            output_dir=data.get("output_dir"),
            warmup_fraction=float(data.get("warmup_fraction", config.DEFAULT_WARMUP_FRACTION)),
            num_batches=_integer(data.get("num_batches", config.DEFAULT_NUM_BATCHES), "num_batches"),
        )
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def _read_json(file_path, kind, hint):
    file_path = Path(file_path)
    if not file_path.exists():
        error_msg = f"""
{kind} file not found: {file_path}

Please do one of the following:
1. Create the file (see README.md for the format)
2. Or start from a bundled one in {config.CONFIGS_DIR}
3. Or pass a different path: {hint}
"""
        raise ConfigError(error_msg)
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{file_path}: invalid JSON ({exc})") from exc


def load_experiment(file_path=None) -> ExperimentConfig:
    """
    Load an experiment config

    Args:
        file_path: JSON config path. If None, uses the bundled stable config.

    Returns:
        ExperimentConfig

    Raises:
        ConfigError: missing file, invalid JSON or invalid values
    """
    if file_path is None:
        file_path = config.STABLE_CONFIG
    data = _read_json(file_path, "Experiment config", "--config path/to/experiment.json")
    experiment = experiment_from_dict(data, source=str(file_path))
    logger.info("loaded %s: %d sensors, %d seeds", file_path, experiment.num_sensors, len(experiment.seeds))
    return experiment


def save_experiment(experiment: ExperimentConfig, file_path):
    """Write an experiment config that load_experiment re-parses to the same experiment"""
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, "w", encoding="utf-8") as f:
        json.dump(experiment.to_dict(), f, indent=2)
    logger.info("configuration saved to %s", file_path)


def _grid_value(value, what):
    if isinstance(value, str) and value.strip().lower() == "inf":
        return float("inf")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{what}: not a number: {value!r}")
    return value


def grid_from_dict(entry: dict, default_seeds, cap=config.GRID_SIZE_CAP, source="<dict>") -> ParameterGrid:
    """Build one ParameterGrid from its JSON object"""
    family = _require(entry, "family", source)
    if family not in FAMILY_PARAMETERS:
        raise ConfigError(f"{source}: unknown policy family {family!r}")
    values = _require(entry, "values", source)
    if not isinstance(values, dict):
        raise ConfigError(f"{source}: {family} 'values' must be an object")
    parsed = {}
    for name, per_sensor in values.items():
        if not isinstance(per_sensor, list) or not all(isinstance(c, list) for c in per_sensor):
            raise ConfigError(f"{source}: {family}.{name} must be a list of per-sensor lists")
        parsed[name] = [[_grid_value(v, f"{source}: {family}.{name}") for v in c] for c in per_sensor]
    seeds = tuple(_integer(s, "seed") for s in entry.get("seeds", default_seeds))
    try:
        return ParameterGrid(family=family, values=parsed, seeds=seeds, cap=int(cap))
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_grid(file_path, default_seeds=None) -> List[ParameterGrid]:
    """
    Load the parameter grids of a sweep

    Args:
        file_path: JSON grid file {"grids": [...], "cap": N}
        default_seeds: Seeds for grids that do not list their own

    Returns:
        List of ParameterGrid, in file order
    """
    data = _read_json(file_path, "Grid", "--grid path/to/grids.json")
    if not isinstance(data, dict) or not isinstance(data.get("grids"), list) or not data["grids"]:
        raise ConfigError(f"{file_path}: expected a non-empty 'grids' list")
    if default_seeds is None:
        default_seeds = tuple(range(config.DEFAULT_NUM_SEEDS))
    cap = data.get("cap", config.GRID_SIZE_CAP)
    return [grid_from_dict(entry, default_seeds, cap, source=str(file_path)) for entry in data["grids"]]

import json
import math

import numpy as np
import pytest

from src import config
from src.delta_models import ConstantDelta, UniformDelta
from src.exceptions import ConfigError
from src.experiment_loader import (
    ExperimentConfig, default_weights, experiment_from_dict, grid_from_dict, load_experiment, load_grid,
    save_experiment,
)
from tests.conftest import DIFFUSION_2, DRIFT_2


def _write(path, data):
    path.write_text(json.dumps(data) if not isinstance(data, str) else data, encoding="utf-8")
    return path


def _minimal():
    return {"systems": [{"drift": DRIFT_2, "diffusion": DIFFUSION_2}]}


class TestBundledConfigs:
    def test_stable(self):
        experiment = load_experiment(config.STABLE_CONFIG)
        assert experiment.num_sensors == 2
        assert experiment.systems[0].dim == 3
        assert experiment.delta == ConstantDelta(1.0)
        assert experiment.epsilon == 0.05
        assert experiment.seeds == (0, 1, 2, 3, 4)
        assert len(experiment.weights) == 9
        assert experiment.policy == "max-trials:[1,1]"

    def test_default_path_is_stable(self):
        assert load_experiment().to_dict() == load_experiment(config.STABLE_CONFIG).to_dict()

    def test_unstable_mirrors_stable(self):
        stable = load_experiment(config.STABLE_CONFIG)
        unstable = load_experiment(config.UNSTABLE_CONFIG)
        for a, b in zip(stable.systems, unstable.systems):
            np.testing.assert_array_equal(b.drift, -a.drift)
            np.testing.assert_array_equal(b.diffusion, a.diffusion)

    def test_single_sensor(self):
        experiment = load_experiment(config.SINGLE_SENSOR_CONFIG)
        assert experiment.num_sensors == 1
        assert experiment.weights == ((1.0,),)

    @pytest.mark.parametrize("name, sizes", [
        ("stable_grids.json", [25, 36, 49, 784]),
        ("unstable_grids.json", [25, 36, 49, 784]),
    ])
    def test_bundled_grids(self, name, sizes):
        grids = load_grid(config.GRIDS_DIR / name, default_seeds=(0, 1))
        assert [grid.size for grid in grids] == sizes
        assert all(grid.seeds == (0, 1) for grid in grids)
        assert grids[0].values["max_trials"][0][-1] == math.inf


class TestExperimentFromDict:
    def test_defaults(self):
        experiment = experiment_from_dict(_minimal())
        assert experiment.delta == ConstantDelta(config.DEFAULT_DELTA)
        assert experiment.epsilon == config.DEFAULT_EPSILON
        assert experiment.num_packets == config.DEFAULT_NUM_PACKETS
        assert experiment.weights == default_weights(1)
        assert experiment.policy is None
        assert experiment.output_path == config.OUTPUT_DIR

    def test_uniform_delta(self):
        data = dict(_minimal(), delta={"uniform": [0.5, 1.5]})
        assert experiment_from_dict(data).delta == UniformDelta(0.5, 1.5)

    def test_simulation_config(self):
        experiment = experiment_from_dict(dict(_minimal(), seeds=[7, 8], num_packets=500))
        sim_config = experiment.to_simulation_config()
        assert sim_config.seed == 7
        assert sim_config.num_packets == 500
        assert experiment.to_simulation_config(seed=8, record_events=True).record_events

    @pytest.mark.parametrize("overrides", [
        dict(systems=[]),
        dict(systems="none"),
        dict(systems=[{"drift": [[-1.0]]}]),
        dict(systems=[{"drift": [[-1.0, 0.0]], "diffusion": [[1.0]]}]),
        dict(epsilon=1.0),
        dict(num_packets=2.5),
        dict(num_packets=True),
        dict(seeds=[]),
        dict(weights=[[0.5, 0.5]]),
        dict(weights=[[1.5]]),
        dict(policy="round-robin:[1]"),
        dict(delta=-1.0),
        dict(delta={"triangular": [0, 1]}),
    ])
    def test_invalid(self, overrides):
        with pytest.raises(ConfigError):
            experiment_from_dict(dict(_minimal(), **overrides))

    def test_error_names_source(self):
        with pytest.raises(ConfigError, match="my.json"):
            experiment_from_dict(dict(_minimal(), epsilon=2.0), source="my.json")

    def test_default_weights(self):
        assert default_weights(2)[0] == (0.1, 0.9)
        assert len(default_weights(2)) == 9
        assert default_weights(4) == ((0.25,) * 4,)


class TestFiles:
    def test_save_and_load(self, tmp_path):
        experiment = load_experiment(config.STABLE_CONFIG)
        path = tmp_path / "nested" / "experiment.json"
        save_experiment(experiment, path)
        assert load_experiment(path).to_dict() == experiment.to_dict()

    def test_save_uniform_delta(self, tmp_path):
        experiment = ExperimentConfig(systems=experiment_from_dict(_minimal()).systems, delta=UniformDelta(0.5, 1.5))
        path = tmp_path / "uniform.json"
        save_experiment(experiment, path)
        assert load_experiment(path).delta == UniformDelta(0.5, 1.5)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_experiment(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_experiment(_write(tmp_path / "broken.json", "{\"systems\": ["))


class TestGrids:
    def _grid_file(self, tmp_path, grids, **extra):
        return _write(tmp_path / "grids.json", dict(grids=grids, **extra))

    def test_seeds_and_cap(self, tmp_path):
        path = self._grid_file(tmp_path, [
            {"family": "individual-cap", "values": {"cap": [[0.5, 1.0], [0.5]]}, "seeds": [3]},
            {"family": "max-trials", "values": {"max_trials": [[1, "inf"], [1, "INF"]]}},
        ], cap=100)
        first, second = load_grid(path, default_seeds=(0, 1))
        assert first.seeds == (3,)
        assert second.seeds == (0, 1)
        assert first.cap == second.cap == 100
        assert [p.max_trials for p in second.policies()][-1] == (math.inf, math.inf)

    def test_grid_from_dict(self):
        grid = grid_from_dict({"family": "multiple-success", "values": {"success_quota": [[1, 2], [3]]}},
                              default_seeds=(5,))
        assert grid.size == 2
        assert [p.success_quota for p in grid.policies()] == [(1, 3), (2, 3)]

    @pytest.mark.parametrize("content", [
        {},
        {"grids": []},
        {"grids": [{"values": {"cap": [[0.5]]}}]},
        {"grids": [{"family": "aloha", "values": {"cap": [[0.5]]}}]},
        {"grids": [{"family": "individual-cap", "values": {"cap": [0.5]}}]},
        {"grids": [{"family": "individual-cap", "values": {"cap": [["half"]]}}]},
        {"grids": [{"family": "individual-cap", "values": {"threshold": [[0.5]]}}]},
    ])
    def test_invalid(self, tmp_path, content):
        with pytest.raises(ConfigError):
            load_grid(_write(tmp_path / "grids.json", content))

    def test_missing_grid_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_grid(tmp_path / "none.json")

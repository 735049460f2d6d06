import json
import os

import pandas as pd
import pytest

from nora_stabilizer.config import load_config_from_dict
from nora_stabilizer.connectors import Connector
from nora_stabilizer.engine import Engine

from conftest import DATA_INPUTS_DIRECTORY


def make_config(experiment, output_directory, **kwargs):
    return load_config_from_dict(
        {"experiment": experiment, "output_directory": output_directory, **kwargs}
    )


def read_table(path):
    with open(path, "r") as f:
        first_line = f.readline()
    assert first_line.startswith("# config: ")
    return pd.read_csv(path, skiprows=1)


def read_json(path):
    with open(path, "r") as f:
        return json.load(f)


def read_bytes(paths):
    contents = {}
    for kind, path in paths.items():
        with open(path, "rb") as f:
            contents[kind] = f.read()
    return contents


SMALL_EXPERIMENTS = [
    {"name": "distance-vs-depth", "nora": {"mode": {"fixed": {"k": 1, "L": 2}}}, "depths": [1, 2]},
    {"name": "distance-scaling", "nora": {"mode": {"syk": {"a": 0, "b": 1}}}, "sizes": [0, 1]},
    {"name": "distance-vs-k", "nora": {"mode": {"fixed": {"k": 1, "L": 2}}}, "ks": [1, 2]},
    {"name": "weights", "nora": {"mode": {"fixed": {"k": 1, "L": 2}}}, "depths": [1, 2]},
    {"name": "growth", "n": 8, "steps": 4},
    {"name": "growth", "mode": "nora", "nora": {"D": 1, "mode": {"fixed": {"k": 1, "L": 3}}}},
    {"name": "entanglement", "nora": {"mode": {"fixed": {"k": 1, "L": 2}}}},
    {"name": "report", "nora": {"mode": {"fixed": {"k": 1, "L": 2}}}},
    {"name": "entropy", "thermo": {"L": 8}, "gammas": [0.4], "points": 5},
]


class TestDistanceVsDepth:
    def test_outputs(self, output_directory):
        with open(os.path.join(DATA_INPUTS_DIRECTORY, "distance_vs_depth.json"), "r") as f:
            data = json.load(f)
        data["output_directory"] = output_directory
        written = Engine(load_config_from_dict(data)).run()
        assert sorted(written) == ["csv", "json", "svg"]
        table = read_table(written["csv"])
        assert list(table.columns) == ["D", "mean_delta", "sem_delta", "singleton_bound"]
        assert table["D"].tolist() == [1, 2]
        assert table["singleton_bound"].tolist() == [3, 3]
        assert (table["mean_delta"] >= 1).all()
        sidecar = read_json(written["json"])
        assert sidecar["experiment"] == "distance-vs-depth"
        assert sidecar["seed"] == 17
        assert "workers" not in sidecar["config"]
        assert sidecar["results"]["samples_per_size"] == 5
        with open(written["svg"], "r") as f:
            assert f.read().startswith("<svg")

    def test_estimates_respect_the_singleton_bound(self, output_directory):
        config = make_config(
            {"name": "distance-vs-depth", "nora": {"mode": {"fixed": {"k": 2, "L": 3}}}, "depths": [1, 3]},
            output_directory,
            samples=4,
            distance_samples=10,
        )
        connector = Connector("file", output_directory=output_directory)
        Engine(config, connector=connector).run()
        violations = connector.db.sql(
            "select count(*) from measurements where delta_hat > singleton_bound(N, k)"
        ).fetchone()[0]
        assert violations == 0

    def test_cap_reports_missing_estimates(self, output_directory):
        config = make_config(
            {"name": "distance-vs-depth", "nora": {"mode": {"fixed": {"k": 1, "L": 4}}}, "depths": [3]},
            output_directory,
            samples=3,
            sweep_cap=1,
            distance_samples=1,
            plot=False,
        )
        written = Engine(config).run()
        sidecar = read_json(written["json"])
        table = read_table(written["csv"])
        missing = sidecar["results"]["not_found"]["3"]
        assert 0 <= missing <= 3
        if missing == 3:
            assert table["mean_delta"].isna().all()
        else:
            assert table["mean_delta"].tolist() == [1.0]


def test_distance_scaling(output_directory):
    config = make_config(SMALL_EXPERIMENTS[1], output_directory, samples=2, distance_samples=5)
    table = read_table(Engine(config).run()["csv"])
    assert list(table.columns) == ["N", "inv_N", "mean_rel_delta", "sem", "rel_singleton"]
    assert table["N"].tolist() == [3, 6]
    assert table["inv_N"].tolist() == pytest.approx([1 / 3, 1 / 6])
    assert (table["mean_rel_delta"] <= table["rel_singleton"]).all()


def test_distance_vs_k(output_directory):
    config = make_config(SMALL_EXPERIMENTS[2], output_directory, samples=2, distance_samples=5)
    written = Engine(config).run()
    table = read_table(written["csv"])
    assert list(table.columns) == ["k", "mean_delta", "sem"]
    assert table["k"].tolist() == [1, 2]
    results = read_json(written["json"])["results"]
    assert isinstance(results["slope"], float)


def test_weights_fixed_mode(output_directory):
    config = make_config(SMALL_EXPERIMENTS[3], output_directory, samples=2)
    written = Engine(config).run()
    table = read_table(written["csv"])
    assert list(table.columns) == ["layer_or_a", "D", "weight", "rel_weight", "w_max"]
    assert sorted(table["layer_or_a"].unique()) == [0, 1, 2]
    # layer sizes 1, 3, 5 for each of two depths and two samples
    assert len(table) == 2 * 2 * (1 + 3 + 5)
    assert (table["rel_weight"] <= 1).all()
    results = read_json(written["json"])["results"]
    assert results["relative_w_max"] == pytest.approx(8 / 9)


def test_weights_syk_mode(output_directory):
    with open(os.path.join(DATA_INPUTS_DIRECTORY, "weights_syk.json"), "r") as f:
        data = json.load(f)
    data["output_directory"] = output_directory
    table = read_table(Engine(load_config_from_dict(data)).run()["csv"])
    assert sorted(table["layer_or_a"].unique()) == [1, 2]
    # final layers hold N = 6 and N = 12 sites
    assert len(table) == 2 * 2 * (6 + 12)


def test_growth_fixed_n(output_directory):
    config = make_config(SMALL_EXPERIMENTS[4], output_directory, samples=3)
    written = Engine(config).run()
    table = read_table(written["csv"])
    assert table["step"].tolist() == [0, 1, 2, 3, 4]
    assert table["mean_weight"].iloc[0] == 1
    assert table["predicted_g"].iloc[0] == pytest.approx(16 / 9)
    results = read_json(written["json"])["results"]
    assert len(results["growth_ratios"]) == 4
    assert results["w_max"] == pytest.approx(8 / 9 * 8)
    assert "equilibrium_weight" in results


def test_growth_nora_mode(output_directory):
    config = make_config(SMALL_EXPERIMENTS[5], output_directory, samples=2)
    results = read_json(Engine(config).run()["json"])["results"]
    assert [layer["n_sites"] for layer in results["layers"]] == [3, 5, 9]
    assert all(layer["mean_weight"] <= layer["n_sites"] for layer in results["layers"])


def test_entanglement(output_directory):
    config = make_config(SMALL_EXPERIMENTS[6], output_directory, samples=2, distance_samples=3)
    table = read_table(Engine(config).run()["csv"])
    assert table["size"].tolist() == [1, 2, 3, 4, 5]
    assert table["max_entropy"].tolist() == [1, 2, 3, 2, 1]
    assert (table["mean_entropy"] <= table["max_entropy"]).all()


def test_report(output_directory):
    config = make_config(SMALL_EXPERIMENTS[7], output_directory, distance_samples=10)
    written = Engine(config).run()
    assert list(written) == ["json"]
    results = read_json(written["json"])["results"]
    assert results["N"] == 5
    assert results["delta_exhaustive"] == results["delta_hat"]


def test_entropy(output_directory):
    with open(os.path.join(DATA_INPUTS_DIRECTORY, "entropy.json"), "r") as f:
        data = json.load(f)
    data["output_directory"] = output_directory
    written = Engine(load_config_from_dict(data)).run()
    assert sorted(written) == ["csv", "json"]
    table = read_table(written["csv"])
    assert list(table.columns) == ["gamma", "T", "S_exact", "S_integral", "S_gamma_bound", "C_V"]
    assert len(table) == 2 * 7
    slopes = read_json(written["json"])["results"]["slopes"]
    assert slopes["0.4"]["predicted"] == pytest.approx(0.6931471805599453 / 0.4)
    # the coldest temperatures freeze every layer and are left out of the fit
    assert 2 <= slopes["1.0"]["fitted_points"] < 7
    assert slopes["1.0"]["fitted"] == pytest.approx(0.6931471805599453, rel=0.1)


def test_nora_seed_changes_the_sampled_codes(tmp_path):
    weights = []
    for nora_seed in (0, 3):
        experiment = {
            "name": "weights",
            "nora": {"mode": {"fixed": {"k": 2, "L": 4}}, "seed": nora_seed},
            "depths": [2],
        }
        config = make_config(experiment, str(tmp_path / f"nora_{nora_seed}"), samples=2, plot=False)
        weights.append(read_table(Engine(config).run()["csv"])["weight"].tolist())
    assert len(weights[0]) == len(weights[1])
    assert weights[0] != weights[1]


@pytest.mark.parametrize(
    "experiment", SMALL_EXPERIMENTS, ids=[e["name"] + str(i) for i, e in enumerate(SMALL_EXPERIMENTS)]
)
def test_outputs_do_not_depend_on_workers(experiment, tmp_path):
    outputs = []
    for workers in (1, 2):
        directory = str(tmp_path / f"workers_{workers}")
        config = make_config(
            experiment, directory, samples=3, distance_samples=4, workers=workers, seed=5
        )
        outputs.append(read_bytes(Engine(config).run()))
    assert outputs[0] == outputs[1]

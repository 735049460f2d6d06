import json
import os

import pytest
from pydantic import ValidationError

from nora_stabilizer.config import (
    DistanceVsDepth,
    Entropy,
    ExperimentConfig,
    FixedMode,
    Growth,
    NoraParams,
    SykMode,
    experiment_config_schema,
    fixed_params,
    load_config_from_dict,
    load_experiment_from_dict,
)

from conftest import DATA_INPUTS_DIRECTORY


def load_input(file_name):
    with open(os.path.join(DATA_INPUTS_DIRECTORY, file_name), "r") as f:
        return json.load(f)


def test_defaults_follow_the_reference_setup():
    experiment = DistanceVsDepth()
    assert (experiment.nora.k, experiment.nora.L, experiment.nora.N) == (2, 7, 130)
    assert experiment.depths == [1, 2, 3, 4, 5, 6]
    assert (experiment.nora.d, experiment.nora.q, experiment.nora.r) == (3, 2, 2)


def test_mode_is_either_fixed_or_syk():
    fixed = NoraParams.model_validate({"mode": {"fixed": {"k": 3, "L": 2}}})
    syk = NoraParams.model_validate({"mode": {"syk": {"a": 2, "b": 1}}})
    assert isinstance(fixed.mode, FixedMode)
    assert isinstance(syk.mode, SykMode)
    assert (syk.k, syk.L) == (4, 3)
    with pytest.raises(ValidationError):
        NoraParams.model_validate({"mode": {"fixed": {"k": 1}, "syk": {"a": 1}}})


@pytest.mark.parametrize("d", [2, 4, 9])
def test_modulus_must_be_an_odd_prime(d):
    with pytest.raises(ValidationError):
        NoraParams(d=d)
    with pytest.raises(ValidationError):
        Growth(d=d)


def test_with_layers_in_both_modes():
    assert fixed_params(k=2, L=3).with_layers(5).L == 5
    syk = NoraParams.model_validate({"mode": {"syk": {"a": 1, "b": 2}}})
    assert syk.with_layers(3).L == 5


def test_experiments_are_discriminated_by_name():
    experiment = load_experiment_from_dict({"name": "growth", "mode": "nora"})
    assert isinstance(experiment, Growth)
    assert experiment.mode == "nora"
    with pytest.raises(ValidationError):
        load_experiment_from_dict({"name": "no-such-experiment"})


def test_unknown_fields_in_layouts_are_rejected():
    with pytest.raises(ValidationError):
        NoraParams.model_validate({"mode": {"fixed": {"k": 1, "L": 2, "depth": 3}}})


def test_entropy_range():
    with pytest.raises(ValidationError):
        Entropy(temperature_min=1.0, temperature_max=0.1)
    assert Entropy().thermo.gamma == 0.4


@pytest.mark.parametrize("name", ["distance-vs-depth", "distance-scaling", "report", "entanglement"])
def test_reference_experiments_need_logical_qudits(name):
    with pytest.raises(ValidationError, match="k >= 1"):
        load_experiment_from_dict({"name": name, "nora": {"mode": {"fixed": {"k": 0, "L": 2}}}})


def test_weights_accept_zero_logical_qudits():
    experiment = load_experiment_from_dict(
        {"name": "weights", "nora": {"mode": {"fixed": {"k": 0, "L": 2}}}}
    )
    assert experiment.nora.k == 0


def test_load_config_files():
    config = load_config_from_dict(load_input("distance_vs_depth.json"))
    assert isinstance(config, ExperimentConfig)
    assert config.experiment.nora.N == 5
    assert (config.samples, config.distance_samples, config.seed) == (3, 5, 17)
    assert config.workers == 1
    assert config.sweep_cap is None

    syk = load_config_from_dict(load_input("weights_syk.json"))
    assert syk.experiment.nora.is_syk
    assert syk.experiment.sizes == [1, 2]

    entropy = load_config_from_dict(load_input("entropy.json"))
    assert entropy.experiment.thermo.uv_scale == 1.0
    assert entropy.plot is False


def test_invalid_config_file():
    with pytest.raises(ValidationError):
        load_config_from_dict(load_input("invalid_modulus.json"))


def test_sample_counts_must_be_positive():
    with pytest.raises(ValidationError):
        ExperimentConfig(experiment={"name": "report"}, samples=0)
    with pytest.raises(ValidationError):
        ExperimentConfig(experiment={"name": "report"}, workers=0)


def test_schema_lists_every_experiment():
    schema = experiment_config_schema()
    assert schema["$schema"] == "http://json-schema.org/draft-07/schema#"
    mapping = schema["properties"]["experiment"]["discriminator"]["mapping"]
    assert sorted(mapping) == sorted(
        [
            "distance-vs-depth",
            "distance-scaling",
            "distance-vs-k",
            "weights",
            "growth",
            "entropy",
            "report",
            "entanglement",
        ]
    )

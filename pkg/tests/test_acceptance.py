"""
Large-sample checks of the published numbers. Deselected by default; run with ``pytest -m slow``.
"""

import itertools
import json
import math
import os
from collections import Counter

import numpy as np
import pandas as pd
import pytest
from scipy.stats import chisquare

from nora_stabilizer.analysis import entanglement_profile, singleton_bound
from nora_stabilizer.clifford import (
    apply_to_weyl,
    is_symplectic,
    random_symplectic,
    random_symplectic_matrix,
)
from nora_stabilizer.config import fixed_params, load_config_from_dict
from nora_stabilizer.connectors import Connector
from nora_stabilizer.dense import dense_clifford, dense_entropy, dense_weyl
from nora_stabilizer.engine import Engine
from nora_stabilizer.nora import (
    build_encoder,
    closed_form_gate_count,
    encode_with_reference,
    gate_count,
)
from nora_stabilizer.stabilizer import RegionMask, apply_local_clifford, entropy, zero_state
from nora_stabilizer.utils import make_rng
from nora_stabilizer.weyl import WeylVector, commutes, random_weyl

pytestmark = [pytest.mark.slow, pytest.mark.timeout(3600)]

WORKERS = os.cpu_count() or 1


def read_table(path):
    return pd.read_csv(path, skiprows=1)


def read_results(path):
    with open(path, "r") as f:
        return json.load(f)["results"]


@pytest.mark.parametrize("n,d", itertools.product([1, 2, 4], [3, 5]))
def test_ten_thousand_cliffords_are_symplectic(n, d, rng):
    assert all(is_symplectic(random_symplectic_matrix(n, d, rng), d) for _ in range(10_000))


def test_sampler_is_uniform_over_the_enumerated_group(rng):
    group = [
        np.array(entries, dtype=np.int64).reshape(2, 2)
        for entries in itertools.product(range(3), repeat=4)
    ]
    group = [S.tobytes() for S in group if is_symplectic(S, 3)]
    assert len(group) == 24
    counts = Counter(random_symplectic_matrix(1, 3, rng).tobytes() for _ in range(48_000))
    assert set(counts) <= set(group)
    _, p_value = chisquare([counts[element] for element in group])
    assert p_value > 0.01


def test_entropies_match_the_dense_oracle(rng):
    d = 3
    for _ in range(500):
        n = int(rng.integers(2, 7))
        tableau = zero_state(n, d)
        for _ in range(3 * n):
            sites = rng.choice(n, size=2, replace=False)
            tableau = apply_local_clifford(tableau, random_symplectic(2, d, rng), sites)
        size = int(rng.integers(1, n + 1))
        region = RegionMask.of(rng.choice(n, size=size, replace=False), n)
        expected = dense_entropy(tableau, region) * math.log(d)
        assert entropy(tableau, region) * math.log(d) == pytest.approx(expected, abs=1e-9)


def test_algebra_matches_dense_matrices(rng):
    d = 3
    for case in range(1000):
        n = 1 + case % 3
        v, w = random_weyl(n, d, rng), random_weyl(n, d, rng)
        V, W = dense_weyl(v), dense_weyl(w)
        assert dense_weyl(v * w).allclose(V @ W)
        assert commutes(v, w) == (V @ W).allclose(W @ V)
        if case % 10 == 0:
            c = random_symplectic(n, d, rng)
            U = dense_clifford(c)
            assert (U @ V @ U.dagger).allclose(dense_weyl(apply_to_weyl(c, v)))
        for u in (random_weyl(n, d, rng, phase=False), WeylVector.identity(n, d)):
            expected = d**n if u.is_identity() else 0
            assert np.trace(dense_weyl(u).matrix) == pytest.approx(expected, abs=1e-9)


def test_distance_against_depth(tmp_path):
    config = load_config_from_dict(
        {
            "experiment": {
                "name": "distance-vs-depth",
                "nora": {"D": 1, "mode": {"fixed": {"k": 2, "L": 7}}},
                "depths": [1, 3, 4],
            },
            "samples": 50,
            "distance_samples": 100,
            "seed": 2024,
            "workers": WORKERS,
            "plot": False,
            "output_directory": str(tmp_path),
        }
    )
    connector = Connector("file", output_directory=str(tmp_path))
    table = read_table(Engine(config, connector=connector).run()["csv"]).set_index("D")
    assert 62.4 <= table.loc[4, "mean_delta"] <= 66.4
    assert table.loc[1, "mean_delta"] < table.loc[3, "mean_delta"]
    assert (table["singleton_bound"] == singleton_bound(130, 2)).all()
    violations = connector.db.sql(
        "select count(*) from measurements where delta_hat > singleton_bound(N, k)"
    ).fetchone()[0]
    assert violations == 0


def test_distance_decreases_with_k(tmp_path):
    config = load_config_from_dict(
        {
            "experiment": {
                "name": "distance-vs-k",
                "nora": {"D": 3, "mode": {"fixed": {"k": 1, "L": 6}}},
                "ks": list(range(1, 9)),
            },
            "samples": 100,
            "distance_samples": 100,
            "seed": 2024,
            "workers": WORKERS,
            "plot": False,
            "output_directory": str(tmp_path),
        }
    )
    written = Engine(config).run()
    means = read_table(written["csv"])["mean_delta"].to_numpy()
    assert (np.diff(means) < 0).all()
    assert read_results(written["json"])["slope"] < 0


def test_growth_factor_and_equilibrium(tmp_path):
    config = load_config_from_dict(
        {
            "experiment": {"name": "growth", "n": 128, "steps": 30},
            "samples": 50,
            "seed": 2024,
            "workers": WORKERS,
            "plot": False,
            "output_directory": str(tmp_path),
        }
    )
    results = read_results(Engine(config).run()["json"])
    assert results["dilute_growth_factor"] == pytest.approx(16 / 9, rel=0.05)
    assert results["equilibrium_weight"] == pytest.approx(8 / 9 * 128, rel=0.02)


def test_constructed_gate_counts_match_the_closed_form():
    rng = make_rng(13)
    for _ in range(20):
        r = int(rng.choice([2, 3]))
        p = fixed_params(
            k=r * int(rng.integers(1, 4)),
            L=int(rng.integers(1, 7)),
            D=int(rng.integers(1, 4)),
            q=r,
            r=r,
        )
        constructed = sum(circuit.gate_count for circuit in build_encoder(p, rng))
        assert constructed == gate_count(p) == closed_form_gate_count(p)


def test_volume_law_at_depth_three():
    encoded = encode_with_reference(fixed_params(k=2, L=5, D=3), make_rng(21))
    profile = entanglement_profile(encoded, [1, 2, 4, 8, 12, 16], samples=50, seed=3)
    for point in profile:
        assert np.mean(point.entropies) >= 0.8 * point.max_entropy
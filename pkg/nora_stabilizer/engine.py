"""
Runs the configured experiment: draws the samples, aggregates them in duckdb and hands tables,
reports and plots to the output connector.

Each sample owns the random stream (seed, point, sample); encoding circuits also mix in the
seed of their NoRA parameters. Aggregation follows task order, so the outputs do not depend on
the number of workers.
"""

from __future__ import annotations

import math
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, Dict, List, Sequence

import numpy as np
import pandas as pd

from nora_stabilizer.analysis import (
    entanglement_profile,
    fixed_size_growth,
    growth_formulas,
    growth_ratios,
    max_weight,
    monte_carlo_distance,
    nora_growth,
    singleton_bound,
    code_report,
    weight_histogram_by_layer,
)
from nora_stabilizer.config import (
    DistanceScaling,
    DistanceVsDepth,
    DistanceVsK,
    Entanglement,
    Entropy,
    ExperimentConfig,
    Growth,
    NoraParams,
    Weights,
)
from nora_stabilizer.connectors import Connector
from nora_stabilizer.nora import encode_with_reference, layer_sizes
from nora_stabilizer.plots import Series, line_plot
from nora_stabilizer.thermo import (
    entropy_continuum,
    entropy_curve,
    log_log_slope,
    temperature_grid,
)
from nora_stabilizer.utils import canonical_json, get_logger, make_rng

logger = get_logger()

DILUTE_FRACTION = 0.25
EQUILIBRIUM_FRACTION = 0.25

# execution details that never change the results
RUN_ONLY_FIELDS = {"workers", "output_directory"}

SweepPoint = namedtuple(typename="SweepPoint", field_names=["index", "value", "params"])


def distance_sample(
    params: NoraParams,
    distance_samples: int,
    sweep_cap: int | None,
    seed: int,
    point: int,
    sample: int,
) -> dict:
    encoded = encode_with_reference(params, params.circuit_rng(seed, point, sample, 0))
    estimate = monte_carlo_distance(
        encoded, distance_samples, seed=[seed, point, sample, 1], cap=sweep_cap
    )
    return {
        "N": params.N,
        "k": params.k,
        "delta_hat": estimate.delta_hat,
    }


def weights_sample(params: NoraParams, final_only: bool, seed: int, point: int, sample: int):
    layers = weight_histogram_by_layer(params, params.circuit_rng(seed, point, sample))
    if final_only:
        layers = layers[-1:]
    return [
        {
            "layer": layer.layer,
            "n_sites": layer.n_sites,
            "weight": weight,
            "w_max": layer.w_max,
        }
        for layer in layers
        for weight in layer.weights
    ]


def growth_sample(experiment: Growth, seed: int, point: int, sample: int) -> dict:
    if experiment.mode == "nora":
        rng = experiment.nora.circuit_rng(seed, point, sample)
        trajectory = nora_growth(experiment.nora, rng)
    else:
        rng = make_rng(seed, point, sample)
        trajectory = fixed_size_growth(
            experiment.n, experiment.steps, experiment.d, experiment.q, rng
        )
    return trajectory._asdict()


def entanglement_sample(
    params: NoraParams,
    sizes: Sequence[int],
    regions: int,
    seed: int,
    point: int,
    sample: int,
) -> List[dict]:
    encoded = encode_with_reference(params, params.circuit_rng(seed, point, sample, 0))
    profile = entanglement_profile(encoded, sizes, regions, seed=[seed, point, sample, 1])
    return [
        {"size": entry.size, "n_total": encoded.tableau.n, "entropy": value}
        for entry in profile
        for value in entry.entropies
    ]


class Engine:
    """
    Dispatches on the experiment name; every ``run_*`` method writes a CSV table, a JSON
    sidecar and optionally an SVG plot, and returns the written paths.
    """

    def __init__(self, config: ExperimentConfig, connector=None):
        self.config = config
        self.experiment = config.experiment
        self.connector = connector or Connector(
            "file", output_directory=config.output_directory
        )

    @property
    def db(self):
        return self.connector.db

    @property
    def recorded_config(self) -> dict:
        return self.config.model_dump(mode="json", exclude=RUN_ONLY_FIELDS)

    @property
    def config_json(self) -> str:
        return canonical_json(self.recorded_config)

    @property
    def output_name(self) -> str:
        return self.experiment.name.replace("-", "_")

    def sidecar(self, **results) -> dict:
        return {
            "config": self.recorded_config,
            "experiment": self.experiment.name,
            "seed": self.config.seed,
            "results": results,
        }

    def write(self, frame: pd.DataFrame, results: dict, plot: Callable[[], str]) -> Dict[str, str]:
        name = self.output_name
        written = {
            "csv": self.connector.write_table(name, frame, self.config_json),
            "json": self.connector.write_report(name, self.sidecar(**results)),
        }
        if self.config.plot:
            written["svg"] = self.connector.write_plot(name, plot())
        return written

    def plot(self, series, title, x_label, y_label, **kwargs) -> str:
        return line_plot(
            series,
            title=title,
            x_label=x_label,
            y_label=y_label,
            metadata=self.config_json,
            **kwargs,
        )

    def run(self) -> Dict[str, str]:
        logger.info(f"Running {self.experiment.name} with seed {self.config.seed}")
        runner = getattr(self, f"run_{self.output_name}")
        written = runner()
        logger.info(f"Finished {self.experiment.name}")
        return written

    def _distance_frame(self, points: List[SweepPoint], column: str) -> pd.DataFrame:
        distance = partial(
            distance_sample,
            distance_samples=self.config.distance_samples,
            sweep_cap=self.config.sweep_cap,
        )
        outcomes = self._run_distance_points(distance, points)
        rows = [
            dict(row, **{column: point.value})
            for point, samples in zip(points, _chunks(outcomes, self.config.samples))
            for row in samples
        ]
        frame = pd.DataFrame(rows, columns=list(dict.fromkeys([column, "N", "k", "delta_hat"])))
        frame = frame.astype({"delta_hat": "Int64"})
        self._check_singleton_bound(frame)
        return frame

    def _run_distance_points(self, distance: Callable, points: List[SweepPoint]) -> List[dict]:
        tasks = [
            partial(
                distance,
                point.params,
                seed=self.config.seed,
                point=point.index,
                sample=sample,
            )
            for point in points
            for sample in range(self.config.samples)
        ]
        for point in points:
            logger.info(
                f"Distance point {point.value}: N={point.params.N}, k={point.params.k}, "
                f"D={point.params.D}, {self.config.samples} samples"
            )
        return self._execute(tasks)

    def _execute(self, tasks: List[Callable]) -> List:
        if self.config.workers > 1:
            with ProcessPoolExecutor(max_workers=self.config.workers) as executor:
                return list(executor.map(_call, tasks))
        return [task() for task in tasks]

    def _check_singleton_bound(self, frame: pd.DataFrame):
        found = frame.dropna(subset=["delta_hat"])
        bounds = [singleton_bound(N, k) for N, k in zip(found["N"], found["k"])]
        violations = sum(
            int(delta) > bound for delta, bound in zip(found["delta_hat"], bounds)
        )
        if violations:
            logger.error(f"{violations} distance estimates exceed the singleton bound")
        missing = int(frame["delta_hat"].isna().sum())
        if missing:
            logger.warning(f"{missing} samples found no leaking region up to the sweep cap")

    def run_distance_vs_depth(self) -> Dict[str, str]:
        experiment: DistanceVsDepth = self.experiment
        points = [
            SweepPoint(index, D, experiment.nora.with_depth(D))
            for index, D in enumerate(experiment.depths)
        ]
        self.connector.load_measurements(self._distance_frame(points, "D"))
        summary = self.connector.summarize(
            group_by=["D", "N", "k"],
            value_columns=["delta_hat"],
            extra_columns=["singleton_bound(N, k) as singleton_bound"],
        )
        frame = pd.DataFrame(
            {
                "D": summary["D"],
                "mean_delta": summary["mean_delta_hat"],
                "sem_delta": summary["sem_delta_hat"],
                "singleton_bound": summary["singleton_bound"],
            }
        )
        return self.write(
            frame,
            results={
                "not_found": _not_found(summary, "delta_hat"),
                "samples_per_size": self.config.distance_samples,
            },
            plot=lambda: self.plot(
                [
                    Series("mean delta", frame["D"].tolist(), frame["mean_delta"].tolist()),
                    Series(
                        "singleton bound",
                        frame["D"].tolist(),
                        frame["singleton_bound"].tolist(),
                        dashed=True,
                        markers=False,
                    ),
                ],
                title=f"Code distance against depth (N={experiment.nora.N}, k={experiment.nora.k})",
                x_label="D",
                y_label="delta",
            ),
        )

    def run_distance_scaling(self) -> Dict[str, str]:
        experiment: DistanceScaling = self.experiment
        points = [
            SweepPoint(index, value, experiment.nora.with_layers(value))
            for index, value in enumerate(experiment.sizes)
        ]
        self.connector.load_measurements(self._distance_frame(points, "size"))
        self.db.execute(
            "create or replace view relative_distances as "
            f"select *, delta_hat / N as rel_delta from {self.connector.table_name}"
        )
        summary = self.connector.summarize(
            group_by=["N", "k"],
            value_columns=["rel_delta"],
            extra_columns=[
                "1.0 / N as inv_N",
                "singleton_bound(N, k) / N as rel_singleton",
            ],
            table_name="relative_distances",
        )
        frame = pd.DataFrame(
            {
                "N": summary["N"],
                "inv_N": summary["inv_N"],
                "mean_rel_delta": summary["mean_rel_delta"],
                "sem": summary["sem_rel_delta"],
                "rel_singleton": summary["rel_singleton"],
            }
        )
        return self.write(
            frame,
            results={
                "mode": "syk" if experiment.nora.is_syk else "fixed",
                "not_found": _not_found(summary, "rel_delta", key="N"),
            },
            plot=lambda: self.plot(
                [
                    Series(
                        "mean delta/N", frame["inv_N"].tolist(), frame["mean_rel_delta"].tolist()
                    ),
                    Series(
                        "singleton bound / N",
                        frame["inv_N"].tolist(),
                        frame["rel_singleton"].tolist(),
                        dashed=True,
                    ),
                ],
                title="Relative code distance against 1/N",
                x_label="1/N",
                y_label="delta/N",
            ),
        )

    def run_distance_vs_k(self) -> Dict[str, str]:
        experiment: DistanceVsK = self.experiment
        points = [
            SweepPoint(index, k, experiment.nora.with_k(k))
            for index, k in enumerate(experiment.ks)
        ]
        self.connector.load_measurements(self._distance_frame(points, "k"))
        summary = self.connector.summarize(group_by=["k"], value_columns=["delta_hat"])
        frame = pd.DataFrame(
            {
                "k": summary["k"],
                "mean_delta": summary["mean_delta_hat"],
                "sem": summary["sem_delta_hat"],
            }
        )
        fitted = frame.dropna()
        slope, intercept = (
            np.polyfit(fitted["k"].to_numpy(float), fitted["mean_delta"].to_numpy(float), 1)
            if len(fitted) >= 2
            else (None, None)
        )
        return self.write(
            frame,
            results={
                "slope": None if slope is None else float(slope),
                "intercept": None if intercept is None else float(intercept),
                "not_found": _not_found(summary, "delta_hat", key="k"),
            },
            plot=lambda: self.plot(
                [Series("mean delta", frame["k"].tolist(), frame["mean_delta"].tolist())],
                title=f"Code distance against k (L={experiment.nora.L}, D={experiment.nora.D})",
                x_label="k",
                y_label="delta",
            ),
        )

    def run_weights(self) -> Dict[str, str]:
        experiment: Weights = self.experiment
        syk = experiment.nora.is_syk
        if syk:
            sizes = experiment.sizes or [experiment.nora.mode.syk.a]
        else:
            sizes = [None]
        points = [
            SweepPoint(
                index,
                (D, size),
                (
                    experiment.nora.with_depth(D).with_layers(size)
                    if syk
                    else experiment.nora.with_depth(D)
                ),
            )
            for index, (D, size) in enumerate((D, size) for D in experiment.depths for size in sizes)
        ]
        tasks = [
            partial(
                weights_sample,
                point.params,
                syk,
                seed=self.config.seed,
                point=point.index,
                sample=sample,
            )
            for point in points
            for sample in range(self.config.samples)
        ]
        rows = []
        for point, samples in zip(points, _chunks(self._execute(tasks), self.config.samples)):
            D, size = point.value
            for row in (row for sample_rows in samples for row in sample_rows):
                rows.append(
                    {
                        "layer_or_a": size if syk else row["layer"],
                        "D": D,
                        "weight": row["weight"],
                        "rel_weight": row["weight"] / row["n_sites"],
                        "w_max": row["w_max"],
                    }
                )
        frame = pd.DataFrame(rows, columns=["layer_or_a", "D", "weight", "rel_weight", "w_max"])
        self.connector.load_measurements(frame)
        summary = self.connector.summarize(
            group_by=["layer_or_a", "D"], value_columns=["rel_weight"]
        )
        relative_maximum = max_weight(1, experiment.nora.d)
        return self.write(
            frame,
            results={
                "mode": "syk" if syk else "fixed",
                "relative_w_max": relative_maximum,
                "mean_rel_weight": [
                    {
                        "layer_or_a": int(layer),
                        "D": int(D),
                        "mean": float(mean),
                        "sem": float(sem),
                    }
                    for layer, D, mean, sem in zip(
                        summary["layer_or_a"],
                        summary["D"],
                        summary["mean_rel_weight"],
                        summary["sem_rel_weight"],
                    )
                ],
            },
            plot=lambda: self.plot(
                [
                    Series(
                        f"D={D}",
                        group["layer_or_a"].tolist(),
                        group["mean_rel_weight"].tolist(),
                    )
                    for D, group in summary.groupby("D", sort=True)
                ]
                + [
                    Series(
                        "(d^2-1)/d^2",
                        summary["layer_or_a"].tolist(),
                        [relative_maximum] * len(summary),
                        dashed=True,
                        markers=False,
                    )
                ],
                title="Mean relative stabilizer weight",
                x_label="a" if syk else "layer",
                y_label="weight / n",
            ),
        )

    def run_growth(self) -> Dict[str, str]:
        experiment: Growth = self.experiment
        if experiment.mode == "nora":
            params = experiment.nora
            d, q, r, n = params.d, params.q, params.r, params.N
        else:
            d, q, r, n = experiment.d, experiment.q, experiment.nora.r, experiment.n
        trajectories = self._execute(
            [
                partial(
                    growth_sample, experiment, seed=self.config.seed, point=0, sample=sample
                )
                for sample in range(self.config.samples)
            ]
        )
        rows = [
            {"step": step, "n_sites": size, "weight": weight}
            for trajectory in trajectories
            for step, (weight, size) in enumerate(
                zip(trajectory["weights"], trajectory["sizes"])
            )
        ]
        self.connector.load_measurements(pd.DataFrame(rows, columns=["step", "n_sites", "weight"]))
        summary = self.connector.summarize(group_by=["step", "n_sites"], value_columns=["weight"])
        formulas = growth_formulas(d, q, r, n)
        frame = pd.DataFrame(
            {
                "step": summary["step"],
                "mean_weight": summary["mean_weight"],
                "sem": summary["sem_weight"],
                "predicted_g": formulas.g,
                "D_max_g": formulas.D_max,
                "D_max_q": formulas.D_max_q,
            }
        )
        mean_weights = frame["mean_weight"].tolist()
        ratios = growth_ratios(mean_weights)
        dilute = [
            ratio
            for ratio, before in zip(ratios, mean_weights[:-1])
            if before < DILUTE_FRACTION * n
        ]
        results = {
            "growth_ratios": ratios,
            "dilute_growth_factor": float(np.exp(np.mean(np.log(dilute)))) if dilute else None,
            "predicted_g": formulas.g,
            "D_max_g": formulas.D_max,
            "D_max_q": formulas.D_max_q,
            "D_min": formulas.D_min,
            "w_max": max_weight(n, d),
        }
        if experiment.mode == "nora":
            results["layers"] = _layer_growth(summary, experiment.nora)
        else:
            tail = max(1, int(len(mean_weights) * EQUILIBRIUM_FRACTION))
            results["equilibrium_weight"] = float(np.mean(mean_weights[-tail:]))
        return self.write(
            frame,
            results=results,
            plot=lambda: self.plot(
                [
                    Series("mean weight", frame["step"].tolist(), mean_weights),
                    Series(
                        "g^step",
                        frame["step"].tolist(),
                        [min(formulas.g**step, n) for step in frame["step"]],
                        dashed=True,
                        markers=False,
                    ),
                ],
                title=f"Weight of a single Weyl string (d={d}, q={q})",
                x_label="sub-layer",
                y_label="weight",
                log_y=True,
            ),
        )

    def run_entropy(self) -> Dict[str, str]:
        experiment: Entropy = self.experiment
        temperatures = temperature_grid(
            experiment.temperature_min, experiment.temperature_max, experiment.points
        )
        curves = []
        slopes = {}
        for gamma in experiment.gammas:
            thermo = experiment.thermo.with_gamma(gamma)
            logger.info(f"Entropy curve for gamma={gamma}")
            curve = entropy_curve(thermo, temperatures)
            curve.insert(0, "gamma", gamma)
            curves.append(curve)
            excess = curve["S_exact"] - thermo.k * math.log(thermo.d)
            in_regime = curve["T"].map(
                lambda T: entropy_continuum(thermo.with_temperature(float(T)), warn=False).valid
            )
            usable = (excess > 0) & in_regime
            slopes[str(gamma)] = {
                "predicted": thermo.alpha / gamma,
                "fitted_points": int(usable.sum()),
                "fitted": (
                    log_log_slope(curve["T"][usable], excess[usable])
                    if usable.sum() >= 2
                    else None
                ),
            }
        frame = pd.concat(curves, ignore_index=True)
        ground = experiment.thermo.k * math.log(experiment.thermo.d)
        return self.write(
            frame,
            results={"slopes": slopes, "ground_entropy": ground},
            plot=lambda: self.plot(
                [
                    Series(
                        f"exact, gamma={gamma}",
                        group["T"].tolist(),
                        (group["S_exact"] - ground).tolist(),
                        markers=False,
                    )
                    for gamma, group in frame.groupby("gamma", sort=True)
                ]
                + [
                    Series(
                        f"gamma bound, gamma={gamma}",
                        group["T"].tolist(),
                        (group["S_gamma_bound"] - ground).tolist(),
                        dashed=True,
                        markers=False,
                    )
                    for gamma, group in frame.groupby("gamma", sort=True)
                ],
                title="Entropy above the ground-space degeneracy",
                x_label="T / Lambda",
                y_label="S - k ln d",
                log_x=True,
                log_y=True,
            ),
        )

    def run_report(self) -> Dict[str, str]:
        report = code_report(
            self.experiment.nora, self.config.distance_samples, self.config.seed
        )
        path = self.connector.write_report(
            self.output_name, self.sidecar(**report.model_dump(mode="json"))
        )
        return {"json": path}

    def run_entanglement(self) -> Dict[str, str]:
        experiment: Entanglement = self.experiment
        params = experiment.nora
        sizes = experiment.sizes or list(range(1, params.N + 1))
        tasks = [
            partial(
                entanglement_sample,
                params,
                sizes,
                self.config.distance_samples,
                seed=self.config.seed,
                point=0,
                sample=sample,
            )
            for sample in range(self.config.samples)
        ]
        rows = [row for sample_rows in self._execute(tasks) for row in sample_rows]
        self.connector.load_measurements(
            pd.DataFrame(rows, columns=["size", "n_total", "entropy"])
        )
        summary = self.connector.summarize(
            group_by=["size", "n_total"],
            value_columns=["entropy"],
            extra_columns=["least(size, n_total - size) as max_entropy"],
        )
        frame = pd.DataFrame(
            {
                "size": summary["size"],
                "mean_entropy": summary["mean_entropy"],
                "sem": summary["sem_entropy"],
                "max_entropy": summary["max_entropy"],
            }
        )
        return self.write(
            frame,
            results={"N": params.N, "k": params.k, "regions_per_size": self.config.distance_samples},
            plot=lambda: self.plot(
                [
                    Series("mean S(A)", frame["size"].tolist(), frame["mean_entropy"].tolist()),
                    Series(
                        "min(|A|, n - |A|)",
                        frame["size"].tolist(),
                        frame["max_entropy"].tolist(),
                        dashed=True,
                        markers=False,
                    ),
                ],
                title=f"Entanglement of physical regions (N={params.N}, k={params.k})",
                x_label="|A|",
                y_label="S(A) / log d",
            ),
        )


def _call(task: Callable):
    return task()


def _chunks(items: Sequence, size: int) -> List[Sequence]:
    return [items[start : start + size] for start in range(0, len(items), size)]


def _not_found(summary: pd.DataFrame, column: str, key: str = "D") -> dict:
    missing = summary["samples"] - summary[f"count_{column}"]
    return {str(value): int(count) for value, count in zip(summary[key], missing)}


def _layer_growth(summary: pd.DataFrame, params: NoraParams) -> List[dict]:
    """Mean weight at the end of each NoRA layer against (d^2 - 1)/d^2 n_l."""
    sizes = layer_sizes(params).sizes
    layers = []
    for layer, n_sites in enumerate(sizes[1:], start=1):
        step = layer * params.D
        mean = float(summary.loc[summary["step"] == step, "mean_weight"].iloc[0])
        w_max = max_weight(n_sites, params.d)
        layers.append(
            {
                "layer": layer,
                "n_sites": n_sites,
                "mean_weight": mean,
                "w_max": w_max,
                "relative_gap": (w_max - mean) / w_max,
            }
        )
    return layers

"""
Command line entry point: ``nora <experiment> [--config file.json] [overrides]``.

Exit status is 0 on success, 2 for usage and configuration errors and 1 when an experiment fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from nora_stabilizer.config import (
    ExperimentConfig,
    experiment_config_schema,
    load_experiment_from_dict,
)
from nora_stabilizer.engine import Engine
from nora_stabilizer.utils import get_logger

logger = get_logger()

EXIT_OK = 0
EXIT_RUNTIME_ERROR = 1
EXIT_CONFIG_ERROR = 2

NORA_EXPERIMENTS = {
    "distance-vs-depth",
    "distance-scaling",
    "distance-vs-k",
    "weights",
    "growth",
    "report",
    "entanglement",
}


class ConfigError(Exception):
    pass


def int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected comma-separated integers, got {text!r}")


def float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected comma-separated numbers, got {text!r}")


def common_arguments() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", help="JSON experiment configuration file.")
    parser.add_argument("--seed", type=int, help="Master seed.")
    parser.add_argument("--samples", type=int, help="Samples (seeds) per sweep point.")
    parser.add_argument(
        "--distance-samples",
        type=int,
        help="Regions drawn per region size (distance) or per state (entanglement).",
    )
    parser.add_argument("--sweep-cap", type=int, help="Largest region size the distance sweep tries.")
    parser.add_argument("--out", help="Output directory.")
    parser.add_argument(
        "--plot",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Write an SVG plot next to the CSV.",
    )
    parser.add_argument("--workers", type=int, help="Worker processes.")
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Overrides the LOG_LEVEL environment variable.",
    )
    return parser


def nora_arguments() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("encoder")
    group.add_argument("--d", type=int, help="Qudit dimension (odd prime).")
    group.add_argument("--q", type=int, help="Gate arity.")
    group.add_argument("--r", type=int, help="Growth rate.")
    group.add_argument("--D", type=int, help="Depth per layer.")
    group.add_argument("--k", type=int, help="Logical qudits (fixed mode).")
    group.add_argument("--L", type=int, help="Layers (fixed mode).")
    group.add_argument("--a", type=int, help="k = r^a (SYK mode).")
    group.add_argument("--b", type=int, help="L = a + b (SYK mode).")
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nora",
        description="Random NoRA stabilizer codes: distances, weights, growth and thermodynamics.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common, nora = common_arguments(), nora_arguments()

    depth = subparsers.add_parser(
        "distance-vs-depth", parents=[common, nora], help="Mean distance against D."
    )
    depth.add_argument("--depths", type=int_list, help="Comma-separated depths.")

    scaling = subparsers.add_parser(
        "distance-scaling", parents=[common, nora], help="Relative distance against 1/N."
    )
    scaling.add_argument("--sizes", type=int_list, help="Values of L (fixed) or a (SYK).")

    by_k = subparsers.add_parser(
        "distance-vs-k", parents=[common, nora], help="Mean distance against k."
    )
    by_k.add_argument("--ks", type=int_list, help="Comma-separated k values.")

    weights = subparsers.add_parser(
        "weights", parents=[common, nora], help="Stabilizer weights per layer."
    )
    weights.add_argument("--depths", type=int_list, help="Comma-separated depths.")
    weights.add_argument("--sizes", type=int_list, help="Values of a (SYK mode).")

    growth = subparsers.add_parser(
        "growth", parents=[common, nora], help="Weight growth of a single Weyl string."
    )
    growth.add_argument("--mode", choices=["fixed-n", "nora"])
    growth.add_argument("--n", type=int, help="System size in fixed-n mode.")
    growth.add_argument("--steps", type=int, help="Sub-layers in fixed-n mode.")

    entropy = subparsers.add_parser(
        "entropy", parents=[common], help="Gibbs entropy against temperature."
    )
    thermo = entropy.add_argument_group("hamiltonian")
    thermo.add_argument("--d", type=int)
    thermo.add_argument("--k", type=int)
    thermo.add_argument("--L", type=int)
    thermo.add_argument("--r", type=int)
    thermo.add_argument("--Lambda", type=float, help="UV energy scale.")
    thermo.add_argument("--alpha", type=float, help="Density exponent (default ln r).")
    thermo.add_argument("--gammas", type=float_list, help="Comma-separated decay rates.")
    thermo.add_argument("--t-min", type=float, help="Lowest temperature.")
    thermo.add_argument("--t-max", type=float, help="Highest temperature.")
    thermo.add_argument("--points", type=int, help="Temperatures on the log grid.")

    subparsers.add_parser("report", parents=[common, nora], help="JSON code report.")

    entanglement = subparsers.add_parser(
        "entanglement", parents=[common, nora], help="Entropy of random physical regions."
    )
    entanglement.add_argument("--sizes", type=int_list, help="Region sizes.")

    subparsers.add_parser("schema", help="Print the configuration JSON schema.")
    return parser


def read_config_file(file_path: Optional[str]) -> dict:
    if not file_path:
        return {}
    try:
        with open(file_path, "r", encoding="utf-8") as file:
            return json.load(file)
    except (OSError, json.JSONDecodeError) as error:
        raise ConfigError(f"Cannot read config {file_path}: {error}")


def _set(target: dict, key: str, value):
    if value is not None:
        target[key] = value


def apply_nora_overrides(nora: dict, args: argparse.Namespace):
    for key in ("d", "q", "r", "D"):
        _set(nora, key, getattr(args, key, None))
    mode = nora.get("mode", {})
    if getattr(args, "k", None) is not None or getattr(args, "L", None) is not None:
        fixed = dict(mode.get("fixed", {}))
        _set(fixed, "k", args.k)
        _set(fixed, "L", args.L)
        nora["mode"] = {"fixed": fixed}
    if getattr(args, "a", None) is not None or getattr(args, "b", None) is not None:
        syk = dict(mode.get("syk", {}))
        _set(syk, "a", args.a)
        _set(syk, "b", args.b)
        nora["mode"] = {"syk": syk}


def apply_experiment_overrides(experiment: dict, args: argparse.Namespace):
    name = experiment["name"]
    if name in NORA_EXPERIMENTS:
        apply_nora_overrides(experiment["nora"], args)
    if name == "entropy":
        thermo = experiment["thermo"]
        for key in ("d", "k", "L", "r"):
            _set(thermo, key, getattr(args, key, None))
        _set(thermo, "uv_scale", args.Lambda)
        _set(thermo, "density_exponent", args.alpha)
        _set(experiment, "gammas", args.gammas)
        _set(experiment, "temperature_min", args.t_min)
        _set(experiment, "temperature_max", args.t_max)
        _set(experiment, "points", args.points)
    for key in ("depths", "sizes", "ks", "n", "steps"):
        _set(experiment, key, getattr(args, key, None))
    if name == "growth":
        _set(experiment, "mode", args.mode)
        # the growth experiment's own d and q drive fixed-n mode
        _set(experiment, "d", args.d)
        _set(experiment, "q", args.q)


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file first, then command line overrides; defaults fill the rest."""
    data = read_config_file(args.config)
    experiment = dict(data.get("experiment", {}))
    if experiment.get("name", args.command) != args.command:
        raise ConfigError(
            f"Config file describes {experiment['name']!r} but {args.command!r} was requested"
        )
    experiment["name"] = args.command
    experiment = load_experiment_from_dict(experiment).model_dump(mode="json")
    apply_experiment_overrides(experiment, args)
    data["experiment"] = experiment
    _set(data, "seed", args.seed)
    _set(data, "samples", args.samples)
    _set(data, "distance_samples", args.distance_samples)
    _set(data, "sweep_cap", args.sweep_cap)
    _set(data, "output_directory", args.out)
    _set(data, "plot", args.plot)
    _set(data, "workers", args.workers)
    return ExperimentConfig.model_validate(data)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:
        return EXIT_OK if stop.code == 0 else EXIT_CONFIG_ERROR
    if args.command == "schema":
        print(json.dumps(experiment_config_schema(), indent=2))
        return EXIT_OK
    if args.log_level:
        logging.getLogger("nora_stabilizer").setLevel(args.log_level)
    try:
        config = build_config(args)
    except (ConfigError, ValidationError) as error:
        logger.error(f"Invalid configuration: {error}")
        return EXIT_CONFIG_ERROR
    try:
        written = Engine(config).run()
    except Exception as error:
        logger.exception(f"{args.command} failed: {error}")
        return EXIT_RUNTIME_ERROR
    for kind, path in sorted(written.items()):
        print(f"{kind}: {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

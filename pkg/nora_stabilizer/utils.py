import os
import json
import logging
from typing import Iterable, Sequence

import numpy as np
from jinja2 import Environment, PackageLoader

ENVIRONMENT_LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")


def get_logger(name: str = "nora_stabilizer"):
    logger = logging.getLogger(name=name)
    logger.setLevel(getattr(logging, ENVIRONMENT_LOG_LEVEL))
    formatter = logging.Formatter(
        "%(asctime)s-%(filename)s:%(lineno)d-%(levelname)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    if logger.hasHandlers():
        logger.handlers.clear()
    logger.addHandler(console_handler)
    return logger


class NoraError(Exception):
    """Base class for errors raised by this package."""


class DimensionMismatchError(NoraError, ValueError):
    """Operands disagree on site count, modulus or shape."""


class NotInvertibleError(NoraError, ZeroDivisionError):
    pass


class RegionError(NoraError, ValueError):
    """A region or site list is malformed: duplicates, out of range or overlapping."""


class OracleCapExceededError(NoraError, MemoryError):
    pass


class EnumerationLimitError(NoraError, ValueError):
    pass


class LayerSizeOverflowError(NoraError, OverflowError):
    pass


SeedLike = int | Sequence[int]


def seed_keys(seed: SeedLike) -> list:
    if isinstance(seed, (int, np.integer)):
        return [int(seed)]
    return [int(s) for s in seed]


def make_rng(seed: SeedLike, *stream: int) -> np.random.Generator:
    """
    A generator for the stream (seed..., *stream).

    Every parallel task derives its own stream from the master seed plus its task index,
    so results never depend on which worker ran which task.
    """
    return np.random.default_rng(np.random.SeedSequence(seed_keys(seed) + list(stream)))


def canonical_json(data: dict) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def svg_number(value: float) -> str:
    return f"{value:.2f}"


def format_tick(value: float) -> str:
    if value == 0:
        return "0"
    if abs(value) >= 1e4 or abs(value) < 1e-2:
        return f"{value:.1e}"
    return f"{value:.3g}"


def points_attribute(points: Iterable) -> str:
    return " ".join(f"{svg_number(x)},{svg_number(y)}" for x, y in points)


nora_jinja_env = Environment(
    loader=PackageLoader("nora_stabilizer"),
    trim_blocks=True,
    lstrip_blocks=True,
)
nora_jinja_env.filters.update(
    {
        "identifier": lambda column: f'''"{column.replace('"', '')}"''',
        "list_of_identifiers": lambda columns: ", ".join(
            f'''"{column.replace('"', '')}"''' for column in columns
        ),
        "svg_number": svg_number,
        "tick": format_tick,
        "points": points_attribute,
    }
)

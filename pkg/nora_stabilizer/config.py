"""
Configuration schema
"""

import math
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import (
    AfterValidator,
    AliasChoices,
    BaseModel,
    ConfigDict,
    Field,
    TypeAdapter,
    model_validator,
)

from nora_stabilizer.field import validate_modulus
from nora_stabilizer.utils import SeedLike, make_rng, seed_keys

DEFAULT_DEPTHS = [1, 2, 3, 4, 5, 6]
DEFAULT_KS = [1, 2, 3, 4, 5, 6, 7, 8]
DEFAULT_GAMMAS = [0.1, 0.4, 1.0]


class FixedLayout(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    k: Annotated[
        int, Field(ge=0, description="Number of logical (ground-state) qudits.")
    ] = 2
    L: Annotated[
        int,
        Field(ge=0, description="Number of layers; layer l holds n_l = k + r^l qudits."),
    ] = 7


class SykLayout(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    a: Annotated[
        int, Field(ge=0, description="Logical qudits scale as k = r^a.")
    ] = 2
    b: Annotated[
        int,
        Field(
            ge=0,
            description="Layers beyond a: L = a + b, N = r^a + r^(a+b), rate 1/(1 + r^b).",
        ),
    ] = 1


class FixedMode(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    fixed: FixedLayout = Field(default_factory=FixedLayout)


class SykMode(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    syk: SykLayout = Field(default_factory=SykLayout)


class NoraParams(BaseModel):
    """
    Discrete data of a NoRA encoder. ``mode`` is either ``{"fixed": {"k": .., "L": ..}}`` or
    ``{"syk": {"a": .., "b": ..}}``.
    """

    model_config = ConfigDict(frozen=True)

    d: Annotated[
        int,
        AfterValidator(validate_modulus),
        Field(description="Qudit dimension, an odd prime."),
    ] = 3
    q: Annotated[int, Field(ge=2, description="Gate arity.")] = 2
    r: Annotated[int, Field(ge=2, description="Growth rate of the layer sizes.")] = 2
    D: Annotated[
        int, Field(ge=1, description="Depth (number of sub-layers) of every layer.")
    ] = 3
    mode: Annotated[
        Union[FixedMode, SykMode],
        Field(description="Fixed k and L, or the SYK scaling k = r^a, L = a + b."),
    ] = Field(default_factory=FixedMode)
    seed: Annotated[
        int, Field(ge=0, description="Seed of the encoding circuit, mixed into the master seed.")
    ] = 0

    @model_validator(mode="after")
    def check_not_empty(self):
        if self.N == 0:
            raise ValueError("k = 0 with L = 0 leaves no qudits")
        return self

    @property
    def is_syk(self) -> bool:
        return isinstance(self.mode, SykMode)

    @property
    def k(self) -> int:
        return self.r**self.mode.syk.a if self.is_syk else self.mode.fixed.k

    @property
    def L(self) -> int:
        if self.is_syk:
            return self.mode.syk.a + self.mode.syk.b
        return self.mode.fixed.L

    @property
    def N(self) -> int:
        """k + r^L physical qudits; L = 0 leaves the k logical qudits alone."""
        return self.k + (self.r**self.L if self.L else 0)

    @property
    def rate(self) -> float:
        return self.k / self.N

    def with_layers(self, value: int) -> "NoraParams":
        """L in fixed mode, a in SYK mode."""
        if self.is_syk:
            layout = self.mode.syk.model_copy(update={"a": value})
            return self.model_copy(update={"mode": SykMode(syk=layout)})
        layout = self.mode.fixed.model_copy(update={"L": value})
        return self.model_copy(update={"mode": FixedMode(fixed=layout)})

    def with_k(self, k: int) -> "NoraParams":
        if self.is_syk:
            raise ValueError("k is derived from a in the SYK scaling mode")
        layout = self.mode.fixed.model_copy(update={"k": k})
        return self.model_copy(update={"mode": FixedMode(fixed=layout)})

    def with_depth(self, D: int) -> "NoraParams":
        return self.model_copy(update={"D": D})

    def with_seed(self, seed: int) -> "NoraParams":
        return self.model_copy(update={"seed": seed})

    def circuit_rng(self, seed: SeedLike, *stream: int) -> np.random.Generator:
        """The encoder's gate stream: the master seed, this code's own seed, then ``stream``."""
        return make_rng(seed_keys(seed) + [self.seed], *stream)


def fixed_params(k: int = 2, L: int = 7, **kwargs) -> NoraParams:
    return NoraParams(mode=FixedMode(fixed=FixedLayout(k=k, L=L)), **kwargs)


def syk_params(a: int = 2, b: int = 1, **kwargs) -> NoraParams:
    return NoraParams(mode=SykMode(syk=SykLayout(a=a, b=b)), **kwargs)


class ThermoParams(BaseModel):
    """
    The layered stabilizer Hamiltonian: Δn_l ancilla projectors at energy
    J_l = Lambda exp(-gamma (L - l)). Entropies are in nats.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    d: Annotated[int, Field(ge=2, description="Qudit dimension; d=2 is allowed here.")] = 2
    k: Annotated[int, Field(ge=0, description="Ground-space qudits.")] = 1
    L: Annotated[int, Field(ge=1, description="Number of layers.")] = 20
    r: Annotated[int, Field(ge=2, description="Growth rate, N - k = r^L.")] = 2
    uv_scale: Annotated[
        float,
        Field(
            gt=0,
            description="UV energy scale Lambda, the energy of the last layer.",
            validation_alias=AliasChoices("Lambda", "uv_scale"),
        ),
    ] = 1.0
    decay_rate: Annotated[
        float,
        Field(
            gt=0,
            description="Energy decay rate gamma per layer towards the IR.",
            validation_alias=AliasChoices("gamma", "decay_rate"),
        ),
    ] = 0.4
    density_exponent: Annotated[
        Optional[float],
        Field(
            gt=0,
            description="Density-of-states exponent alpha; defaults to ln r.",
            validation_alias=AliasChoices("alpha", "density_exponent"),
        ),
    ] = None
    beta: Annotated[
        Optional[float], Field(gt=0, description="Inverse temperature.")
    ] = None
    temperature: Annotated[
        Optional[float],
        Field(
            gt=0,
            description="Temperature T = 1/beta.",
            validation_alias=AliasChoices("T", "temperature"),
        ),
    ] = None

    @model_validator(mode="after")
    def check_one_temperature(self):
        if self.beta is not None and self.temperature is not None:
            if not math.isclose(self.beta * self.temperature, 1.0, rel_tol=1e-12):
                raise ValueError("Specify either beta or T, not two inconsistent values")
        return self

    @property
    def alpha(self) -> float:
        return self.density_exponent if self.density_exponent is not None else math.log(self.r)

    @property
    def gamma(self) -> float:
        return self.decay_rate

    @property
    def Lambda(self) -> float:
        return self.uv_scale

    @property
    def inverse_temperature(self) -> float:
        if self.beta is not None:
            return self.beta
        if self.temperature is not None:
            return 1.0 / self.temperature
        return 1.0

    @property
    def T(self) -> float:
        return 1.0 / self.inverse_temperature

    @property
    def N(self) -> int:
        return self.k + self.r**self.L

    def with_temperature(self, temperature: float) -> "ThermoParams":
        return self.model_copy(update={"temperature": temperature, "beta": None})

    def with_beta(self, beta: float) -> "ThermoParams":
        return self.model_copy(update={"beta": beta, "temperature": None})

    def with_gamma(self, gamma: float) -> "ThermoParams":
        return self.model_copy(update={"decay_rate": gamma})


def check_encodes_logical_qudits(p: NoraParams) -> NoraParams:
    """Distances and reference entanglement need at least one logical qudit to protect."""
    if p.k < 1:
        raise ValueError(f"This experiment needs k >= 1 logical qudits, got k={p.k}")
    return p


EncodingParams = Annotated[NoraParams, AfterValidator(check_encodes_logical_qudits)]

class Experiment(BaseModel):
    name: str


class DistanceVsDepth(Experiment):
    """Mean code distance against the layer depth D at fixed k and L."""

    name: Literal["distance-vs-depth"] = "distance-vs-depth"
    nora: EncodingParams = Field(default_factory=lambda: fixed_params(k=2, L=7))
    depths: Annotated[
        List[Annotated[int, Field(ge=1)]],
        Field(min_length=1, description="Depths D to sweep."),
    ] = DEFAULT_DEPTHS


class DistanceScaling(Experiment):
    """Relative distance against 1/N, sweeping L (fixed mode) or a (SYK mode)."""

    name: Literal["distance-scaling"] = "distance-scaling"
    nora: EncodingParams = Field(default_factory=lambda: syk_params(a=1, b=1))
    sizes: Annotated[
        List[Annotated[int, Field(ge=0)]],
        Field(min_length=1, description="Values of L in fixed mode or of a in SYK mode."),
    ] = [1, 2, 3, 4, 5]


class DistanceVsK(Experiment):
    name: Literal["distance-vs-k"] = "distance-vs-k"
    nora: NoraParams = Field(default_factory=lambda: fixed_params(k=2, L=6))
    ks: Annotated[
        List[Annotated[int, Field(ge=1)]],
        Field(min_length=2, description="Numbers of logical qudits to sweep."),
    ] = DEFAULT_KS


class Weights(Experiment):
    """Stabilizer weight distributions per layer (fixed mode) or per a (SYK mode)."""

    name: Literal["weights"] = "weights"
    nora: NoraParams = Field(default_factory=lambda: fixed_params(k=2, L=6))
    depths: Annotated[
        List[Annotated[int, Field(ge=1)]], Field(min_length=1)
    ] = [1, 2, 3]
    sizes: Annotated[
        Optional[List[Annotated[int, Field(ge=0)]]],
        Field(description="Values of a to sweep in SYK mode; ignored in fixed mode."),
    ] = None


class Growth(Experiment):
    """Weight growth of a single weight-1 string under random sub-layers."""

    name: Literal["growth"] = "growth"
    mode: Annotated[
        Literal["fixed-n", "nora"],
        Field(description="Scramble n fixed qudits, or follow the growing NoRA layers."),
    ] = "fixed-n"
    d: Annotated[int, AfterValidator(validate_modulus)] = 3
    q: Annotated[int, Field(ge=2)] = 2
    n: Annotated[int, Field(ge=2, description="System size in fixed-n mode.")] = 128
    steps: Annotated[int, Field(ge=1, description="Sub-layers in fixed-n mode.")] = 30
    nora: NoraParams = Field(
        default_factory=lambda: fixed_params(k=2, L=6),
        description="Encoder used in nora mode (its d and q take precedence).",
    )


class Entropy(Experiment):
    name: Literal["entropy"] = "entropy"
    thermo: ThermoParams = Field(default_factory=ThermoParams)
    gammas: Annotated[
        List[Annotated[float, Field(gt=0)]], Field(min_length=1)
    ] = DEFAULT_GAMMAS
    temperature_min: Annotated[float, Field(gt=0)] = 1e-6
    temperature_max: Annotated[float, Field(gt=0)] = 1.0
    points: Annotated[int, Field(ge=2)] = 61

    @model_validator(mode="after")
    def check_range(self):
        if self.temperature_min >= self.temperature_max:
            raise ValueError("temperature_min must be below temperature_max")
        return self


class Report(Experiment):
    name: Literal["report"] = "report"
    nora: EncodingParams = Field(default_factory=lambda: fixed_params(k=2, L=4))


class Entanglement(Experiment):
    """Mean entropy of random physical regions per region size."""

    name: Literal["entanglement"] = "entanglement"
    nora: EncodingParams = Field(default_factory=lambda: fixed_params(k=2, L=5))
    sizes: Annotated[
        Optional[List[Annotated[int, Field(ge=1)]]],
        Field(description="Region sizes; defaults to 1..N."),
    ] = None


ExperimentDefinition = Annotated[
    Union[
        DistanceVsDepth,
        DistanceScaling,
        DistanceVsK,
        Weights,
        Growth,
        Entropy,
        Report,
        Entanglement,
    ],
    Field(discriminator="name"),
]


class ExperimentConfig(BaseModel):
    """
    A full run: which experiment, with what parameters, how many samples and where to write.
    """

    experiment: ExperimentDefinition
    samples: Annotated[
        int,
        Field(
            ge=1,
            description="Independent samples (seeds) per sweep point.",
        ),
    ] = 8
    distance_samples: Annotated[
        int,
        Field(
            ge=1,
            description="Monte-Carlo regions drawn per region size (samples_per_size).",
        ),
    ] = 20
    sweep_cap: Annotated[
        Optional[int],
        Field(
            ge=1,
            description="Largest region size the distance sweep tries; defaults to the singleton bound.",
        ),
    ] = None
    seed: Annotated[int, Field(ge=0, description="Master seed.")] = 0
    output_directory: Annotated[
        str, Field(description="Directory receiving CSV, JSON and SVG outputs.")
    ] = "output"
    plot: Annotated[bool, Field(description="Whether to write an SVG plot.")] = True
    workers: Annotated[
        int,
        Field(ge=1, description="Worker processes; outputs do not depend on it."),
    ] = 1


def load_experiment_from_dict(data: dict) -> Experiment:
    return TypeAdapter(ExperimentDefinition).validate_python(data)


def load_config_from_dict(data: dict) -> ExperimentConfig:
    return ExperimentConfig.model_validate(data)


def experiment_config_schema() -> dict:
    return {
        "$schema": "http://json-schema.org/draft-07/schema#",
    } | ExperimentConfig.model_json_schema()

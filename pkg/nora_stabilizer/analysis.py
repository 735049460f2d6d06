"""
Code-property measurements on encoded NoRA states: distance, stabilizer weights, operator growth,
RREF weight reduction and entanglement.

Distances follow the decoupling definition: delta is the size of the smallest set A of physical
qudits with I(A, R) > 0, R being the reference entangled with the logical qudits.
"""

from __future__ import annotations

import itertools
import math
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Annotated, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from nora_stabilizer.clifford import random_symplectic
from nora_stabilizer.config import NoraParams
from nora_stabilizer.field import get_field
from nora_stabilizer.nora import (
    EncodedState,
    closed_form_gate_count,
    encode_with_reference,
    encode_zero_state,
    gate_count,
    layer_sizes,
)
from nora_stabilizer.stabilizer import (
    StabilizerTableau,
    commuting_phase_defect,
    entropy,
    row_weights,
    site_columns,
)
from nora_stabilizer.utils import EnumerationLimitError, SeedLike, get_logger, make_rng
from nora_stabilizer.weyl import WeylVector, weights_of

logger = get_logger()

EXHAUSTIVE_SITE_LIMIT = 16

LayerWeights = namedtuple(
    typename="LayerWeights", field_names=["layer", "n_sites", "weights", "w_max"]
)
GrowthTrajectory = namedtuple(typename="GrowthTrajectory", field_names=["weights", "sizes"])
GrowthFormulas = namedtuple(
    typename="GrowthFormulas", field_names=["g", "D_max", "D_max_q", "D_min"]
)
RegimeClassification = namedtuple(
    typename="RegimeClassification",
    field_names=["regime", "c", "g_D", "R_L", "ell_star"],
)
EntropyProfilePoint = namedtuple(
    typename="EntropyProfilePoint", field_names=["size", "entropies", "max_entropy"]
)


def singleton_bound(N: int, k: int) -> int:
    """floor((N - k)/2) + 1; N = k (no ancillas) gives 1."""
    if N < k:
        raise ValueError(f"N={N} must be at least k={k}")
    return (N - k) // 2 + 1


def max_weight(n_sites: int, d: int) -> float:
    """Mean weight of a uniformly random Weyl string, (d^2 - 1)/d^2 * n."""
    return (d * d - 1) / (d * d) * n_sites


@dataclass(frozen=True)
class SizeSweep:
    size: int
    samples: int
    violations: int
    exhaustive: bool


@dataclass(frozen=True)
class DistanceEstimate:
    """
    ``delta_hat`` is None when no leaking region was found up to ``cap``; that is reported
    apart from any distance value.
    """

    delta_hat: Optional[int]
    N: int
    k: int
    cap: int
    sweeps: Tuple[SizeSweep, ...] = field(default_factory=tuple)
    seed: Optional[Tuple[int, ...]] = None

    @property
    def found(self) -> bool:
        return self.delta_hat is not None

    @property
    def is_exhaustive(self) -> bool:
        return self.found and all(sweep.exhaustive for sweep in self.sweeps)

    @property
    def relative(self) -> Optional[float]:
        return None if self.delta_hat is None else self.delta_hat / self.N


class _LeakTest:
    """I(A, R) > 0 for physical regions A, with S(R) computed once."""

    def __init__(self, e: EncodedState):
        self.e = e
        self.reference_entropy = entropy(e.tableau, e.reference_mask)

    def __call__(self, local_sites: Sequence[int]) -> bool:
        region = self.e.physical_region(local_sites)
        tableau = self.e.tableau
        mutual = (
            entropy(tableau, region)
            + self.reference_entropy
            - entropy(tableau, region.union(self.e.reference_mask))
        )
        return mutual > 0


def exhaustive_distance(
    e: EncodedState, site_limit: int = EXHAUSTIVE_SITE_LIMIT
) -> DistanceEstimate:
    if e.N > site_limit:
        raise EnumerationLimitError(
            f"Exhaustive distance enumerates subsets of N={e.N} > {site_limit} sites"
        )
    leaks = _LeakTest(e)
    sweeps = []
    for size in range(1, e.N + 1):
        checked = 0
        for sites in itertools.combinations(range(e.N), size):
            checked += 1
            if leaks(sites):
                sweeps.append(SizeSweep(size, checked, 1, True))
                return DistanceEstimate(size, e.N, e.k, e.N, tuple(sweeps))
        sweeps.append(SizeSweep(size, checked, 0, True))
    # the full physical system always carries the logical information
    raise AssertionError("no leaking region on the full system")  # pragma: no cover


def monte_carlo_distance(
    e: EncodedState,
    samples_per_size: int,
    seed: SeedLike,
    cap: Optional[int] = None,
) -> DistanceEstimate:
    """
    Sweeps s = 1, 2, ... up to ``cap`` (default: the singleton bound), drawing
    ``samples_per_size`` uniform size-s subsets from the stream (seed, s) and stopping at the
    first leaking one. Sizes with at most ``samples_per_size`` subsets are enumerated instead.
    """
    if samples_per_size < 1:
        raise ValueError(f"samples_per_size must be positive, got {samples_per_size}")
    if cap is None:
        cap = singleton_bound(e.N, e.k)
    elif cap < 1:
        raise ValueError(f"cap must be at least 1, got {cap}")
    cap = min(cap, e.N)
    leaks = _LeakTest(e)
    seed_tuple = tuple(np.atleast_1d(seed).tolist())
    sweeps = []
    for size in range(1, cap + 1):
        exhaustive = samples_per_size >= math.comb(e.N, size)
        if exhaustive:
            regions = itertools.combinations(range(e.N), size)
        else:
            rng = make_rng(seed, size)
            regions = (
                rng.choice(e.N, size=size, replace=False) for _ in range(samples_per_size)
            )
        checked = 0
        for sites in regions:
            checked += 1
            if leaks(sites):
                sweeps.append(SizeSweep(size, checked, 1, exhaustive))
                return DistanceEstimate(size, e.N, e.k, cap, tuple(sweeps), seed_tuple)
        sweeps.append(SizeSweep(size, checked, 0, exhaustive))
    logger.warning(
        f"No leaking region of size <= {cap} found for N={e.N}, k={e.k} "
        f"with {samples_per_size} samples per size"
    )
    return DistanceEstimate(None, e.N, e.k, cap, tuple(sweeps), seed_tuple)


def weight_histogram_by_layer(
    p: NoraParams, rng: np.random.Generator
) -> List[LayerWeights]:
    """Row weights of the encoded logical |0...0> after every layer, layer 0 included."""
    recorded = []

    def record(layer: int, tableau: StabilizerTableau):
        recorded.append(
            LayerWeights(
                layer=layer,
                n_sites=tableau.n,
                weights=row_weights(tableau),
                w_max=max_weight(tableau.n, p.d),
            )
        )

    encode_zero_state(p, rng, after_layer=record)
    return recorded


def single_site_operator(
    n: int, d: int, rng: np.random.Generator, site: int = 0
) -> WeylVector:
    """A uniformly random non-identity Weyl operator on one site."""
    components = np.zeros(2 * n, dtype=np.int64)
    while not components.any():
        components[2 * site : 2 * site + 2] = rng.integers(0, d, size=2)
    return WeylVector(components, d)


def operator_growth(
    initial: WeylVector,
    schedule: Sequence[Tuple[int, int]],
    q: int,
    rng: np.random.Generator,
) -> GrowthTrajectory:
    """
    Heisenberg evolution of one Weyl string under random sub-layers.

    ``schedule`` lists (n_sites, depth) stages: each sub-layer permutes the first n_sites sites
    and applies random q-site Cliffords to consecutive blocks. Blocks acting on the identity
    leave it invariant, so gates are only drawn for blocks meeting the support. The returned
    weights start with the initial weight and add one entry per sub-layer.
    """
    d = initial.d
    n_total = max([initial.n] + [n_sites for n_sites, _ in schedule])
    vector = np.zeros(2 * n_total, dtype=np.int64)
    vector[: 2 * initial.n] = initial.components
    weights = [int(weights_of(vector))]
    sizes = [initial.n]
    for n_sites, depth in schedule:
        blocks = n_sites // q
        for _ in range(depth):
            permutation = rng.permutation(n_sites)
            for block in range(blocks):
                sites = permutation[block * q : (block + 1) * q]
                columns = site_columns(sites)
                if not vector[columns].any():
                    continue
                gate = random_symplectic(q, d, rng)
                vector[columns] = np.mod(gate.S @ vector[columns], d)
            weights.append(int(weights_of(vector)))
            sizes.append(n_sites)
    return GrowthTrajectory(weights=weights, sizes=sizes)


def fixed_size_growth(
    n: int, steps: int, d: int, q: int, rng: np.random.Generator
) -> GrowthTrajectory:
    return operator_growth(single_site_operator(n, d, rng), [(n, steps)], q, rng)


def nora_growth(p: NoraParams, rng: np.random.Generator) -> GrowthTrajectory:
    """A weight-1 operator on a logical site, grown through the NoRA layers with depth D each."""
    sizes = layer_sizes(p).sizes[1:]
    initial = single_site_operator(max(p.k, 1), p.d, rng)
    return operator_growth(initial, [(n_sites, p.D) for n_sites in sizes], p.q, rng)


def growth_ratios(weights: Sequence[float]) -> List[float]:
    """w_t / w_{t-1} for consecutive steps."""
    return [
        float(after) / float(before) for before, after in zip(weights[:-1], weights[1:])
    ]


def growth_formulas(d: int, q: int, r: int, n: int, w0: float = 1) -> GrowthFormulas:
    g = q * (d * d - 1) / (d * d)
    return GrowthFormulas(
        g=g,
        D_max=math.log(n / w0, g),
        D_max_q=math.log(n / w0, q),
        D_min=math.log(r, g),
    )


def rref_reduce(t: StabilizerTableau) -> StabilizerTableau:
    """
    Generators replaced by the reduced row echelon form of the generator matrix.

    Rows commute, so products of generators add phases linearly; carrying the phases as an
    augmented column keeps every new row a group element with its correct phase.
    """
    if t.k_gen == 0:
        return t
    assert commuting_phase_defect(t) == 0, "rows must commute pairwise"
    augmented = np.hstack([t.generators, t.phases[:, None]])
    reduced, pivots = get_field(t.d).row_reduce(augmented, pivot_limit=2 * t.n)
    reduced = reduced[: len(pivots)]
    result = StabilizerTableau(reduced[:, :-1], reduced[:, -1], t.d)
    logger.debug(
        f"RREF mean row weight {np.mean(row_weights(t)):.2f} -> "
        f"{np.mean(row_weights(result)):.2f}"
    )
    return result


def crossover_ratio(layer: int, k: int, r: int) -> float:
    """R_l = 1 + (r - 1)/(1 + k / r^(l-1)), the layer size ratio n_l / n_{l-1}."""
    return 1 + (r - 1) / (1 + k / r ** (layer - 1))


def syk_regime_classifier(p: NoraParams) -> RegimeClassification:
    """
    Saturating when g^D > r, so that distances grow linearly in N, dilute otherwise, with
    distances scaling as N^c, c = ln g^D / ln r. ``ell_star`` is the layer where g^D = R_l, when
    g^D lies between 1 and R_L.
    """
    if not p.is_syk:
        raise ValueError("The regime classification applies to the SYK scaling mode")
    g = growth_formulas(p.d, p.q, p.r, n=1).g
    g_D = g**p.D
    c = math.log(g_D) / math.log(p.r)
    R_L = crossover_ratio(p.L, p.k, p.r)
    ell_star = None
    if p.k > 0 and 1 < g_D < R_L:
        ratio = (p.r - 1) / (g_D - 1) - 1
        ell_star = 1 + math.log(p.k / ratio, p.r)
    regime = "saturating" if g_D > p.r else "dilute"
    return RegimeClassification(regime=regime, c=c, g_D=g_D, R_L=R_L, ell_star=ell_star)


def entanglement_profile(
    e: EncodedState, sizes: Sequence[int], samples: int, seed: SeedLike
) -> List[EntropyProfilePoint]:
    """
    Entropies S(A), in units of log d, of ``samples`` random physical regions per size, drawn
    from the stream (seed, size).
    """
    total = e.tableau.n
    points = []
    for size in sizes:
        if not 1 <= size <= e.N:
            raise ValueError(f"Region size {size} outside [1, {e.N}]")
        rng = make_rng(seed, size)
        entropies = [
            entropy(
                e.tableau,
                e.physical_region(rng.choice(e.N, size=size, replace=False)),
            )
            for _ in range(samples)
        ]
        points.append(
            EntropyProfilePoint(
                size=size, entropies=entropies, max_entropy=min(size, total - size)
            )
        )
    return points


class LayerWeightSummary(BaseModel):
    layer: int
    n_sites: int
    mean_weight: float
    max_weight: int
    w_max: float
    histogram: Dict[int, int]


class CodeReport(BaseModel):
    """Properties of one sampled NoRA code."""

    params: NoraParams
    N: int
    k: int
    rate: Annotated[float, Field(description="k/N")]
    singleton_bound: int
    samples_per_size: int
    seed: int
    delta_hat: Annotated[
        Optional[int],
        Field(description="Monte-Carlo distance; null when no leaking region was found."),
    ]
    delta_exhaustive: Annotated[
        Optional[int], Field(description="Exact distance, computed when N <= 16.")
    ] = None
    relative_distance: Optional[float] = None
    gate_count: int
    closed_form_gate_count: Optional[int] = None
    mean_weight: float
    mean_weight_rref: float
    layers: List[LayerWeightSummary]
    regime: Optional[str] = None
    regime_exponent: Optional[float] = None


def _summarize_layer(layer: LayerWeights) -> LayerWeightSummary:
    values, counts = np.unique(layer.weights, return_counts=True)
    return LayerWeightSummary(
        layer=layer.layer,
        n_sites=layer.n_sites,
        mean_weight=float(np.mean(layer.weights)),
        max_weight=int(max(layer.weights)),
        w_max=layer.w_max,
        histogram={int(v): int(c) for v, c in zip(values, counts)},
    )


def code_report(p: NoraParams, samples_per_size: int, seed: int) -> CodeReport:
    encoded = encode_with_reference(p, p.circuit_rng(seed, 0))
    estimate = monte_carlo_distance(encoded, samples_per_size, seed=[seed, 1])
    exact = (
        exhaustive_distance(encoded).delta_hat if p.N <= EXHAUSTIVE_SITE_LIMIT else None
    )
    layers = weight_histogram_by_layer(p, p.circuit_rng(seed, 2))
    classification = syk_regime_classifier(p) if p.is_syk else None
    return CodeReport(
        params=p,
        N=p.N,
        k=p.k,
        rate=p.k / p.N,
        singleton_bound=singleton_bound(p.N, p.k),
        samples_per_size=samples_per_size,
        seed=seed,
        delta_hat=estimate.delta_hat,
        delta_exhaustive=exact,
        relative_distance=estimate.relative,
        gate_count=gate_count(p),
        closed_form_gate_count=closed_form_gate_count(p),
        mean_weight=float(np.mean(row_weights(encoded.tableau))),
        mean_weight_rref=float(np.mean(row_weights(rref_reduce(encoded.tableau)))),
        layers=[_summarize_layer(layer) for layer in layers],
        regime=classification.regime if classification else None,
        regime_exponent=classification.c if classification else None,
    )

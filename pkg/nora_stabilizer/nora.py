"""
NoRA encoding circuits.

Layer l acts on the n_l = k + r^l sites present at that point: the k logical qudits plus all
ancillas added so far. Each of its D sub-layers draws a uniform permutation and then applies
independent random q-site Cliffords to consecutive blocks of the permuted order; the last
n_l mod q sites of the order stay idle.

In an encoded state the k reference qudits come first, followed by the N physical qudits whose
first k sites are the logical ones.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from nora_stabilizer.clifford import SymplecticClifford, random_symplectic
from nora_stabilizer.config import NoraParams
from nora_stabilizer.stabilizer import (
    RegionMask,
    StabilizerTableau,
    append_ancillas,
    apply_local_inplace,
    bell_pairs,
    zero_state,
)
from nora_stabilizer.utils import LayerSizeOverflowError, get_logger

logger = get_logger()

INT64_LIMIT = 2**62

LayerSizes = namedtuple(typename="LayerSizes", field_names=["sizes", "increments"])


@dataclass(frozen=True)
class Gate:
    sites: Tuple[int, ...]
    clifford: SymplecticClifford


@dataclass(frozen=True)
class SubLayer:
    permutation: Tuple[int, ...]
    gates: Tuple[Gate, ...]

    @property
    def idle_sites(self) -> Tuple[int, ...]:
        used = sum(len(gate.sites) for gate in self.gates)
        return self.permutation[used:]


@dataclass(frozen=True)
class LayerCircuit:
    n_sites: int
    sublayers: Tuple[SubLayer, ...]

    @property
    def gate_count(self) -> int:
        return sum(len(sublayer.gates) for sublayer in self.sublayers)


@dataclass(frozen=True)
class EncodedState:
    tableau: StabilizerTableau
    reference_mask: RegionMask
    physical_mask: RegionMask
    params: NoraParams

    @property
    def k(self) -> int:
        return len(self.reference_mask)

    @property
    def N(self) -> int:
        return len(self.physical_mask)

    def physical_region(self, local_sites) -> RegionMask:
        """Physical sites given by their index in [0, N)."""
        return RegionMask.of((self.k + int(site) for site in local_sites), self.tableau.n)


def layer_sizes(p: NoraParams) -> LayerSizes:
    if p.L and p.L * math.log2(p.r) >= math.log2(INT64_LIMIT):
        raise LayerSizeOverflowError(f"r^L = {p.r}^{p.L} does not fit in 64-bit integers")
    sizes = [p.k + p.r**layer for layer in range(1, p.L + 1)]
    increments = [p.r] + [(p.r - 1) * p.r ** (layer - 1) for layer in range(2, p.L + 1)]
    return LayerSizes(sizes=[p.k] + sizes, increments=increments[: p.L])


def build_layer(n_sites: int, p: NoraParams, rng: np.random.Generator) -> LayerCircuit:
    blocks = n_sites // p.q
    sublayers = []
    for _ in range(p.D):
        permutation = tuple(int(site) for site in rng.permutation(n_sites))
        gates = tuple(
            Gate(
                sites=permutation[block * p.q : (block + 1) * p.q],
                clifford=random_symplectic(p.q, p.d, rng),
            )
            for block in range(blocks)
        )
        sublayers.append(SubLayer(permutation=permutation, gates=gates))
    return LayerCircuit(n_sites=n_sites, sublayers=tuple(sublayers))


def build_encoder(p: NoraParams, rng: np.random.Generator) -> List[LayerCircuit]:
    sizes = layer_sizes(p).sizes
    return [build_layer(n_sites, p, rng) for n_sites in sizes[1:]]


def apply_layer(
    generators: np.ndarray,
    phases: np.ndarray,
    circuit: LayerCircuit,
    d: int,
    offset: int = 0,
) -> None:
    for sublayer in circuit.sublayers:
        for gate in sublayer.gates:
            sites = [offset + site for site in gate.sites]
            apply_local_inplace(generators, phases, gate.clifford, sites, d)


def run_encoder(
    initial: StabilizerTableau,
    p: NoraParams,
    circuits: List[LayerCircuit],
    offset: int = 0,
    after_layer: Optional[Callable[[int, StabilizerTableau], None]] = None,
) -> StabilizerTableau:
    """
    Grows ``initial`` layer by layer: append the layer's ancillas, then apply its circuit to
    the sites starting at ``offset``. ``after_layer(layer, tableau)`` sees every intermediate
    state, layer 0 included.
    """
    increments = layer_sizes(p).increments
    tableau = initial
    if after_layer:
        after_layer(0, tableau)
    for layer, (increment, circuit) in enumerate(zip(increments, circuits), start=1):
        tableau = append_ancillas(tableau, increment)
        generators = tableau.generators.copy()
        phases = tableau.phases.copy()
        apply_layer(generators, phases, circuit, p.d, offset=offset)
        tableau = StabilizerTableau(generators, phases, p.d)
        if after_layer:
            after_layer(layer, tableau)
    return tableau


def encode_with_reference(
    p: NoraParams, rng: np.random.Generator, scramble: bool = True
) -> EncodedState:
    """
    k Bell pairs between reference site i and logical site i, the layer ancillas in |0>, and
    the encoder applied to the physical sites only. ``scramble=False`` skips the gates.
    """
    if p.k < 1:
        raise ValueError("Encoding against a reference needs k >= 1")
    circuits = build_encoder(p, rng)
    if not scramble:
        circuits = [LayerCircuit(circuit.n_sites, ()) for circuit in circuits]
    tableau = run_encoder(bell_pairs(p.k, p.d), p, circuits, offset=p.k)
    total = tableau.n
    logger.debug(f"Encoded [[{p.N}, {p.k}]] state on {total} sites including the reference")
    return EncodedState(
        tableau=tableau,
        reference_mask=RegionMask.interval(0, p.k, total),
        physical_mask=RegionMask.interval(p.k, total, total),
        params=p,
    )


def encode_zero_state(
    p: NoraParams,
    rng: np.random.Generator,
    after_layer: Optional[Callable[[int, StabilizerTableau], None]] = None,
) -> StabilizerTableau:
    """The encoder applied to the logical |0...0>, without a reference."""
    circuits = build_encoder(p, rng)
    return run_encoder(zero_state(p.k, p.d), p, circuits, after_layer=after_layer)


def gate_count(p: NoraParams) -> int:
    """Gates in the constructed encoder: D * floor(n_l / q) summed over layers."""
    return sum(p.D * (n_sites // p.q) for n_sites in layer_sizes(p).sizes[1:])


def closed_form_gate_count(p: NoraParams) -> Optional[int]:
    """(D/q)(L k + (r^{L+1} - r)/(r - 1)); None unless q divides every n_l."""
    sizes = layer_sizes(p).sizes[1:]
    if any(n_sites % p.q for n_sites in sizes):
        return None
    total_sites = p.L * p.k + (p.r ** (p.L + 1) - p.r) // (p.r - 1)
    return p.D * total_sites // p.q


def leading_gate_count(p: NoraParams) -> float:
    """D N log_r N / (q (1 + r^b)), the leading term in the SYK scaling."""
    if not p.is_syk:
        raise ValueError("The N log N gate count applies to the SYK scaling mode")
    b = p.mode.syk.b
    return p.D * p.N * math.log(p.N, p.r) / (p.q * (1 + p.r**b))


def subleading_gate_coefficient(p: NoraParams) -> float:
    """
    c = [b - log_r(1 + r^b) + r^{b+1}/(r-1)] / (1 + r^b), so that
    gate_count = leading + (D/q)(c N - r/(r-1)) whenever q divides every n_l.
    """
    if not p.is_syk:
        raise ValueError("The N log N gate count applies to the SYK scaling mode")
    r, b = p.r, p.mode.syk.b
    return (b - math.log(1 + r**b, r) + r ** (b + 1) / (r - 1)) / (1 + r**b)

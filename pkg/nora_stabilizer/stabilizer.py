"""
Stabilizer tableaus over GF(d).

A tableau holds k_gen independent, pairwise commuting generator rows of GF(d)^{2n} and one
chi-exponent per row: the state (or code space) is fixed by chi^phase_i w(g_i) for every i.
Because rows commute, chi^{c·phases} w(c·G) is the group element for coefficient vector c, so the
phase column behaves like one more column under row operations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from nora_stabilizer.clifford import SymplecticClifford
from nora_stabilizer.field import frozen, get_field, validate_modulus
from nora_stabilizer.utils import DimensionMismatchError, RegionError
from nora_stabilizer.weyl import (
    WeylVector,
    symplectic_form_matrix,
    symplectic_products,
    weights_of,
)

SERIALIZATION_HEADER = "# nora-stabilizer tableau"


@dataclass(frozen=True)
class RegionMask:
    """An explicit set of sites out of n; the complement is implied."""

    sites: tuple
    n: int

    def __post_init__(self):
        sites = tuple(sorted(int(site) for site in self.sites))
        if len(set(sites)) != len(sites):
            raise RegionError(f"Duplicate sites in region {sites}")
        if sites and (sites[0] < 0 or sites[-1] >= self.n):
            raise RegionError(f"Region {sites} outside [0, {self.n})")
        object.__setattr__(self, "sites", sites)

    @classmethod
    def of(cls, sites: Iterable[int], n: int) -> "RegionMask":
        return cls(tuple(sites), n)

    @classmethod
    def interval(cls, start: int, stop: int, n: int) -> "RegionMask":
        return cls(tuple(range(start, stop)), n)

    def __len__(self):
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    @property
    def complement(self) -> "RegionMask":
        inside = set(self.sites)
        return RegionMask(tuple(s for s in range(self.n) if s not in inside), self.n)

    @property
    def columns(self) -> np.ndarray:
        sites = np.array(self.sites, dtype=np.int64)
        return np.stack([2 * sites, 2 * sites + 1], axis=1).reshape(-1)

    def union(self, other: "RegionMask") -> "RegionMask":
        self._check_same_system(other)
        return RegionMask(tuple(set(self.sites) | set(other.sites)), self.n)

    def isdisjoint(self, other: "RegionMask") -> bool:
        return set(self.sites).isdisjoint(other.sites)

    def _check_same_system(self, other: "RegionMask"):
        if other.n != self.n:
            raise RegionError(f"Regions on {self.n} and {other.n} sites cannot be combined")


@dataclass(frozen=True, eq=False)
class StabilizerTableau:
    """
    Construction only normalizes shapes and reduces mod d; call ``validate`` for the
    isotropy and independence checks, which kernels skip.
    """

    generators: np.ndarray
    phases: np.ndarray
    d: int

    def __post_init__(self):
        validate_modulus(self.d)
        generators = np.mod(np.asarray(self.generators, dtype=np.int64), self.d)
        if generators.ndim == 1:
            generators = generators.reshape(1, -1) if generators.size else generators.reshape(0, 0)
        if generators.ndim != 2 or generators.shape[1] % 2:
            raise DimensionMismatchError(
                f"Generators must be a (k, 2n) matrix, got shape {generators.shape}"
            )
        phases = np.mod(np.asarray(self.phases, dtype=np.int64), self.d).reshape(-1)
        if phases.shape != (generators.shape[0],):
            raise DimensionMismatchError(
                f"{phases.size} phases for {generators.shape[0]} generators"
            )
        object.__setattr__(self, "generators", frozen(generators))
        object.__setattr__(self, "phases", frozen(phases))

    @property
    def n(self) -> int:
        return self.generators.shape[1] // 2

    @property
    def k_gen(self) -> int:
        return self.generators.shape[0]

    @property
    def is_pure(self) -> bool:
        return self.k_gen == self.n

    def rows(self) -> List[WeylVector]:
        return [WeylVector(g, self.d, ph) for g, ph in zip(self.generators, self.phases)]

    def region(self, sites: Iterable[int]) -> RegionMask:
        return RegionMask.of(sites, self.n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StabilizerTableau):
            return NotImplemented
        return (
            self.d == other.d
            and np.array_equal(self.generators, other.generators)
            and np.array_equal(self.phases, other.phases)
        )

    def __hash__(self):
        return hash((self.d, self.generators.shape, self.generators.tobytes(), self.phases.tobytes()))


def validate(t: StabilizerTableau) -> None:
    """Raise ValueError unless rows commute pairwise, are independent and k_gen <= n."""
    if t.k_gen > t.n:
        raise ValueError(f"{t.k_gen} generators on {t.n} sites cannot be independent")
    J = symplectic_form_matrix(t.n, t.d)
    commutators = np.mod(t.generators @ J @ t.generators.T, t.d)
    if commutators.any():
        i, j = np.argwhere(commutators)[0]
        raise ValueError(f"Generators {i} and {j} do not commute")
    if get_field(t.d).rank(t.generators) != t.k_gen:
        raise ValueError("Generators are not linearly independent")


def zero_state(n: int, d: int = 3) -> StabilizerTableau:
    """|0...0>: row i is Z on site i."""
    generators = np.zeros((n, 2 * n), dtype=np.int64)
    generators[np.arange(n), 2 * np.arange(n)] = 1
    return StabilizerTableau(generators, np.zeros(n, dtype=np.int64), d)


def empty(n: int, d: int = 3) -> StabilizerTableau:
    return StabilizerTableau(np.zeros((0, 2 * n), dtype=np.int64), np.zeros(0, dtype=np.int64), d)


def bell_pairs(k: int, d: int = 3) -> StabilizerTableau:
    """
    k maximally entangled pairs between sites i and k + i, stabilized by X⊗X and Z⊗Z^{-1}.
    """
    generators = np.zeros((2 * k, 4 * k), dtype=np.int64)
    for i in range(k):
        left, right = 2 * i, 2 * (k + i)
        generators[2 * i, left + 1] = 1
        generators[2 * i, right + 1] = 1
        generators[2 * i + 1, left] = 1
        generators[2 * i + 1, right] = d - 1
    return StabilizerTableau(generators, np.zeros(2 * k, dtype=np.int64), d)


def tensor(first: StabilizerTableau, second: StabilizerTableau) -> StabilizerTableau:
    if first.d != second.d:
        raise DimensionMismatchError(f"Modulus mismatch: d={first.d} vs d={second.d}")
    generators = np.zeros((first.k_gen + second.k_gen, 2 * (first.n + second.n)), dtype=np.int64)
    generators[: first.k_gen, : 2 * first.n] = first.generators
    generators[first.k_gen :, 2 * first.n :] = second.generators
    return StabilizerTableau(
        generators, np.concatenate([first.phases, second.phases]), first.d
    )


def append_ancillas(t: StabilizerTableau, m: int) -> StabilizerTableau:
    if m < 0:
        raise ValueError(f"Cannot append {m} ancillas")
    if m == 0:
        return t
    return tensor(t, zero_state(m, t.d))


def _check_clifford(t: StabilizerTableau, c: SymplecticClifford):
    if c.d != t.d:
        raise DimensionMismatchError(f"Modulus mismatch: d={c.d} vs d={t.d}")
    if c.n != t.n:
        raise DimensionMismatchError(f"Clifford on {c.n} sites applied to {t.n} sites")


def apply_clifford(t: StabilizerTableau, c: SymplecticClifford) -> StabilizerTableau:
    _check_clifford(t, c)
    images = np.mod(t.generators @ c.S.T, t.d)
    phases = t.phases + images @ c.phase_functional
    return StabilizerTableau(images, phases, t.d)


def site_columns(sites: Sequence[int]) -> np.ndarray:
    sites = np.asarray(sites, dtype=np.int64)
    return np.stack([2 * sites, 2 * sites + 1], axis=-1).reshape(-1)


def apply_local_inplace(
    generators: np.ndarray,
    phases: np.ndarray,
    c: SymplecticClifford,
    sites: Sequence[int],
    d: int,
) -> None:
    """Kernel behind ``apply_local_clifford``: updates mutable arrays in place."""
    columns = site_columns(sites)
    images = np.mod(generators[:, columns] @ c.S.T, d)
    generators[:, columns] = images
    phases[:] = np.mod(phases + images @ c.phase_functional, d)


def apply_local_clifford(
    t: StabilizerTableau, c: SymplecticClifford, sites: Sequence[int]
) -> StabilizerTableau:
    """Same as apply_clifford(t, embed(c, sites, t.n)) without building the 2n x 2n matrix."""
    if c.d != t.d:
        raise DimensionMismatchError(f"Modulus mismatch: d={c.d} vs d={t.d}")
    sites = [int(site) for site in sites]
    if len(sites) != c.n or len(set(sites)) != len(sites):
        raise RegionError(f"Clifford on {c.n} sites cannot act on sites {sites}")
    if any(site < 0 or site >= t.n for site in sites):
        raise RegionError(f"Sites {sites} outside [0, {t.n})")
    generators = t.generators.copy()
    phases = t.phases.copy()
    apply_local_inplace(generators, phases, c, sites, t.d)
    return StabilizerTableau(generators, phases, t.d)


def _as_region(t: StabilizerTableau, region) -> RegionMask:
    if isinstance(region, RegionMask):
        if region.n != t.n:
            raise RegionError(f"Region over {region.n} sites used on a {t.n}-site tableau")
        return region
    return RegionMask.of(region, t.n)


def reduced_group_rank(t: StabilizerTableau, A) -> int:
    """
    k_A = log_d |M_A|, M_A being the group elements supported entirely on A.

    With the traced-out columns B permuted to the front, row reduction pivots first on B;
    rows left without a B pivot are exactly the elements living on A, so
    k_A = k_gen - rank(G restricted to B).
    """
    A = _as_region(t, A)
    traced_out = A.complement
    if not len(traced_out):
        return t.k_gen
    return t.k_gen - get_field(t.d).rank(t.generators[:, traced_out.columns])


def entropy(t: StabilizerTableau, A) -> int:
    """S(A) = |A| - k_A in units of log d; flat-spectrum entropy for mixed tableaus."""
    A = _as_region(t, A)
    if t.is_pure and 2 * len(A) > t.n:
        complement = A.complement
        return len(complement) - reduced_group_rank(t, complement)
    return len(A) - reduced_group_rank(t, A)


def mutual_information(t: StabilizerTableau, A, R) -> int:
    A = _as_region(t, A)
    R = _as_region(t, R)
    if not A.isdisjoint(R):
        raise RegionError(f"Regions overlap: {set(A.sites) & set(R.sites)}")
    return entropy(t, A) + entropy(t, R) - entropy(t, A.union(R))


def row_weights(t: StabilizerTableau) -> List[int]:
    return [int(w) for w in weights_of(t.generators)]


def group_element(t: StabilizerTableau, coefficients: Sequence[int]) -> WeylVector:
    """chi^{c·phases} w(c·G), the element with the given generator exponents."""
    coefficients = np.asarray(coefficients, dtype=np.int64)
    return WeylVector(
        coefficients @ t.generators, t.d, int(coefficients @ t.phases)
    )


def commuting_phase_defect(t: StabilizerTableau) -> int:
    """Largest inv(2)·⟦g_i, g_j⟧ correction between rows; zero for a valid tableau."""
    if t.k_gen < 2:
        return 0
    products = symplectic_products(t.generators[:, None, :], t.generators[None, :, :], t.d)
    return int(np.mod(get_field(t.d).half * products, t.d).max())


def serialize(t: StabilizerTableau) -> str:
    """
    Plain text: a header line, then one generator per line as
    ``phase p1 q1 ... pn qn``.
    """
    lines = [f"{SERIALIZATION_HEADER} n={t.n} d={t.d} rows={t.k_gen}"]
    for generator, phase in zip(t.generators, t.phases):
        lines.append(" ".join(str(int(x)) for x in [phase, *generator]))
    return "\n".join(lines) + "\n"


def deserialize(text: str) -> StabilizerTableau:
    lines = [line.strip() for line in text.strip().splitlines() if line.strip()]
    if not lines or not lines[0].startswith(SERIALIZATION_HEADER):
        raise ValueError("Missing tableau header")
    fields = dict(
        item.split("=", 1) for item in lines[0][len(SERIALIZATION_HEADER) :].split()
    )
    n, d, rows = int(fields["n"]), int(fields["d"]), int(fields["rows"])
    body = [[int(x) for x in line.split()] for line in lines[1:]]
    if len(body) != rows or any(len(row) != 2 * n + 1 for row in body):
        raise ValueError(f"Tableau body does not match header n={n} rows={rows}")
    data = np.array(body, dtype=np.int64).reshape(rows, 2 * n + 1)
    return StabilizerTableau(data[:, 1:], data[:, 0], d)

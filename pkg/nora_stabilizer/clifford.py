"""
Clifford group elements modulo global phase, as pairs (S, a) with S symplectic.

The unitary U = w(a) mu(S) acts by conjugation as U w(v) U† = chi(⟦a, S v⟧) w(S v).
Only chi-phases are tracked; the projective cocycle of the metaplectic part is not.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from nora_stabilizer.field import frozen, get_field, validate_modulus
from nora_stabilizer.utils import DimensionMismatchError, RegionError
from nora_stabilizer.weyl import (
    WeylVector,
    site_support,
    symplectic_form_matrix,
    symplectic_products,
)


# single-site vectors on three distinct lines of GF(d)^2
_LINE_REPRESENTATIVES = ((1, 0), (0, 1), (1, 1))


@dataclass(frozen=True, eq=False)
class SymplecticClifford:
    S: np.ndarray
    a: np.ndarray
    d: int

    def __post_init__(self):
        validate_modulus(self.d)
        S = np.mod(np.asarray(self.S, dtype=np.int64), self.d)
        a = np.mod(np.asarray(self.a, dtype=np.int64), self.d).reshape(-1)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
            raise DimensionMismatchError(f"S must be 2n x 2n, got shape {S.shape}")
        if a.shape != (S.shape[0],):
            raise DimensionMismatchError(
                f"Displacement of length {a.size} does not match S of size {S.shape[0]}"
            )
        object.__setattr__(self, "S", frozen(S))
        object.__setattr__(self, "a", frozen(a))

    @property
    def n(self) -> int:
        return self.S.shape[0] // 2

    @property
    def phase_functional(self) -> np.ndarray:
        """Row vector f with ⟦a, x⟧ = f · x, so images pick up phase f · (S v)."""
        return np.mod(self.a @ symplectic_form_matrix(self.n, self.d), self.d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymplecticClifford):
            return NotImplemented
        return (
            self.d == other.d
            and np.array_equal(self.S, other.S)
            and np.array_equal(self.a, other.a)
        )

    def __hash__(self):
        return hash((self.d, self.S.tobytes(), self.a.tobytes()))


def identity(n: int, d: int) -> SymplecticClifford:
    return SymplecticClifford(np.eye(2 * n, dtype=np.int64), np.zeros(2 * n, dtype=np.int64), d)


def is_symplectic(S: np.ndarray, d: int) -> bool:
    S = np.asarray(S, dtype=np.int64)
    n = S.shape[0] // 2
    J = symplectic_form_matrix(n, d)
    return bool(np.array_equal(np.mod(S.T @ J @ S, d), J))


def validate(c: SymplecticClifford) -> bool:
    return is_symplectic(c.S, c.d)


def _check_sites(c: SymplecticClifford, n: int):
    if c.n != n:
        raise DimensionMismatchError(f"Clifford on {c.n} sites applied to {n} sites")


def apply_to_weyl(c: SymplecticClifford, v: WeylVector) -> WeylVector:
    if c.d != v.d:
        raise DimensionMismatchError(f"Modulus mismatch: d={c.d} vs d={v.d}")
    _check_sites(c, v.n)
    image = np.mod(c.S @ v.components, c.d)
    phase = int(symplectic_products(c.a, image, c.d))
    return WeylVector(image, c.d, v.phase_exp + phase)


def compose(c2: SymplecticClifford, c1: SymplecticClifford) -> SymplecticClifford:
    """c2 after c1: S = S2 S1 and a = a2 + S2 a1, exact on every Weyl vector."""
    if c1.d != c2.d:
        raise DimensionMismatchError(f"Modulus mismatch: d={c2.d} vs d={c1.d}")
    _check_sites(c2, c1.n)
    return SymplecticClifford(c2.S @ c1.S, c2.a + c2.S @ c1.a, c1.d)


def inverse(c: SymplecticClifford) -> SymplecticClifford:
    J = symplectic_form_matrix(c.n, c.d)
    S_inv = np.mod(-J @ c.S.T @ J, c.d)
    return SymplecticClifford(S_inv, -S_inv @ c.a, c.d)


def embed(
    c: SymplecticClifford, sites: Sequence[int], n: int
) -> SymplecticClifford:
    """Act with c on the listed sites (in order) and as the identity elsewhere."""
    sites = [int(site) for site in sites]
    if len(sites) != c.n:
        raise RegionError(f"Clifford on {c.n} sites cannot be embedded on {len(sites)} sites")
    if len(set(sites)) != len(sites):
        raise RegionError(f"Duplicate sites in {sites}")
    if any(site < 0 or site >= n for site in sites):
        raise RegionError(f"Sites {sites} outside [0, {n})")
    columns = np.array([[2 * site, 2 * site + 1] for site in sites], dtype=np.int64).reshape(-1)
    S = np.eye(2 * n, dtype=np.int64)
    S[np.ix_(columns, columns)] = c.S
    a = np.zeros(2 * n, dtype=np.int64)
    a[columns] = c.a
    return SymplecticClifford(S, a, c.d)


def transvection_matrix(h: np.ndarray, scale: int, d: int) -> np.ndarray:
    """Matrix of x -> x + scale ⟦x, h⟧ h; symplectic for every scale."""
    h = np.asarray(h, dtype=np.int64)
    n = h.size // 2
    J = symplectic_form_matrix(n, d)
    return np.mod(np.eye(2 * n, dtype=np.int64) + scale * np.outer(h, J @ h), d)


def transvection(h: np.ndarray, scale: int, d: int) -> SymplecticClifford:
    return SymplecticClifford(transvection_matrix(h, scale, d), np.zeros(np.size(h), dtype=np.int64), d)


def _single_transvection(x: np.ndarray, y: np.ndarray, d: int) -> np.ndarray:
    """A transvection taking x to y, given ⟦x, y⟧ != 0."""
    product = int(symplectic_products(x, y, d))
    return transvection_matrix(np.mod(y - x, d), get_field(d).inv(product), d)


def _line_outside(site_vectors: Sequence[np.ndarray], d: int) -> np.ndarray:
    """A single-site vector not parallel to any of the given nonzero single-site vectors."""
    for candidate in _LINE_REPRESENTATIVES:
        candidate = np.array(candidate, dtype=np.int64)
        if all(int(symplectic_products(vector, candidate, d)) for vector in site_vectors):
            return candidate
    raise AssertionError("three distinct lines always leave one free")  # pragma: no cover


def _bridge(x: np.ndarray, y: np.ndarray, d: int) -> np.ndarray:
    """A vector z with ⟦x, z⟧ != 0 and ⟦z, y⟧ != 0."""
    z = np.zeros_like(x)
    x_support = site_support(x)
    y_support = site_support(y)
    shared = np.flatnonzero(x_support & y_support)
    if shared.size:
        site = int(shared[0])
        block = slice(2 * site, 2 * site + 2)
        z[block] = _line_outside([x[block], y[block]], d)
        return z
    x_site = int(np.flatnonzero(x_support)[0])
    y_site = int(np.flatnonzero(y_support)[0])
    x_block = slice(2 * x_site, 2 * x_site + 2)
    y_block = slice(2 * y_site, 2 * y_site + 2)
    z[x_block] = _line_outside([x[x_block]], d)
    z[y_block] = _line_outside([y[y_block]], d)
    return z


def find_transvections(x: np.ndarray, y: np.ndarray, d: int) -> np.ndarray:
    """
    A symplectic matrix, a product of at most two transvections, mapping nonzero x to nonzero y.
    """
    x = np.mod(np.asarray(x, dtype=np.int64), d)
    y = np.mod(np.asarray(y, dtype=np.int64), d)
    if np.array_equal(x, y):
        return np.eye(x.size, dtype=np.int64)
    if int(symplectic_products(x, y, d)):
        return _single_transvection(x, y, d)
    z = _bridge(x, y, d)
    return np.mod(_single_transvection(z, y, d) @ _single_transvection(x, z, d), d)


def _fixing_transvections(v: np.ndarray, x: np.ndarray, w: np.ndarray, d: int) -> np.ndarray:
    """Maps x to w while fixing v, given ⟦v, x⟧ = ⟦v, w⟧ = 1."""
    if np.array_equal(x, w):
        return np.eye(x.size, dtype=np.int64)
    if int(symplectic_products(x, w, d)):
        return _single_transvection(x, w, d)
    z = np.mod(w + v, d)
    return np.mod(_single_transvection(z, w, d) @ _single_transvection(x, z, d), d)


def _random_nonzero(size: int, d: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.integers(0, d, size=size)
        if v.any():
            return v.astype(np.int64)


def _random_conjugate(v: np.ndarray, d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform w with ⟦v, w⟧ = 1."""
    while True:
        w = rng.integers(0, d, size=v.size).astype(np.int64)
        if int(symplectic_products(v, w, d)) == 1:
            return w


def random_symplectic_matrix(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """
    Uniform element of Sp(2n, F_d).

    The first column pair (v, w) is a uniformly random symplectic pair; a product of
    transvections M maps (e1, f1) to it, and the rest is M (I_2 ⊕ S') with S' uniform on
    the remaining n-1 sites.
    """
    size = 2 * n
    e1 = np.zeros(size, dtype=np.int64)
    e1[0] = 1
    f1 = np.zeros(size, dtype=np.int64)
    f1[1] = 1
    v = _random_nonzero(size, d, rng)
    w = _random_conjugate(v, d, rng)
    first = find_transvections(e1, v, d)
    second = _fixing_transvections(v, np.mod(first @ f1, d), w, d)
    M = np.mod(second @ first, d)
    if n == 1:
        return M
    rest = np.eye(size, dtype=np.int64)
    rest[2:, 2:] = random_symplectic_matrix(n - 1, d, rng)
    return np.mod(M @ rest, d)


def random_symplectic(
    n: int, d: int, rng: np.random.Generator
) -> SymplecticClifford:
    if n < 1:
        raise ValueError(f"Need at least one site, got n={n}")
    validate_modulus(d)
    S = random_symplectic_matrix(n, d, rng)
    a = rng.integers(0, d, size=2 * n)
    return SymplecticClifford(S, a, d)


def symplectic_group_order(n: int, d: int) -> int:
    """|Sp(2n, F_d)| = d^(n^2) prod_{i=1..n} (d^(2i) - 1)."""
    order = d ** (n * n)
    for i in range(1, n + 1):
        order *= d ** (2 * i) - 1
    return order


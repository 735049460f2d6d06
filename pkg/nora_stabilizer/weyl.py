"""
Generalized Pauli (Weyl) strings in the symplectic representation.

A string on n qudits is a vector v = (p1, q1, ..., pn, qn) over GF(d) standing for
chi^phase * w(v), with w(p, q) = chi(-p q / 2) Z^p X^q on each site. Every module shares
this interleaved layout, which matches the block structure of J.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from nora_stabilizer.field import FieldScalar, frozen, get_field, validate_modulus
from nora_stabilizer.utils import DimensionMismatchError

SITE_SEPARATOR = " ⊗ "
PHASE_SYMBOL = "χ"


@lru_cache(maxsize=64)
def symplectic_form_matrix(n: int, d: int) -> np.ndarray:
    """J = ⊕_n [[0, 1], [-1, 0]] reduced mod d."""
    j = np.zeros((2 * n, 2 * n), dtype=np.int64)
    for site in range(n):
        j[2 * site, 2 * site + 1] = 1
        j[2 * site + 1, 2 * site] = d - 1
    return frozen(j)


def symplectic_products(a: np.ndarray, b: np.ndarray, d: int) -> np.ndarray:
    """⟦a, b⟧ along the last axis, broadcasting over leading axes."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    value = (a[..., 0::2] * b[..., 1::2] - a[..., 1::2] * b[..., 0::2]).sum(axis=-1)
    return np.mod(value, d)


def site_support(components: np.ndarray) -> np.ndarray:
    """Boolean mask (..., n) of sites carrying a nontrivial factor."""
    components = np.asarray(components)
    return (components[..., 0::2] != 0) | (components[..., 1::2] != 0)


def weights_of(components: np.ndarray) -> np.ndarray:
    return site_support(components).sum(axis=-1)


@dataclass(frozen=True)
class SymplecticForm:
    n: int
    d: int

    @property
    def matrix(self) -> np.ndarray:
        return symplectic_form_matrix(self.n, self.d)

    def __call__(self, v: "WeylVector", w: "WeylVector") -> FieldScalar:
        return symplectic_product(v, w)


@dataclass(frozen=True, eq=False)
class WeylVector:
    components: np.ndarray
    d: int
    phase_exp: int = 0

    def __post_init__(self):
        validate_modulus(self.d)
        components = np.mod(np.asarray(self.components, dtype=np.int64), self.d).reshape(-1)
        if components.size % 2:
            raise DimensionMismatchError(
                f"Weyl vectors have even length 2n, got {components.size}"
            )
        object.__setattr__(self, "components", frozen(components))
        object.__setattr__(self, "phase_exp", int(self.phase_exp) % self.d)

    @classmethod
    def identity(cls, n: int, d: int) -> "WeylVector":
        return cls(np.zeros(2 * n, dtype=np.int64), d)

    @classmethod
    def from_sites(
        cls, n: int, d: int, factors: dict, phase_exp: int = 0
    ) -> "WeylVector":
        """Build from {site: (p, q)}; absent sites carry the identity."""
        components = np.zeros(2 * n, dtype=np.int64)
        for site, (p, q) in factors.items():
            if not 0 <= site < n:
                raise DimensionMismatchError(f"Site {site} outside [0, {n})")
            components[2 * site] = p
            components[2 * site + 1] = q
        return cls(components, d, phase_exp)

    @property
    def n(self) -> int:
        return self.components.size // 2

    @property
    def p(self) -> np.ndarray:
        return self.components[0::2]

    @property
    def q(self) -> np.ndarray:
        return self.components[1::2]

    def is_identity(self) -> bool:
        return not self.components.any()

    def with_phase(self, phase_exp: int) -> "WeylVector":
        return WeylVector(self.components, self.d, phase_exp)

    def padded(self, n: int) -> "WeylVector":
        """The same string with identity factors appended up to n sites."""
        if n < self.n:
            raise DimensionMismatchError(f"Cannot pad {self.n} sites down to {n}")
        components = np.zeros(2 * n, dtype=np.int64)
        components[: self.components.size] = self.components
        return WeylVector(components, self.d, self.phase_exp)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeylVector):
            return NotImplemented
        return (
            self.d == other.d
            and self.phase_exp == other.phase_exp
            and np.array_equal(self.components, other.components)
        )

    def __hash__(self):
        return hash((self.d, self.phase_exp, self.components.tobytes()))

    def __mul__(self, other: "WeylVector") -> "WeylVector":
        return weyl_multiply(self, other)

    def __str__(self):
        return render(self)


def _check_compatible(v: WeylVector, w: WeylVector):
    if v.d != w.d:
        raise DimensionMismatchError(f"Modulus mismatch: d={v.d} vs d={w.d}")
    if v.n != w.n:
        raise DimensionMismatchError(f"Site count mismatch: n={v.n} vs n={w.n}")


def symplectic_product(v: WeylVector, w: WeylVector) -> FieldScalar:
    _check_compatible(v, w)
    return FieldScalar(int(symplectic_products(v.components, w.components, v.d)), v.d)


def weyl_multiply(v: WeylVector, w: WeylVector) -> WeylVector:
    """w(v) w(w) = chi(⟦v,w⟧/2) w(v+w), with both phases carried along."""
    _check_compatible(v, w)
    half = get_field(v.d).half
    product = int(symplectic_products(v.components, w.components, v.d))
    return WeylVector(
        v.components + w.components,
        v.d,
        v.phase_exp + w.phase_exp + half * product,
    )


def weyl_power(v: WeylVector, exponent: int) -> WeylVector:
    """w(v)^m = w(m v); phases scale linearly since ⟦v, v⟧ = 0."""
    return WeylVector(v.components * exponent, v.d, v.phase_exp * exponent)


def commutes(v: WeylVector, w: WeylVector) -> bool:
    return symplectic_product(v, w).value == 0


def weight(v: WeylVector) -> int:
    """Number of sites with a factor other than the identity; phases do not count."""
    return int(weights_of(v.components))


def _render_site(p: int, q: int) -> str:
    if p == 0 and q == 0:
        return "I"
    return (f"Z^{p}" if p else "") + (f"X^{q}" if q else "")


def render(v: WeylVector) -> str:
    """Text form such as ``χ^2 Z^1X^2 ⊗ I ⊗ X^1``; ``parse`` reads it back."""
    body = SITE_SEPARATOR.join(
        _render_site(int(p), int(q)) for p, q in zip(v.p, v.q)
    )
    if v.phase_exp:
        return f"{PHASE_SYMBOL}^{v.phase_exp} {body}"
    return body


_SITE_PATTERN = re.compile(r"^(?:Z\^(\d+))?(?:X\^(\d+))?$")


def parse(text: str, d: int) -> WeylVector:
    text = text.strip()
    phase_exp = 0
    if text.startswith(PHASE_SYMBOL):
        head, _, text = text.partition(" ")
        phase_exp = int(head.split("^", 1)[1])
    components = []
    for token in text.split(SITE_SEPARATOR.strip()):
        token = token.strip()
        if token == "I":
            components.extend([0, 0])
            continue
        match = _SITE_PATTERN.match(token)
        if not match or not token:
            raise ValueError(f"Cannot parse Weyl site factor {token!r}")
        components.extend(int(group or 0) for group in match.groups())
    return WeylVector(np.array(components, dtype=np.int64), d, phase_exp)


def basis_vectors(n: int, d: int) -> Tuple[WeylVector, ...]:
    """Z_1, X_1, ..., Z_n, X_n in component order."""
    return tuple(
        WeylVector(np.eye(2 * n, dtype=np.int64)[i], d) for i in range(2 * n)
    )


def random_weyl(n: int, d: int, rng: np.random.Generator, phase: bool = True) -> WeylVector:
    phase_exp = int(rng.integers(d)) if phase else 0
    return WeylVector(rng.integers(0, d, size=2 * n), d, phase_exp)


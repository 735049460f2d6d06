"""
Exact arithmetic and linear algebra over the prime field GF(d), d an odd prime.

Matrices are plain ``int64`` ndarrays with the modulus carried alongside, never per entry.
Elimination, ranks and inverses are delegated to ``galois`` field arrays; ``PrimeField``
converts at the boundary so the rest of the package keeps working on ordinary ndarrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import List, Optional, Sequence, Tuple, Type

import galois
import numpy as np

from nora_stabilizer.utils import DimensionMismatchError, NotInvertibleError


def is_prime(value: int) -> bool:
    return int(value) >= 2 and galois.is_prime(int(value))


def validate_modulus(d: int) -> int:
    """Only odd primes are accepted by the phase-space core."""
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
        raise TypeError(f"Field modulus must be an integer, got {d!r}")
    d = int(d)
    if d == 2:
        raise ValueError(
            "d=2 is not supported: the symmetric Weyl phase convention needs the inverse of 2."
        )
    if not is_prime(d):
        raise ValueError(f"Field modulus must be an odd prime, got {d}")
    return d


def as_field_array(values, d: int) -> np.ndarray:
    return np.mod(np.asarray(values, dtype=np.int64), d)


def frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def _to_int(array: galois.FieldArray) -> np.ndarray:
    return array.view(np.ndarray).astype(np.int64)


def _pivot_columns(reduced: np.ndarray, limit: int) -> List[int]:
    pivots = []
    for row in reduced[:, :limit]:
        nonzero = np.flatnonzero(row)
        if nonzero.size == 0:
            break
        pivots.append(int(nonzero[0]))
    return pivots


@dataclass(frozen=True)
class PrimeField:
    modulus: int

    def __post_init__(self):
        validate_modulus(self.modulus)

    @cached_property
    def GF(self) -> Type[galois.FieldArray]:
        return galois.GF(self.modulus)

    def array(self, values) -> galois.FieldArray:
        return self.GF(as_field_array(values, self.modulus))

    @cached_property
    def inverses(self) -> np.ndarray:
        table = np.zeros(self.modulus, dtype=np.int64)
        table[1:] = _to_int(np.reciprocal(self.GF.Range(1, self.modulus)))
        return frozen(table)

    @cached_property
    def half(self) -> int:
        """The inverse of 2, i.e. (d+1)/2."""
        return (self.modulus + 1) // 2

    def inv(self, value: int) -> int:
        value = int(value) % self.modulus
        if value == 0:
            raise NotInvertibleError(f"0 has no inverse in GF({self.modulus})")
        return int(self.inverses[value])

    def row_reduce(
        self, matrix: np.ndarray, pivot_limit: Optional[int] = None
    ) -> Tuple[np.ndarray, List[int]]:
        """
        Reduced row echelon form, returned as (reduced copy, pivot columns).

        Pivots are searched only among the first ``pivot_limit`` columns; columns past the
        limit are carried along (an augmented block).
        """
        a = as_field_array(matrix, self.modulus)
        if a.ndim != 2:
            raise DimensionMismatchError(f"Expected a 2D matrix, got shape {a.shape}")
        rows, cols = a.shape
        limit = cols if pivot_limit is None else min(pivot_limit, cols)
        if rows == 0 or limit == 0:
            return a.copy(), []
        reduced = _to_int(self.GF(a).row_reduce(ncols=limit))
        return reduced, _pivot_columns(reduced, limit)

    def rank(self, matrix: np.ndarray) -> int:
        matrix = np.asarray(matrix)
        if matrix.size == 0:
            return 0
        return int(np.linalg.matrix_rank(self.array(matrix)))

    def solve_left(self, matrix: np.ndarray, vector: np.ndarray) -> Optional[np.ndarray]:
        """Coefficients c with c @ matrix = vector (mod d), or None if none exist."""
        d = self.modulus
        matrix = as_field_array(matrix, d)
        vector = as_field_array(vector, d)
        rows, cols = matrix.shape
        if vector.shape != (cols,):
            raise DimensionMismatchError(
                f"Vector of length {vector.shape} does not match {cols} columns"
            )
        if rows == 0:
            return np.zeros(0, dtype=np.int64) if not vector.any() else None
        augmented = np.hstack([matrix.T, vector[:, None]])
        reduced, pivots = self.row_reduce(augmented, pivot_limit=rows)
        if reduced[len(pivots) :, -1].any():
            return None
        coefficients = np.zeros(rows, dtype=np.int64)
        for i, column in enumerate(pivots):
            coefficients[column] = reduced[i, -1]
        return coefficients


@lru_cache(maxsize=None)
def get_field(d: int) -> PrimeField:
    return PrimeField(int(d))


@dataclass(frozen=True)
class FieldScalar:
    value: int
    modulus: int

    def __post_init__(self):
        validate_modulus(self.modulus)
        object.__setattr__(self, "value", int(self.value) % self.modulus)

    def __int__(self):
        return self.value

    def _check(self, other: "FieldScalar"):
        if other.modulus != self.modulus:
            raise DimensionMismatchError(
                f"Modulus mismatch: GF({self.modulus}) vs GF({other.modulus})"
            )

    def __add__(self, other: "FieldScalar") -> "FieldScalar":
        self._check(other)
        return FieldScalar(self.value + other.value, self.modulus)

    def __sub__(self, other: "FieldScalar") -> "FieldScalar":
        self._check(other)
        return FieldScalar(self.value - other.value, self.modulus)

    def __mul__(self, other: "FieldScalar") -> "FieldScalar":
        self._check(other)
        return FieldScalar(self.value * other.value, self.modulus)

    def __neg__(self) -> "FieldScalar":
        return FieldScalar(-self.value, self.modulus)


@dataclass(frozen=True, eq=False)
class FieldMatrix:
    entries: np.ndarray
    modulus: int

    def __post_init__(self):
        validate_modulus(self.modulus)
        entries = as_field_array(self.entries, self.modulus)
        if entries.ndim == 1:
            entries = entries.reshape(1, -1) if entries.size else entries.reshape(0, 0)
        if entries.ndim != 2:
            raise DimensionMismatchError(f"FieldMatrix needs 2D entries, got {entries.shape}")
        object.__setattr__(self, "entries", frozen(entries))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], modulus: int) -> "FieldMatrix":
        return cls(np.array(rows, dtype=np.int64), modulus)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def field(self) -> PrimeField:
        return get_field(self.modulus)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.modulus == other.modulus and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.modulus, self.entries.shape, self.entries.tobytes()))

    def __getitem__(self, key):
        return self.entries[key]

    def tolist(self) -> list:
        return self.entries.tolist()


def add(a: FieldScalar, b: FieldScalar) -> FieldScalar:
    return a + b


def mul_inv(a: FieldScalar) -> FieldScalar:
    return FieldScalar(get_field(a.modulus).inv(a.value), a.modulus)


def rref(m: FieldMatrix) -> Tuple[FieldMatrix, int]:
    reduced, pivots = m.field.row_reduce(m.entries)
    return FieldMatrix(reduced, m.modulus), len(pivots)


def solve_in_rowspace(m: FieldMatrix, v) -> Optional[np.ndarray]:
    if isinstance(v, FieldMatrix):
        v = v.entries.reshape(-1)
    return m.field.solve_left(m.entries, np.asarray(v))

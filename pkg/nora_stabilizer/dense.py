"""
Dense-matrix oracle for tiny systems. Test-only: everything is exponential in n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from nora_stabilizer.clifford import SymplecticClifford, apply_to_weyl
from nora_stabilizer.stabilizer import (
    RegionMask,
    StabilizerTableau,
    apply_clifford,
    group_element,
    zero_state,
)
from nora_stabilizer.utils import OracleCapExceededError, RegionError
from nora_stabilizer.field import get_field
from nora_stabilizer.weyl import WeylVector

DEFAULT_DIMENSION_CAP = 2187
TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class DenseOperator:
    matrix: np.ndarray
    n: int
    d: int

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.matrix @ other.matrix, self.n, self.d)

    @property
    def dagger(self) -> "DenseOperator":
        return DenseOperator(self.matrix.conj().T, self.n, self.d)

    def allclose(self, other: "DenseOperator", atol: float = TOLERANCE) -> bool:
        return bool(np.allclose(self.matrix, other.matrix, atol=atol, rtol=0))


def check_cap(n: int, d: int, cap: int = DEFAULT_DIMENSION_CAP) -> int:
    dimension = d**n
    if dimension > cap:
        raise OracleCapExceededError(
            f"d^n = {d}^{n} = {dimension} exceeds the dense oracle cap of {cap}"
        )
    return dimension


def chi(exponent, d: int):
    return np.exp(2j * np.pi * np.mod(exponent, d) / d)


def clock(d: int) -> np.ndarray:
    """Z|k> = chi(k)|k>."""
    return np.diag(chi(np.arange(d), d))


def shift(d: int) -> np.ndarray:
    """X|k> = |k+1>."""
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def single_site_weyl(p: int, q: int, d: int) -> np.ndarray:
    """w(p, q) = chi(-p q / 2) Z^p X^q."""
    half = get_field(d).half
    return (
        chi(-p * q * half, d)
        * np.linalg.matrix_power(clock(d), p)
        @ np.linalg.matrix_power(shift(d), q)
    )


def dense_weyl(v: WeylVector, cap: int = DEFAULT_DIMENSION_CAP) -> DenseOperator:
    check_cap(v.n, v.d, cap)
    matrix = np.ones((1, 1), dtype=complex)
    for p, q in zip(v.p, v.q):
        matrix = np.kron(matrix, single_site_weyl(int(p), int(q), v.d))
    return DenseOperator(chi(v.phase_exp, v.d) * matrix, v.n, v.d)


def apply_weyl_to_state(v: WeylVector, state: np.ndarray) -> np.ndarray:
    """w(v)|psi> for a state stored as a (d,)*n tensor; never builds the matrix."""
    d = v.d
    half = get_field(d).half
    result = state
    levels = np.arange(d)
    for site, (p, q) in enumerate(zip(v.p, v.q)):
        p, q = int(p), int(q)
        if q:
            result = np.roll(result, q, axis=site)
        if p:
            shape = [1] * result.ndim
            shape[site] = d
            result = result * chi(p * levels, d).reshape(shape)
        if p and q:
            result = result * chi(-p * q * half, d)
    return result * chi(v.phase_exp, d)


def enumerate_group(t: StabilizerTableau):
    """Yields all d^k_gen group elements with their phases."""
    for coefficients in itertools.product(range(t.d), repeat=t.k_gen):
        yield group_element(t, coefficients)


def dense_projector(
    t: StabilizerTableau, cap: int = DEFAULT_DIMENSION_CAP
) -> DenseOperator:
    """(1/|M|) sum over the group of chi^phase w(m)."""
    dimension = check_cap(t.n, t.d, cap)
    total = np.zeros((dimension, dimension), dtype=complex)
    count = 0
    for element in enumerate_group(t):
        total += dense_weyl(element, cap).matrix
        count += 1
    return DenseOperator(total / count, t.n, t.d)


def stabilizer_state_vector(
    t: StabilizerTableau, cap: int = DEFAULT_DIMENSION_CAP, seed: int = 7
) -> np.ndarray:
    """
    The normalized state prod_i (1/d) sum_j g_i^j |x> for a fixed random |x>, as a (d,)*n tensor.
    """
    if not t.is_pure:
        raise ValueError(f"Tableau with {t.k_gen} generators on {t.n} sites is not pure")
    check_cap(t.n, t.d, cap)
    rng = np.random.default_rng(seed)
    shape = (t.d,) * t.n
    state = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    for row in t.rows():
        term = state
        accumulated = state.copy()
        for _ in range(t.d - 1):
            term = apply_weyl_to_state(row, term)
            accumulated = accumulated + term
        state = accumulated / t.d
    norm = np.linalg.norm(state)
    if norm < TOLERANCE:
        raise ValueError("Projected state vanished; the tableau is inconsistent")
    return state / norm


def dense_entropy(
    t: StabilizerTableau, A: RegionMask, cap: int = DEFAULT_DIMENSION_CAP
) -> float:
    """Von Neumann entropy of the reduced state on A, base-d logarithm."""
    if isinstance(A, RegionMask):
        if A.n != t.n:
            raise RegionError(f"Region over {A.n} sites used on a {t.n}-site tableau")
        sites = list(A.sites)
    else:
        sites = sorted(int(site) for site in A)
    state = stabilizer_state_vector(t, cap)
    rest = [site for site in range(t.n) if site not in set(sites)]
    matrix = np.transpose(state, sites + rest).reshape(t.d ** len(sites), -1)
    singular_values = scipy.linalg.svdvals(matrix)
    weights = singular_values**2
    weights = weights[weights > 1e-14]
    return float(-(weights * np.log(weights)).sum() / np.log(t.d))


def dense_clifford(
    c: SymplecticClifford, cap: int = DEFAULT_DIMENSION_CAP
) -> DenseOperator:
    """
    A unitary U, up to global phase, with U w(v) U† = dense_weyl(apply_to_weyl(c, v)).

    U|0> is the +1 eigenvector of the images of the Z_i, and U|x> = U X^x U† U|0>.
    """
    n, d = c.n, c.d
    dimension = check_cap(n, d, cap)
    reference = stabilizer_state_vector(apply_clifford(zero_state(n, d), c), cap).reshape(-1)
    columns = []
    for digits in itertools.product(range(d), repeat=n):
        components = np.zeros(2 * n, dtype=np.int64)
        components[1::2] = digits
        image = apply_to_weyl(c, WeylVector(components, d))
        columns.append(dense_weyl(image, cap).matrix @ reference)
    unitary = np.stack(columns, axis=1)
    return DenseOperator(unitary.reshape(dimension, dimension), n, d)


def brute_force_reduced_group_rank(t: StabilizerTableau, A: RegionMask) -> int:
    """log_d of the number of group elements vanishing off A, by enumeration."""
    traced_out = A.complement.columns
    count = sum(
        1 for element in enumerate_group(t) if not element.components[traced_out].any()
    )
    return int(round(np.log(count) / np.log(t.d)))

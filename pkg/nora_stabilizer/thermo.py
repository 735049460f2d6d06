"""
Thermodynamics of the layered stabilizer Hamiltonian H = -sum_l J_l sum_{i in layer l} P_i.

Each of the Delta n_l ancillas of layer l is an independent two-level-like system with one state
at energy -J_l and d - 1 states at 0, on top of a d^k-fold degenerate ground space. Entropies are
in nats, unlike the log-d units of the stabilizer module.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd
from scipy.special import entr, expit, gamma as gamma_function, gammainc, gammaincc

from nora_stabilizer.config import ThermoParams
from nora_stabilizer.utils import get_logger

logger = get_logger()

VALIDITY_TOLERANCE = 0.05
LOG_TEMPERATURE_STEP = 1e-4

ContinuumEntropy = namedtuple(
    typename="ContinuumEntropy", field_names=["integral_form", "gamma_bound", "valid"]
)

ENTROPY_COLUMNS = ["T", "S_exact", "S_integral", "S_gamma_bound", "C_V"]


@dataclass(frozen=True, eq=False)
class EnergySchedule:
    increments: np.ndarray
    energies: np.ndarray

    @property
    def pairs(self):
        return list(zip(self.increments.tolist(), self.energies.tolist()))

    @property
    def ancillas(self) -> int:
        return int(self.increments.sum())


def schedule(p: ThermoParams) -> EnergySchedule:
    """Delta n_1 = r, Delta n_l = (r - 1) r^(l-1); J_l = Lambda exp(-gamma (L - l))."""
    layers = np.arange(1, p.L + 1)
    increments = np.array(
        [p.r] + [(p.r - 1) * p.r ** (layer - 1) for layer in range(2, p.L + 1)],
        dtype=np.float64,
    )
    energies = p.uv_scale * np.exp(-p.decay_rate * (p.L - layers))
    return EnergySchedule(increments=increments, energies=energies)


def partition_function_log(levels: EnergySchedule, beta: float, d: int, k: int) -> float:
    """log Z = k ln d + sum_l Delta n_l ln(exp(beta J_l) + d - 1)."""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    per_ancilla = np.logaddexp(beta * levels.energies, math.log(d - 1))
    return float(k * math.log(d) + np.dot(levels.increments, per_ancilla))


def excitation_probabilities(levels: EnergySchedule, beta: float, d: int) -> np.ndarray:
    """p_l = (d - 1)/(exp(beta J_l) + d - 1), the probability that an ancilla is excited."""
    return expit(math.log(d - 1) - beta * levels.energies)


def gibbs_entropy_exact(p: ThermoParams) -> float:
    """S = k ln d + <N - k> ln(d - 1) + sum_l Delta n_l S(p_l)."""
    levels = schedule(p)
    probabilities = excitation_probabilities(levels, p.inverse_temperature, p.d)
    per_ancilla = (
        probabilities * math.log(p.d - 1) + entr(probabilities) + entr(1 - probabilities)
    )
    return float(p.k * math.log(p.d) + np.dot(levels.increments, per_ancilla))


def entropy_from_log_partition(p: ThermoParams, step: float = 1e-5) -> float:
    """(1 - beta d/d beta) log Z by a central difference in log beta."""
    levels = schedule(p)
    beta = p.inverse_temperature
    upper = partition_function_log(levels, beta * math.exp(step), p.d, p.k)
    lower = partition_function_log(levels, beta * math.exp(-step), p.d, p.k)
    return partition_function_log(levels, beta, p.d, p.k) - (upper - lower) / (2 * step)


def _truncated_gamma_integral(exponent: float, lower: float, upper: float) -> float:
    """Integral of t^exponent e^-t over [lower, upper], through regularized incomplete gammas."""
    shape = exponent + 1
    if lower > shape:
        fraction = gammaincc(shape, lower) - gammaincc(shape, upper)
    else:
        fraction = gammainc(shape, upper) - gammainc(shape, lower)
    return float(gamma_function(shape) * fraction)


def weight_outside_cutoffs(exponent: float, lower: float, upper: float) -> float:
    """Share of the t^exponent e^-t weight falling below ``lower`` or above ``upper``."""
    shape = exponent + 1
    return float(gammainc(shape, lower) + gammaincc(shape, upper))


def entropy_continuum(
    p: ThermoParams, tolerance: float = VALIDITY_TOLERANCE, warn: bool = True
) -> ContinuumEntropy:
    """
    Low-temperature continuum approximation with the density rho(l) = rho_0 exp(alpha l).

    ``integral_form`` keeps the IR and UV cutoffs of the t integral, ``gamma_bound`` extends it
    to [0, inf). The power law only describes the entropy when the bulk of the t^(alpha/gamma)
    e^-t weight sits between the cutoffs beta Lambda exp(-gamma L) and beta Lambda, so ``valid``
    requires at most ``tolerance`` of it outside. Colder, every layer is frozen and the exact
    excess vanishes far faster than the gamma bound; hotter, the UV layers saturate.
    """
    beta, alpha, decay = p.inverse_temperature, p.alpha, p.decay_rate
    exponent = alpha / decay
    ancillas = p.r**p.L
    rho_0 = alpha * ancillas / math.expm1(alpha * p.L)
    upper = beta * p.uv_scale
    lower = upper * math.exp(-decay * p.L)
    outside = weight_outside_cutoffs(exponent, lower, upper)
    valid = outside <= tolerance
    if not valid and warn:
        logger.warning(
            f"Continuum approximation outside its regime: {outside:.3g} of the gamma weight "
            f"lies outside [{lower:.3g}, {upper:.3g}]"
        )
    prefactor = (
        (p.d - 1)
        * rho_0
        / decay
        * math.exp(alpha * p.L - exponent * math.log(upper))
    )
    ground = p.k * math.log(p.d)
    return ContinuumEntropy(
        integral_form=ground + prefactor * _truncated_gamma_integral(exponent, lower, upper),
        gamma_bound=ground + prefactor * float(gamma_function(exponent + 1)),
        valid=valid,
    )


def heat_capacity(p: ThermoParams, step: float = LOG_TEMPERATURE_STEP) -> float:
    """C_V = T dS/dT = -beta dS/d beta, central difference in log beta."""
    beta = p.inverse_temperature
    colder = gibbs_entropy_exact(p.with_beta(beta * math.exp(step)))
    hotter = gibbs_entropy_exact(p.with_beta(beta * math.exp(-step)))
    return (hotter - colder) / (2 * step)


def entropy_curve(p: ThermoParams, temperatures: Sequence[float]) -> pd.DataFrame:
    """One row per temperature; the validity warning is logged once per curve."""
    rows = []
    invalid = []
    for temperature in temperatures:
        at_temperature = p.with_temperature(float(temperature))
        continuum = entropy_continuum(at_temperature, warn=False)
        if not continuum.valid:
            invalid.append(float(temperature))
        rows.append(
            {
                "T": float(temperature),
                "S_exact": gibbs_entropy_exact(at_temperature),
                "S_integral": continuum.integral_form,
                "S_gamma_bound": continuum.gamma_bound,
                "C_V": heat_capacity(at_temperature),
            }
        )
    if invalid:
        logger.warning(
            f"Continuum approximation outside its regime for gamma={p.decay_rate} at "
            f"{len(invalid)} of {len(rows)} temperatures"
        )
    return pd.DataFrame(rows, columns=ENTROPY_COLUMNS)


def temperature_grid(minimum: float, maximum: float, points: int) -> np.ndarray:
    return np.geomspace(minimum, maximum, points)


def log_log_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    slope, _ = np.polyfit(np.log(np.asarray(x)), np.log(np.asarray(y)), 1)
    return float(slope)

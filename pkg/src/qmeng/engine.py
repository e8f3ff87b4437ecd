"""Measurement-engine cycle: ledger, efficiencies, corrected power and gamma sweeps.

Ledger energies are in units of mu*Bz1*(p+ - p-) scaled back by the
polarization, matching ``otto.CycleLedger``; power is a fraction of P_max.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .optimize import golden_section_max
from .otto import B_BRACKET, CycleLedger, _check_b, _check_polarization


@dataclass(frozen=True)
class MeasurementCyclePoint:
    b: float
    cos_theta: float
    omega_t0: float
    polarization: float
    gamma_value: float = 0.0

    def __post_init__(self):
        _check_b(self.b)
        _check_polarization(self.polarization)
        if not 0 <= self.cos_theta <= 1:
            raise DomainError(f"cos_theta must lie in [0, 1], got {self.cos_theta}")
        if not self.omega_t0 > 0:
            raise DomainError("omega_t0 must be > 0")
        if not self.gamma_value >= 0:
            raise DomainError("Gamma must be >= 0")

    @property
    def gamma(self) -> float:
        return self.omega_t0 * self.cos_theta

    @classmethod
    def from_groups(cls, groups, gamma_value=0.0):
        return cls(groups.b, groups.cos_theta, groups.omega_t0, groups.polarization, gamma_value)


@dataclass(frozen=True)
class EfficiencyReport:
    eta_otto: float
    eta_q_exact: float
    eta_q_longtime: float
    eta_q_corrected: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def flip_weight(cos_theta, omega_t0) -> float:
    """sin^2(theta) sin^2(omega t0), the population transferred by the pulse."""
    return (1.0 - cos_theta**2) * math.sin(omega_t0) ** 2


def measurement_ledger(point: MeasurementCyclePoint) -> CycleLedger:
    p = point.polarization
    s = flip_weight(point.cos_theta, point.omega_t0)
    bracket = 1.0 - 2.0 * s
    b = point.b
    e0 = -b * p
    e1 = -p
    e2 = -p * bracket
    e3 = -b * p * bracket
    W01 = (1.0 - b) * p
    Q12 = 2.0 * s * p
    W23 = (1.0 - b) * p * bracket
    Q30 = 2.0 * b * s * p
    net_in = Q12 + W23
    eff = W01 / net_in if net_in > 0 else 0.0
    return CycleLedger((e0, e1, e2, e3), W01, Q12, W23, Q30, eff)


def eta_q_exact(b, cos_theta, omega_t0) -> float:
    return (1.0 - b) / (1.0 - b * (1.0 - 2.0 * flip_weight(cos_theta, omega_t0)))


def eta_q_longtime(b, cos_theta) -> float:
    _check_b(b, open_right=True)
    return (1.0 - b) / (1.0 - b * cos_theta**2)


def eta_q_corrected(b, cos_theta, gamma, gamma_value) -> float:
    """Long-time efficiency with the record cost Gamma/gamma added to the heat input."""
    _check_b(b, open_right=True)
    if not gamma > 0:
        raise DomainError(f"gamma must be > 0, got {gamma}")
    if not gamma_value >= 0:
        raise DomainError(f"Gamma must be >= 0, got {gamma_value}")
    if math.isinf(gamma_value):
        return 0.0
    return (1.0 - b) / (1.0 - b * cos_theta**2 + gamma_value / gamma)


def efficiency_report(point: MeasurementCyclePoint) -> EfficiencyReport:
    return EfficiencyReport(
        eta_otto=1.0 - point.b,
        eta_q_exact=eta_q_exact(point.b, point.cos_theta, point.omega_t0),
        eta_q_longtime=eta_q_longtime(point.b, point.cos_theta),
        eta_q_corrected=eta_q_corrected(point.b, point.cos_theta, point.gamma, point.gamma_value),
    )


def power_corrected(b, gamma) -> float:
    """Power / P_max with the measurement time added: b(1-b)^2 / (b + (1-b)^2 + gamma b (1-b))."""
    _check_b(b)
    if not gamma >= 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    d = 1.0 - b
    return b * d * d / (b + d * d + gamma * b * d)


def maximize_power_corrected(gamma, tol=1e-8):
    """(b_star, power_star) of ``power_corrected`` at fixed gamma."""
    if not gamma >= 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    return golden_section_max(lambda b: power_corrected(b, gamma), *B_BRACKET, tol=tol)


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    b_star: float
    power_star: float
    error: str = ""

    @property
    def b_star_sqrt_gamma(self) -> float:
        return self.b_star * math.sqrt(self.gamma)

    @property
    def power_star_gamma(self) -> float:
        return self.power_star * self.gamma


def sweep_gamma(gamma_grid, tol=1e-8):
    """Optimal compression ratio and power for each gamma.

    A failing row is kept with NaN values and the error text, and the sweep
    continues.
    """
    grid = [float(g) for g in gamma_grid]
    if any(not g > 0 for g in grid):
        raise DomainError("gamma grid values must be > 0")
    if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
        raise DomainError("gamma grid must be strictly increasing")
    rows = []
    for g in grid:
        try:
            b, p = maximize_power_corrected(g, tol)
            rows.append(SweepRow(g, b, p))
        except ConvergenceError as exc:
            rows.append(SweepRow(g, math.nan, math.nan, str(exc)))
    return rows


def figure_grid(n=60, lo=0.1, hi=1e3):
    """Default log-spaced gamma grid for the figure data."""
    return np.logspace(math.log10(lo), math.log10(hi), n)

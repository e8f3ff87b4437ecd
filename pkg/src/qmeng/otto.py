"""Thermal Otto baseline of the spin engine.

Energies are in units of mu*Bz1 and times in hbar/(mu*Bz1).  Node 0 is the
thermal state at Bz0, node 1 after the adiabatic ramp to Bz1, node 2 after
the hot (infinite-temperature) contact, node 3 after the ramp back to Bz0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .optimize import golden_section_max

B_BRACKET = (1e-6, 1.0 - 1e-6)


@dataclass(frozen=True)
class CycleLedger:
    node_energies: tuple
    W01: float
    Q12: float
    W23: float
    Q30: float
    efficiency: float

    def closure_residual(self) -> float:
        """Relative first-law residual (W01 + Q30) - (Q12 + W23)."""
        lhs = self.W01 + self.Q30
        rhs = self.Q12 + self.W23
        scale = max(abs(lhs), abs(rhs))
        return 0.0 if scale == 0 else abs(lhs - rhs) / scale

    def as_dict(self) -> dict:
        return {
            "node_energies": list(self.node_energies),
            "W01": self.W01,
            "Q12": self.Q12,
            "W23": self.W23,
            "Q30": self.Q30,
            "efficiency": self.efficiency,
        }


@dataclass(frozen=True)
class DurationBounds:
    adiabatic_lower: float
    qsl_lower: float
    total_cycle_time: float


def _check_b(b, open_right=False):
    if not (math.isfinite(b) and 0 < b <= 1) or (open_right and b == 1):
        raise DomainError(f"b must lie in (0, 1{')' if open_right else ']'}, got {b}")


def _check_polarization(p):
    if not (math.isfinite(p) and 0 <= p < 1):
        raise DomainError(f"polarization must lie in [0, 1), got {p}")


def otto_ledger(b, polarization) -> CycleLedger:
    _check_b(b)
    _check_polarization(polarization)
    e0 = -b * polarization
    e1 = -polarization
    e2 = 0.0
    e3 = 0.0
    W01 = e0 - e1
    Q12 = e2 - e1
    Q30 = e3 - e0
    eff = W01 / Q12 if Q12 > 0 else 0.0
    return CycleLedger((e0, e1, e2, e3), W01, Q12, 0.0, Q30, eff)


def otto_efficiency(b) -> float:
    _check_b(b)
    return 1.0 - b


def duration_bounds(b, safety=1.0) -> DurationBounds:
    """Lower bounds on the adiabatic-leg time (units hbar/mu*Bz1).

    At b = 1 the speed-limit bound diverges and is reported as ``math.inf``.
    ``safety`` multiplies the adiabatic bound; the power law uses safety = 1.
    """
    _check_b(b)
    if safety <= 0:
        raise DomainError("safety multiplier must be positive")
    adiabatic = safety * (1.0 / b - 1.0)
    qsl = math.inf if b == 1 else 1.0 / (1.0 - b)
    return DurationBounds(adiabatic, qsl, adiabatic + qsl)


def otto_power(b) -> float:
    """Power as a fraction of P_max: b(1-b)^2 / (b + (1-b)^2)."""
    _check_b(b)
    d = 1.0 - b
    return b * d * d / (b + d * d)


def p_max(mu_bz1, polarization, hbar=1.0) -> float:
    """Power normalization (mu*Bz1)^2 (p+ - p-) / hbar."""
    return mu_bz1**2 * polarization / hbar


def maximize_otto_power(tol=1e-8):
    """Return (b_star, power_star) of the Otto power law on (0, 1)."""
    return golden_section_max(otto_power, *B_BRACKET, tol=tol)

"""Physical constants, engine parameters and their dimensionless reduction.

Everything downstream works in units where hbar = c = 1, energies are measured
in mu*Bz1 (cycle ledgers) or hbar*omega (radiation), and times in 1/omega.
Raw physical inputs are converted once, here.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DegenerateFieldError, DomainError

FINE_STRUCTURE = 1.0 / 137.0


def _require_finite(**values):
    for name, v in values.items():
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class PhysicalConstants:
    """Constants of the working spin. Defaults are natural units with m = 1.

    The charge is not free: e**2 = alpha*hbar*c, and mu = e*hbar/(2m).
    """

    hbar: float = 1.0
    c: float = 1.0
    alpha: float = FINE_STRUCTURE
    mass: float = 1.0
    g_factor: float = 2.0

    def __post_init__(self):
        for name in ("hbar", "c", "alpha", "mass", "g_factor"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and positive, got {v!r}")

    @property
    def charge(self) -> float:
        return math.sqrt(self.alpha * self.hbar * self.c)

    @property
    def mu(self) -> float:
        return self.charge * self.hbar / (2.0 * self.mass)


@dataclass(frozen=True)
class EngineParams:
    """Raw physical inputs of one engine configuration."""

    Bz0: float
    Bz1: float
    By: float
    beta: float
    t0: float
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        _require_finite(Bz0=self.Bz0, Bz1=self.Bz1, By=self.By, beta=self.beta, t0=self.t0)
        if not 0 < self.Bz0 <= self.Bz1:
            raise DomainError(f"need 0 < Bz0 <= Bz1, got Bz0={self.Bz0}, Bz1={self.Bz1}")
        if self.By < 0:
            raise DomainError(f"By must be >= 0, got {self.By}")
        if self.t0 <= 0:
            raise DomainError(f"t0 must be > 0, got {self.t0}")
        if self.beta <= 0:
            raise DomainError(f"beta must be > 0, got {self.beta}")


@dataclass(frozen=True)
class DimensionlessGroups:
    """Reduced control set consumed by every other module.

    ``omega`` is the only dimensional entry; it is 1.0 when the groups were
    given directly rather than derived from physical inputs.
    """

    b: float
    cos_theta: float
    omega_t0: float
    polarization: float
    rad_scale: float = 1e-3
    omega: float = 1.0
    alpha: float = FINE_STRUCTURE
    g_factor: float = 2.0

    def __post_init__(self):
        _require_finite(b=self.b, cos_theta=self.cos_theta, omega_t0=self.omega_t0,
                        polarization=self.polarization, rad_scale=self.rad_scale)
        if not 0 < self.b <= 1:
            raise DomainError(f"b must lie in (0, 1], got {self.b}")
        if not 0 < self.cos_theta <= 1:
            raise DomainError(f"cos_theta must lie in (0, 1], got {self.cos_theta}")
        if self.omega_t0 <= 0:
            raise DomainError(f"omega_t0 must be > 0, got {self.omega_t0}")
        if not 0 <= self.polarization < 1:
            raise DomainError(f"polarization must lie in [0, 1), got {self.polarization}")
        if self.rad_scale < 0:
            raise DomainError(f"rad_scale must be >= 0, got {self.rad_scale}")
        if self.omega <= 0 or self.alpha <= 0 or self.g_factor <= 0:
            raise DomainError("omega, alpha and g_factor must be positive")

    @property
    def gamma(self) -> float:
        """Measurement duration mu*Bz1*t0/hbar; equals omega*t0*cos(theta)."""
        return self.omega_t0 * self.cos_theta

    @property
    def sin_theta(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.cos_theta**2))

    @property
    def theta(self) -> float:
        return math.acos(self.cos_theta)

    @property
    def t0(self) -> float:
        return self.omega_t0 / self.omega


def thermal_populations(beta, muBz0):
    """Return (p_plus, p_minus) for the spin thermalized in the field Bz0."""
    _require_finite(beta=beta, muBz0=muBz0)
    if beta < 0 or muBz0 < 0:
        raise DomainError("beta and mu*Bz0 must be non-negative")
    x = beta * muBz0
    p_plus = 1.0 / (1.0 + math.exp(-x))
    p_minus = 1.0 - p_plus
    return p_plus, p_minus


def polarization_from(beta, muBz0) -> float:
    """p_plus - p_minus, computed as tanh(x/2) to avoid cancellation."""
    _require_finite(beta=beta, muBz0=muBz0)
    if beta < 0 or muBz0 < 0:
        raise DomainError("beta and mu*Bz0 must be non-negative")
    return math.tanh(0.5 * beta * muBz0)


def derive_groups(params: EngineParams, rad_scale: float | None = None) -> DimensionlessGroups:
    """Reduce physical inputs to the dimensionless groups.

    ``rad_scale`` defaults to hbar*omega/(m c^2) computed from the inputs.
    """
    k = params.constants
    if params.Bz1 == 0 and params.By == 0:
        raise DegenerateFieldError("Bz1 and By both vanish; omega is undefined")
    field_mag = math.hypot(params.Bz1, params.By)
    omega = k.mu * field_mag / k.hbar
    if rad_scale is None:
        rad_scale = k.hbar * omega / (k.mass * k.c**2)
    return DimensionlessGroups(
        b=params.Bz0 / params.Bz1,
        cos_theta=params.Bz1 / field_mag,
        omega_t0=omega * params.t0,
        polarization=polarization_from(params.beta, k.mu * params.Bz0),
        rad_scale=rad_scale,
        omega=omega,
        alpha=k.alpha,
        g_factor=k.g_factor,
    )


PHYSICAL_KEYS = ("Bz0", "Bz1", "By", "beta", "t0", "mass", "alpha")
DIMENSIONLESS_KEYS = ("b", "cos_theta", "omega_t0", "polarization", "rad_scale")


def groups_from_mapping(cfg: dict) -> DimensionlessGroups:
    """Build groups from a parsed config: physical keys or a "dimensionless" block, not both."""
    if not isinstance(cfg, dict):
        raise DomainError("configuration must be a JSON object")
    physical = [k for k in PHYSICAL_KEYS if k in cfg]
    if "dimensionless" in cfg:
        if physical:
            raise DomainError(f"give physical inputs or a 'dimensionless' block, not both (found {physical})")
        block = cfg["dimensionless"]
        unknown = set(block) - set(DIMENSIONLESS_KEYS)
        if unknown:
            raise DomainError(f"unknown dimensionless keys: {sorted(unknown)}")
        missing = {"b", "cos_theta", "omega_t0", "polarization"} - set(block)
        if missing:
            raise DomainError(f"missing dimensionless keys: {sorted(missing)}")
        return DimensionlessGroups(**{k: float(v) for k, v in block.items()})
    missing = {"Bz0", "Bz1", "By", "beta", "t0"} - set(cfg)
    if missing:
        raise DomainError(f"missing physical keys: {sorted(missing)}")
    unknown = set(cfg) - set(PHYSICAL_KEYS)
    if unknown:
        raise DomainError(f"unknown configuration keys: {sorted(unknown)}")
    consts = PhysicalConstants(
        mass=float(cfg.get("mass", 1.0)),
        alpha=float(cfg.get("alpha", FINE_STRUCTURE)),
    )
    params = EngineParams(float(cfg["Bz0"]), float(cfg["Bz1"]), float(cfg["By"]),
                          float(cfg["beta"]), float(cfg["t0"]), consts)
    return derive_groups(params)


def load_config(path) -> DimensionlessGroups:
    text = Path(path).read_text(encoding="utf-8")
    return groups_from_mapping(json.loads(text))

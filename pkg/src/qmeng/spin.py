"""Spin-1/2 evolution through the sudden y-field pulse.

During the pulse (0 <= t <= t0) the Hamiltonian is
``H = -hbar*omega*(cos(theta) sigma_z + sin(theta) sigma_y)``; afterwards
only the z-field remains, ``H = -mu*Bz1*sigma_z`` with
``mu*Bz1 = hbar*omega*cos(theta)``.  Spinors are numpy arrays ``[up, down]``
in the sigma_z basis.  Energies are in units of mu*Bz1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StepTooLargeError, UnsupportedInitialStateError

S_PLUS = np.array([1.0 + 0j, 0.0 + 0j])
S_MINUS = np.array([0.0 + 0j, 1.0 + 0j])

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class PulseSpec:
    cos_theta: float
    omega: float
    t0: float
    hbar: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise DomainError(f"omega must be > 0, got {self.omega}")
        if not (math.isfinite(self.t0) and self.t0 > 0):
            raise DomainError(f"t0 must be > 0, got {self.t0}")
        if not 0 < self.cos_theta <= 1:
            raise DomainError(f"cos_theta must lie in (0, 1], got {self.cos_theta}")

    @property
    def sin_theta(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.cos_theta**2))

    @property
    def bz1_energy(self) -> float:
        """mu*Bz1, the post-pulse level energy."""
        return self.hbar * self.omega * self.cos_theta

    @property
    def bz1_rate(self) -> float:
        """Post-pulse phase rate mu*Bz1/hbar."""
        return self.omega * self.cos_theta

    @classmethod
    def from_groups(cls, groups):
        return cls(groups.cos_theta, groups.omega, groups.t0)


@dataclass(frozen=True)
class PulseAmplitudes:
    psi_plus: complex
    psi_minus: float


def eigenbasis(cos_theta):
    """Instantaneous eigenvectors (phi_plus, phi_minus) of the pulse-on Hamiltonian."""
    if not -1 <= cos_theta <= 1:
        raise DomainError(f"cos_theta must lie in [-1, 1], got {cos_theta}")
    theta = math.acos(cos_theta)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([c, 1j * s]), np.array([1j * s, c])


def pulse_amplitudes(t, spec: PulseSpec) -> PulseAmplitudes:
    if not 0 <= t <= spec.t0:
        raise DomainError(f"t={t} outside the pulse window [0, {spec.t0}]")
    wt = spec.omega * t
    return PulseAmplitudes(
        complex(math.cos(wt), math.sin(wt) * spec.cos_theta),
        math.sin(wt) * spec.sin_theta,
    )


def _initial_sign(initial) -> int:
    v = np.asarray(initial, dtype=complex)
    if v.shape == (2,):
        if np.allclose(v, S_PLUS, rtol=0, atol=1e-12):
            return 1
        if np.allclose(v, S_MINUS, rtol=0, atol=1e-12):
            return -1
    raise UnsupportedInitialStateError("only s+ = (1, 0) and s- = (0, 1) are supported")


def evolve(initial, t, spec: PulseSpec) -> np.ndarray:
    """Exact state at time ``t`` >= 0 for initial s+ or s-."""
    if t < 0:
        raise DomainError("t must be >= 0")
    sign = _initial_sign(initial)
    amp = pulse_amplitudes(min(t, spec.t0), spec)
    phase = np.exp(1j * spec.bz1_rate * max(0.0, t - spec.t0))
    if sign > 0:
        return np.array([amp.psi_plus * phase, -amp.psi_minus / phase])
    return np.array([amp.psi_minus * phase, np.conj(amp.psi_plus) / phase])


def mean_energy_after_pulse(spec: PulseSpec, initial_sign=1) -> float:
    if initial_sign not in (1, -1):
        raise DomainError("initial_sign must be +1 or -1")
    flip = spec.sin_theta**2 * math.sin(spec.omega * spec.t0) ** 2
    return -initial_sign * (1.0 - 2.0 * flip)


def spin_expectations(t, spec: PulseSpec, initial_sign=1):
    """(<S_x'>, <S_y'>, <S_z'>) during the pulse, in the tilted frame.

    The frame is x' = x, z' along the pulse-on field.  The y' component
    follows the sign convention of the radiation-record amplitudes (its
    axis is the negative of cos(theta) y - sin(theta) z); the transverse
    modulus and everything built from it are convention independent.
    """
    if not 0 <= t <= spec.t0:
        raise DomainError(f"t={t} outside the pulse window [0, {spec.t0}]")
    if initial_sign not in (1, -1):
        raise DomainError("initial_sign must be +1 or -1")
    s = spec.sin_theta
    w2 = 2.0 * spec.omega * t
    return (
        initial_sign * -0.5 * s * math.sin(w2),
        initial_sign * 0.5 * s * math.cos(w2),
        initial_sign * 0.5 * spec.cos_theta,
    )


def tilted_frame(cos_theta):
    """Unit vectors (x', y', z') in lab coordinates (x, y, z)."""
    s = math.sqrt(max(0.0, 1.0 - cos_theta**2))
    return (np.array([1.0, 0.0, 0.0]),
            np.array([0.0, cos_theta, -s]),
            np.array([0.0, s, cos_theta]))


def bloch_vector(psi) -> np.ndarray:
    """Lab-frame <S> = <sigma>/2 of a normalized spinor."""
    psi = np.asarray(psi)
    return 0.5 * np.real([np.vdot(psi, op @ psi) for op in (SIGMA_X, SIGMA_Y, SIGMA_Z)])


def hamiltonian(t, spec: PulseSpec) -> np.ndarray:
    """H/hbar for the sudden-switch protocol (pulse on for 0 <= t < t0)."""
    if 0 <= t < spec.t0:
        return -spec.omega * (spec.cos_theta * SIGMA_Z + spec.sin_theta * SIGMA_Y)
    return -spec.bz1_rate * SIGMA_Z


def ode_oracle(spec: PulseSpec, initial, dt, t_end=None):
    """Integrate i dpsi/dt = (H/hbar) psi with fixed-step classical RK4.

    The grid is uniform with a node exactly at t0 (and at ``t_end`` if beyond
    it), so no step straddles the field switch.  Requires omega*dt <= 0.01.

    Returns
    -------
    times : (n,) array
    states : (n, 2) complex array
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    if spec.omega * dt > 0.01 * (1 + 1e-12):
        raise StepTooLargeError(f"omega*dt = {spec.omega * dt:g} exceeds 0.01")
    t_end = spec.t0 if t_end is None else t_end
    if t_end < 0:
        raise DomainError("t_end must be >= 0")
    psi = np.array(initial, dtype=complex)

    segments = [(0.0, min(t_end, spec.t0))]
    if t_end > spec.t0:
        segments.append((spec.t0, t_end))

    times = [0.0]
    states = [psi.copy()]
    for a, b in segments:
        n = max(1, math.ceil((b - a) / dt - 1e-9))
        h = (b - a) / n
        A = -1j * hamiltonian(0.5 * (a + b), spec)
        for i in range(n):
            k1 = A @ psi
            k2 = A @ (psi + 0.5 * h * k1)
            k3 = A @ (psi + 0.5 * h * k2)
            k4 = A @ (psi + h * k3)
            psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            times.append(a + (i + 1) * h)
            states.append(psi)
    return np.array(times), np.array(states)


def trajectory_rows(spec: PulseSpec, n_samples=201, initial_sign=1):
    """Rows (t, Re psi+, Im psi+, psi-, Sx', Sy', Sz') sampled over the pulse."""
    rows = []
    for t in np.linspace(0.0, spec.t0, n_samples):
        t = float(t)
        amp = pulse_amplitudes(t, spec)
        sx, sy, sz = spin_expectations(t, spec, initial_sign)
        rows.append((t, amp.psi_plus.real, amp.psi_plus.imag, amp.psi_minus, sx, sy, sz))
    return rows

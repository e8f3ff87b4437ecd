"""Radiation record left by the precessing spin and its distinguishability cost.

Internally omega = 1 and hbar = c = 1, so frequencies f and wavenumbers k
coincide and are measured in units of omega, times in 1/omega, energies in
hbar*omega.  With these units the dipole coupling g^2 mu^2 reduces to
(g/2)^2 * alpha * rad_scale^2, rad_scale = hbar*omega/(m c^2).

Two independent routes to Gamma are provided:

* ``gamma_cubature`` integrates the projected amplitudes over the full
  wavevector space (radial Gauss-Legendre panels times a product angular
  rule around the x' axis).
* ``gamma_radial`` uses the closed-form angular integral
  sum_alpha int dOmega |S_alpha|^2 = (8 pi / 3) k^2 (|S_x'|^2 + |S_y'|^2)
  and performs a single radial quadrature.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConvergenceError, CoordinateSingularityError, DomainError

WINDOWS = ("sharp", "smooth-turnon")
RAMP_SHAPES = ("linear", "cosine")

MIN_RADIAL_POINTS = 64
MIN_POLAR_POINTS = 32
MIN_AZIMUTH_POINTS = 64

# panels handed to one worker; fixed so results do not depend on worker count
_BLOCK_PANELS = 8


# --------------------------------------------------------------------------
# time-window transforms


def _sinc(y):
    return np.sinc(np.asarray(y) / np.pi)


def _exp_integral(kappa, T):
    """int_0^T exp(i kappa t) dt, stable at kappa -> 0."""
    kappa = np.asarray(kappa, dtype=float)
    return T * np.exp(0.5j * kappa * T) * _sinc(0.5 * kappa * T)


def _ramp_moment(x):
    """int_0^1 s exp(i x s) ds."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape, dtype=complex)
    small = np.abs(x) < 1.0
    xl = x[~small]
    out[~small] = (np.exp(1j * xl) * (1.0 - 1j * xl) - 1.0) / xl**2
    xs = x[small]
    acc = np.zeros(xs.shape, dtype=complex)
    term = np.ones(xs.shape, dtype=complex)
    for n in range(30):
        acc += term / (n + 2)
        term = term * (1j * xs) / (n + 1)
    out[small] = acc
    return out


def _raised_cosine_rise(kappa, tau):
    """int_0^tau sin^2(pi t / 2 tau) exp(i kappa t) dt."""
    q = math.pi / tau
    return (0.5 * _exp_integral(kappa, tau)
            - 0.25 * (_exp_integral(kappa + q, tau) + _exp_integral(kappa - q, tau)))


def window_transform(kappa, t0, window="sharp", ramp_time=None, ramp_shape="linear"):
    """W(kappa) = int_0^t0 w(t) exp(i kappa t) dt for the magnetization envelope w.

    ``sharp`` is w = 1 on [0, t0].  ``smooth-turnon`` ramps w from 0 to 1
    over ``ramp_time`` at both ends, linearly or as a raised cosine.
    """
    kappa = np.asarray(kappa, dtype=float)
    if window == "sharp":
        return _exp_integral(kappa, t0)
    if window != "smooth-turnon":
        raise DomainError(f"unknown window {window!r}; expected one of {WINDOWS}")
    tau = ramp_time
    if tau is None or not tau > 0 or 2 * tau > t0:
        raise DomainError(f"ramp_time must satisfy 0 < 2*ramp_time <= t0, got {tau}")
    flat = np.exp(1j * kappa * tau) * _exp_integral(kappa, t0 - 2 * tau)
    if ramp_shape == "linear":
        rise = tau * _ramp_moment(kappa * tau)
        fall = tau * np.exp(1j * kappa * t0) * _ramp_moment(-kappa * tau)
    elif ramp_shape == "cosine":
        rise = _raised_cosine_rise(kappa, tau)
        fall = np.exp(1j * kappa * t0) * _raised_cosine_rise(-kappa, tau)
    else:
        raise DomainError(f"unknown ramp shape {ramp_shape!r}; expected one of {RAMP_SHAPES}")
    return rise + flat + fall


def window_envelope(t, t0, window="sharp", ramp_time=None, ramp_shape="linear"):
    """Envelope w(t) on [0, t0]; used by quadrature checks of ``window_transform``."""
    t = np.asarray(t, dtype=float)
    if window == "sharp":
        return np.where((t >= 0) & (t <= t0), 1.0, 0.0)
    edge = np.clip(np.minimum(t, t0 - t) / ramp_time, 0.0, 1.0)
    if ramp_shape == "cosine":
        return np.sin(0.5 * math.pi * edge) ** 2
    return edge


# --------------------------------------------------------------------------
# spectral amplitudes and polarization geometry


def spectral_amplitudes(f, sin_theta, omega, t0, window="sharp", ramp_time=None,
                        ramp_shape="linear"):
    """Fourier amplitudes (S_x'(f), S_y'(f)) of the transverse spin over the pulse.

    With the sharp window these are

        S_x' = (sin th / 4) [K(f + 2w) - K(f - 2w)]
        S_y' = (-i sin th / 4) [K(f + 2w) + K(f - 2w)]

    where K(x) = (exp(i x t0) - 1) / x = i t0 exp(i x t0 / 2) sinc(x t0 / 2),
    finite at the resonances.  ``ramp_time`` is in the same units as ``t0``.
    """
    f = np.asarray(f, dtype=float)
    kp = 1j * window_transform(f + 2 * omega, t0, window, ramp_time, ramp_shape)
    km = 1j * window_transform(f - 2 * omega, t0, window, ramp_time, ramp_shape)
    q = 0.25 * sin_theta
    return q * (kp - km), -1j * q * (kp + km)


@dataclass(frozen=True)
class SpectralAmplitudes:
    sin_theta: float
    omega: float
    t0: float
    window: str = "sharp"
    ramp_time: float | None = None
    ramp_shape: str = "linear"

    def __call__(self, f):
        return spectral_amplitudes(f, self.sin_theta, self.omega, self.t0,
                                   self.window, self.ramp_time, self.ramp_shape)


@dataclass(frozen=True)
class PolarizationTriad:
    khat: np.ndarray
    epsilon1: np.ndarray
    epsilon2: np.ndarray


def _triad_components(kx, ky, kz):
    """Vectorized transverse basis for unit wavevectors given in the primed frame."""
    rho = np.sqrt(ky * ky + kz * kz)
    e1 = (np.zeros_like(kx), kz / rho, -ky / rho)
    e2 = (-rho, kx * ky / rho, kx * kz / rho)
    return e1, e2


def polarization_triad(khat) -> PolarizationTriad:
    """Triad (k, eps1, eps2) with eps1 along k x x' and eps2 = k x eps1."""
    k = np.asarray(khat, dtype=float)
    norm = np.linalg.norm(k)
    if not abs(norm - 1.0) < 1e-9:
        raise DomainError(f"khat must be a unit vector, |khat| = {norm}")
    if math.hypot(k[1], k[2]) < 1e-12:
        raise CoordinateSingularityError("khat is parallel to x'; polarization basis undefined")
    e1, e2 = _triad_components(k[0], k[1], k[2])
    return PolarizationTriad(k, np.array(e1, dtype=float), np.array(e2, dtype=float))


def _project(kx, ky, kz, k, sx, sy):
    rho = np.sqrt(ky * ky + kz * kz)
    s1 = k * rho * sx - k * (kx * ky / rho) * sy
    s2 = k * (kz / rho) * sy
    return s1, s2


def projected_amplitudes(f, khat, k, spectral):
    """Amplitudes (S_1, S_2) of the induced current along eps1 and eps2."""
    tri = polarization_triad(khat)
    sx, sy = spectral(f)
    kx, ky, kz = tri.khat
    return _project(kx, ky, kz, k, sx, sy)


def larmor_power(sin_theta, omega, coupling):
    """Radiated dipole power (8 pi/3) * coupling * |d^2 S_perp/dt^2|^2.

    ``coupling`` is g^2 mu^2 / c^5.  Constant during the pulse.
    """
    return (8.0 * math.pi / 3.0) * coupling * 4.0 * omega**4 * sin_theta**2


def record_overlap(gamma_value) -> float:
    """Overlap exp(-Gamma) of the two radiation records."""
    if not gamma_value >= 0:
        raise DomainError(f"Gamma must be >= 0, got {gamma_value}")
    return math.exp(-gamma_value)


# --------------------------------------------------------------------------
# Gamma


@dataclass(frozen=True)
class CutoffSpec:
    """UV cutoff and quadrature resolution.

    ``ramp_time`` is in units of 1/omega and is only used by the
    ``smooth-turnon`` window; it defaults to one period 2*pi/omega.
    """

    lambda_over_2omega: float = 10.0
    radial_points: int = MIN_RADIAL_POINTS
    polar_points: int = MIN_POLAR_POINTS
    azimuth_points: int = MIN_AZIMUTH_POINTS
    window: str = "sharp"
    ramp_time: float | None = None
    ramp_shape: str = "linear"
    rtol: float = 1e-8

    def __post_init__(self):
        if not (math.isfinite(self.lambda_over_2omega) and self.lambda_over_2omega > 1):
            raise DomainError("lambda_over_2omega must be finite and > 1")
        if self.radial_points < MIN_RADIAL_POINTS:
            raise DomainError(f"radial_points must be >= {MIN_RADIAL_POINTS}")
        if self.polar_points < MIN_POLAR_POINTS or self.azimuth_points < MIN_AZIMUTH_POINTS:
            raise DomainError(f"angular grid must be at least {MIN_POLAR_POINTS}x{MIN_AZIMUTH_POINTS}")
        if self.window not in WINDOWS:
            raise DomainError(f"unknown window {self.window!r}")
        if self.ramp_shape not in RAMP_SHAPES:
            raise DomainError(f"unknown ramp shape {self.ramp_shape!r}")
        if self.window == "smooth-turnon" and self.ramp_time is None:
            object.__setattr__(self, "ramp_time", 2.0 * math.pi)
        if not self.rtol > 0:
            raise DomainError("rtol must be positive")


@dataclass(frozen=True)
class GammaResult:
    gamma_value: float
    overlap: float
    radiated_energy_larmor: float
    radiated_energy_record: float
    cutoff: CutoffSpec
    quadrature_error_estimate: float
    method: str = "radial"
    paper_estimate: float | None = None

    def as_dict(self) -> dict:
        ratio = ""
        if self.radiated_energy_record > 0:
            ratio = self.radiated_energy_larmor / self.radiated_energy_record
        out = {
            "gamma": self.gamma_value,
            "overlap": self.overlap,
            "E_larmor": self.radiated_energy_larmor,
            "E_record": self.radiated_energy_record,
            "E_larmor_over_E_record": ratio,
            "cutoff": asdict(self.cutoff),
            "quad_error": self.quadrature_error_estimate,
            "method": self.method,
        }
        if self.paper_estimate is not None:
            out["gamma_estimate"] = {
                "label": "ESTIMATE",
                "value": self.paper_estimate,
                "ratio_computed_over_estimate":
                    self.gamma_value / self.paper_estimate if self.paper_estimate > 0 else "",
            }
        return out


def worker_count(requested=None) -> int:
    """Worker cap: explicit request, else QMENG_THREADS, else 1."""
    if requested is None:
        requested = int(os.environ.get("QMENG_THREADS", "1") or 1)
    cap = os.environ.get("QMENG_THREADS")
    if cap:
        requested = min(requested, int(cap))
    return max(1, int(requested))


def radial_panels(omega_t0, lambda_over_2omega, periods_per_panel=4.0, band_panels=10,
                  extra_breaks=()):
    """Panel edges on (0, Lambda] for the radial quadrature (units of omega).

    A dense band of width 40*pi/t0 is centred on the resonance f = 2; the rest
    is cut into panels spanning ``periods_per_panel`` oscillations of the
    sinc^2 kernel (period 2*pi/t0).
    """
    t0 = float(omega_t0)
    top = 2.0 * lambda_over_2omega
    half = 20.0 * math.pi / t0
    lo, hi = max(0.0, 2.0 - half), min(top, 2.0 + half)
    width = periods_per_panel * 2.0 * math.pi / t0

    edges = []
    if lo > 0:
        edges.extend(np.linspace(0.0, lo, max(1, math.ceil(lo / width)) + 1)[:-1])
    edges.extend(np.linspace(lo, hi, band_panels + 1)[:-1])
    if hi < top:
        edges.extend(np.linspace(hi, top, max(1, math.ceil((top - hi) / width)) + 1)[:-1])
    edges.append(top)
    edges = np.array(edges)
    for x in extra_breaks:
        if 0 < x < top and not np.any(np.isclose(edges, x, rtol=0, atol=1e-12)):
            edges = np.sort(np.append(edges, x))
    return edges


def _panel_nodes(edges, n):
    x, w = np.polynomial.legendre.leggauss(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (a + b) * 0.5 + half * x, half * w


def _blocked_panel_sums(edges, n, panel_fn, workers):
    """Evaluate ``panel_fn(nodes, weights) -> per-panel sums`` in fixed blocks.

    Blocks are independent of the worker count and are combined with an
    exactly rounded sum, so the result is bit-identical for any ``workers``.
    """
    nodes, weights = _panel_nodes(edges, n)
    blocks = [(nodes[i:i + _BLOCK_PANELS], weights[i:i + _BLOCK_PANELS])
              for i in range(0, len(nodes), _BLOCK_PANELS)]
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda bw: panel_fn(*bw), blocks))
    else:
        parts = [panel_fn(*bw) for bw in blocks]
    return np.concatenate(parts)


def _spectral_for(groups, cutoff: CutoffSpec) -> SpectralAmplitudes:
    return SpectralAmplitudes(groups.sin_theta, 1.0, groups.omega_t0,
                              cutoff.window, cutoff.ramp_time, cutoff.ramp_shape)


def _coupling(groups) -> float:
    """g^2 mu^2 in units with hbar = c = omega = 1."""
    return (0.5 * groups.g_factor) ** 2 * groups.alpha * groups.rad_scale**2


def _radial_panel_sums(groups, cutoff, n, edges, workers):
    spectral = _spectral_for(groups, cutoff)

    def panel(nodes, weights):
        sx, sy = spectral(nodes)
        dens = nodes**3 * (np.abs(sx) ** 2 + np.abs(sy) ** 2)
        return np.sum(weights * dens, axis=1)

    return _blocked_panel_sums(edges, n, panel, workers)


def _radial_prefactor(groups) -> float:
    # 16 pi^2 g^2 mu^2 * (8 pi / 3) / (2 pi)^3
    return (16.0 / 3.0) * _coupling(groups)


def _finish(groups, cutoff, coarse, fine, method):
    err = abs(fine - coarse) / fine if fine > 0 else abs(fine - coarse)
    if err > cutoff.rtol:
        raise ConvergenceError(
            f"{method} quadrature unconverged: node doubling changed Gamma by {err:.3e} "
            f"(rtol {cutoff.rtol:.1e})", values=(coarse, fine))
    if not fine >= 0:
        raise ConvergenceError(f"negative Gamma {fine} from {method} quadrature", values=(coarse, fine))
    p_larmor = larmor_power(groups.sin_theta, 1.0, _coupling(groups))
    return GammaResult(
        gamma_value=fine,
        overlap=record_overlap(fine),
        radiated_energy_larmor=p_larmor * groups.omega_t0,
        radiated_energy_record=fine / groups.omega_t0,
        cutoff=cutoff,
        quadrature_error_estimate=err,
        method=method,
        paper_estimate=gamma_paper_estimate(groups, warn=False),
    )


def gamma_radial(groups, cutoff: CutoffSpec | None = None, workers=None) -> GammaResult:
    """Gamma from the angle-integrated amplitudes and one radial quadrature."""
    cutoff = cutoff or CutoffSpec()
    workers = worker_count(workers)
    edges = radial_panels(groups.omega_t0, cutoff.lambda_over_2omega)
    pref = _radial_prefactor(groups)
    vals = []
    for n in (cutoff.radial_points, 2 * cutoff.radial_points):
        sums = _radial_panel_sums(groups, cutoff, n, edges, workers)
        vals.append(pref * math.fsum(sums))
    return _finish(groups, cutoff, vals[0], vals[1], "radial")


def angular_rule(n_polar, n_azimuth):
    """Unit vectors and weights of the product rule on the sphere.

    Gauss-Legendre in the cosine of the angle from x' and a uniform azimuth;
    the poles (where the triad is singular) are never nodes.  Weights sum to
    4*pi.
    """
    mu, wmu = np.polynomial.legendre.leggauss(n_polar)
    phi = 2.0 * math.pi * (np.arange(n_azimuth) + 0.5) / n_azimuth
    s = np.sqrt(1.0 - mu**2)
    kx = np.repeat(mu, n_azimuth)
    ky = np.outer(s, np.cos(phi)).ravel()
    kz = np.outer(s, np.sin(phi)).ravel()
    w = np.repeat(wmu, n_azimuth) * (2.0 * math.pi / n_azimuth)
    return kx, ky, kz, w


def gamma_cubature(groups, cutoff: CutoffSpec | None = None, workers=None) -> GammaResult:
    """Gamma from a full three-dimensional cubature over wavevectors.

    The induced-current amplitudes are projected on the polarization triad at
    every node; no angular identity is used.  The radial layout differs from
    ``gamma_radial`` (three kernel periods per panel instead of four) so the
    two routes share no nodes off the resonance band.
    """
    cutoff = cutoff or CutoffSpec()
    workers = worker_count(workers)
    spectral = _spectral_for(groups, cutoff)
    kx, ky, kz, wang = angular_rule(cutoff.polar_points, cutoff.azimuth_points)
    edges = radial_panels(groups.omega_t0, cutoff.lambda_over_2omega, periods_per_panel=3.0,
                          band_panels=12)

    def panel(nodes, weights):
        k = nodes.ravel()
        sx, sy = spectral(k)
        s1, s2 = _project(kx[None, :], ky[None, :], kz[None, :], k[:, None],
                          sx[:, None], sy[:, None])
        ang = np.sum(wang * (np.abs(s1) ** 2 + np.abs(s2) ** 2), axis=1)
        # d^3k / k = k dk dOmega
        radial = (k * ang).reshape(nodes.shape)
        return np.sum(weights * radial, axis=1)

    pref = 16.0 * math.pi**2 * _coupling(groups) / (2.0 * math.pi) ** 3
    vals = []
    for n in (cutoff.radial_points, 2 * cutoff.radial_points):
        sums = _blocked_panel_sums(edges, n, panel, workers)
        vals.append(pref * math.fsum(sums))
    return _finish(groups, cutoff, vals[0], vals[1], "cubature")


def gamma_paper_estimate(groups, warn=True) -> float:
    """ESTIMATE: order-of-magnitude Gamma ~ 16 pi^2 g^2 mu^2 (w t0)^2 sin^2(theta).

    The scaling with (omega t0)^2 is quoted as an estimate only; compare with
    the quadratures through their ratio, never as ground truth.
    """
    if warn and groups.omega_t0 < 10:
        warnings.warn("Gamma estimate assumes omega*t0 >> 1", RuntimeWarning, stacklevel=2)
    return 16.0 * math.pi**2 * _coupling(groups) * groups.omega_t0**2 * groups.sin_theta**2


def gamma_from_supplied_or_computed(groups, gamma_value=None, cutoff=None, workers=None):
    """Gamma as a user-supplied number, or computed by the radial route."""
    if gamma_value is not None:
        if not gamma_value >= 0:
            raise DomainError("supplied Gamma must be >= 0")
        return float(gamma_value)
    return gamma_radial(groups, cutoff, workers).gamma_value


# --------------------------------------------------------------------------
# diagnostics


def resonance_band_fraction(groups, cutoff: CutoffSpec | None = None, half_width=None,
                            workers=None) -> float:
    """Share of Gamma accumulated in |f - 2 omega| <= half_width (default 10 pi / t0)."""
    cutoff = cutoff or CutoffSpec()
    t0 = groups.omega_t0
    hw = 10.0 * math.pi / t0 if half_width is None else half_width
    lo, hi = 2.0 - hw, 2.0 + hw
    edges = radial_panels(t0, cutoff.lambda_over_2omega, extra_breaks=(lo, hi))
    sums = _radial_panel_sums(groups, cutoff, 2 * cutoff.radial_points, edges, worker_count(workers))
    mid = 0.5 * (edges[:-1] + edges[1:])
    inside = (mid > lo) & (mid < hi)
    total = math.fsum(sums)
    return math.fsum(sums[inside]) / total if total > 0 else 0.0


def cutoff_octave_increments(groups, ratios, cutoff: CutoffSpec | None = None, workers=None):
    """Gamma at each cutoff ratio and the per-octave increments Gamma(L) - Gamma(L/2).

    Returns (gammas, increments) with ``increments[i] = gammas[i+1] - gammas[i]``.
    """
    cutoff = cutoff or CutoffSpec()
    gammas = []
    for r in ratios:
        c = CutoffSpec(**{**asdict(cutoff), "lambda_over_2omega": r})
        gammas.append(gamma_radial(groups, c, workers).gamma_value)
    return gammas, [b - a for a, b in zip(gammas[:-1], gammas[1:])]


def angular_identity_check(kx, ky, kz, sx, sy):
    """Sphere averages of the angular weights multiplying |S_x'|^2, |S_y'|^2 and the cross term.

    For unit vectors (kx, ky, kz) returns (diag_mean, cross_mean) where
    diag_mean averages (1 - kx^2)|Sx|^2 + ((kx^2 ky^2 + kz^2)/(1 - kx^2))|Sy|^2
    and cross_mean averages -2 kx ky Re(Sx conj(Sy)).
    """
    rho2 = ky * ky + kz * kz
    diag = rho2 * abs(sx) ** 2 + (kx * kx * ky * ky + kz * kz) / rho2 * abs(sy) ** 2
    cross = -2.0 * kx * ky * (sx * np.conj(sy)).real
    return float(np.mean(diag)), float(np.mean(cross))


def sphere_points(n_log2=20, seed=0):
    """Scrambled-Sobol points mapped area-preservingly onto the unit sphere."""
    from scipy.stats import qmc

    u = qmc.Sobol(2, scramble=True, seed=seed).random_base2(n_log2)
    z = 2.0 * u[:, 0] - 1.0
    phi = 2.0 * math.pi * u[:, 1]
    s = np.sqrt(1.0 - z * z)
    return s * np.cos(phi), s * np.sin(phi), z

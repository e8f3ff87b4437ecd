"""Spin-1/2 quantum measurement engine simulator."""

__version__ = "0.1.0"

from .engine import (EfficiencyReport, MeasurementCyclePoint, efficiency_report, eta_q_corrected,
                     eta_q_exact, eta_q_longtime, maximize_power_corrected, measurement_ledger,
                     power_corrected, sweep_gamma)
from .errors import (ConvergenceError, CoordinateSingularityError, DegenerateFieldError,
                     DomainError, QmengError, StepTooLargeError, UnsupportedInitialStateError)
from .model import (DimensionlessGroups, EngineParams, PhysicalConstants, derive_groups,
                    thermal_populations)
from .otto import (CycleLedger, DurationBounds, duration_bounds, maximize_otto_power,
                   otto_efficiency, otto_ledger, otto_power)
from .radiation import (CutoffSpec, GammaResult, gamma_cubature, gamma_paper_estimate,
                        gamma_radial, larmor_power, polarization_triad, projected_amplitudes,
                        record_overlap, spectral_amplitudes)
from .spin import (PulseSpec, eigenbasis, evolve, mean_energy_after_pulse, ode_oracle,
                   pulse_amplitudes, spin_expectations)

"""Leggett-Garg witnesses for a qubit decaying into a Lorentzian (non-Markovian) bath."""
from .amplitude import (AmplitudeTrajectory, QubitState, SolverConfig, propagator_analytic,
                        propagator_ode, propagator_volterra, solve)
from .correlators import (LgiSchedule, LgiValue, ScanReport, c_ji, corr_minus_plus,
                          corr_plus_minus, lgi_c3, lgi_c4, violation_scan)
from .errors import NumericalToleranceError
from .oracle import DiscretizedBath, SingleExcitationState, discretize, evolve, oracle_correlator
from .spectral import (LorentzianSpectrum, TabulatedSpectrum, lorentzian_density, memory_kernel,
                       memory_kernel_quadrature)

__version__ = "0.1.0"

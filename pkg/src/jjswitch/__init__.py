"""Switching-current statistics of a current-biased Josephson junction
under a discrete nonideal quantum measurement protocol.

The phase obeys the normalized Schroedinger equation in a washboard
potential tilted by a ramped bias; an absorbing layer realizes the open
boundary toward the running state.  Repeated voltage measurements project
the surviving state back into the well, and the recorded conditional
switch probabilities assemble into the switching-current distribution,
which can be compared against the WKB/adiabatic theory and its measured
(prefactor-corrected) discrete recursion.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, ConvergenceError, DegenerateBarrierError,
                     DomainError, InsufficientDecayError, JJSwitchError,
                     NonRenormalizableError, NumericalError, ParameterError,
                     ProtocolError)
from .experiments import (CdfComparison, GridSettings, PeakRow, SweepSpec,
                          compare_cdf, convergence_gate, peak_location,
                          sweep_measurement_count, sweep_ramp_time)
from .initial import PeriodicGroundState, periodic_ground_state, truncate_to_open_grid
from .measure import (SwitchingRecord, assemble_pdf, project_no_switch,
                      run_protocol, switching_probability)
from .potential import (BiasRamp, barrier_height, barrier_top, cut_position,
                        plasma_frequency, washboard, well_bottom)
from .propagate import (AbsorberProfile, DecayTrace, cn_step, evolve,
                        reflection_test)
from .ratefit import (DecayPoint, PrefactorPoint, RateCurve, RateFit,
                      decay_point, fit_decay, fitted_prefactor,
                      fitted_rate_function, metastable_state, prefactor_curve,
                      rate_curve)
from .state import Grid, WaveFunction, norm_squared, probability_in
from .units import (NormalizedParams, Normalization, PhysicalJunction,
                    normalize)
from .wkb import (AdiabaticDistribution, MeasuredDistribution, RateFunction,
                  adiabatic_cdf_ode, adiabatic_pdf, measured_adiabatic_pdf,
                  wkb_rate, wkb_rate_function)

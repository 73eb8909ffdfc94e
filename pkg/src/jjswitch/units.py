"""Conversion between laboratory junction parameters and normalized units.

Everything downstream of this module works in dimensionless variables:
energies in units of the charging energy E_C = hbar^2 / [C (Phi0/2pi)^2],
times in units of hbar / E_C.  The barrier coefficient V0 = E_J / E_C with
E_J = I0 Phi0 / 2pi is the single knob the dynamics depends on.

Note on the time unit: with an effective mass M = C (Phi0/2pi)^2 the scale
hbar / E_C equals M / hbar.  The quantity hbar / M sometimes quoted for this
normalization is the corresponding angular frequency (units 1/s), not a
time; we normalize so that the dimensionless equation of motion holds with
V0 = E_J / E_C exactly, which fixes the time unit to hbar / E_C seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError

# CODATA 2018 exact values
FLUX_QUANTUM = 2.067833848e-15  # Wb, h/2e
REDUCED_PLANCK = 1.054571817e-34  # J s


@dataclass(frozen=True)
class PhysicalJunction:
    """Laboratory description of a single Josephson junction."""

    capacitance: float  # farad
    critical_current: float  # ampere
    flux_quantum: float = FLUX_QUANTUM
    reduced_planck: float = REDUCED_PLANCK

    def __post_init__(self):
        if not (self.capacitance > 0):
            raise ParameterError(f"capacitance must be > 0, got {self.capacitance}")
        if not (self.critical_current > 0):
            raise ParameterError(
                f"critical_current must be > 0, got {self.critical_current}"
            )

    @property
    def mass(self) -> float:
        """Effective mass M = C (Phi0/2pi)^2 of the phase particle (J s^2)."""
        return self.capacitance * (self.flux_quantum / (2.0 * 3.141592653589793)) ** 2

    @property
    def josephson_energy(self) -> float:
        """E_J = I0 Phi0 / 2pi (joule)."""
        return self.critical_current * self.flux_quantum / (2.0 * 3.141592653589793)

    @property
    def charging_energy(self) -> float:
        """E_C = hbar^2 / M (joule)."""
        return self.reduced_planck**2 / self.mass


@dataclass(frozen=True)
class Normalization:
    """Result of :func:`normalize`: barrier coefficient and time unit."""

    V0: float
    time_scale: float  # seconds per normalized time unit

    def to_normalized_time(self, seconds: float) -> float:
        return seconds / self.time_scale

    def to_physical_time(self, normalized: float) -> float:
        return normalized * self.time_scale


@dataclass(frozen=True)
class NormalizedParams:
    """Dimensionless simulation parameters.

    V0 : barrier coefficient E_J/E_C
    T  : bias ramp duration (normalized time)
    N  : number of voltage measurements during the ramp
    dt : requested integration step; drivers shrink it slightly so an
         integer number of steps lands exactly on each measurement time
    """

    V0: float
    T: float
    N: int
    dt: float = 0.01

    def __post_init__(self):
        if not (self.V0 > 0):
            raise ParameterError(f"V0 must be > 0, got {self.V0}")
        if not (self.T > 0):
            raise ParameterError(f"T must be > 0, got {self.T}")
        if not (isinstance(self.N, int) and self.N >= 1):
            raise ParameterError(f"N must be a positive integer, got {self.N}")
        if not (0 < self.dt <= self.T / self.N):
            raise ParameterError(
                f"dt must satisfy 0 < dt <= T/N = {self.T / self.N}, got {self.dt}"
            )


def normalize(phys: PhysicalJunction) -> Normalization:
    """Map a physical junction onto the dimensionless parameters.

    Returns V0 = E_J/E_C and the physical duration (in seconds) of one
    normalized time unit, hbar/E_C.
    """
    v0 = phys.josephson_energy / phys.charging_energy
    return Normalization(V0=v0, time_scale=phys.reduced_planck / phys.charging_energy)

"""Spatial grid, complex wavefunction storage, norms and windowed probabilities.

All quadrature is trapezoidal, matching the second-order spatial
discretization of the propagator.  ``probability_in`` integrates the
piecewise-linear interpolant of |psi|^2 exactly, so partial cells at the
window edges are split linearly and the result is continuous in both
endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError
from .io import write_csv


@dataclass(frozen=True)
class Grid:
    """Uniform grid of n points covering [phi_min, phi_max]."""

    phi_min: float
    phi_max: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ParameterError(f"grid needs at least 3 points, got {self.n}")
        if not (self.phi_max > self.phi_min):
            raise ParameterError(
                f"phi_max must exceed phi_min, got [{self.phi_min}, {self.phi_max}]"
            )

    @property
    def h(self) -> float:
        return (self.phi_max - self.phi_min) / (self.n - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.phi_min, self.phi_max, self.n)

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def cell_index(self, phi: float) -> int:
        """Index of the left node of the cell containing phi (clamped)."""
        j = int(np.floor((phi - self.phi_min) / self.h))
        return min(max(j, 0), self.n - 1)

    @classmethod
    def from_spacing(cls, phi_min: float, phi_max: float, spacing: float) -> "Grid":
        """Grid with the smallest point count giving h <= spacing."""
        if not (spacing > 0):
            raise ParameterError(f"spacing must be > 0, got {spacing}")
        n = int(np.ceil((phi_max - phi_min) / spacing)) + 1
        return cls(phi_min, phi_max, max(n, 3))


@dataclass(frozen=True)
class WaveFunction:
    """Complex amplitudes on a grid.  The array is owned by its evolution."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.shape != (self.grid.n,):
            raise ParameterError(
                f"amplitude array length {self.values.shape} does not match "
                f"grid.n = {self.grid.n}"
            )
        if self.values.dtype != np.complex128:
            object.__setattr__(self, "values", self.values.astype(np.complex128))

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.values.copy())

    def normalized(self) -> "WaveFunction":
        nrm = norm_squared(self)
        if nrm <= 0:
            raise DomainError("cannot normalize a zero wavefunction")
        return WaveFunction(self.grid, self.values / np.sqrt(nrm))


def norm_squared(psi: WaveFunction) -> float:
    """Trapezoidal integral of |psi|^2 over the full grid."""
    density = psi.values.real**2 + psi.values.imag**2
    return float(np.dot(psi.grid.trapezoid_weights(), density))


def _cumulative_density(psi: WaveFunction) -> np.ndarray:
    """C[j] = integral of the linear interpolant of |psi|^2 up to node j."""
    density = psi.values.real**2 + psi.values.imag**2
    c = np.empty(psi.grid.n)
    c[0] = 0.0
    np.cumsum(0.5 * psi.grid.h * (density[1:] + density[:-1]), out=c[1:])
    return c


def _cumulative_at(psi: WaveFunction, c: np.ndarray, phi: float) -> float:
    g = psi.grid
    x = min(max(phi, g.phi_min), g.phi_max)
    j = min(int(np.floor((x - g.phi_min) / g.h)), g.n - 2)
    dj = x - (g.phi_min + j * g.h)
    density = psi.values.real**2 + psi.values.imag**2
    # exact integral of the linear interpolant over the partial cell
    partial = density[j] * dj + (density[j + 1] - density[j]) * dj * dj / (2.0 * g.h)
    return c[j] + partial


def probability_in(psi: WaveFunction, a: float, b: float) -> float:
    """Probability in the window [a, b], clamped to the grid bounds."""
    if not (a < b):
        raise DomainError(f"window must satisfy a < b, got a={a}, b={b}")
    c = _cumulative_density(psi)
    return _cumulative_at(psi, c, b) - _cumulative_at(psi, c, a)


def wavefunction_to_csv(psi: WaveFunction, path) -> None:
    """Write a snapshot as CSV with columns phi, re, im, abs2."""
    phi = psi.grid.points()
    v = psi.values
    write_csv(
        path,
        ["phi", "re_psi", "im_psi", "abs2"],
        [phi, v.real, v.imag, v.real**2 + v.imag**2],
    )

"""Geometry of the tilted washboard potential U = -V0 (cos phi + gamma phi)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBarrierError, DomainError, ParameterError


@dataclass(frozen=True)
class BiasRamp:
    """Linear bias ramp gamma(t) = t / T, held at 1 for t > T."""

    T: float

    def __post_init__(self):
        if not (self.T > 0):
            raise ParameterError(f"ramp duration must be > 0, got {self.T}")

    def gamma(self, t):
        return np.clip(np.asarray(t, dtype=float) / self.T, 0.0, 1.0)[()]


def _check_gamma(gamma, upper_inclusive=True):
    g = np.asarray(gamma, dtype=float)
    hi_bad = g > 1.0 if upper_inclusive else g >= 1.0
    if np.any(g < 0.0) or np.any(hi_bad):
        hi = "1" if upper_inclusive else "1 (exclusive)"
        raise DomainError(f"bias gamma must lie in [0, {hi}], got {gamma}")
    return g


def washboard(phi, gamma, V0):
    """Potential energy U(phi) = -V0 [cos(phi) + gamma*phi], in units of E_C."""
    if not (V0 > 0):
        raise ParameterError(f"V0 must be > 0, got {V0}")
    phi = np.asarray(phi, dtype=float)
    return (-V0 * (np.cos(phi) + gamma * phi))[()]


def barrier_height(gamma, V0):
    """Energy barrier between the well minimum and the adjacent maximum.

    Evaluates 2 V0 [sqrt(1 - gamma^2) - gamma*arccos(gamma)], which equals
    U(barrier_top) - U(well_bottom); the test suite checks this identity
    against the stationary points of :func:`washboard`.
    """
    if not (V0 > 0):
        raise ParameterError(f"V0 must be > 0, got {V0}")
    g = _check_gamma(gamma)
    return (2.0 * V0 * (np.sqrt(1.0 - g * g) - g * np.arccos(g)))[()]


def plasma_frequency(gamma, V0):
    """Small-oscillation frequency at the well bottom: (1-gamma^2)^(1/4) sqrt(V0)."""
    if not (V0 > 0):
        raise ParameterError(f"V0 must be > 0, got {V0}")
    g = _check_gamma(gamma)
    return ((1.0 - g * g) ** 0.25 * np.sqrt(V0))[()]


def well_bottom(gamma):
    """Location arcsin(gamma) of the metastable minimum in (0, 2pi)."""
    g = _check_gamma(gamma)
    return np.arcsin(g)[()]


def barrier_top(gamma):
    """Location phi* = pi - arcsin(gamma) of the barrier maximum.

    Raises DegenerateBarrierError at gamma = 1, where maximum and minimum
    merge into an inflection point.
    """
    g = _check_gamma(gamma)
    if np.any(g >= 1.0):
        raise DegenerateBarrierError("barrier degenerates to an inflection at gamma = 1")
    return (np.pi - np.arcsin(g))[()]


def cut_position(gamma):
    """Boundary between trapped and running regions, extended to gamma = 1.

    Identical to :func:`barrier_top` for gamma < 1 and continuously equal to
    pi/2 at gamma = 1; the measurement protocol needs a cut at the final
    ramp instant where the barrier itself is degenerate.
    """
    g = _check_gamma(gamma)
    return (np.pi - np.arcsin(g))[()]

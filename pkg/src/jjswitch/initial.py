"""Initial condition: ground state of the zero-bias periodic Hamiltonian.

At gamma = 0 the Hamiltonian H = -1/2 d^2/dphi^2 - V0 cos(phi) is periodic
on [-pi, pi); its nodeless even ground state is the Mathieu cosine-elliptic
function ce0[(phi+pi)/2, 4 V0] up to normalization (characteristic-value
mapping a = 8 E, q = 4 V0).  We obtain it by diagonalizing the discretized
periodic operator, which is what the propagator consumes anyway; the
Mathieu asymptotics serve as an independent oracle in the tests.

Turning on any bias breaks the periodicity, and the state collapses onto
the open domain as the same function windowed to [-pi, pi] and zero
outside, renormalized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import CubicSpline

from .errors import ConfigError, ConvergenceError, ParameterError
from .state import Grid, WaveFunction

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class PeriodicGroundState:
    """Ground state samples on a uniform periodic grid over [-pi, pi)."""

    phi: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)  # real, normalized on [-pi, pi)
    energy: float
    residual: float

    @property
    def m(self) -> int:
        return len(self.phi)


def periodic_ground_state(V0: float, m: int = 2048) -> PeriodicGroundState:
    """Lowest eigenpair of the periodic zero-bias Hamiltonian.

    Parameters
    ----------
    V0 : barrier coefficient (> 0)
    m  : number of periodic grid points (>= 64)

    The discrete operator is the standard three-point Laplacian with
    wrap-around corner entries; the lowest eigenpair comes from a
    shift-inverted Lanczos iteration seeded below the spectrum
    (E0 >= min U = -V0).
    """
    if not (V0 > 0):
        raise ParameterError(f"V0 must be > 0, got {V0}")
    if m < 64:
        raise ParameterError(f"need at least 64 periodic grid points, got {m}")
    h = 2.0 * np.pi / m
    phi = -np.pi + h * np.arange(m)
    kin = 0.5 / (h * h)
    diag = 2.0 * kin - V0 * np.cos(phi)
    off = np.full(m - 1, -kin)
    ham = sp.diags([diag, off, off], [0, 1, -1], format="lil")
    ham[0, m - 1] = -kin
    ham[m - 1, 0] = -kin
    ham = ham.tocsc()
    try:
        vals, vecs = spla.eigsh(ham, k=1, sigma=-V0 - 1.0, which="LM")
    except (spla.ArpackNoConvergence, RuntimeError) as exc:
        raise ConvergenceError(f"periodic eigensolve failed: {exc}") from exc
    energy = float(vals[0])
    v = vecs[:, 0]
    residual = float(np.linalg.norm(ham @ v - energy * v) / np.linalg.norm(v))
    if residual > RESIDUAL_TOL:
        raise ConvergenceError(
            f"eigen-residual {residual:.2e} exceeds tolerance {RESIDUAL_TOL:.0e}"
        )
    if v[int(np.argmax(np.abs(v)))] < 0:
        v = -v
    v = v / np.sqrt(np.sum(v * v) * h)
    return PeriodicGroundState(phi=phi, values=v, energy=energy, residual=residual)


def truncate_to_open_grid(gs: PeriodicGroundState, grid: Grid) -> WaveFunction:
    """Window the periodic ground state to [-pi, pi] on an open grid.

    The periodic samples are interpolated with a periodic cubic spline
    (preserves the propagator's second-order accuracy), multiplied by the
    Heaviside window of [-pi, pi], and renormalized on the open grid.
    """
    if grid.phi_min > -np.pi or grid.phi_max < np.pi:
        raise ConfigError(
            f"open grid [{grid.phi_min}, {grid.phi_max}] must contain [-pi, pi]"
        )
    phi_wrap = np.append(gs.phi, np.pi)
    val_wrap = np.append(gs.values, gs.values[0])
    spline = CubicSpline(phi_wrap, val_wrap, bc_type="periodic")
    phi = grid.points()
    values = np.zeros(grid.n, dtype=np.complex128)
    inside = (phi >= -np.pi) & (phi <= np.pi)
    values[inside] = spline(phi[inside])
    return WaveFunction(grid, values).normalized()

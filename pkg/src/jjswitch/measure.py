"""Discrete nonideal measurement protocol and the switching-current PDF.

At each measurement time t_n = n T/N the switch probability is the weight
beyond the barrier top plus whatever has already been absorbed by the open
boundary since the previous measurement (probability radiated past the
layer is, by definition, in the running region).  A null result projects
the state onto the trapped region and renormalizes it; the PDF follows
from the telescoping recursion

    pdf_n = p_n * prod_{k<n} (1 - p_k).

The projector zeroes every node of the cell containing the cut, so the
surviving state's support ends strictly below phi* and the re-measured
switch probability vanishes identically (not merely to quadrature error).
The renormalization uses the actual post-truncation norm, which is robust
to the sub-cell quadrature at the cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonRenormalizableError, NumericalError, ProtocolError
from .initial import periodic_ground_state, truncate_to_open_grid
from .io import write_csv
from .potential import BiasRamp, cut_position
from .propagate import AbsorberProfile, evolve
from .state import Grid, WaveFunction, norm_squared, probability_in
from .units import NormalizedParams

RENORM_EPS = 1e-12


@dataclass(frozen=True)
class SwitchingRecord:
    """Per-measurement switch probabilities and the assembled PDF."""

    V0: float
    T: float
    N: int
    gammas: np.ndarray = field(repr=False)  # n/N, n = 1..N
    p: np.ndarray = field(repr=False)  # conditional switch probabilities
    pdf: np.ndarray = field(repr=False)
    survival: float = 1.0

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pdf)


def record_to_csv(record: SwitchingRecord, path) -> None:
    n = np.arange(1, len(record.gammas) + 1)
    write_csv(path, ["n", "gamma", "p", "pdf"], [n, record.gammas, record.p, record.pdf])


def cut_index(grid: Grid, phi_star: float) -> int:
    """First node index zeroed by the no-switch projector at phi*.

    This is the left node of the grid cell containing phi*; zeroing from
    here makes the linear interpolant of |psi|^2 vanish identically on
    [phi*, phi_max].
    """
    if not (grid.phi_min < phi_star < grid.phi_max):
        raise DomainError(
            f"cut position {phi_star} outside interior of grid "
            f"[{grid.phi_min}, {grid.phi_max}]"
        )
    return grid.cell_index(phi_star)


def switching_probability(psi: WaveFunction, phi_star: float) -> float:
    """Probability that a voltage measurement reports a switch.

    Sum of the in-domain weight beyond phi* and the norm deficit of psi
    (probability absorbed at the open boundary since the state was last
    normalized, i.e. since the previous measurement).
    """
    beyond = probability_in(psi, phi_star, psi.grid.phi_max)
    absorbed = max(0.0, 1.0 - norm_squared(psi))
    return min(beyond + absorbed, 1.0)


def project_no_switch(psi: WaveFunction, phi_star: float,
                      p: float | None = None) -> WaveFunction:
    """State after a null (no-voltage) measurement: windowed and renormalized."""
    if p is not None and p >= 1.0 - RENORM_EPS:
        raise NonRenormalizableError(
            f"switch probability {p} too close to 1; no surviving state"
        )
    j = cut_index(psi.grid, phi_star)
    values = psi.values.copy()
    values[j:] = 0.0
    kept = WaveFunction(psi.grid, values)
    q = norm_squared(kept)
    if q <= RENORM_EPS:
        raise NonRenormalizableError(
            f"post-truncation norm {q} too small to renormalize"
        )
    return WaveFunction(psi.grid, values / math.sqrt(q))


def assemble_pdf(p) -> tuple[np.ndarray, float]:
    """Switching PDF and final survival from conditional probabilities.

    pdf_1 = p_1, pdf_n = p_n * prod_{k<n} (1 - p_k); exposed separately so
    the recursion is unit-testable without any PDE run.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise DomainError("conditional probabilities must lie in [0, 1]")
    survival_before = np.cumprod(np.concatenate(([1.0], 1.0 - p[:-1])))
    pdf = p * survival_before
    survival = float(survival_before[-1] * (1.0 - p[-1])) if len(p) else 1.0
    return pdf, survival


def run_protocol(params: NormalizedParams, grid: Grid,
                 absorber: AbsorberProfile | None,
                 initial: WaveFunction | None = None,
                 gs_points: int = 2048) -> SwitchingRecord:
    """Full measured ramp: alternate evolution over T/N and measurement.

    Starts from the truncated periodic ground state at t = 0 and ramps the
    bias linearly to 1 at t = T.  The cut phi* is recomputed at each
    measurement from the instantaneous bias n/N.  Once a measurement is
    (numerically) certain to have switched, the remaining measurements are
    recorded as certain switches and the evolution stops.
    """
    if initial is None:
        psi = truncate_to_open_grid(periodic_ground_state(params.V0, gs_points), grid)
    else:
        psi = initial.normalized()
    ramp = BiasRamp(params.T)
    interval = params.T / params.N
    n_meas = params.N
    p = np.zeros(n_meas)
    gammas = np.arange(1, n_meas + 1) / n_meas
    completed = 0
    try:
        for n in range(1, n_meas + 1):
            psi, _ = evolve(psi, (n - 1) * interval, n * interval, params.dt,
                            ramp, params.V0, absorber, trace_stride=10**9)
            phi_star = cut_position(gammas[n - 1])
            p[n - 1] = switching_probability(psi, phi_star)
            completed = n
            if p[n - 1] >= 1.0 - RENORM_EPS:
                # certain switch: a running state never returns
                p[n - 1 :] = 1.0
                completed = n_meas
                break
            psi = project_no_switch(psi, phi_star, p[n - 1])
    except NumericalError as exc:
        pdf, survival = assemble_pdf(p[:completed]) if completed else (np.zeros(0), 1.0)
        partial = SwitchingRecord(
            V0=params.V0, T=params.T, N=params.N,
            gammas=gammas[:completed], p=p[:completed], pdf=pdf, survival=survival,
        )
        raise ProtocolError(
            f"protocol aborted after {completed} of {n_meas} measurements: {exc}",
            partial_record=partial,
        ) from exc
    pdf, survival = assemble_pdf(p)
    return SwitchingRecord(
        V0=params.V0, T=params.T, N=params.N,
        gammas=gammas, p=p, pdf=pdf, survival=survival,
    )

"""Numerical decay rates, relaxation times and the measurement prefactor.

A fixed-bias decay trace looks like: a short transient after the projection
(the under-barrier tail must regrow and the escaping flux must reach the
absorber), then a clean exponential, and eventually a slow floor of
probability trapped in neighboring wells.  ``fit_decay`` therefore fits a
continuous two-segment (hinge) line to log P_in(t), after cutting the trace
at a relative floor; the tail slope is the rate, the hinge position the
relaxation time.

The metastable "fundamental resonance" at fixed bias is prepared as the
ground state of the well with a hard wall at the barrier top, then relaxed
under the open-boundary evolution for a short settle interval so the
non-resonant content radiates away, and finally re-projected: the trace
then measures exactly the decay of a resonance on which one measurement
was performed.

The prefactor is defined operationally from the in-domain survival (one
minus the absorbed norm): F = P_in(T/N) * exp(Gamma_num * T/N).  The
in-well variant systematically loses the region-II transit content and
lands measurably below 1; the in-domain form isolates the relaxation-time
back-action this factor is meant to encode.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError, InsufficientDecayError, JJSwitchError, ParameterError
from .io import write_csv
from .measure import cut_index, project_no_switch
from .potential import barrier_top, washboard
from .propagate import AbsorberProfile, DecayTrace, evolve
from .state import Grid, WaveFunction, norm_squared
from .wkb import RateFunction, wkb_rate

RESIDUAL_QUALITY_LIMIT = 0.05  # log-units RMS above which a fit is flagged
TRACE_FLOOR = 3e-3  # fit only samples with P_in >= floor * P_in(0)


@dataclass(frozen=True)
class RateFit:
    """Two-segment fit of a decay trace in log space."""

    rate: float
    relaxation_time: float
    fit_window: tuple  # (t_start, t_end) of the linear tail, trace-relative
    residual_rms: float
    quality_ok: bool
    gamma: float | None = None


@dataclass(frozen=True)
class DecayPoint:
    """Fitted fixed-bias decay, plus an optional exact survival probe."""

    gamma: float
    fit: RateFit
    trace: DecayTrace = field(repr=False)
    probe_time: float | None = None
    probe_survival: float | None = None


@dataclass(frozen=True)
class PrefactorPoint:
    gamma: float
    F: float
    fit: RateFit
    warning: str | None = None


def fit_decay(trace: DecayTrace, rel_floor: float = TRACE_FLOOR,
              max_candidates: int = 240) -> RateFit:
    """Extract the asymptotic decay rate and the transient breakpoint.

    Fits y = a + s1*t + d*max(t - b, 0) to y = log P_in over candidate
    breakpoints b, keeping the earliest b within fitting noise of the best.
    The relaxation transient delays the decay, so only hinges whose tail is
    at least as steep as the head (d <= 0) are admitted; a trace that is a
    single exponential to within fitting noise reports relaxation_time = 0.
    Samples after P_in drops below ``rel_floor`` of its initial value are
    discarded: below that, slowly-decaying spillover trapped in neighboring
    wells dominates the trace.
    """
    t = np.asarray(trace.times, dtype=float)
    p = np.asarray(trace.in_domain_probability, dtype=float)
    if len(t) < 8:
        raise InsufficientDecayError(f"trace has only {len(t)} samples")
    if p[0] <= 0:
        raise InsufficientDecayError("trace starts with zero norm")
    cut = np.argmax(p < rel_floor * p[0]) if np.any(p < rel_floor * p[0]) else len(p)
    t = t[:cut] - t[0]
    p = p[:cut]
    if len(t) < 8:
        raise InsufficientDecayError("fewer than 8 samples above the trace floor")
    if (p[0] - p[-1]) / p[0] < 1e-6:
        raise InsufficientDecayError("no decaying tail detected (flat trace)")
    y = np.log(p)
    ones = np.ones(len(t))
    coef0, res0, *_ = np.linalg.lstsq(np.column_stack([ones, t]), y, rcond=None)
    sse0 = float(res0[0]) if len(res0) else float(np.sum((coef0[0] + coef0[1] * t - y) ** 2))
    candidates = np.arange(2, len(t) - 3)
    if len(candidates) > max_candidates:
        candidates = candidates[:: max(1, len(candidates) // max_candidates)]
    best_sse, best_b, best_coef = np.inf, 0.0, None
    for bi in candidates:
        b = t[bi]
        x = np.column_stack([ones, t, np.maximum(t - b, 0.0)])
        coef, res, *_ = np.linalg.lstsq(x, y, rcond=None)
        sse = float(res[0]) if len(res) else float(np.sum((x @ coef - y) ** 2))
        if sse < best_sse * (1.0 - 1e-9) - 1e-18:
            best_sse, best_b, best_coef = sse, float(b), coef
    if best_coef is None or best_sse > 0.9 * sse0:
        # hinge adds nothing: single exponential, no resolvable transient
        rate = -float(coef0[1])
        sse, b = sse0, 0.0
    else:
        rate = -float(best_coef[1] + best_coef[2])
        sse, b = best_sse, best_b
    if not (rate > 0):
        raise InsufficientDecayError(f"fitted tail is not decaying (rate = {rate:.3e})")
    rms = math.sqrt(sse / len(t))
    return RateFit(
        rate=rate,
        relaxation_time=b,
        fit_window=(b, float(t[-1])),
        residual_rms=rms,
        quality_ok=rms <= RESIDUAL_QUALITY_LIMIT,
    )


def metastable_state(V0: float, gamma: float, grid: Grid) -> WaveFunction:
    """Ground state of the well with a hard wall at the barrier top.

    Converges to the lowest resonance for barriers well above E_C while
    staying a cheap tridiagonal eigensolve; its support already ends at the
    projector's cut, so a subsequent projection is idempotent on it.
    """
    if not (0.0 < gamma < 1.0):
        raise DomainError(f"bias must lie in (0, 1), got {gamma}")
    j = cut_index(grid, barrier_top(gamma))
    if j < 4:
        raise DomainError("well region contains too few grid points")
    # node 0 is the propagator's Dirichlet wall; solve on nodes 1..j-1
    phi = grid.points()[1:j]
    kin = 0.5 / grid.h**2
    diag = 2.0 * kin + washboard(phi, gamma, V0)
    off = np.full(len(phi) - 1, -kin)
    _, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    values = np.zeros(grid.n, dtype=np.complex128)
    v = vecs[:, 0]
    if v[int(np.argmax(np.abs(v)))] < 0:
        v = -v
    values[1:j] = v
    return WaveFunction(grid, values).normalized()


def _auto_settle(V0: float, gamma: float) -> float:
    return float(np.clip(0.7 / max(wkb_rate(gamma, V0), 1e-12), 20.0, 60.0))


def _auto_horizon(V0: float, gamma: float) -> float:
    return float(np.clip(0.5 / max(wkb_rate(gamma, V0), 1e-12), 400.0, 4000.0))


def decay_point(V0: float, gamma: float, grid: Grid,
                absorber: AbsorberProfile | None, dt: float = 0.01,
                horizon="auto", settle="auto", trace_stride: int = 50,
                probe_time: float | None = None) -> DecayPoint:
    """Prepare the measured resonance at fixed bias and fit its decay."""
    psi = metastable_state(V0, gamma, grid)
    t_settle = _auto_settle(V0, gamma) if settle == "auto" else float(settle)
    if t_settle > 0:
        psi, _ = evolve(psi, 0.0, t_settle, dt, gamma, V0, absorber, trace_stride=10**9)
        psi = psi.normalized()
    psi = project_no_switch(psi, barrier_top(gamma))
    t_end = _auto_horizon(V0, gamma) if horizon == "auto" else float(horizon)
    probe = None
    if probe_time is not None:
        t_end = max(t_end, 1.25 * probe_time)
        # split the evolution at the probe so the survival there is an exact
        # sample, independent of the trace stride
        psi, head = evolve(psi, 0.0, probe_time, dt, gamma, V0, absorber, trace_stride)
        probe = norm_squared(psi)
        _, tail = evolve(psi, probe_time, t_end, dt, gamma, V0, absorber, trace_stride)
        times = np.concatenate([head.times, tail.times[1:]])
        pin = np.concatenate([head.in_domain_probability, tail.in_domain_probability[1:]])
        trace = DecayTrace(times=times, in_domain_probability=pin)
    else:
        _, trace = evolve(psi, 0.0, t_end, dt, gamma, V0, absorber, trace_stride)
    fit = replace(fit_decay(trace), gamma=gamma)
    return DecayPoint(gamma=gamma, fit=fit, trace=trace,
                      probe_time=probe_time, probe_survival=probe)


@dataclass(frozen=True)
class RateCurve:
    fits: tuple
    failures: dict

    def gammas(self) -> np.ndarray:
        return np.array([f.gamma for f in self.fits])

    def rates(self) -> np.ndarray:
        return np.array([f.rate for f in self.fits])


def _decay_point_args(args):
    return decay_point(*args)


def rate_curve(V0: float, gammas, grid: Grid, absorber: AbsorberProfile | None,
               dt: float = 0.01, horizon="auto", settle="auto",
               trace_stride: int = 50, jobs: int = 1) -> RateCurve:
    """Fitted decay rates over a list of bias points; failures are recorded
    per point and the curve continues."""
    tasks = [(V0, float(g), grid, absorber, dt, horizon, settle, trace_stride) for g in gammas]
    fits, failures = [], {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_decay_point_args, task) for task in tasks]
            for task, fut in zip(tasks, futures):
                try:
                    fits.append(fut.result().fit)
                except JJSwitchError as exc:
                    failures[task[1]] = str(exc)
    else:
        for task in tasks:
            try:
                fits.append(decay_point(*task).fit)
            except JJSwitchError as exc:
                failures[task[1]] = str(exc)
    return RateCurve(fits=tuple(fits), failures=failures)


def prefactor_from_trace(trace: DecayTrace, t_over_n: float,
                         survival_at_probe: float | None = None) -> tuple[float, RateFit]:
    """Prefactor F = P_in(T/N) exp(Gamma * T/N) with Gamma self-consistently
    fitted from the same trace."""
    fit = fit_decay(trace)
    if survival_at_probe is not None:
        p_at = survival_at_probe
    else:
        t = np.asarray(trace.times) - trace.times[0]
        y = np.log(trace.in_domain_probability)
        if t_over_n > t[-1]:
            raise ParameterError(f"trace too short to probe t = {t_over_n}")
        p_at = float(np.exp(np.interp(t_over_n, t, y)))
    return p_at * math.exp(fit.rate * t_over_n), fit


def prefactor_curve(V0: float, gammas, t_over_n: float, grid: Grid,
                    absorber: AbsorberProfile | None, dt: float = 0.01,
                    horizon="auto", settle="auto",
                    trace_stride: int = 50) -> list[PrefactorPoint]:
    """Measured per-interval survival correction F(gamma) at interval T/N."""
    if not (t_over_n > 0):
        raise ParameterError(f"t_over_n must be > 0, got {t_over_n}")
    points = []
    for g in gammas:
        point = decay_point(V0, float(g), grid, absorber, dt, horizon, settle,
                            trace_stride, probe_time=t_over_n)
        f_val, fit = prefactor_from_trace(point.trace, t_over_n, point.probe_survival)
        fit = replace(fit, gamma=float(g))
        warning = None
        if t_over_n <= fit.relaxation_time:
            warning = (
                f"interval {t_over_n} does not exceed the relaxation time "
                f"{fit.relaxation_time:.3g}"
            )
        elif f_val < 1.0 - max(2.0 * fit.residual_rms, 1e-3):
            warning = f"F = {f_val:.6g} < 1 beyond fit noise"
        points.append(PrefactorPoint(gamma=float(g), F=f_val, fit=fit, warning=warning))
    return points


def fitted_rate_function(fits) -> RateFunction:
    """Log-linear interpolation of fitted rates, extrapolated at both ends."""
    fits = sorted(fits, key=lambda f: f.gamma)
    if len(fits) < 2:
        raise ParameterError("need at least two fitted points to interpolate")
    gs = np.array([f.gamma for f in fits])
    logr = np.log([f.rate for f in fits])

    def fn(g):
        g = np.asarray(g, dtype=float)
        out = np.interp(g, gs, logr)
        lo = g < gs[0]
        hi = g > gs[-1]
        out = np.where(lo, logr[0] + (g - gs[0]) * (logr[1] - logr[0]) / (gs[1] - gs[0]), out)
        out = np.where(hi, logr[-1] + (g - gs[-1]) * (logr[-1] - logr[-2]) / (gs[-1] - gs[-2]), out)
        return np.exp(out)[()]

    return RateFunction(fn=fn, provenance="numeric-fit")


def fitted_prefactor(points) -> callable:
    """Linear interpolation of F(gamma), clamped to the edge values outside."""
    points = sorted(points, key=lambda p: p.gamma)
    gs = np.array([p.gamma for p in points])
    fs = np.array([p.F for p in points])

    def fn(g):
        return np.interp(np.asarray(g, dtype=float), gs, fs)[()]

    return fn


def rate_curve_to_csv(fits, V0, path, prefactors=None) -> None:
    """CSV columns: gamma, fitted rate, WKB rate, relaxation time, F, residual."""
    fits = sorted(fits, key=lambda f: f.gamma)
    gs = np.array([f.gamma for f in fits])
    f_by_gamma = {p.gamma: p.F for p in (prefactors or [])}
    write_csv(
        path,
        ["gamma", "rate_num", "rate_wkb", "relaxation_time", "prefactor", "residual_rms"],
        [
            gs,
            [f.rate for f in fits],
            [wkb_rate(g, V0) for g in gs],
            [f.relaxation_time for f in fits],
            [f_by_gamma.get(g, np.nan) for g in gs],
            [f.residual_rms for f in fits],
        ],
    )

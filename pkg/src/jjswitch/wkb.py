"""Analytic reference theory: WKB escape rate and adiabatic switching PDFs.

The escape rate from the metastable well,

    Gamma(gamma) = omega_p/(2 pi) * sqrt(120 pi * 7.2 dU/omega_p)
                   * exp(-7.2 dU/omega_p),

feeds a Fulton-Dunkleberger-style description of the ramped bias:
survival against switching obeys d(CDF)/dgamma = Gamma * T * (1 - CDF),
whose normalized solution is the adiabatic PDF

    P(gamma) = T * Gamma(gamma) * exp(-T * int_0^gamma Gamma) / Norm.

Note the normalization: multiplying instead by Norm (as sometimes written)
would integrate to Norm^2; dividing is what makes the PDF integrate to 1.

Exponents are handled in log space throughout, so ramp times up to 1e9
normalized units (real experiments) neither overflow nor lose the shape
of the distribution.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, NumericalError, ParameterError
from .io import write_csv
from .potential import barrier_height, plasma_frequency

SURVIVAL_FLOOR = 1e-320  # treat survival below this as an exact zero


@dataclass(frozen=True)
class RateFunction:
    """Escape rate gamma -> Gamma(gamma) with a provenance tag."""

    fn: Callable = field(repr=False)
    provenance: str = "analytic-WKB"  # or "numeric-fit"

    def __call__(self, gamma):
        return self.fn(gamma)


def wkb_rate(gamma, V0):
    """Semiclassical escape rate; continuously 0 at the degenerate bias 1."""
    g = np.asarray(gamma, dtype=float)
    scalar = g.ndim == 0
    g = np.atleast_1d(g)
    if np.any(g < 0.0) or np.any(g > 1.0):
        raise DomainError(f"bias gamma must lie in [0, 1], got {gamma}")
    out = np.zeros_like(g)
    ok = g < 1.0
    if np.any(ok):
        ratio = 7.2 * barrier_height(g[ok], V0) / plasma_frequency(g[ok], V0)
        out[ok] = (
            plasma_frequency(g[ok], V0)
            / (2.0 * np.pi)
            * np.sqrt(120.0 * np.pi * ratio)
            * np.exp(-ratio)
        )
    return out[0] if scalar else out


def wkb_rate_function(V0) -> RateFunction:
    return RateFunction(fn=lambda g: wkb_rate(g, V0), provenance="analytic-WKB")


def cumulative_rate(rate, gamma_grid) -> np.ndarray:
    """int_0^gamma Gamma(x) dx at each grid value, by adaptive quadrature.

    The rate spans many decades, so each grid segment is integrated
    independently (Gauss-Kronrod) and accumulated.
    """
    fn = rate if callable(rate) else rate.fn
    grid = np.asarray(gamma_grid, dtype=float)
    out = np.zeros(len(grid))
    acc = 0.0
    for i in range(1, len(grid)):
        seg, _ = quad(fn, grid[i - 1], grid[i], epsabs=1e-14, epsrel=1e-11, limit=200)
        acc += seg
        out[i] = acc
    return out


def _check_unit_grid(gamma_grid) -> np.ndarray:
    grid = np.asarray(gamma_grid, dtype=float)
    if len(grid) < 2 or grid[0] != 0.0 or grid[-1] != 1.0 or np.any(np.diff(grid) <= 0):
        raise ParameterError("gamma grid must increase strictly from 0 to 1")
    return grid


@dataclass(frozen=True)
class AdiabaticDistribution:
    """Normalized switching-current density and CDF on a bias grid."""

    gammas: np.ndarray = field(repr=False)
    pdf: np.ndarray = field(repr=False)
    cdf: np.ndarray = field(repr=False)
    normalization: float = 1.0  # Norm = 1 - exp(-T * int_0^1 Gamma)


def adiabatic_pdf(T: float, rate, gamma_grid=None) -> AdiabaticDistribution:
    """Adiabatic switching distribution for a ramp of duration T."""
    if not (T > 0):
        raise ParameterError(f"T must be > 0, got {T}")
    grid = _check_unit_grid(np.linspace(0.0, 1.0, 1001) if gamma_grid is None else gamma_grid)
    fn = rate if callable(rate) else rate.fn
    integral = cumulative_rate(fn, grid)
    log_survival = -T * integral
    norm = -np.expm1(log_survival[-1])
    if norm <= 0.0:
        raise NumericalError("total switching probability is zero; ramp too fast or rate zero")
    gam = np.array([fn(g) for g in grid], dtype=float)
    with np.errstate(under="ignore"):
        pdf = T * gam * np.exp(log_survival) / norm
        cdf = np.expm1(log_survival) / np.expm1(log_survival[-1])
    return AdiabaticDistribution(gammas=grid, pdf=pdf, cdf=cdf, normalization=float(norm))


def adiabatic_cdf_ode(T: float, rate, gamma_grid) -> np.ndarray:
    """Unnormalized CDF from integrating d(CDF)/dgamma = Gamma T (1 - CDF).

    Classical fourth-order Runge-Kutta on the survival S = 1 - CDF, with
    per-interval substeps chosen so each substep resolves the local decay
    (T Gamma dgamma <= 0.05); once S underflows it is pinned at zero, which
    keeps the cost bounded for arbitrarily large T.
    """
    if not (T > 0):
        raise ParameterError(f"T must be > 0, got {T}")
    grid = _check_unit_grid(gamma_grid)
    fn = rate if callable(rate) else rate.fn
    s = 1.0
    cdf = np.empty(len(grid))
    cdf[0] = 0.0
    for i in range(1, len(grid)):
        g0, g1 = grid[i - 1], grid[i]
        if s <= SURVIVAL_FLOOR:
            cdf[i] = 1.0
            continue
        local = max(fn(g0), fn(g1), 1e-300)
        m = max(1, int(np.ceil((g1 - g0) * T * local / 0.05)))
        dg = (g1 - g0) / m
        for k in range(m):
            ga = g0 + k * dg
            ra = fn(ga)
            rm = fn(ga + 0.5 * dg)
            rb = fn(ga + dg)
            k1 = -T * ra * s
            k2 = -T * rm * (s + 0.5 * dg * k1)
            k3 = -T * rm * (s + 0.5 * dg * k2)
            k4 = -T * rb * (s + dg * k3)
            s += dg / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if s <= SURVIVAL_FLOOR:
                s = 0.0
                break
        cdf[i] = 1.0 - s
    return cdf


@dataclass(frozen=True)
class MeasuredDistribution:
    """Discrete switching distribution over gamma_k = k/N from the
    measured survival recursion S_k = F(gamma_k) exp(-Gamma(gamma_k) T/N) S_{k-1}."""

    gammas: np.ndarray = field(repr=False)
    pdf: np.ndarray = field(repr=False)
    survival: float
    clamped_steps: int = 0
    validity_warning: bool = False

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pdf)


def measured_adiabatic_pdf(T: float, N: int, rate, prefactor=None,
                           relaxation_time: float | None = None) -> MeasuredDistribution:
    """Discrete adiabatic recursion with a measurement prefactor F >= 1.

    With F == 1 this is the right-endpoint discretization of the adiabatic
    survival exponential and converges to :func:`adiabatic_pdf` at first
    order in 1/N.  Per-step survival factors are clamped to <= 1 (F > 1 can
    push the bracket above unity) and the clamp count is reported.
    """
    if not (T > 0 and isinstance(N, int) and N >= 1):
        raise ParameterError(f"need T > 0 and integer N >= 1, got T={T}, N={N}")
    fn = rate if callable(rate) else rate.fn
    pref = prefactor if prefactor is not None else (lambda g: 1.0)
    validity = False
    if relaxation_time is not None and T / N <= relaxation_time:
        validity = True
        warnings.warn(
            f"measurement interval T/N = {T / N:.3g} does not exceed the "
            f"relaxation time {relaxation_time:.3g}; adiabatic recursion "
            "is outside its validity regime",
            stacklevel=2,
        )
    gammas = np.arange(1, N + 1) / N
    pdf = np.empty(N)
    clamped = 0
    warned_f = False
    s_prev = 1.0
    with np.errstate(under="ignore"):
        for k in range(N):
            f_k = float(pref(gammas[k]))
            if f_k < 1.0 and not warned_f:
                warnings.warn(
                    f"prefactor F({gammas[k]:.3g}) = {f_k:.6g} < 1 contradicts the "
                    "expected measurement back-action (delay); using it anyway",
                    stacklevel=2,
                )
                warned_f = True
            factor = f_k * np.exp(-float(fn(gammas[k])) * T / N)
            if factor > 1.0:
                factor = 1.0
                clamped += 1
            s_k = s_prev * factor
            if s_k > s_prev:
                raise NumericalError("survival increased despite clamping")
            pdf[k] = s_prev - s_k
            s_prev = s_k
    return MeasuredDistribution(
        gammas=gammas, pdf=pdf, survival=float(s_prev),
        clamped_steps=clamped, validity_warning=validity,
    )


def distribution_to_csv(dist, path) -> None:
    """Write (gamma, pdf, cdf) columns for either distribution flavor."""
    cdf = dist.cdf() if callable(getattr(dist, "cdf", None)) else dist.cdf
    write_csv(path, ["gamma", "pdf", "cdf"], [dist.gammas, dist.pdf, cdf])

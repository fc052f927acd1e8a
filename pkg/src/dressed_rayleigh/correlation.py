"""Two-time dipole correlators and the emitted-photon spectrum.

The regression route propagates the conditional matrix sigma*rho(t) under the
same generator as the state itself; because off-diagonal elements never
receive gains, the correlator is an exact sum of complex exponentials over
the lowering-transition pairs.  The spectrum is the one-sided Fourier
transform of the correlator (quadrature on the lag grid plus an analytic
exponential tail), normalized up to one opaque positive scale.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from .jc_core import SystemParams, decay_rate_n
from .lindblad import GeneratorTables, LadderDensityMatrix, apply_lowering


@dataclass
class CorrelationSeries:
    """Complex dipole correlator values on a grid of lags from one anchor time."""

    t_anchor: float
    tau_grid: np.ndarray
    values: np.ndarray


@dataclass
class LorentzFit:
    center: float
    hwhm: float
    peak: float
    residual: float


@dataclass
class SpectrumSeries:
    """Emitted-photon occupation per mode frequency, up to an overall scale."""

    omega_grid: np.ndarray
    intensity: np.ndarray
    mode_weight: float = 1.0
    truncated: bool = False
    fit: LorentzFit | None = field(default=None)


class FitError(RuntimeError):
    pass


def correlator_regression(gen: GeneratorTables, rho_t: LadderDensityMatrix,
                          tau_grid, t_anchor: float = 0.0) -> CorrelationSeries:
    """Correlator <sigma^dag(t+tau) sigma(t)> by the regression prescription.

    Forms sigma*rho(t), lets each of its elements follow the generator's
    scalar dynamics, and traces against the raising operator.  The relevant
    elements sit on lowering-transition pairs, so the result is a closed
    exponential sum evaluated on the lag grid.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    conditional = apply_lowering(rho_t, gen.transitions)
    values = np.zeros(len(tau_grid), dtype=complex)
    for t in gen.transitions:
        c0 = conditional.get((t.from_level, t.to_level))
        if c0 is None or c0 == 0.0:
            continue
        lam = gen.offdiag_rate(t.from_level, t.to_level)
        values += (t.amplitude * c0) * np.exp(lam * tau_grid)
    return CorrelationSeries(t_anchor, tau_grid, values)


def correlator_analytic(params: SystemParams, kind: str, n0: int,
                        t: float, tau) -> np.ndarray:
    """Closed-form correlators of the three Fock scenarios.

    ``kind`` is ``"single_photon"`` (one incident photon; lag decay at half
    the slow rate), ``"placzek"`` (single retained transition, n0-scaled), or
    ``"cascade"`` (dynamic equilibrium; lag decay at the full effective rate).
    """
    params.require_detuned()
    tau = np.asarray(tau, dtype=float)
    rotation = np.exp(1j * params.omega_sm * tau)
    if kind == "single_photon":
        g1 = decay_rate_n(params, 1)
        r = params.rabi**2 / params.detuning**2
        return rotation * r * math.exp(-g1 * t) * np.exp(-0.5 * g1 * tau)
    if kind == "placzek":
        gn = decay_rate_n(params, n0)
        r = params.rabi**2 * n0 / params.detuning**2
        return rotation * r * math.exp(-gn * t) * np.exp(-0.5 * gn * tau)
    if kind == "cascade":
        g_eff = decay_rate_n(params, n0)
        r = params.rabi**2 * n0 / params.detuning**2
        return rotation * r * np.exp(-g_eff * tau)
    raise ValueError(f"unknown correlator kind {kind!r}")


def stationarity_time(t_grid, excitation, threshold: float = 1e-3,
                      window: float | None = None) -> float:
    """First time at which the windowed relative change of the excitation
    drops below the threshold; falls back to the midpoint of the grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    excitation = np.asarray(excitation, dtype=float)
    if window is None:
        window = (t_grid[-1] - t_grid[0]) / 20.0
    for i, t in enumerate(t_grid):
        j = int(np.searchsorted(t_grid, t + window))
        if j >= len(t_grid):
            break
        lo = excitation[i:j + 1]
        ref = max(abs(excitation[i]), 1e-300)
        if (lo.max() - lo.min()) / ref < threshold:
            return float(t)
    return float(t_grid[len(t_grid) // 2])


def _fit_exponential_tail(tau, values):
    """Least-squares (omega0, kappa, value at last lag) of the tail of corr."""
    mod = np.abs(values)
    if np.any(mod == 0.0):
        return None
    log_mod = np.log(mod)
    phase = np.unwrap(np.angle(values))
    kappa = -np.polyfit(tau, log_mod, 1)[0]
    omega0 = np.polyfit(tau, phase, 1)[0]
    if not (np.isfinite(kappa) and kappa > 0.0 and np.isfinite(omega0)):
        return None
    return omega0, kappa


def spectrum_from_correlator(corr: CorrelationSeries, omega_grid,
                             mode_weight: float = 1.0,
                             max_workers: int | None = None) -> SpectrumSeries:
    """One-sided Fourier transform of the correlator on a frequency grid.

    Trapezoid quadrature on the lag grid plus an analytic tail from the
    fitted exponential beyond the last lag.  A truncation flag is set when
    the correlator has not decayed below 1e-3 of its initial modulus.  Tiny
    negative quadrature ripple is clipped to zero.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    if omega_grid.size == 0 or corr.tau_grid.size == 0:
        raise ValueError("empty grids")
    if np.any(np.diff(omega_grid) <= 0):
        raise ValueError("omega_grid must be strictly increasing")
    tau = corr.tau_grid
    values = corr.values
    scale0 = abs(values[0])
    truncated = scale0 > 0.0 and abs(values[-1]) > 1e-3 * scale0

    tail = None
    if scale0 > 0.0:
        n_tail = max(len(tau) // 4, 8)
        tail = _fit_exponential_tail(tau[-n_tail:], values[-n_tail:])

    def transform(omegas: np.ndarray) -> np.ndarray:
        phase = np.exp(-1j * np.outer(omegas, tau))
        integral = np.trapezoid(phase * values[None, :], tau, axis=1)
        if tail is not None:
            omega0, kappa = tail
            integral += values[-1] * np.exp(-1j * omegas * tau[-1]) / (
                kappa + 1j * (omegas - omega0))
        return np.real(integral)

    if max_workers is None:
        max_workers = _worker_cap()
    chunks = np.array_split(omega_grid, max(1, min(max_workers * 4, len(omega_grid))))
    if max_workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            parts = list(pool.map(transform, chunks))
    else:
        parts = [transform(c) for c in chunks]
    intensity = mode_weight * np.concatenate(parts)
    intensity = np.maximum(intensity, 0.0)
    return SpectrumSeries(omega_grid, intensity, mode_weight, truncated)


def _worker_cap() -> int:
    cap = os.environ.get("DRESSED_RAYLEIGH_THREADS")
    if cap:
        try:
            return max(1, int(cap))
        except ValueError:
            pass
    return os.cpu_count() or 1


def lorentzian_fit(spec: SpectrumSeries, max_iterations: int = 2000) -> LorentzFit:
    """Three-parameter Lorentzian fit A*k^2/((w-w0)^2+k^2) of a spectrum.

    Initialized from the discrete peak and its half-maximum crossings; raises
    FitError when the maximum is not interior or the optimizer stalls.
    """
    omega = spec.omega_grid
    y = spec.intensity
    idx = int(np.argmax(y))
    if idx == 0 or idx == len(y) - 1 or y[idx] <= 0.0:
        raise FitError("spectrum has no interior maximum")
    peak0 = y[idx]
    center0 = omega[idx]
    above = y >= 0.5 * peak0
    hwhm0 = 0.5 * (omega[above][-1] - omega[above][0])
    if hwhm0 <= 0.0:
        hwhm0 = omega[1] - omega[0]

    def model(w, peak, center, hwhm):
        return peak * hwhm**2 / ((w - center) ** 2 + hwhm**2)

    try:
        popt, _ = curve_fit(model, omega, y, p0=[peak0, center0, hwhm0],
                            maxfev=max_iterations)
    except RuntimeError as exc:
        raise FitError(f"lorentzian fit did not converge: {exc}") from exc
    peak, center, hwhm = popt
    hwhm = abs(hwhm)
    if not (omega[0] <= center <= omega[-1]) or peak <= 0.0:
        raise FitError(
            f"lorentzian fit left the grid: center={center!r}, peak={peak!r}")
    residual = float(np.sqrt(np.mean(((y - model(omega, *popt)) / peak) ** 2)))
    return LorentzFit(float(center), float(hwhm), float(peak), residual)

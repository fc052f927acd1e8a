"""End-to-end scenario execution: trajectory, correlator, spectrum, report.

Artifacts are CSV (RFC-4180-style, LF line endings, 17 significant digits)
plus a JSON report of fitted line parameters against the analytic
predictions.  Files are written atomically (temp + rename) so partial runs
never leave a readable artifact behind.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from . import cascade as cascade_mod
from .coherent import CoherentScenario, offdiag_initial
from .config import RunConfig
from .correlation import (
    CorrelationSeries,
    FitError,
    correlator_regression,
    lorentzian_fit,
    spectrum_from_correlator,
    stationarity_time,
)
from .jc_core import (
    DressedBasis,
    decay_rate_n,
    suggest_n_max_coherent,
    suggest_n_max_fock,
)
from .lindblad import (
    build_generator,
    coherent_initial_state,
    evolve,
    fock_initial_state,
    observable_atom_excitation,
    observable_dipole,
    observable_photon_number,
)

TRAJECTORY_CSV = "trajectory.csv"
CORRELATOR_CSV = "correlator.csv"
SPECTRUM_CSV = "spectrum.csv"
REPORT_JSON = "report.json"
COMPARE_CSV = "compare.csv"


class MissingArtifactError(FileNotFoundError):
    pass


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_atomic(path: str, text: str):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: str, header: str, columns):
    rows = zip(*columns)
    body = "\n".join(",".join(_fmt(v) for v in row) for row in rows)
    _write_atomic(path, header + "\n" + body + "\n")


@dataclass
class RunResult:
    """In-memory copy of the run artifacts, as written to output_dir."""

    t_grid: np.ndarray
    p_excited: np.ndarray
    n_photons: np.ndarray
    dipole: np.ndarray
    correlator: CorrelationSeries
    omega_grid: np.ndarray
    intensity: np.ndarray
    report: dict


def _scenario_n_max(cfg: RunConfig) -> int:
    if cfg.scenario == "coherent":
        return suggest_n_max_coherent(cfg.alpha)
    return suggest_n_max_fock(cfg.n0)


def run_scenario(cfg: RunConfig) -> RunResult:
    """Execute one configured scenario and write all artifacts to output_dir."""
    params = cfg.params
    basis = DressedBasis.build(params, _scenario_n_max(cfg))
    gen = build_generator(basis)
    if cfg.scenario == "coherent":
        rho0 = coherent_initial_state(basis, cfg.alpha)
    else:
        rho0 = fock_initial_state(basis, cfg.n0)

    t_grid = np.linspace(0.0, cfg.t_max, cfg.t_points)
    states = evolve(gen, rho0, t_grid, cfg.rel_tol, cfg.abs_tol)
    p_excited = np.array([observable_atom_excitation(s) for s in states])
    n_photons = np.array([observable_photon_number(s) for s in states])
    dipole = np.array([observable_dipole(s, gen.transitions) for s in states])
    traces = np.array([s.trace() for s in states])

    t_st = stationarity_time(t_grid, p_excited, window=0.5 / params.gamma0)
    i_st = int(np.searchsorted(t_grid, t_st))
    tau_grid = np.linspace(0.0, cfg.tau_max, cfg.tau_points)
    if cfg.scenario == "coherent":
        corr = _coherent_correlator(cfg, basis, t_grid[i_st], tau_grid)
    else:
        corr = correlator_regression(gen, states[i_st], tau_grid, t_anchor=t_grid[i_st])

    omega_grid = np.linspace(cfg.omega_min, cfg.omega_max, cfg.omega_points)
    spec = spectrum_from_correlator(corr, omega_grid)
    fit_record, fit_error = None, None
    try:
        fit_record = lorentzian_fit(spec)
    except FitError as exc:
        fit_error = str(exc)

    report = _build_report(cfg, basis, rho0, corr, spec, fit_record, fit_error,
                           t_grid, p_excited, dipole, traces)

    os.makedirs(cfg.output_dir, exist_ok=True)
    out = lambda name: os.path.join(cfg.output_dir, name)
    _write_csv(out(TRAJECTORY_CSV), "t,p_excited,n_photons,re_dipole,im_dipole",
               [t_grid, p_excited, n_photons, dipole.real, dipole.imag])
    _write_csv(out(CORRELATOR_CSV), "tau,re_corr,im_corr",
               [tau_grid, corr.values.real, corr.values.imag])
    _write_csv(out(SPECTRUM_CSV), "omega,intensity", [omega_grid, spec.intensity])
    _write_atomic(out(REPORT_JSON), json.dumps(report, indent=2) + "\n")

    return RunResult(t_grid, p_excited, n_photons, dipole, corr,
                     omega_grid, spec.intensity, report)


def _coherent_correlator(cfg: RunConfig, basis, t_st, tau_grid) -> CorrelationSeries:
    # near-classical field: the dipole is deterministic, so the two-time
    # correlator factorizes into conj(<sigma>(t+tau)) * <sigma>(t)
    sc = CoherentScenario(cfg.params, cfg.alpha, basis.n_max)
    gen = sc.generator()
    table = gen.transitions
    init = offdiag_initial(sc)
    rates = {pair: gen.offdiag_rate(*pair) for pair in init}

    def dipole_at(times):
        times = np.atleast_1d(times)
        total = np.zeros(len(times), dtype=complex)
        for tr in table:
            val = init.get((tr.to_level, tr.from_level))
            if val is None or val == 0.0:
                continue
            lam = rates[(tr.to_level, tr.from_level)]
            total += tr.amplitude * val * np.exp(lam * times)
        return total

    anchor = dipole_at(t_st)[0]
    values = np.conj(dipole_at(t_st + tau_grid)) * anchor
    return CorrelationSeries(t_st, tau_grid, values)


def _analytic_line(cfg: RunConfig) -> tuple[float, float]:
    """(center, hwhm) predicted for the configured scenario."""
    params = cfg.params
    if cfg.scenario == "single_photon":
        return params.omega_sm, 0.5 * decay_rate_n(params, 1)
    if cfg.scenario == "placzek":
        return params.omega_sm, 0.5 * decay_rate_n(params, cfg.n0)
    if cfg.scenario == "cascade":
        return params.omega_sm, decay_rate_n(params, cfg.n0)
    a2 = abs(cfg.alpha) ** 2
    return params.omega_sm, a2 * params.gamma0 * params.rabi**2 / params.detuning**2


def _build_report(cfg, basis, rho0, corr, spec, fit_record, fit_error,
                  t_grid, p_excited, dipole, traces) -> dict:
    params = cfg.params
    center, hwhm = _analytic_line(cfg)
    n_char = abs(cfg.alpha) ** 2 if cfg.scenario == "coherent" else cfg.n0
    report = {
        "scenario": cfg.scenario,
        "n_max": basis.n_max,
        "anchor_time": corr.t_anchor,
        "dimensionless": {
            "rabi_sqrt_n_over_detuning":
                params.rabi * math.sqrt(max(n_char, 1.0)) / abs(params.detuning),
            "gamma_eff_over_gamma0": cfg.slow_rate() / params.gamma0,
        },
        "regime_flags": {
            "large_detuning_reliable":
                params.rabi * math.sqrt(basis.n_max) / abs(params.detuning) < 0.1,
            "correlator_truncated": bool(spec.truncated),
        },
        "diagnostics": {
            "trace_drift": float(np.max(np.abs(traces - traces[0]))),
            "min_population_proxy": float(np.min(p_excited)),
            "coherent_renormalization": rho0.renormalization,
        },
        "analytic": {"center": center, "hwhm": hwhm},
        "seed": cfg.seed,
    }
    if fit_record is not None:
        report["fit"] = {
            "center": fit_record.center,
            "hwhm": fit_record.hwhm,
            "peak": fit_record.peak,
            "residual": fit_record.residual,
        }
        report["relative_deviation"] = {
            "center": abs(fit_record.center - center) / params.omega_sm,
            "hwhm": abs(fit_record.hwhm - hwhm) / hwhm,
        }
    else:
        report["fit_error"] = fit_error
    if cfg.scenario == "coherent":
        sc = CoherentScenario(params, cfg.alpha, basis.n_max)
        window = (t_grid >= 10.0 / params.gamma0) & \
                 (t_grid <= 0.1 / max(cfg.slow_rate(), 1e-300))
        if np.any(window):
            # amplitude of the quasistationary oscillation with the known
            # slow field drain compensated
            a2 = abs(cfg.alpha) ** 2
            drain = np.exp(-a2 * sc.slow_rate * t_grid[window])
            report["dipole_amplitude"] = float(
                np.mean(np.abs(dipole[window]) / drain))
            report["dipole_amplitude_analytic"] = \
                params.rabi * abs(cfg.alpha) / abs(params.detuning)
    return report


@dataclass
class CompareRow:
    quantity: str
    analytic: float
    numeric: float
    rel_dev: float
    passed: bool


def _load_csv(path: str, expected_header: str) -> np.ndarray:
    if not os.path.exists(path):
        raise MissingArtifactError(f"missing artifact: {path}")
    with open(path, "r", newline="") as handle:
        header = handle.readline().strip()
        if header != expected_header:
            raise MissingArtifactError(
                f"artifact {path} has header {header!r}, expected {expected_header!r}")
        data = np.loadtxt(handle, delimiter=",", ndmin=2)
    if data.size == 0:
        raise MissingArtifactError(f"artifact {path} is empty")
    return data


def _dominant_frequency(t, signal, skip_bins: int = 3) -> tuple[float, float]:
    """(peak angular frequency, bin width) of a mean-removed real signal."""
    dt = t[1] - t[0]
    amp = np.abs(np.fft.rfft(signal - np.mean(signal)))
    freqs = 2.0 * math.pi * np.fft.rfftfreq(len(signal), dt)
    idx = skip_bins + int(np.argmax(amp[skip_bins:]))
    return float(freqs[idx]), float(freqs[1] - freqs[0])


def compare_report(cfg: RunConfig, *, gamma_eff_factor: float = 1.0) -> list[CompareRow]:
    """Analytic-vs-numeric table for an existing run; writes compare.csv.

    ``gamma_eff_factor`` deliberately rescales the analytic width row and is
    only meant for sensitivity checks of the comparison itself.
    """
    params = cfg.params
    out = lambda name: os.path.join(cfg.output_dir, name)
    traj = _load_csv(out(TRAJECTORY_CSV), "t,p_excited,n_photons,re_dipole,im_dipole")
    _load_csv(out(CORRELATOR_CSV), "tau,re_corr,im_corr")
    _load_csv(out(SPECTRUM_CSV), "omega,intensity")
    if not os.path.exists(out(REPORT_JSON)):
        raise MissingArtifactError(f"missing artifact: {out(REPORT_JSON)}")
    with open(out(REPORT_JSON)) as handle:
        report = json.load(handle)

    rows: list[CompareRow] = []
    t, p_exc = traj[:, 0], traj[:, 1]

    if cfg.scenario != "coherent":
        splitting = 2.0 * math.sqrt(
            params.rabi**2 * cfg.n0 + (params.detuning / 2.0) ** 2)
        transient = t <= min(3.0 / params.gamma0, t[-1])
        peak, bin_width = _dominant_frequency(t[transient], p_exc[transient])
        rows.append(CompareRow("rabi_frequency", splitting, peak,
                               abs(peak - splitting) / splitting,
                               abs(peak - splitting) <= bin_width))

    if cfg.scenario == "cascade":
        plateau = params.rabi**2 * cfg.n0 / params.detuning**2
        g_eff = decay_rate_n(params, cfg.n0)
        window = (t >= 5.0 / params.gamma0) & (t * g_eff <= 0.5)
        if np.any(window):
            observed = float(np.mean(p_exc[window]))
            rows.append(CompareRow("plateau_population", plateau, observed,
                                   abs(observed - plateau) / plateau,
                                   abs(observed - plateau) / plateau <= 0.1))
        sup = _poisson_vs_ode_supnorm(params, cfg.n0)
        rows.append(CompareRow("cascade_distribution_supnorm", 0.0, sup, sup,
                               sup <= 1e-8))

    center, hwhm = _analytic_line(cfg)
    hwhm *= gamma_eff_factor
    fit = report.get("fit")
    if fit is not None:
        omega_bin = (cfg.omega_max - cfg.omega_min) / (cfg.omega_points - 1)
        center_tol = params.rabi**2 * cfg.n0 / abs(params.detuning) + omega_bin \
            if cfg.scenario != "coherent" else \
            params.rabi**2 * abs(cfg.alpha) ** 2 / abs(params.detuning) + omega_bin
        rows.append(CompareRow("spectrum_center", center, fit["center"],
                               abs(fit["center"] - center) / params.omega_sm,
                               abs(fit["center"] - center) <= center_tol))
        rows.append(CompareRow("spectrum_hwhm", hwhm, fit["hwhm"],
                               abs(fit["hwhm"] - hwhm) / hwhm,
                               abs(fit["hwhm"] - hwhm) / hwhm <= 0.1))

    if cfg.scenario == "coherent" and "dipole_amplitude" in report:
        analytic = report["dipole_amplitude_analytic"]
        observed = report["dipole_amplitude"]
        rows.append(CompareRow("dipole_amplitude", analytic, observed,
                               abs(observed - analytic) / analytic,
                               abs(observed - analytic) / analytic <= 0.05))

    header = "quantity,analytic,numeric,rel_dev,status"
    body = "\n".join(
        f"{r.quantity},{_fmt(r.analytic)},{_fmt(r.numeric)},{_fmt(r.rel_dev)},"
        f"{'pass' if r.passed else 'fail'}" for r in rows)
    _write_atomic(out(COMPARE_CSV), header + "\n" + body + "\n")
    return rows


def _poisson_vs_ode_supnorm(params, n0: int, n_times: int = 8) -> float:
    """Sup-norm gap between the closed form and the equal-rate ladder ODE."""
    g_eff = decay_rate_n(params, n0)
    rates = np.full(n0 + 1, g_eff)
    rates[0] = 0.0
    mat = cascade_mod.cascade_rate_matrix(rates)
    t_grid = np.linspace(0.0, 5.0 / g_eff, n_times)
    from scipy.linalg import expm

    p = np.zeros(n0 + 1)
    p[n0] = 1.0
    worst = 0.0
    for t in t_grid[1:]:
        ode_p = expm(mat * t) @ p
        closed = cascade_mod.poisson_solution(g_eff, n0, t).p
        worst = max(worst, float(np.max(np.abs(ode_p - closed))))
    return worst

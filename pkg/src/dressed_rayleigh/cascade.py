"""Large-detuning cascade of photon-like levels: exact rate equations and
the equal-rate (Markov-Poisson) closed form, plus the per-scenario population
formulas for single-photon, single-transition and full-cascade runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.stats import poisson

from .jc_core import SystemParams, decay_rate_n


@dataclass
class CascadeState:
    """Occupation probabilities p[0..n0] of the photon-like ladder at one time."""

    n0: int
    t: float
    p: np.ndarray
    poisson_valid: bool = True

    def mean_n(self) -> float:
        return float(np.arange(self.n0 + 1) @ self.p)


class CascadeIntegrationError(RuntimeError):
    def __init__(self, message: str, t_reached: float):
        super().__init__(f"{message} (reached t={t_reached!r})")
        self.t_reached = t_reached


def _rate_vector(params: SystemParams, n0: int) -> np.ndarray:
    return np.array([decay_rate_n(params, n) for n in range(n0 + 1)])


def cascade_rate_matrix(rates: np.ndarray) -> np.ndarray:
    """Bidiagonal generator of the pure-death ladder for given per-level rates."""
    n0 = len(rates) - 1
    mat = np.diag(-rates) + np.diag(rates[1:], k=1)
    mat[n0, n0] = -rates[n0]
    return mat


def solve_cascade_ode(params: SystemParams, n0: int, t_grid,
                      rel_tol: float = 1e-10, abs_tol: float = 1e-13) -> list[CascadeState]:
    """Integrate the ladder rate equations from p[n0](0) = 1."""
    if n0 < 1:
        raise ValueError("n0 must be positive")
    t_grid = np.asarray(t_grid, dtype=float)
    rates = _rate_vector(params, n0)
    mat = cascade_rate_matrix(rates)
    p0 = np.zeros(n0 + 1)
    p0[n0] = 1.0
    sol = solve_ivp(lambda _t, y: mat @ y, (t_grid[0], t_grid[-1]), p0,
                    method="DOP853", t_eval=t_grid, rtol=rel_tol, atol=abs_tol)
    if not sol.success:
        reached = float(sol.t[-1]) if len(sol.t) else t_grid[0]
        raise CascadeIntegrationError(f"cascade integration failed: {sol.message}", reached)
    return [CascadeState(n0, float(t), sol.y[:, i].copy()) for i, t in enumerate(t_grid)]


#: beyond gamma_eff * t / n0 = this fraction the equal-rate closed form stops
#: being a faithful stand-in for the exact cascade
POISSON_VALID_FRACTION = 0.5


def poisson_solution(gamma_eff: float, n0: int, t: float) -> CascadeState:
    """Equal-rate closed form: p[n0-k](t) is Poisson(gamma_eff*t) at k.

    The Poisson mass at k >= n0 is lumped into p[0] so the distribution stays
    normalized; the state is flagged invalid once gamma_eff*t is no longer
    small against n0.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if n0 < 1:
        raise ValueError("n0 must be positive")
    mean = gamma_eff * t
    p = np.zeros(n0 + 1)
    k = np.arange(n0)
    p[n0 - k] = poisson.pmf(k, mean)
    p[0] = max(0.0, 1.0 - poisson.cdf(n0 - 1, mean))
    valid = mean <= POISSON_VALID_FRACTION * n0
    return CascadeState(n0, float(t), p, poisson_valid=bool(valid))


def population_single_photon(params: SystemParams, t: float) -> float:
    """Excited-state population for one incident photon: the slow exponential."""
    params.require_detuned()
    r = params.rabi**2 / params.detuning**2
    return r * np.exp(-params.gamma0 * r * t)


def population_placzek(params: SystemParams, n0: int, t: float) -> float:
    """Single-retained-transition population: n0-scaled slow exponential."""
    params.require_detuned()
    r = params.rabi**2 * n0 / params.detuning**2
    return r * np.exp(-params.gamma0 * r * t)


def population_cascade(params: SystemParams, n0: int, t: float,
                       exact: bool = False) -> float:
    """Excited-state population of the full cascade, sum of k-weighted occupations.

    Uses the equal-rate closed form by default; with ``exact=True`` the ladder
    rate equations are integrated instead.
    """
    params.require_detuned()
    if n0 < 1:
        raise ValueError("n0 must be positive")
    weight = params.rabi**2 / params.detuning**2
    if exact:
        state = solve_cascade_ode(params, n0, [0.0, t])[-1] if t > 0 else \
            solve_cascade_ode(params, n0, [0.0])[0]
    else:
        state = poisson_solution(decay_rate_n(params, n0), n0, t)
    k = np.arange(n0 + 1)
    return float(weight * (k @ state.p))


def population_equal_rate(params: SystemParams, n0: int, t: float) -> float:
    """Plateau-form population with every level weighted at n0.

    Equals the plateau rabi**2*n0/detuning**2 times the probability that the
    cascade has not yet reached the ground sector under equal rates; it tends
    to the constant plateau for n0 -> infinity at fixed gamma_eff * t.
    """
    params.require_detuned()
    plateau = params.rabi**2 * n0 / params.detuning**2
    mean = decay_rate_n(params, n0) * t
    return float(plateau * poisson.cdf(n0 - 1, mean))

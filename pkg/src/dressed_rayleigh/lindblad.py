"""Block-structured relaxation dynamics in the dressed basis.

The zero-temperature generator only induces downward sector-to-sector jumps,
so the density matrix splits into decoupled blocks: the populations obey a
linear rate system (integrated adaptively), while every off-diagonal element
evolves by its own exact scalar exponential ``exp((-i*dw - Gamma/2) * t)``.

Element convention: ``element(a, b)`` is the coefficient of ``|a><b|`` in the
expansion of the density matrix, with the off-diagonal dynamics
``-i*(omega_b - omega_a) - (Gamma_a + Gamma_b)/2``; in this convention the
mean dipole rotates as ``exp(-i*omega_sm*t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import gammaln

from .jc_core import (
    GROUND,
    Branch,
    DressedBasis,
    DressedLevel,
    Transition,
    minus,
    plus,
    sigma_coupling_table,
)


class EvolutionError(RuntimeError):
    """Adaptive integration failed; carries the time actually reached."""

    def __init__(self, message: str, t_reached: float):
        super().__init__(f"{message} (reached t={t_reached!r})")
        self.t_reached = t_reached


@dataclass(frozen=True)
class GeneratorTables:
    """Jump rates and per-level loss rates derived from the coupling table.

    ``rate_matrix`` maps (from_level, to_level) to the jump rate
    gamma0 * amplitude**2; every jump connects sector n to sector n-1.
    ``loss`` is the total outflow rate of each level, which also sets the
    decay of any off-diagonal element through ``offdiag_rate``.
    """

    basis: DressedBasis
    transitions: list[Transition]
    rate_matrix: dict[tuple[DressedLevel, DressedLevel], float]
    loss: dict[DressedLevel, float]
    index: dict[DressedLevel, int] = field(repr=False)
    pop_matrix: np.ndarray = field(repr=False)

    def offdiag_rate(self, a: DressedLevel, b: DressedLevel) -> complex:
        """Complex rate of element (a, b): -i*(omega_b - omega_a) - (loss_a + loss_b)/2."""
        dw = self.basis.frequency(b) - self.basis.frequency(a)
        return complex(-0.5 * (self.loss[a] + self.loss[b]), -dw)


def build_generator(basis: DressedBasis) -> GeneratorTables:
    """Assemble the downward-jump rate tables for a dressed basis."""
    gamma0 = basis.params.gamma0
    transitions = sigma_coupling_table(basis)
    rate_matrix = {
        (t.from_level, t.to_level): gamma0 * t.amplitude**2 for t in transitions
    }
    levels = basis.levels()
    index = {lvl: i for i, lvl in enumerate(levels)}
    loss = {lvl: 0.0 for lvl in levels}
    for (src, _dst), rate in rate_matrix.items():
        loss[src] += rate

    dim = len(levels)
    pop = np.zeros((dim, dim))
    for (src, dst), rate in rate_matrix.items():
        pop[index[dst], index[src]] += rate
        pop[index[src], index[src]] -= rate
    return GeneratorTables(basis, transitions, rate_matrix, loss, index, pop)


@dataclass
class LadderDensityMatrix:
    """Populations plus the tracked off-diagonal elements of a dressed-basis state."""

    basis: DressedBasis
    pops: dict[DressedLevel, float]
    offdiag: dict[tuple[DressedLevel, DressedLevel], complex]
    renormalization: float = 1.0

    def trace(self) -> float:
        return float(sum(self.pops.values()))

    def element(self, a: DressedLevel, b: DressedLevel) -> complex:
        if a == b:
            return complex(self.pops.get(a, 0.0))
        return self.offdiag.get((a, b), 0.0 + 0.0j)


def fock_initial_state(basis: DressedBasis, n0: int) -> LadderDensityMatrix:
    """State |g, n0><g, n0| expanded over the dressed levels of sector n0."""
    if not 1 <= n0 <= basis.n_max:
        raise ValueError(f"n0 must lie in 1..n_max={basis.n_max}, got {n0}")
    s, c = math.sin(basis.phi_at(n0)), math.cos(basis.phi_at(n0))
    pops = {lvl: 0.0 for lvl in basis.levels()}
    pops[plus(n0)] = s * s
    pops[minus(n0)] = c * c
    offdiag = {
        (plus(n0), minus(n0)): complex(s * c),
        (minus(n0), plus(n0)): complex(s * c),
    }
    return LadderDensityMatrix(basis, pops, offdiag)


def _coherent_coefficients(alpha: complex, n_max: int) -> np.ndarray:
    """Amplitudes <n|alpha> = exp(-|a|^2/2) alpha^n / sqrt(n!), log-domain."""
    n = np.arange(n_max + 1)
    mod = abs(alpha)
    if mod == 0.0:
        coeff = np.zeros(n_max + 1, dtype=complex)
        coeff[0] = 1.0
        return coeff
    log_mod = -0.5 * mod * mod + n * math.log(mod) - 0.5 * gammaln(n + 1.0)
    if np.any(np.isnan(log_mod)) or np.any(np.isinf(log_mod[np.nonzero(n)])):
        raise OverflowError("coherent-state coefficient out of numeric range")
    phase = np.exp(1j * n * np.angle(alpha))
    return np.exp(log_mod) * phase


def coherent_initial_state(basis: DressedBasis, alpha: complex) -> LadderDensityMatrix:
    """State |g, alpha><g, alpha| with the observable-relevant coherences tracked.

    Tracked families: same-sector pairs, adjacent-sector pairs, and ground
    pairs (both orderings of each).  The truncated trace is renormalized to
    one and the factor recorded on the returned state.
    """
    a2 = abs(alpha) ** 2
    needed = a2 + 6.0 * abs(alpha) + 10.0
    if basis.n_max < needed:
        raise ValueError(
            f"n_max={basis.n_max} too small for alpha={alpha!r}; need >= {math.ceil(needed)}"
        )
    coeff = _coherent_coefficients(alpha, basis.n_max)
    sin_phi = np.concatenate(([0.0], np.sin(basis.phi)))
    cos_phi = np.concatenate(([1.0], np.cos(basis.phi)))

    def amp(level: DressedLevel) -> complex:
        if level.branch is Branch.GROUND:
            return coeff[0]
        if level.branch is Branch.PLUS:
            return sin_phi[level.n] * coeff[level.n]
        return cos_phi[level.n] * coeff[level.n]

    pops = {lvl: abs(amp(lvl)) ** 2 for lvl in basis.levels()}
    trace = sum(pops.values())

    pairs = []
    for n in range(1, basis.n_max + 1):
        pairs.append((plus(n), minus(n)))
        pairs.append((GROUND, plus(n)))
        pairs.append((GROUND, minus(n)))
        if n >= 2:
            for b_lo in (plus(n - 1), minus(n - 1)):
                for b_hi in (plus(n), minus(n)):
                    pairs.append((b_lo, b_hi))
    offdiag = {}
    for a, b in pairs:
        val = amp(a) * np.conj(amp(b)) / trace
        offdiag[(a, b)] = complex(val)
        offdiag[(b, a)] = complex(np.conj(val))
    pops = {lvl: p / trace for lvl, p in pops.items()}
    return LadderDensityMatrix(basis, pops, offdiag, renormalization=trace)


def _evolve_populations(gen: GeneratorTables, p0: np.ndarray, t_grid: np.ndarray,
                        rel_tol: float, abs_tol: float) -> np.ndarray:
    if not np.any(gen.pop_matrix) or t_grid[-1] == t_grid[0]:
        return np.tile(p0, (len(t_grid), 1))
    sol = solve_ivp(
        lambda _t, y: gen.pop_matrix @ y,
        (t_grid[0], t_grid[-1]),
        p0,
        method="DOP853",
        t_eval=t_grid,
        rtol=rel_tol,
        atol=abs_tol,
    )
    if not sol.success:
        raise EvolutionError(f"population integration failed: {sol.message}", float(sol.t[-1]) if len(sol.t) else t_grid[0])
    return sol.y.T


def _check_evolve_args(t_grid: np.ndarray, rel_tol: float, abs_tol: float):
    if len(t_grid) == 0 or t_grid[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    for tol in (rel_tol, abs_tol):
        if not 0.0 < tol <= 1e-2:
            raise ValueError("tolerances must lie in (0, 1e-2]")


def evolve(gen: GeneratorTables, rho0: LadderDensityMatrix, t_grid,
           rel_tol: float = 1e-10, abs_tol: float = 1e-12) -> list[LadderDensityMatrix]:
    """Evolve a state on a time grid starting at 0.

    Populations follow the coupled rate system under adaptive integration;
    each tracked off-diagonal element is propagated by its exact exponential.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    _check_evolve_args(t_grid, rel_tol, abs_tol)
    levels = gen.basis.levels()
    p0 = np.array([rho0.pops.get(lvl, 0.0) for lvl in levels])
    pops_t = _evolve_populations(gen, p0, t_grid, rel_tol, abs_tol)

    off_t = {
        pair: val * np.exp(gen.offdiag_rate(*pair) * t_grid)
        for pair, val in rho0.offdiag.items()
    }
    out = []
    for i in range(len(t_grid)):
        pops = {lvl: float(pops_t[i, j]) for j, lvl in enumerate(levels)}
        offdiag = {pair: complex(vals[i]) for pair, vals in off_t.items()}
        out.append(LadderDensityMatrix(gen.basis, pops, offdiag,
                                       renormalization=rho0.renormalization))
    return out


def observable_atom_excitation(rho: LadderDensityMatrix) -> float:
    """Expectation of the bare-atom excitation projector |e><e|."""
    basis = rho.basis
    total = 0.0
    for n in range(1, basis.n_max + 1):
        s, c = math.sin(basis.phi_at(n)), math.cos(basis.phi_at(n))
        total += c * c * rho.pops.get(plus(n), 0.0) + s * s * rho.pops.get(minus(n), 0.0)
        cross = rho.element(plus(n), minus(n)) + rho.element(minus(n), plus(n))
        total -= s * c * cross.real
    return total


def observable_photon_number(rho: LadderDensityMatrix) -> float:
    """Expectation of the selected-mode photon number."""
    basis = rho.basis
    total = 0.0
    for n in range(1, basis.n_max + 1):
        s, c = math.sin(basis.phi_at(n)), math.cos(basis.phi_at(n))
        p_plus = rho.pops.get(plus(n), 0.0)
        p_minus = rho.pops.get(minus(n), 0.0)
        total += (n - 1) * (c * c * p_plus + s * s * p_minus)
        total += n * (s * s * p_plus + c * c * p_minus)
        cross = rho.element(plus(n), minus(n)) + rho.element(minus(n), plus(n))
        total += s * c * cross.real
    return total


def observable_dipole(rho: LadderDensityMatrix,
                      table: list[Transition] | None = None) -> complex:
    """Mean atomic dipole: the coupling-table-weighted sum of coherences."""
    if table is None:
        table = sigma_coupling_table(rho.basis)
    total = 0.0 + 0.0j
    for t in table:
        total += t.amplitude * rho.element(t.to_level, t.from_level)
    return total


def apply_lowering(rho: LadderDensityMatrix,
                   table: list[Transition] | None = None) -> dict[tuple[DressedLevel, DressedLevel], complex]:
    """Element map of sigma * rho in the stored convention.

    Every element (a, b) of rho with b an upper level of a transition feeds
    the element (a, to_level); the result is generally non-Hermitian and is
    used as the conditional initial condition of the regression correlator.
    """
    if table is None:
        table = sigma_coupling_table(rho.basis)
    by_upper: dict[DressedLevel, list[Transition]] = {}
    for t in table:
        by_upper.setdefault(t.from_level, []).append(t)

    elements: dict[tuple[DressedLevel, DressedLevel], complex] = {}

    def feed(a: DressedLevel, b: DressedLevel, val: complex):
        for t in by_upper.get(b, ()):
            key = (a, t.to_level)
            elements[key] = elements.get(key, 0.0 + 0.0j) + t.amplitude * val

    for lvl, p in rho.pops.items():
        if p != 0.0:
            feed(lvl, lvl, complex(p))
    for (a, b), val in rho.offdiag.items():
        if val != 0.0:
            feed(a, b, val)
    return elements

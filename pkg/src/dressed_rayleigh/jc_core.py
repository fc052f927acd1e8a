"""Dressed eigenstructure of a two-level atom coupled to one selected field mode.

The atom (transition frequency ``omega_tls``) and the selected mode
(``omega_sm``) hybridize into ladder pairs ``|+,n>``, ``|-,n>`` sitting above
the unique ground level ``|g,0>``.  Everything downstream (rate tables,
cascade dynamics, spectra) is built from the mixing angles, eigenfrequencies
and lowering-operator matrix elements computed here.  All quantities are in
natural units (hbar = 1, angular frequencies).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class Branch(enum.Enum):
    PLUS = "+"
    MINUS = "-"
    GROUND = "g"


@dataclass(frozen=True, order=True)
class DressedLevel:
    """One dressed level: the ground level or a branch of the n-photon doublet."""

    branch: Branch
    n: int

    def __post_init__(self):
        if self.branch is Branch.GROUND:
            if self.n != 0:
                raise ValueError("ground level carries n = 0")
        elif self.n < 1:
            raise ValueError(f"{self.branch.value} levels exist only for n >= 1")

    def __repr__(self):
        if self.branch is Branch.GROUND:
            return "|g,0>"
        return f"|{self.branch.value},{self.n}>"


GROUND = DressedLevel(Branch.GROUND, 0)


def plus(n: int) -> DressedLevel:
    return DressedLevel(Branch.PLUS, n)


def minus(n: int) -> DressedLevel:
    return DressedLevel(Branch.MINUS, n)


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters: mode and atom frequencies, coupling, free-space rate.

    ``rabi`` is the single-photon coupling strength; the generalized splitting
    of the n-th doublet is ``2*sqrt(rabi**2 * n + (detuning/2)**2)``.
    ``gamma0`` sets the scale of all relaxation rates into the reservoir.
    """

    omega_sm: float
    omega_tls: float
    rabi: float
    gamma0: float

    def __post_init__(self):
        if self.omega_sm <= 0:
            raise ValueError("omega_sm must be positive")
        if self.omega_tls <= 0:
            raise ValueError("omega_tls must be positive")
        if self.gamma0 <= 0:
            raise ValueError("gamma0 must be positive")
        if self.rabi < 0:
            raise ValueError("rabi must be non-negative")

    @property
    def detuning(self) -> float:
        return self.omega_sm - self.omega_tls

    def require_detuned(self):
        if self.detuning == 0.0:
            raise ResonanceError("operation requires nonzero detuning")


class ResonanceError(ValueError):
    """Raised by large-detuning operations when the detuning is exactly zero."""


def mixing_angle(params: SystemParams, n: int) -> float:
    """Rotation angle of the n-th doublet, arctan(2*rabi*sqrt(n)/|detuning|)/2.

    Returns pi/4 on resonance (the arctan argument diverges), 0 for zero
    coupling.  Rejects n = 0: the ground level has no mixing angle.
    """
    if n < 1:
        raise ValueError("mixing angle defined for n >= 1 only")
    return 0.5 * math.atan2(2.0 * params.rabi * math.sqrt(n), abs(params.detuning))


def eigenfrequency_pair(params: SystemParams, n: int) -> tuple[float, float]:
    """Exact eigenfrequencies (omega_plus, omega_minus) of the n-th doublet.

    The ``+`` branch is always the atom-like one: it sits above the photon-like
    branch when the mode is red of the atom (negative detuning) and below it
    otherwise, so the labels connect smoothly to the uncoupled levels.
    """
    if n < 1:
        raise ValueError("doublets exist for n >= 1 only")
    center = (n - 1) * params.omega_sm + 0.5 * (params.omega_sm + params.omega_tls)
    half_split = math.sqrt(params.rabi**2 * n + (params.detuning / 2.0) ** 2)
    if params.detuning > 0:
        half_split = -half_split
    return center + half_split, center - half_split


#: largest value of rabi*sqrt(n)/|detuning| for which the second-order
#: expansion of the eigenfrequencies is reported as reliable
EXPANSION_RELIABLE_BELOW = 0.1


def large_detuning_frequencies(params: SystemParams, n: int) -> tuple[float, float, bool]:
    """Second-order eigenfrequencies plus a flag for the expansion's validity.

    Returns ``(omega_plus_approx, omega_minus_approx, reliable)`` where the
    minus branch is photon-like (n * omega_sm shifted down by rabi**2*n/|detuning|)
    and the plus branch is atom-like.  ``reliable`` is False once
    rabi*sqrt(n)/|detuning| exceeds EXPANSION_RELIABLE_BELOW.
    """
    if n < 1:
        raise ValueError("doublets exist for n >= 1 only")
    params.require_detuned()
    # level repulsion: the photon-like level is pushed away from the atom-like
    # one, so the sign of the shift follows the sign of the detuning
    shift = params.rabi**2 * n / params.detuning
    omega_minus = n * params.omega_sm + shift
    omega_plus = (n - 1) * params.omega_sm + params.omega_tls - shift
    reliable = (params.rabi * math.sqrt(n) / abs(params.detuning)
                < EXPANSION_RELIABLE_BELOW)
    return omega_plus, omega_minus, reliable


def decay_rate_n(params: SystemParams, n: int) -> float:
    """Large-detuning rate of the |-,n> -> |-,n-1> step: gamma0*rabi**2*n/detuning**2.

    Linear in n; zero for the ground sector.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    params.require_detuned()
    return params.gamma0 * params.rabi**2 * n / params.detuning**2


@dataclass(frozen=True)
class DressedBasis:
    """Dressed levels up to truncation n_max with cached angles and frequencies."""

    params: SystemParams
    n_max: int
    phi: np.ndarray = field(repr=False)
    omega_plus: np.ndarray = field(repr=False)
    omega_minus: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, params: SystemParams, n_max: int) -> "DressedBasis":
        if n_max < 1:
            raise ValueError("n_max must be at least 1")
        ns = np.arange(1, n_max + 1)
        phi = 0.5 * np.arctan2(2.0 * params.rabi * np.sqrt(ns), abs(params.detuning))
        center = (ns - 1) * params.omega_sm + 0.5 * (params.omega_sm + params.omega_tls)
        half_split = np.sqrt(params.rabi**2 * ns + (params.detuning / 2.0) ** 2)
        if params.detuning > 0:
            half_split = -half_split
        return cls(params, n_max, phi, center + half_split, center - half_split)

    def phi_at(self, n: int) -> float:
        """Mixing angle of sector n; phi_0 = 0 by convention."""
        if n == 0:
            return 0.0
        return float(self.phi[n - 1])

    def frequency(self, level: DressedLevel) -> float:
        """Eigenfrequency of a level (the ground level sits at zero energy)."""
        if level.branch is Branch.GROUND:
            return 0.0
        if level.n > self.n_max:
            raise ValueError(f"{level} outside truncation n_max={self.n_max}")
        arr = self.omega_plus if level.branch is Branch.PLUS else self.omega_minus
        return float(arr[level.n - 1])

    def levels(self):
        """All levels, ground first, then (+,n), (-,n) for n = 1..n_max."""
        out = [GROUND]
        for n in range(1, self.n_max + 1):
            out.append(plus(n))
            out.append(minus(n))
        return out


@dataclass(frozen=True)
class Transition:
    """Nonzero matrix element of the atomic lowering operator: <to|sigma|from>."""

    from_level: DressedLevel
    to_level: DressedLevel
    amplitude: float


def sigma_coupling_table(basis: DressedBasis) -> list[Transition]:
    """All nonzero lowering-operator matrix elements in the dressed basis.

    The operator only connects sector n to sector n-1.  The returned
    amplitudes are real; squared and summed over the targets of any level
    they give the total loss weight of that level (cos^2 phi for +, sin^2 phi
    for -).  Amplitude signs are quoted in the red-detuned eigenvector gauge
    (mode below the atom); rates and linewidths do not depend on the gauge.
    """
    phi1 = basis.phi_at(1)
    table = [
        Transition(plus(1), GROUND, math.cos(phi1)),
        Transition(minus(1), GROUND, -math.sin(phi1)),
    ]
    for n in range(2, basis.n_max + 1):
        s_n, c_n = math.sin(basis.phi_at(n)), math.cos(basis.phi_at(n))
        s_p, c_p = math.sin(basis.phi_at(n - 1)), math.cos(basis.phi_at(n - 1))
        table.append(Transition(plus(n), plus(n - 1), c_n * s_p))
        table.append(Transition(minus(n), plus(n - 1), -s_n * s_p))
        table.append(Transition(plus(n), minus(n - 1), c_n * c_p))
        table.append(Transition(minus(n), minus(n - 1), -s_n * c_p))
    return table


def suggest_n_max_fock(n0: int) -> int:
    """Truncation that leaves headroom above an n0-photon initial state."""
    return n0 + 8


def suggest_n_max_coherent(alpha: complex) -> int:
    """Truncation with Poisson tail mass below ~1e-9 for a coherent amplitude."""
    a = abs(alpha)
    return math.ceil(a * a + 6.0 * a + 10.0)

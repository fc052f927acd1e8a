"""Dressed-basis simulator and analytic cross-checker for elastic photon
scattering off a single two-level atom."""

from .jc_core import (
    DressedBasis,
    DressedLevel,
    SystemParams,
    decay_rate_n,
    eigenfrequency_pair,
    mixing_angle,
    sigma_coupling_table,
)
from .lindblad import (
    LadderDensityMatrix,
    build_generator,
    coherent_initial_state,
    evolve,
    fock_initial_state,
    observable_atom_excitation,
    observable_dipole,
    observable_photon_number,
)

__all__ = [
    "DressedBasis",
    "DressedLevel",
    "SystemParams",
    "decay_rate_n",
    "eigenfrequency_pair",
    "mixing_angle",
    "sigma_coupling_table",
    "LadderDensityMatrix",
    "build_generator",
    "coherent_initial_state",
    "evolve",
    "fock_initial_state",
    "observable_atom_excitation",
    "observable_dipole",
    "observable_photon_number",
]

__version__ = "0.1.0"

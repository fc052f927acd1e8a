import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dressed_rayleigh.jc_core import (
    GROUND,
    Branch,
    DressedBasis,
    DressedLevel,
    ResonanceError,
    SystemParams,
    decay_rate_n,
    eigenfrequency_pair,
    large_detuning_frequencies,
    minus,
    mixing_angle,
    plus,
    sigma_coupling_table,
    suggest_n_max_coherent,
    suggest_n_max_fock,
)
from oracles import two_level_block

PARAM_SET = [
    SystemParams(100.0, 110.0, 0.2, 1.0),
    SystemParams(50.0, 48.0, 1.3, 0.7),
    SystemParams(1.0, 2.5, 0.4, 2.0),
    SystemParams(200.0, 190.0, 5.0, 0.1),
]


@pytest.mark.parametrize("params", PARAM_SET)
def test_eigenfrequencies_match_block_diagonalization(params):
    # the + branch is the atom-like one: upper for negative detuning,
    # lower otherwise
    for n in range(1, 13):
        evals = np.linalg.eigvalsh(two_level_block(params, n))
        omega_plus, omega_minus = eigenfrequency_pair(params, n)
        atom_like, photon_like = (evals[1], evals[0]) if params.detuning < 0 \
            else (evals[0], evals[1])
        assert abs(omega_plus - atom_like) <= 1e-10
        assert abs(omega_minus - photon_like) <= 1e-10


@pytest.mark.parametrize("params", PARAM_SET)
def test_mixing_angle_matches_block_eigenvectors(params):
    for n in range(1, 13):
        _, vecs = np.linalg.eigh(two_level_block(params, n))
        # the atom-like eigenvector in the bare {|g,n>, |e,n-1>} basis has
        # components (+-sin phi, +-cos phi)
        atom_like = vecs[:, 1] if abs(vecs[1, 1]) > abs(vecs[1, 0]) else vecs[:, 0]
        phi_numeric = math.atan2(abs(atom_like[0]), abs(atom_like[1]))
        assert abs(phi_numeric - mixing_angle(params, n)) <= 1e-10


@pytest.mark.parametrize("params", PARAM_SET)
def test_splitting_identity(params):
    for n in range(1, 13):
        omega_plus, omega_minus = eigenfrequency_pair(params, n)
        expected = 2.0 * math.sqrt(params.rabi**2 * n + (params.detuning / 2.0) ** 2)
        assert abs(abs(omega_plus - omega_minus) - expected) <= 1e-12 * expected


def test_expansion_error_shrinks_quartically():
    # the second-order frequencies miss at fourth order in rabi/|detuning|,
    # so halving the coupling should cut the error by about 16x
    def gap(rabi):
        params = SystemParams(100.0, 110.0, rabi, 1.0)
        exact = eigenfrequency_pair(params, 3)
        approx = large_detuning_frequencies(params, 3)
        return abs(exact[0] - approx[0]) + abs(exact[1] - approx[1])

    assert gap(0.4) / gap(0.2) >= 10.0


def test_expansion_reliability_flag():
    params = SystemParams(100.0, 110.0, 0.2, 1.0)
    assert large_detuning_frequencies(params, 2)[2]
    assert not large_detuning_frequencies(params, 30)[2]


def test_mixing_angle_edge_cases():
    resonant = SystemParams(100.0, 100.0, 0.3, 1.0)
    assert mixing_angle(resonant, 1) == pytest.approx(math.pi / 4)
    uncoupled = SystemParams(100.0, 110.0, 0.0, 1.0)
    assert mixing_angle(uncoupled, 5) == 0.0
    with pytest.raises(ValueError):
        mixing_angle(resonant, 0)


def test_resonance_guard():
    resonant = SystemParams(100.0, 100.0, 0.3, 1.0)
    with pytest.raises(ResonanceError):
        decay_rate_n(resonant, 1)
    with pytest.raises(ResonanceError):
        large_detuning_frequencies(resonant, 1)


def test_decay_rate_linear_in_n(detuned_params):
    gamma1 = decay_rate_n(detuned_params, 1)
    for n in range(9):
        assert decay_rate_n(detuned_params, n) == pytest.approx(n * gamma1)
    assert gamma1 == pytest.approx(
        detuned_params.gamma0 * detuned_params.rabi**2 / detuned_params.detuning**2)


@given(
    rabi=st.floats(1e-3, 10.0),
    detuning=st.floats(0.5, 50.0),
    n=st.integers(1, 40),
)
def test_mixing_angle_monotone_and_bounded(rabi, detuning, n):
    params = SystemParams(100.0, 100.0 + detuning, rabi, 1.0)
    phi_n = mixing_angle(params, n)
    assert 0.0 < phi_n < math.pi / 4
    assert mixing_angle(params, n + 1) > phi_n


@given(
    rabi=st.floats(1e-3, 10.0),
    detuning=st.floats(0.5, 50.0),
)
def test_coupling_table_loss_weights(rabi, detuning):
    # squared amplitudes out of a level must sum to cos^2 phi (+ branch)
    # or sin^2 phi (- branch)
    params = SystemParams(100.0, 100.0 + detuning, rabi, 1.0)
    basis = DressedBasis.build(params, 6)
    out = {}
    for tr in sigma_coupling_table(basis):
        out[tr.from_level] = out.get(tr.from_level, 0.0) + tr.amplitude**2
    for n in range(1, basis.n_max + 1):
        phi = basis.phi_at(n)
        assert out[plus(n)] == pytest.approx(math.cos(phi) ** 2, abs=1e-12)
        assert out[minus(n)] == pytest.approx(math.sin(phi) ** 2, abs=1e-12)
    assert GROUND not in out


def test_coupling_table_only_steps_down_one_sector(detuned_params):
    basis = DressedBasis.build(detuned_params, 8)
    for tr in sigma_coupling_table(basis):
        assert tr.to_level.n == tr.from_level.n - 1


def test_basis_caches_match_scalars(detuned_params):
    basis = DressedBasis.build(detuned_params, 10)
    assert basis.phi_at(0) == 0.0
    assert basis.frequency(GROUND) == 0.0
    for n in range(1, 11):
        assert basis.phi_at(n) == pytest.approx(mixing_angle(detuned_params, n))
        omega_plus, omega_minus = eigenfrequency_pair(detuned_params, n)
        assert basis.frequency(plus(n)) == pytest.approx(omega_plus)
        assert basis.frequency(minus(n)) == pytest.approx(omega_minus)
    levels = basis.levels()
    assert levels[0] is GROUND
    assert levels[1] == plus(1) and levels[2] == minus(1)
    assert len(levels) == 2 * basis.n_max + 1


def test_level_validation():
    with pytest.raises(ValueError):
        DressedLevel(Branch.PLUS, 0)
    with pytest.raises(ValueError):
        DressedLevel(Branch.GROUND, 1)
    with pytest.raises(ValueError):
        SystemParams(100.0, 110.0, -0.1, 1.0)
    with pytest.raises(ValueError):
        SystemParams(100.0, 110.0, 0.1, 0.0)


def test_truncation_suggestions_grow():
    assert suggest_n_max_fock(3) > 3
    assert suggest_n_max_coherent(2.0) >= 4 + 12 + 10
    assert suggest_n_max_coherent(4.0) > suggest_n_max_coherent(2.0)

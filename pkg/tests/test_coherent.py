import math

import numpy as np
import pytest

from dressed_rayleigh.coherent import (
    CoherentScenario,
    dipole_exact_sum,
    dipole_large_alpha,
    dipole_quasistationary,
    offdiag_evolved,
    offdiag_initial,
)
from dressed_rayleigh.jc_core import (
    Branch,
    DressedBasis,
    SystemParams,
    suggest_n_max_coherent,
)
from dressed_rayleigh.lindblad import (
    build_generator,
    coherent_initial_state,
    evolve,
    fock_initial_state,
    observable_dipole,
)


def _scenario(params, alpha):
    return CoherentScenario(params, alpha, suggest_n_max_coherent(alpha))


def test_scenario_validation(detuned_params):
    with pytest.raises(ValueError):
        # n_max far below the Poisson bulk
        CoherentScenario(detuned_params, 3.0, 5)
    near_resonant = SystemParams(100.0, 101.0, 0.9, 1.0)
    with pytest.raises(ValueError):
        CoherentScenario(near_resonant, 2.0, suggest_n_max_coherent(2.0))
    sc = _scenario(detuned_params, 4.0)
    assert sc.in_large_alpha_regime()
    assert not _scenario(detuned_params, 1.0).in_large_alpha_regime()
    assert sc.in_quasistationary_window(0.5 / sc.slow_rate)
    assert not sc.in_quasistationary_window(2.0 / sc.slow_rate)


def test_coherences_match_block_evolution(detuned_params):
    sc = _scenario(detuned_params, 1.5 + 0.8j)
    basis = sc.basis()
    gen = build_generator(basis)
    rho0 = coherent_initial_state(basis, sc.alpha)
    for t in (0.0, 1.7, 6.0):
        evolved = evolve(gen, rho0, [0.0, t] if t else [0.0])[-1]
        closed = offdiag_evolved(sc, t)
        for pair, val in closed.items():
            block_val = evolved.offdiag[pair] * rho0.renormalization
            assert abs(block_val - val) <= 1e-9


def test_dipole_sum_matches_block_evolution(detuned_params):
    sc = _scenario(detuned_params, 2.5)
    gen = sc.generator()
    rho0 = coherent_initial_state(sc.basis(), sc.alpha)
    times = np.linspace(0.0, 30.0, 16)
    states = evolve(gen, rho0, times)
    for t, state in zip(times[1:], states[1:]):
        block = observable_dipole(state, gen.transitions) * rho0.renormalization
        closed = dipole_exact_sum(sc, t)
        assert abs(block - closed) / abs(closed) <= 1e-8


def test_initial_dipole_vanishes(detuned_params):
    # bare atom starts in its ground state regardless of the field, so the
    # mean dipole is zero at t = 0 and only builds up with the dressing
    sc = _scenario(detuned_params, 3.0)
    assert abs(dipole_exact_sum(sc, 0.0)) <= 1e-12
    assert abs(dipole_exact_sum(sc, 1.0)) > 1e-4


def test_dipole_rotates_at_mode_frequency(detuned_params):
    sc = _scenario(detuned_params, 2.0)
    dt = 1e-4
    t0 = 12.0
    d0, d1 = dipole_exact_sum(sc, t0), dipole_exact_sum(sc, t0 + dt)
    measured = -np.angle(d1 / d0) / dt
    assert measured == pytest.approx(detuned_params.omega_sm, rel=1e-3)


def test_large_alpha_form_tracks_exact_sum(detuned_params):
    sc = _scenario(detuned_params, 4.0)
    a2 = abs(sc.alpha) ** 2
    # skip the first ~10/gamma0 where the fast dressing transient still rings
    for t in np.linspace(10.0, 1.5 / (a2 * sc.slow_rate), 8):
        exact = abs(dipole_exact_sum(sc, t))
        approx = abs(dipole_large_alpha(sc, t))
        assert abs(approx - exact) / exact <= 0.05


def test_quasistationary_form_is_the_leading_drain(detuned_params):
    # the quasistationary envelope is the first-order expansion of the
    # large-alpha envelope, so their log gap is bounded by the series remainder
    sc = _scenario(detuned_params, 4.0)
    a2 = abs(sc.alpha) ** 2
    for t in np.linspace(0.0, 0.9 / sc.slow_rate, 7):
        full = abs(dipole_large_alpha(sc, t))
        lead = abs(dipole_quasistationary(sc, t))
        bound = 0.5 * a2 * (sc.slow_rate * t) ** 2 * 1.01 + 1e-12
        assert abs(math.log(full) - math.log(lead)) <= bound


def test_fock_field_gives_no_dipole(detuned_params):
    basis = DressedBasis.build(detuned_params, 12)
    gen = build_generator(basis)
    states = evolve(gen, fock_initial_state(basis, 6), np.linspace(0.0, 25.0, 26))
    for state in states:
        assert abs(observable_dipole(state, gen.transitions)) <= 1e-12
    sc = _scenario(detuned_params, 2.0)
    assert abs(dipole_exact_sum(sc, 10.0)) > 1e-3


def test_fast_coherences_die_out_first(detuned_params):
    # families involving an atom-like (+) level decay at order gamma0 while
    # photon-like families persist on the slow scale
    sc = _scenario(detuned_params, 1.5)
    elements = offdiag_evolved(sc, 20.0 / detuned_params.gamma0)
    fast = [abs(v) for (a, b), v in elements.items()
            if Branch.PLUS in (a.branch, b.branch)]
    slow = [abs(v) for (a, b), v in elements.items()
            if Branch.PLUS not in (a.branch, b.branch)]
    assert max(fast) <= 1e-3 * max(slow)


def test_offdiag_initial_is_unnormalized(detuned_params):
    sc = _scenario(detuned_params, 1.0)
    state = coherent_initial_state(sc.basis(), sc.alpha)
    raw = offdiag_initial(sc)
    for pair, val in raw.items():
        assert val == pytest.approx(state.offdiag[pair] * state.renormalization)
    with pytest.raises(ValueError):
        offdiag_evolved(sc, -1.0)

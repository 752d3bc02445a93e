import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_density
from equiquench.errors import NegativeTime, NoOverlap
from equiquench.lindblad import (
    build_superoperator,
    decompose,
    decompose_system,
    deviations,
    propagate,
    propagate_expm,
    slowest_relevant_mode,
)
from equiquench.system import CoherentInitialSpec, LevelSystem, coherent_state, thermal_state


def test_two_level_superoperator_matches_hand_derived_matrix():
    omega, beta, g, delta = 1.3, 0.8, 0.7, 0.25
    s = LevelSystem.two_level(omega, beta, g, delta)
    g10 = g * math.exp(-beta * omega)
    k = (g + g10) / 2 + delta
    expected = np.array([
        [-g, 0, 0, g10],
        [0, -1j * omega - k, 0, 0],
        [0, 0, 1j * omega - k, 0],
        [g, 0, 0, -g10],
    ])
    assert np.allclose(build_superoperator(s).matrix, expected, atol=1e-15)


def test_two_level_spectrum():
    s = LevelSystem.two_level(1.0, 1.0, 1.0)
    lam = decompose_system(s).eigenvalues
    pop = -(1 + math.exp(-1))
    assert np.allclose(sorted(lam, key=lambda z: (z.real, z.imag)),
                       [pop, pop / 2 - 1j, pop / 2 + 1j, 0], atol=1e-12)


def test_stationary_state_is_gibbs():
    s = LevelSystem.three_level((0.0, 0.7, 2.0), 0.9, 1.0, 0.4, 1.3)
    dec = decompose_system(s)
    assert np.allclose(dec.stationary_state, np.asarray(thermal_state(s)), atol=1e-13)


def test_left_right_biorthonormal():
    dec = decompose_system(LevelSystem.three_level())
    gram = np.einsum("aij,bji->ab", dec.left, dec.right)
    assert np.allclose(gram, np.eye(9), atol=1e-10)


def test_negative_time_rejected():
    dec = decompose_system(LevelSystem.two_level())
    with pytest.raises(NegativeTime):
        deviations(dec, np.eye(2) / 2, [-1.0])


def test_equilibrium_has_no_deviation():
    s = LevelSystem.three_level()
    dec = decompose_system(s)
    d = deviations(dec, thermal_state(s), [0.0, 1.0, 10.0])
    assert np.max(np.abs(d)) < 1e-15


@pytest.mark.parametrize("n", [2, 3, 4])
def test_spectral_matches_expm(rng, n):
    energies = np.sort(rng.uniform(0, 2, n))
    rates = {(i, j): rng.uniform(0.2, 2) for i in range(n) for j in range(i + 1, n)}
    s = LevelSystem(tuple(energies), rates, 1.1)
    sop = build_superoperator(s)
    dec = decompose(sop)
    rho0 = random_density(rng, n)
    for t in (0.0, 0.3, 2.0, 7.5):
        assert np.allclose(np.asarray(propagate(dec, rho0, t)), propagate_expm(sop, rho0, t),
                           atol=1e-12)


def _three_level(x, y, beta):
    return LevelSystem.three_level((0.0, 1.0, 2.0), beta, 1.0, x, y)


@given(st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0.2, 2), st.floats(0, 5), st.floats(0, 5))
def test_semigroup(x, y, beta, t, s):
    system = _three_level(x, y, beta)
    dec = decompose_system(system)
    rho0 = np.asarray(thermal_state(system, 3.0))
    both = np.asarray(propagate(dec, rho0, t + s))
    twice = np.asarray(propagate(dec, np.asarray(propagate(dec, rho0, s)), t))
    assert np.allclose(both, twice, atol=1e-12)


@given(st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0.2, 2), st.floats(0, 20),
       st.integers(0, 2**32 - 1))
def test_trace_and_positivity_preserved(x, y, beta, t, seed):
    system = _three_level(x, y, beta)
    dec = decompose_system(system)
    rho0 = random_density(np.random.default_rng(seed), 3)
    rho = np.asarray(propagate(dec, rho0, t))
    assert abs(np.trace(rho) - 1) < 1e-12
    assert np.linalg.eigvalsh(rho)[0] > -1e-12


@given(st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0.2, 2))
def test_detailed_balance_stationary(x, y, beta):
    system = _three_level(x, y, beta)
    eq = np.asarray(thermal_state(system))
    assert np.max(np.abs(build_superoperator(system).apply(eq))) < 1e-14


def test_slowest_mode_thermal_vs_coherent():
    s = LevelSystem.two_level(1.0, 1.0, 1.0)
    dec = decompose_system(s)
    pop = -(1 + math.exp(-1))
    thermal = slowest_relevant_mode(dec, thermal_state(s, 2.0))
    assert thermal.eigenvalue == pytest.approx(pop)
    coherent = slowest_relevant_mode(dec, coherent_state(s, CoherentInitialSpec(1.0, 0.2)))
    assert coherent.eigenvalue.real == pytest.approx(pop / 2)
    assert len(coherent.eigenvalues) == 2


def test_slowest_mode_needs_overlap():
    s = LevelSystem.two_level()
    with pytest.raises(NoOverlap):
        slowest_relevant_mode(decompose_system(s), thermal_state(s))

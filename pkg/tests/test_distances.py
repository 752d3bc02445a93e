import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_density
from equiquench.distances import (
    Measure,
    distance,
    distance_from_deviation,
    initial_distance,
    kl_coherence_split,
)
from equiquench.errors import DimensionMismatch, ValidationError
from equiquench.lindblad import decompose_system, deviations
from equiquench.system import LevelSystem, thermal_state


def _naive(rho, sigma, m):
    def logm(a):
        w, u = np.linalg.eigh(a)
        return (u * np.log(np.clip(w, 1e-300, None))) @ u.conj().T

    def rel(a, b):
        return np.trace(a @ (logm(a) - logm(b))).real

    if m is Measure.TRACE:
        return 0.5 * np.sum(np.abs(np.linalg.eigvalsh(rho - sigma)))
    if m is Measure.KL:
        return rel(rho, sigma)
    if m is Measure.REVKL:
        return rel(sigma, rho)
    return 0.5 * (rel(rho, sigma) + rel(sigma, rho))


def test_measure_parsing():
    assert Measure.parse("KL") is Measure.KL
    assert Measure.parse_list("kl, trace") == [Measure.KL, Measure.TRACE]
    with pytest.raises(ValidationError):
        Measure.parse("hellinger")


def test_classical_kl_value():
    p, q = np.array([0.3, 0.7]), np.array([0.5, 0.5])
    expected = float(np.sum(p * np.log(p / q)))
    assert distance(np.diag(p), np.diag(q), "kl") == pytest.approx(expected, rel=1e-14)
    assert distance(np.diag(p), np.diag(q), "revkl") == pytest.approx(
        float(np.sum(q * np.log(q / p))), rel=1e-14)
    assert distance(np.diag(p), np.diag(q), "trace") == pytest.approx(0.2)


@pytest.mark.parametrize("m", list(Measure))
def test_against_naive_formula_for_generic_states(rng, m):
    for _ in range(5):
        rho, sigma = random_density(rng, 3), random_density(rng, 3)
        assert distance(rho, sigma, m) == pytest.approx(_naive(rho, sigma, m), rel=1e-9, abs=1e-12)


def test_zero_at_equal_states(rng):
    rho = random_density(rng, 3)
    for m in Measure:
        assert distance(rho, rho, m) == 0.0


def test_infinite_divergences():
    pure = np.diag([1.0, 0.0])
    mixed = np.eye(2) / 2
    assert distance(pure, mixed, "kl") == pytest.approx(math.log(2))
    assert distance(pure, mixed, "revkl") == math.inf
    assert distance(pure, mixed, "symkl") == math.inf
    assert distance(mixed, pure, "kl") == math.inf


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        distance(np.eye(2) / 2, np.eye(3) / 3, "kl")


def test_small_deviation_keeps_relative_precision():
    # KL ~ delta^2 / (2 q0 q1) with delta far below machine epsilon of rho itself
    q = np.array([0.25, 0.75])
    delta = 1e-9
    value = distance_from_deviation(np.diag([delta, -delta]), np.diag(q), "kl")
    assert value == pytest.approx(delta**2 / 2 * (1 / q[0] + 1 / q[1]), rel=1e-8)


def test_small_coherent_deviation_keeps_relative_precision():
    s = LevelSystem.two_level(1.0, 1.0)
    eq = np.asarray(thermal_state(s))
    eps = 1e-8
    d = np.array([[0, eps], [eps, 0]], dtype=complex)
    q1, q0 = eq[0, 0].real, eq[1, 1].real
    expected = eps**2 * math.log(q0 / q1) / (q0 - q1)
    assert distance_from_deviation(d, eq, "kl") == pytest.approx(expected, rel=1e-6)


@given(st.floats(0.0, 5.0), st.floats(0.1, 3.0))
def test_pinsker(beta0, beta):
    s = LevelSystem.three_level((0.0, 1.0, 2.0), beta)
    rho, eq = thermal_state(s, beta0), thermal_state(s)
    assert distance(rho, eq, "kl") >= 2 * distance(rho, eq, "trace") ** 2 - 1e-15


@given(st.integers(0, 2**32 - 1))
def test_pinsker_generic(seed):
    rng = np.random.default_rng(seed)
    rho, sigma = random_density(rng, 3), random_density(rng, 3)
    assert distance(rho, sigma, "kl") >= 2 * distance(rho, sigma, "trace") ** 2 - 1e-12


@given(st.floats(-math.pi, math.pi), st.floats(0.0, 0.4))
def test_phase_invariance(phi, r):
    s = LevelSystem.two_level(1.0, 1.0)
    eq = thermal_state(s)
    q = np.asarray(eq).diagonal().real
    r = min(r, 0.99 * math.sqrt(q[0] * q[1]))
    base = np.diag(q).astype(complex)
    for m in Measure:
        a = base.copy()
        a[0, 1], a[1, 0] = r, r
        b = base.copy()
        b[0, 1], b[1, 0] = r * np.exp(1j * phi), r * np.exp(-1j * phi)
        assert distance(a, eq, m) == pytest.approx(distance(b, eq, m), rel=1e-10, abs=1e-15)


@given(st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0, 4), st.floats(0.01, 5))
def test_distances_decrease_along_relaxation(x, y, beta0, dt):
    s = LevelSystem.three_level((0.0, 1.0, 2.0), 1.0, 1.0, x, y)
    dec = decompose_system(s)
    eq = np.asarray(thermal_state(s))
    d = deviations(dec, thermal_state(s, beta0), [0.5, 0.5 + dt])
    for m in Measure:
        before = distance_from_deviation(d[0], eq, m)
        after = distance_from_deviation(d[1], eq, m)
        assert after <= before * (1 + 1e-12) + 1e-300


@given(st.floats(0.0, 0.9), st.floats(-math.pi, math.pi))
def test_coherent_states_relax_monotonically(frac, phi):
    from equiquench.system import CoherentInitialSpec, coherent_state, coherence_bound

    s = LevelSystem.two_level(1.0, 1.0, 1.0, 0.3)
    rho0 = coherent_state(s, CoherentInitialSpec(0.5, frac * coherence_bound(s, 0.5), phi))
    dec = decompose_system(s)
    eq = np.asarray(thermal_state(s))
    d = deviations(dec, rho0, np.linspace(0, 6, 13))
    for m in Measure:
        vals = [distance_from_deviation(x, eq, m) for x in d]
        assert all(b <= a * (1 + 1e-10) for a, b in zip(vals, vals[1:]))


def test_coherence_split_at_bath_temperature():
    s = LevelSystem.two_level(1.0, 1.0)
    eq = np.asarray(thermal_state(s))
    rho = eq.copy()
    rho[0, 1] = rho[1, 0] = 0.2
    coherence, diagonal = kl_coherence_split(rho, eq)
    assert diagonal == 0.0
    assert coherence == pytest.approx(distance(rho, eq, "kl"), rel=1e-12)


def test_coherence_split_sums_to_kl(rng):
    s = LevelSystem.three_level()
    eq = np.asarray(thermal_state(s))
    rho = random_density(rng, 3)
    coherence, diagonal = kl_coherence_split(rho, eq)
    assert coherence + diagonal == pytest.approx(distance(rho, eq, "kl"), rel=1e-10)
    assert coherence >= 0


def test_initial_distance_monotone_away_from_bath():
    s = LevelSystem.three_level()
    for m in Measure:
        hot = [initial_distance(s, m, b) for b in np.linspace(0, 1, 21)]
        cold = [initial_distance(s, m, b) for b in np.linspace(1, 10, 21)]
        assert all(a >= b for a, b in zip(hot, hot[1:]))
        assert all(a <= b for a, b in zip(cold, cold[1:]))

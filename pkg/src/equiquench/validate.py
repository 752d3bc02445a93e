"""Oracle suites run by ``equiquench validate``.

Each suite compares the spectral propagator against an independent
reference (closed-form two-level solution, scipy's matrix exponential, the
Gibbs state) or checks a structural property of the dynamics.  Random draws
come from a seeded generator, so the report is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analytic2
from .distances import Measure, distance_from_deviation
from .lindblad import build_superoperator, decompose, deviations, propagate_expm
from .quench import find_equidistant_pair
from .system import LevelSystem, thermal_populations, thermal_state

ORACLE_TOL = 1e-10


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<28} max_err={self.max_error:.3e}  tol={self.tolerance:.0e}  {self.detail}"


def random_two_level(rng: np.random.Generator) -> analytic2.TwoLevelParams:
    omega0 = rng.uniform(0.2, 3.0)
    beta = rng.uniform(0.1, 3.0)
    beta0 = rng.uniform(0.0, 5.0)
    p = analytic2.TwoLevelParams(omega0=omega0, beta=beta, beta0=beta0,
                                 gamma01=rng.uniform(0.1, 2.0),
                                 dephasing=rng.uniform(0.0, 2.0),
                                 phi=rng.uniform(-math.pi, math.pi))
    r_max = math.sqrt(np.prod(thermal_populations((0.0, omega0), beta0)))
    return p.replace(r=rng.uniform(0.0, 1.0) * r_max)


def random_system(rng: np.random.Generator, n: int = 3) -> LevelSystem:
    energies = np.sort(rng.uniform(0.0, 3.0, n))
    rates = {(i, j): rng.uniform(0.1, 2.0) for i in range(n) for j in range(i + 1, n)}
    return LevelSystem(tuple(energies), rates, rng.uniform(0.1, 3.0))


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def analytic_vs_spectral(rng, draws: int = 100, n_times: int = 5) -> SuiteResult:
    """Two-level spectral and expm propagation against the closed form."""
    worst = 0.0
    for _ in range(draws):
        p = random_two_level(rng)
        system = p.system()
        sop = build_superoperator(system)
        dec = decompose(sop)
        rho0 = np.asarray(p.initial_state())
        eq = np.asarray(thermal_state(system))
        times = rng.uniform(0.0, 10.0, n_times)
        spec = deviations(dec, rho0, times)
        for t, d in zip(times, spec):
            exact = analytic2.closed_form_deviation(p, t)
            worst = max(worst, float(np.max(np.abs(d - exact))),
                        float(np.max(np.abs(propagate_expm(sop, rho0, t) - eq - exact))))
    return SuiteResult("analytic_vs_spectral", worst <= ORACLE_TOL, worst, ORACLE_TOL,
                       f"{draws} draws x {n_times} times")


def spectral_vs_expm(rng, draws: int = 30, n_times: int = 5) -> SuiteResult:
    """Three- and four-level spectral propagation against the matrix exponential."""
    worst = 0.0
    for k in range(draws):
        system = random_system(rng, 3 + k % 2)
        sop = build_superoperator(system)
        dec = decompose(sop)
        eq = np.asarray(thermal_state(system))
        rho0 = random_state(rng, system.n)
        times = rng.uniform(0.0, 10.0, n_times)
        for t, d in zip(times, deviations(dec, rho0, times)):
            worst = max(worst, float(np.max(np.abs(eq + d - propagate_expm(sop, rho0, t)))))
    return SuiteResult("spectral_vs_expm", worst <= ORACLE_TOL, worst, ORACLE_TOL,
                       f"{draws} systems x {n_times} times")


def trace_symmetry(rng=None, n_times: int = 50) -> SuiteResult:
    """Equidistant thermal two-level states relax symmetrically in trace distance."""
    system = LevelSystem.two_level(1.0, 1.0)
    pair = find_equidistant_pair(system, Measure.TRACE, 0.1)
    dec = decompose(build_superoperator(system))
    eq = np.asarray(thermal_state(system))
    times = np.linspace(0.0, 20.0, n_times)
    cold = deviations(dec, thermal_state(system, pair.beta0_cold), times)
    hot = deviations(dec, thermal_state(system, pair.beta0_hot), times)
    worst = max(abs(distance_from_deviation(c, eq, Measure.TRACE)
                    - distance_from_deviation(h, eq, Measure.TRACE)) for c, h in zip(cold, hot))
    return SuiteResult("trace_symmetry", worst <= ORACLE_TOL, worst, ORACLE_TOL,
                       f"trace pair ({pair.beta0_hot:.4f}, {pair.beta0_cold:.4f}), {n_times} times")


def semigroup(rng, draws: int = 20) -> SuiteResult:
    """rho(t + s) equals rho(s) propagated for t."""
    worst = 0.0
    for k in range(draws):
        system = random_system(rng, 2 + k % 3)
        dec = decompose(build_superoperator(system))
        eq = np.asarray(thermal_state(system))
        rho0 = random_state(rng, system.n)
        t, s = rng.uniform(0.0, 5.0, 2)
        both = eq + deviations(dec, rho0, [t + s])[0]
        mid = eq + deviations(dec, rho0, [s])[0]
        twice = eq + deviations(dec, mid, [t])[0]
        worst = max(worst, float(np.max(np.abs(both - twice))))
    return SuiteResult("semigroup", worst <= ORACLE_TOL, worst, ORACLE_TOL, f"{draws} systems")


def trace_and_positivity(rng, draws: int = 20, n_times: int = 10) -> SuiteResult:
    """Unit trace and non-negative spectrum along random trajectories."""
    worst = 0.0
    for k in range(draws):
        system = random_system(rng, 2 + k % 3)
        dec = decompose(build_superoperator(system))
        eq = np.asarray(thermal_state(system))
        rho0 = random_state(rng, system.n)
        for d in deviations(dec, rho0, rng.uniform(0.0, 10.0, n_times)):
            rho = eq + d
            worst = max(worst, abs(np.trace(rho).real - 1.0),
                        max(0.0, -float(np.linalg.eigvalsh(rho)[0])))
    return SuiteResult("trace_and_positivity", worst <= ORACLE_TOL, worst, ORACLE_TOL,
                       f"{draws} systems x {n_times} times")


def stationary_is_gibbs(rng, draws: int = 20) -> SuiteResult:
    """The zero mode of a detailed-balanced generator is the bath Gibbs state."""
    worst = 0.0
    for k in range(draws):
        system = random_system(rng, 2 + k % 4)
        dec = decompose(build_superoperator(system))
        worst = max(worst, float(np.max(np.abs(dec.stationary_state - np.asarray(thermal_state(system))))))
    return SuiteResult("stationary_is_gibbs", worst <= ORACLE_TOL, worst, ORACLE_TOL, f"{draws} systems")


SUITES: tuple[Callable[[np.random.Generator], SuiteResult], ...] = (
    analytic_vs_spectral,
    spectral_vs_expm,
    trace_symmetry,
    semigroup,
    trace_and_positivity,
    stationary_is_gibbs,
)


def run_validation(seed: int = 0) -> list[SuiteResult]:
    # one generator per suite keeps each suite's draws independent of the others
    return [suite(np.random.default_rng([seed, k])) for k, suite in enumerate(SUITES)]


def format_report(results: list[SuiteResult]) -> str:
    lines = [r.line() for r in results]
    ok = sum(r.passed for r in results)
    lines.append(f"{ok}/{len(results)} suites passed")
    return "\n".join(lines)

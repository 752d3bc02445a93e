"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py`` for the bare report.
"""

import math
import time

import numpy as np
import pytest

from equiquench import analytic2
from equiquench.distances import Measure, distance, distance_from_deviation
from equiquench.lindblad import build_superoperator, decompose, deviations, propagate_expm
from equiquench.phasemap import SweepSpec, sweep
from equiquench.quench import (
    VerdictKind,
    classify,
    coherent_partner,
    find_equidistant_pair,
    regime_report,
)
from equiquench.system import CoherentInitialSpec, LevelSystem, coherent_state, thermal_state

TOL = 5e-3


def close(value, expected, tol=TOL):
    return abs(value - expected) <= tol


def c01_two_level_kl_pair():
    start = time.perf_counter()
    pair = find_equidistant_pair(LevelSystem.two_level(1.0, 1.0), Measure.KL, 0.1)
    secs = time.perf_counter() - start
    ok = close(pair.beta0_hot, 0.084) and close(pair.beta0_cold, 2.306) and secs < 1
    return ok, f"pair=({pair.beta0_hot:.5f}, {pair.beta0_cold:.5f}) in {secs:.3f}s"


def c02_coherent_partner():
    start = time.perf_counter()
    r = coherent_partner(LevelSystem.two_level(1.0, 1.0), Measure.KL, 0.1)
    secs = time.perf_counter() - start
    return close(r, 0.210) and secs < 1, f"r={r:.5f} in {secs:.3f}s"


def c03_three_level_pairs():
    start = time.perf_counter()
    s = LevelSystem.three_level()
    kl = find_equidistant_pair(s, Measure.KL, 0.1)
    tr = find_equidistant_pair(s, Measure.TRACE, 0.1)
    secs = time.perf_counter() - start
    ok = (close(kl.beta0_hot, 0.40) and close(kl.beta0_cold, 1.90)
          and close(tr.beta0_hot, 0.67) and close(tr.beta0_cold, 1.40) and secs < 1)
    return ok, (f"kl=({kl.beta0_hot:.4f}, {kl.beta0_cold:.4f}) "
                f"trace=({tr.beta0_hot:.4f}, {tr.beta0_cold:.4f}) in {secs:.3f}s")


def c04_region_cells():
    start = time.perf_counter()
    up, down = VerdictKind.UPHILL_FASTER, VerdictKind.DOWNHILL_FASTER
    expected = {(0.0, 1.0): (up, up), (2.0, 0.0): (down, down), (1.1, 1.5): (up, down)}
    ref = LevelSystem.three_level()
    pairs = {m: find_equidistant_pair(ref, m, 0.1) for m in (Measure.KL, Measure.TRACE)}
    got = {}
    for (x, y) in expected:
        s = LevelSystem.three_level((0.0, 1.0, 2.0), 1.0, 1.0, x, y)
        got[(x, y)] = tuple(classify(s, pairs[m], t_eval=10.0).kind for m in pairs)
    secs = time.perf_counter() - start
    ok = got == expected and secs < 5
    detail = " ".join(f"({x:g},{y:g})={a.value}/{b.value}" for (x, y), (a, b) in got.items())
    return ok, f"{detail} in {secs:.3f}s"


def c05_trace_symmetry():
    s = LevelSystem.two_level(1.0, 1.0)
    pair = find_equidistant_pair(s, Measure.TRACE, 0.1)
    dec = decompose(build_superoperator(s))
    eq = np.asarray(thermal_state(s))
    times = np.linspace(0.0, 20.0, 50)
    cold = deviations(dec, thermal_state(s, pair.beta0_cold), times)
    hot = deviations(dec, thermal_state(s, pair.beta0_hot), times)
    worst = max(abs(distance_from_deviation(c, eq, "trace") - distance_from_deviation(h, eq, "trace"))
                for c, h in zip(cold, hot))
    return worst <= 1e-10, f"max |D_cold - D_hot| = {worst:.2e} over 50 times"


def c06_three_way_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        omega0, beta, beta0 = rng.uniform(0.2, 3), rng.uniform(0.1, 3), rng.uniform(0, 5)
        q = analytic2.thermal_populations((0.0, omega0), beta0)
        p = analytic2.TwoLevelParams(
            omega0=omega0, beta=beta, beta0=beta0, gamma01=rng.uniform(0.1, 2),
            dephasing=rng.uniform(0, 2), phi=rng.uniform(-math.pi, math.pi),
            r=rng.uniform(0, 1) * math.sqrt(q[0] * q[1]))
        sop = build_superoperator(p.system())
        dec = decompose(sop)
        rho0 = np.asarray(p.initial_state())
        eq = np.asarray(thermal_state(p.system()))
        times = rng.uniform(0, 10, 5)
        for t, d in zip(times, deviations(dec, rho0, times)):
            closed = eq + analytic2.closed_form_deviation(p, t)
            spectral = eq + d
            expm = propagate_expm(sop, rho0, t)
            worst = max(worst, np.max(np.abs(spectral - closed)), np.max(np.abs(expm - closed)),
                        np.max(np.abs(spectral - expm)))
    secs = time.perf_counter() - start
    return worst <= 1e-10 and secs < 10, f"max entrywise diff {worst:.2e} (500 points) in {secs:.2f}s"


def c07_gamma_decreasing():
    grid = [b for b in np.linspace(0.05, 3.0, 200) if abs(b - 1.0) > 1e-12]
    vals = [analytic2.gamma_prefactor(b, 1.0) for b in grid]
    ok = all(a > b for a, b in zip(vals, vals[1:]))
    return ok, f"{len(vals)} points, gamma from {vals[0]:.4f} to {vals[-1]:.4f}"


def _distances_at(p, m, states):
    s = p.system()
    dec = decompose(build_superoperator(s))
    eq = np.asarray(thermal_state(s))
    return {k: distance_from_deviation(deviations(dec, coherent_state(s, CoherentInitialSpec(b, r)),
                                                  [10.0])[0], eq, m)
            for k, (b, r) in states.items()}


def c08_regimes():
    p = analytic2.TwoLevelParams()
    s = p.system()
    pair = find_equidistant_pair(s, Measure.KL, 0.1)
    r = coherent_partner(s, Measure.KL, 0.1)
    states = {"hot": (pair.beta0_hot, 0.0), "cold": (pair.beta0_cold, 0.0), "coherent": (1.0, r)}
    below = _distances_at(p, Measure.KL, states)
    ok_below = min(below, key=below.get) == "cold"
    dephased = p.replace(dephasing=2 * analytic2.delta_critical(p))
    above = {}
    for m in (Measure.KL, Measure.TRACE):
        pm = find_equidistant_pair(s, m, 0.1)
        rm = coherent_partner(s, m, 0.1)
        d = _distances_at(dephased, m, {"hot": (pm.beta0_hot, 0.0), "cold": (pm.beta0_cold, 0.0),
                                        "coherent": (1.0, rm)})
        above[m.value] = min(d, key=d.get)
    ok_above = above == {"kl": "coherent", "trace": "coherent"}
    # the regime report must agree with the direct comparison
    rep = regime_report(p, 0.1, Measure.KL)
    ok = ok_below and ok_above and rep.agrees
    return ok, f"Delta=0 KL fastest={min(below, key=below.get)}; Delta=2Dc fastest={above}"


def c09_property_suite():
    rng = np.random.default_rng(9)
    failures = []
    for _ in range(30):
        n = int(rng.integers(2, 5))
        energies = np.sort(rng.uniform(0, 3, n))
        rates = {(i, j): rng.uniform(0.1, 2) for i in range(n) for j in range(i + 1, n)}
        s = LevelSystem(tuple(energies), rates, rng.uniform(0.1, 3))
        sop = build_superoperator(s)
        dec = decompose(sop)
        eq = np.asarray(thermal_state(s))
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        rho0 = g @ g.conj().T
        rho0 /= np.trace(rho0).real
        t, u = rng.uniform(0, 5, 2)
        d_t, d_tu = deviations(dec, rho0, [t, t + u])
        rho_t = eq + d_t
        if abs(np.trace(rho_t) - 1) > 1e-12:
            failures.append("trace")
        if np.linalg.eigvalsh(rho_t)[0] < -1e-12:
            failures.append("positivity")
        if np.max(np.abs(eq + deviations(dec, rho_t, [u])[0] - (eq + d_tu))) > 1e-12:
            failures.append("semigroup")
        for m in Measure:
            if distance_from_deviation(d_tu, eq, m) > distance_from_deviation(d_t, eq, m) * (1 + 1e-12):
                failures.append(f"monotone-{m.value}")
        if distance(rho0, eq, "kl") < 2 * distance(rho0, eq, "trace") ** 2 - 1e-12:
            failures.append("pinsker")
        if np.max(np.abs(sop.apply(eq))) > 1e-13:
            failures.append("stationarity")
    two = LevelSystem.two_level(1.0, 1.0, 1.0, 0.2)
    eq2 = thermal_state(two)
    for phi in np.linspace(-math.pi, math.pi, 9):
        a = coherent_state(two, CoherentInitialSpec(0.7, 0.15, 0.0))
        b = coherent_state(two, CoherentInitialSpec(0.7, 0.15, phi))
        for m in Measure:
            if not math.isclose(distance(a, eq2, m), distance(b, eq2, m), rel_tol=1e-10):
                failures.append(f"phi-{m.value}")
    return not failures, "30 random systems + phase scan" + (f"; failed {sorted(set(failures))}"
                                                             if failures else "")


def c10_full_sweep():
    start = time.perf_counter()
    per = sweep(SweepSpec(), jobs=1)
    fixed = sweep(SweepSpec(fixed_pair=Measure.KL), jobs=1)
    secs = time.perf_counter() - start
    fixed2 = sweep(SweepSpec(fixed_pair=Measure.KL), jobs=2)
    identical = (fixed.to_csv() == fixed2.to_csv()
                 and fixed.boundaries_to_csv() == fixed2.boundaries_to_csv())
    u = fixed.unanimity()
    ok = secs < 600 and identical and u > 0.95 and len(per.cells) == 61 * 61
    return ok, (f"61x61 x 4 measures, both pairings in {secs:.1f}s; jobs 1 vs 2 identical={identical}; "
                f"fixed-pair unanimity={u:.5f}")


CRITERIA = [
    c01_two_level_kl_pair, c02_coherent_partner, c03_three_level_pairs, c04_region_cells,
    c05_trace_symmetry, c06_three_way_oracle, c07_gamma_decreasing, c08_regimes,
    c09_property_suite, c10_full_sweep,
]


def _report(fn):
    ok, detail = fn()
    return ok, f"{'PASS' if ok else 'FAIL'} {fn.__name__}: {detail}"


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f.__name__ for f in CRITERIA])
def test_criterion(criterion, capsys):
    ok, line = _report(criterion)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [_report(fn) for fn in CRITERIA]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(ok for ok, _ in results) else 1)

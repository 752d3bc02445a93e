"""Equidistant initial states, their relaxation, and the uphill/downhill verdict."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import analytic2
from .distances import Measure, distance, distance_from_deviation, initial_distance
from .errors import (
    NoColdPartner,
    NoHotPartner,
    NotBracketed,
    NumericalError,
    ValidationError,
)
from .lindblad import SpectralDecomposition, decompose_system, deviations
from .system import (
    CoherentInitialSpec,
    DensityMatrix,
    LevelSystem,
    coherence_bound,
    coherent_state,
    thermal_state,
)

DEFAULT_T_EVAL = 10.0  # in units of 1/gamma01
DEFAULT_SYM_TOL = 1e-6
COLD_CAP = 50.0
PAIR_FTOL = 1e-13
PAIR_RESIDUAL = 1e-9


def bisect(f: Callable[[float], float], lo: float, hi: float, ftol: float,
           max_iter: int = 200) -> float:
    """Root of ``f`` in ``[lo, hi]`` given ``f(lo)`` and ``f(hi)`` of opposite sign."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NotBracketed(f"no sign change on [{lo!r}, {hi!r}]")
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= ftol or mid in (lo, hi):
            break
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return mid


@dataclass(frozen=True)
class EquidistantPair:
    measure: Measure
    target: float
    beta0_cold: float
    beta0_hot: float
    distance_cold: float
    distance_hot: float


def find_equidistant_pair(system: LevelSystem, m: Measure | str, target: float,
                          ftol: float = PAIR_FTOL, cold_cap: float = COLD_CAP) -> EquidistantPair:
    """Thermal initial temperatures on either side of the bath at distance ``target``.

    Each side is solved by bisection, relying on the initial distance being
    monotone in ``beta0`` away from ``beta``.  The hot side is searched on
    ``[0, beta]``; the cold side bracket doubles from ``2 beta`` up to
    ``cold_cap * beta``.
    """
    m = Measure.parse(m)
    beta = system.beta
    if not (math.isfinite(target) and target >= 0):
        raise ValidationError(f"target distance must be finite and >= 0, got {target!r}")
    if target == 0:
        return EquidistantPair(m, 0.0, beta, beta, 0.0, 0.0)
    if beta <= 0:
        raise NoHotPartner("the bath is at infinite temperature; no hotter thermal state exists")

    def excess(b0: float) -> float:
        return initial_distance(system, m, b0) - target

    hot_limit = excess(0.0) + target
    if hot_limit < target:
        raise NoHotPartner(
            f"NoHotPartner: target {target!r} exceeds the hot-side maximum {hot_limit!r}")
    hi = 2 * beta
    while excess(hi) < 0:
        if hi >= cold_cap * beta:
            cold_limit = excess(hi) + target
            raise NoColdPartner(
                f"NoColdPartner: target {target!r} exceeds the cold-side value "
                f"{cold_limit!r} reached at beta0 = {hi!r}")
        hi = min(2 * hi, cold_cap * beta)

    hot = bisect(excess, 0.0, beta, ftol)
    cold = bisect(excess, beta, hi, ftol)
    d_hot, d_cold = excess(hot) + target, excess(cold) + target
    if max(abs(d_hot - target), abs(d_cold - target)) > PAIR_RESIDUAL:
        raise NumericalError("equidistant pair did not converge")
    return EquidistantPair(m, float(target), cold, hot, d_cold, d_hot)


def coherence_locus(system: LevelSystem, m: Measure | str, target: float,
                    beta0_grid: Iterable[float], ftol: float = 1e-12) -> list[tuple[float, float]]:
    """Points ``(beta0, r)`` of two-level states at distance ``target``.

    For each ``beta0`` whose thermal state is not already farther than
    ``target``, the coherence ``r`` is found by bisection on
    ``[0, r_max(beta0)]``; grid points where even the pure state falls
    short are left out.  The phase is fixed to zero.
    """
    m = Measure.parse(m)
    if system.n != 2:
        raise ValidationError("the coherence locus is defined for two-level systems")
    eq = thermal_state(system)
    out = []
    for b0 in beta0_grid:
        b0 = float(b0)

        def excess(r: float) -> float:
            return distance(coherent_state(system, CoherentInitialSpec(b0, r)), eq, m) - target

        d0 = excess(0.0)
        if d0 > 0:
            continue
        if d0 == 0:
            out.append((b0, 0.0))
            continue
        r_max = coherence_bound(system, b0)
        if excess(r_max) < 0:
            continue
        out.append((b0, bisect(excess, 0.0, r_max, ftol)))
    return out


def coherent_partner(system: LevelSystem, m: Measure | str, target: float,
                     beta0: float | None = None) -> float:
    """Coherence ``r`` that puts the state at ``beta0`` (default: the bath)
    at distance ``target``."""
    b0 = system.beta if beta0 is None else beta0
    pts = coherence_locus(system, m, target, [b0])
    if not pts:
        raise ValidationError(f"no coherent state at beta0={b0!r} reaches distance {target!r}")
    return pts[0][1]


@dataclass
class QuenchRecord:
    """Distance from equilibrium along one relaxation trajectory."""

    times: np.ndarray  # physical time, ascending
    distances: np.ndarray
    measure: Measure
    label: str = ""
    time_unit_rate: float = 1.0

    @property
    def t_gamma01(self) -> np.ndarray:
        return self.times * self.time_unit_rate

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t_gamma01", "distance"])
        for t, d in zip(self.t_gamma01, self.distances):
            writer.writerow([format(float(t), ".17g"), format(float(d), ".17g")])
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text)
        return text


def quench_times(t_max: float, samples: int) -> np.ndarray:
    """``t = 0`` followed by ``samples`` geometrically spaced times up to ``t_max``."""
    if not t_max > 0:
        raise ValidationError("t_max must be positive")
    if samples < 2:
        raise ValidationError("samples must be >= 2")
    return np.concatenate([[0.0], np.geomspace(t_max / 1e3, t_max, samples)])


def distances_along(dec: SpectralDecomposition, rho_eq, rho0, times: Sequence[float],
                    m: Measure) -> np.ndarray:
    devs = deviations(dec, rho0, times)
    return np.array([distance_from_deviation(d, rho_eq, m) for d in devs])


def run_quench(system: LevelSystem, rho0, m: Measure | str, t_max: float, samples: int = 200,
               label: str = "", dec: SpectralDecomposition | None = None) -> QuenchRecord:
    """Relax ``rho0`` towards the bath state and record ``D(rho(t) || rho_eq)``.

    ``t_max`` is a physical time (divide by ``system.time_unit_rate`` to
    convert from units of 1/gamma01).
    """
    m = Measure.parse(m)
    dec = dec or decompose_system(system)
    times = quench_times(t_max, samples)
    dists = distances_along(dec, np.asarray(thermal_state(system)), np.asarray(rho0), times, m)
    return QuenchRecord(times, dists, m, label, system.time_unit_rate)


class VerdictKind(str, enum.Enum):
    UPHILL_FASTER = "UphillFaster"
    DOWNHILL_FASTER = "DownhillFaster"
    SYMMETRIC = "Symmetric"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    t_eval: float
    gap: float  # D_downhill(t_eval) - D_uphill(t_eval)
    d_uphill: float
    d_downhill: float


def judge(d_up: float, d_down: float, t_eval: float, sym_tol: float = DEFAULT_SYM_TOL) -> Verdict:
    if math.isinf(d_up) and math.isinf(d_down):
        return Verdict(VerdictKind.SYMMETRIC, t_eval, 0.0, d_up, d_down)
    gap = d_down - d_up
    scale = max(d_down, d_up, 1e-300)
    if abs(gap) <= sym_tol * scale:
        kind = VerdictKind.SYMMETRIC
    elif gap > 0:
        kind = VerdictKind.UPHILL_FASTER
    else:
        kind = VerdictKind.DOWNHILL_FASTER
    return Verdict(kind, t_eval, gap, d_up, d_down)


def classify(system: LevelSystem, pair: EquidistantPair, m_eval: Measure | str | None = None,
             t_eval: float | None = None, sym_tol: float = DEFAULT_SYM_TOL,
             dec: SpectralDecomposition | None = None) -> Verdict:
    """Compare uphill (cold start) and downhill (hot start) relaxation at ``t_eval``.

    ``t_eval`` is a physical time and defaults to ``10 / gamma01``.  The
    evaluation measure may differ from the one that fixed the pair.
    """
    m = Measure.parse(m_eval if m_eval is not None else pair.measure)
    if t_eval is None:
        t_eval = DEFAULT_T_EVAL / system.time_unit_rate
    if not t_eval > 0:
        raise ValidationError("t_eval must be positive")
    dec = dec or decompose_system(system)
    eq = np.asarray(thermal_state(system))
    d_up = distances_along(dec, eq, thermal_state(system, pair.beta0_cold), [t_eval], m)[0]
    d_down = distances_along(dec, eq, thermal_state(system, pair.beta0_hot), [t_eval], m)[0]
    return judge(float(d_up), float(d_down), t_eval, sym_tol)


@dataclass
class RegimeReport:
    """Which equidistant two-level state relaxes fastest, predicted and simulated."""

    measure: Measure
    target: float
    dephasing: float
    delta_c: float
    regime: str  # "below", "critical" or "above"
    candidates: dict[str, tuple[float, float]]  # label -> (beta0, r)
    predicted: set[str]
    simulated: dict[str, float] = field(default_factory=dict)
    fastest: set[str] = field(default_factory=set)
    t_eval: float = DEFAULT_T_EVAL

    @property
    def agrees(self) -> bool:
        return bool(self.fastest) and self.fastest <= self.predicted


def _locus_optimum(p: analytic2.TwoLevelParams, m: Measure, target: float,
                   pair: EquidistantPair) -> tuple[float, float]:
    system = p.system()

    def r_of(b0: float) -> float:
        pts = coherence_locus(system, m, target, [b0])
        return pts[0][1] if pts else 0.0

    def combined(b0: float) -> float:
        return (analytic2.population_prefactor(b0, p.beta, p.omega0)
                + analytic2.coherence_prefactor(r_of(b0), p.beta, p.omega0))

    res = minimize_scalar(combined, bounds=(pair.beta0_hot, pair.beta0_cold),
                          method="bounded", options={"xatol": 1e-9})
    best = min([(combined(b), b) for b in (pair.beta0_hot, pair.beta0_cold, float(res.x))])[1]
    return best, r_of(best)


def regime_report(p: analytic2.TwoLevelParams, target: float, m: Measure | str = Measure.KL,
                  t_eval: float = DEFAULT_T_EVAL, tie_tol: float = DEFAULT_SYM_TOL) -> RegimeReport:
    """Predict the fastest-relaxing equidistant state from the dephasing regime
    and check the prediction against simulated quenches at ``t_eval`` (in
    units of 1/gamma01).

    Candidates are the hot and cold thermal states, the coherent state at
    the bath temperature and, at the critical dephasing under KL, the locus
    point minimising the summed late-time prefactor.
    """
    m = Measure.parse(m)
    if m not in (Measure.KL, Measure.TRACE):
        raise ValidationError("regime predictions exist for the kl and trace measures only")
    system = p.system()
    dc = analytic2.delta_critical(p)
    if abs(p.dephasing - dc) <= 1e-9 * dc:
        regime = "critical"
    elif p.dephasing < dc:
        regime = "below"
    else:
        regime = "above"

    pair = find_equidistant_pair(system, m, target)
    r_coh = coherent_partner(system, m, target)
    candidates = {
        "hot_thermal": (pair.beta0_hot, 0.0),
        "cold_thermal": (pair.beta0_cold, 0.0),
        "coherent": (p.beta, r_coh),
    }
    if m is Measure.KL:
        predicted = {"below": {"cold_thermal"}, "above": {"coherent"}}.get(regime)
        if regime == "critical":
            candidates["prefactor_optimal"] = _locus_optimum(p, m, target, pair)
            predicted = {"prefactor_optimal"}
    else:
        predicted = {"below": {"hot_thermal", "cold_thermal"}, "above": {"coherent"},
                     "critical": set(candidates)}[regime]

    dec = decompose_system(system)
    eq = np.asarray(thermal_state(system))
    t_phys = t_eval / system.time_unit_rate
    simulated = {}
    for label, (b0, r) in candidates.items():
        rho0 = coherent_state(system, CoherentInitialSpec(b0, r))
        simulated[label] = float(distances_along(dec, eq, rho0, [t_phys], m)[0])
    best = min(simulated.values())
    fastest = {k for k, v in simulated.items() if v <= best * (1 + tie_tol)}
    # a candidate coinciding with the predicted optimum counts as the optimum
    if "prefactor_optimal" in candidates:
        opt = candidates["prefactor_optimal"]
        for label, c in candidates.items():
            if np.allclose(c, opt, atol=1e-6):
                predicted = predicted | {label}
    return RegimeReport(m, target, p.dephasing, dc, regime, candidates, predicted,
                        simulated, fastest, t_eval)

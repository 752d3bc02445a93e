"""Closed-form results for the dissipative two-level system.

Everything here is written out by hand and never calls the spectral
propagator, so it doubles as an independent oracle for :mod:`lindblad`.

Notation: ``omega0`` level splitting, ``beta`` bath inverse temperature,
``beta0`` inverse temperature of the initial populations, ``r``/``phi``
modulus and phase of the initial coherence, ``gamma01`` emission rate,
``dephasing`` the pure-dephasing strength.  The populations relax at
``gamma01 (1 + exp(-beta omega0))`` and the coherence at half that plus
``dephasing``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegeneratePoint, NegativeTime, ValidationError
from .system import (
    CoherentInitialSpec,
    DensityMatrix,
    LevelSystem,
    coherent_state,
    thermal_populations,
)


@dataclass(frozen=True)
class TwoLevelParams:
    omega0: float = 1.0
    beta: float = 1.0
    beta0: float = 1.0
    r: float = 0.0
    phi: float = 0.0
    gamma01: float = 1.0
    dephasing: float = 0.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValidationError("omega0 must be positive")
        if not self.gamma01 > 0:
            raise ValidationError("gamma01 must be positive")
        if self.dephasing < 0:
            raise ValidationError("dephasing must be >= 0")

    def system(self) -> LevelSystem:
        return LevelSystem.two_level(self.omega0, self.beta, self.gamma01, self.dephasing)

    def initial_state(self) -> DensityMatrix:
        return coherent_state(self.system(), CoherentInitialSpec(self.beta0, self.r, self.phi))

    def replace(self, **changes) -> "TwoLevelParams":
        return replace(self, **changes)

    @property
    def population_rate(self) -> float:
        return self.gamma01 * (1 + math.exp(-self.beta * self.omega0))

    @property
    def coherence_rate(self) -> float:
        return 0.5 * self.population_rate + self.dephasing


def _excited(beta: float, omega0: float) -> float:
    return float(thermal_populations((0.0, omega0), beta)[1])


def _population_offset(beta0: float, beta: float, omega0: float) -> float:
    """Initial excess of the excited-state population over equilibrium."""
    return _excited(beta0, omega0) - _excited(beta, omega0)


def closed_form_deviation(p: TwoLevelParams, t: float) -> np.ndarray:
    """``rho(t) - rho_eq`` (highest level first)."""
    if t < 0:
        raise NegativeTime("time must be >= 0")
    dp = _population_offset(p.beta0, p.beta, p.omega0) * math.exp(-p.population_rate * t)
    c = p.r * np.exp(1j * p.phi - (p.coherence_rate + 1j * p.omega0) * t)
    return np.array([[dp, c], [np.conj(c), -dp]], dtype=complex)


def closed_form_state(p: TwoLevelParams, t: float) -> DensityMatrix:
    """Exact ``rho(t)`` from the initial state of ``p``."""
    q1 = _excited(p.beta, p.omega0)
    eq = np.diag([q1, 1 - q1]).astype(complex)
    return DensityMatrix(eq + closed_form_deviation(p, t), tol=1e-8)


def kl_initial(beta0: float, beta: float, omega0: float = 1.0) -> float:
    """KL divergence of the Gibbs state at ``beta0`` from the one at ``beta``,
    written out in terms of Boltzmann factors (finite ``beta0`` only)."""
    a = math.exp(beta0 * omega0)
    b = math.exp(beta * omega0)
    num = (-a * math.log(b / (b + 1)) + math.log((b + 1) / (a + 1))
           + a * math.log(a / (a + 1)))
    return num / (a + 1)


def kl_limit_hot(beta: float, omega0: float = 1.0) -> float:
    """``beta0 -> 0`` limit of :func:`kl_initial`."""
    b = beta * omega0
    return 0.5 * (math.log1p(math.exp(b)) + math.log1p(math.exp(-b)) - 2 * math.log(2))


def kl_limit_cold(beta: float, omega0: float = 1.0) -> float:
    """``beta0 -> inf`` limit of :func:`kl_initial`."""
    return math.log1p(math.exp(-beta * omega0))


def population_prefactor(beta0: float, beta: float, omega0: float = 1.0) -> float:
    """Amplitude of the ``exp(-2 t gamma01 (1 + e^{-beta omega0}))`` term of the
    late-time KL divergence: ``dp^2 / (2 q0 q1)`` for population offset ``dp``
    and equilibrium populations ``q0``, ``q1``."""
    dp = _population_offset(beta0, beta, omega0)
    q1 = _excited(beta, omega0)
    return dp * dp / (2 * q1 * (1 - q1))


def coherence_prefactor(r: float, beta: float, omega0: float = 1.0) -> float:
    """Amplitude of the coherence term, ``beta omega0 r^2 coth(beta omega0 / 2)``."""
    x = beta * omega0
    if x == 0:
        return 2 * r * r
    return x * r * r / math.tanh(x / 2)


def kl_asymptotic(p: TwoLevelParams, t: float) -> float:
    """Two-term late-time approximation of ``KL(rho(t) || rho_eq)``."""
    pop = population_prefactor(p.beta0, p.beta, p.omega0) * math.exp(-2 * p.population_rate * t)
    coh = coherence_prefactor(p.r, p.beta, p.omega0) * math.exp(-2 * p.coherence_rate * t)
    return pop + coh


def gamma_prefactor(beta0: float, beta: float, omega0: float = 1.0) -> float:
    """Late-time amplitude of the normalised KL curve ``KL(t)/KL(0)`` for a
    thermal initial state.  Undefined (0/0) at ``beta0 == beta``."""
    if abs(beta0 - beta) <= 1e-12 * max(1.0, abs(beta)):
        raise DegeneratePoint("gamma prefactor is 0/0 at beta0 == beta")
    return population_prefactor(beta0, beta, omega0) / kl_initial(beta0, beta, omega0)


def delta_critical(p: TwoLevelParams) -> float:
    """Dephasing at which coherence and population terms decay equally fast."""
    return 0.5 * p.population_rate


def trace_closed_form(p: TwoLevelParams, t: float) -> float:
    """Trace distance to equilibrium at time ``t``."""
    if t < 0:
        raise NegativeTime("time must be >= 0")
    dp = _population_offset(p.beta0, p.beta, p.omega0)
    return math.sqrt(p.r**2 * math.exp(-2 * p.coherence_rate * t)
                     + dp * dp * math.exp(-2 * p.population_rate * t))


@dataclass(frozen=True)
class EquidistantLimits:
    limit_hot: float
    limit_cold: float
    pair_guaranteed_up_to: float
    cold_le_hot: bool  # holds iff beta omega0 / 2 >= log 2


def equidistant_existence(beta: float, omega0: float = 1.0) -> EquidistantLimits:
    """Largest KL divergence reachable by a thermal state on each side of ``beta``."""
    if not (beta > 0 and omega0 > 0):
        raise ValidationError("beta and omega0 must be positive")
    hot = kl_limit_hot(beta, omega0)
    cold = kl_limit_cold(beta, omega0)
    return EquidistantLimits(hot, cold, min(hot, cold), cold <= hot)

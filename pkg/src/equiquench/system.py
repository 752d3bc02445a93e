"""Physical model: level structure, detailed-balanced rates, initial states.

Units are hbar = k_B = 1.  Levels are labelled ``0 .. N-1`` by ascending
energy.  Matrices are written in the basis ``(|N-1>, ..., |1>, |0>)``, i.e.
highest level first; for a two-level system this is the ``(|u+>, |u->)``
basis, so a density matrix reads ``[[rho_11, rho_10], [rho_01, rho_00]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import (
    CoherenceBoundViolated,
    DisconnectedRates,
    ValidationError,
    ZeroFrequency,
)

MAX_LEVELS = 9
STATE_TOL = 1e-10


def _parse_rate_key(key) -> tuple[int, int]:
    if isinstance(key, str):
        parts = key.split("-")
        if len(parts) != 2:
            raise ValidationError(f"rate key {key!r} must look like 'i-j'")
        try:
            key = (int(parts[0]), int(parts[1]))
        except ValueError:
            raise ValidationError(f"rate key {key!r} must look like 'i-j'") from None
    i, j = (int(k) for k in key)
    if not i < j:
        raise ValidationError(f"rate key ({i}, {j}) requires i < j")
    return i, j


@dataclass(frozen=True)
class LevelSystem:
    """Few-level system coupled to a thermal bath.

    ``rates[(i, j)]`` with ``i < j`` is the downward rate for the jump
    ``j -> i`` (jump operator ``|i><j|``).  Upward rates are never stored;
    they follow from detailed balance.
    """

    energies: tuple[float, ...]
    rates: Mapping[tuple[int, int], float]
    beta: float
    dephasing: float = 0.0
    _rate_matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        energies = tuple(float(e) for e in self.energies)
        n = len(energies)
        if not 2 <= n <= MAX_LEVELS:
            raise ValidationError(f"level count must be in [2, {MAX_LEVELS}], got {n}")
        if not all(math.isfinite(e) for e in energies):
            raise ValidationError("energies must be finite")
        if any(b < a for a, b in zip(energies, energies[1:])):
            raise ValidationError("energies must be listed in ascending order")
        beta = float(self.beta)
        if not (math.isfinite(beta) and beta >= 0):
            raise ValidationError(f"beta must be finite and >= 0, got {self.beta!r}")
        dephasing = float(self.dephasing)
        if not (math.isfinite(dephasing) and dephasing >= 0):
            raise ValidationError(f"dephasing must be finite and >= 0, got {self.dephasing!r}")
        if dephasing > 0 and n != 2:
            raise ValidationError("dephasing is only defined for two-level systems")

        rates: dict[tuple[int, int], float] = {}
        for key, value in dict(self.rates).items():
            i, j = _parse_rate_key(key)
            if j >= n:
                raise ValidationError(f"rate ({i}, {j}) refers to a level >= {n}")
            value = float(value)
            if not (math.isfinite(value) and value >= 0):
                raise ValidationError(f"rate ({i}, {j}) must be finite and >= 0")
            rates[(i, j)] = value

        w = np.zeros((n, n))
        for (i, j), g in rates.items():
            w[i, j] = g
            w[j, i] = g * math.exp(-beta * (energies[j] - energies[i]))
        _check_connected(w)

        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "dephasing", dephasing)
        object.__setattr__(self, "rates", MappingProxyType(dict(sorted(rates.items()))))
        w.flags.writeable = False
        object.__setattr__(self, "_rate_matrix", w)

    @property
    def n(self) -> int:
        return len(self.energies)

    def rate(self, i: int, j: int) -> float:
        """Rate of the jump ``j -> i`` (either direction)."""
        return float(self._rate_matrix[i, j])

    def rate_matrix(self) -> np.ndarray:
        """``W[i, j]`` = rate of ``j -> i``, indexed by level label."""
        return self._rate_matrix.copy()

    @property
    def time_unit_rate(self) -> float:
        """Gamma_01, the rate that sets the time unit (1 if it is zero)."""
        g = self.rates.get((0, 1), 0.0)
        return g if g > 0 else 1.0

    def index(self, level: int) -> int:
        """Matrix row/column of a level label."""
        return self.n - 1 - level

    def hamiltonian(self) -> np.ndarray:
        return np.diag(np.array(self.energies[::-1], dtype=complex))

    def with_rates(self, rates: Mapping) -> "LevelSystem":
        return LevelSystem(self.energies, rates, self.beta, self.dephasing)

    def with_dephasing(self, dephasing: float) -> "LevelSystem":
        return LevelSystem(self.energies, self.rates, self.beta, dephasing)

    @property
    def omega0(self) -> float:
        """Level splitting of a two-level system."""
        if self.n != 2:
            raise ValidationError("omega0 is only defined for two-level systems")
        return self.energies[1] - self.energies[0]

    @classmethod
    def two_level(cls, omega0: float = 1.0, beta: float = 1.0, gamma01: float = 1.0,
                  dephasing: float = 0.0) -> "LevelSystem":
        return cls((-omega0 / 2, omega0 / 2), {(0, 1): gamma01}, beta, dephasing)

    @classmethod
    def three_level(cls, energies=(0.0, 1.0, 2.0), beta: float = 1.0, gamma01: float = 1.0,
                    gamma02: float = 1.0, gamma12: float = 1.0) -> "LevelSystem":
        rates = {(0, 1): gamma01, (0, 2): gamma02, (1, 2): gamma12}
        return cls(tuple(energies), rates, beta)

    @classmethod
    def from_json(cls, data: Mapping) -> "LevelSystem":
        """Build from ``{"levels": [...], "beta": x, "rates": {"0-1": g, ...},
        "dephasing": d}``."""
        try:
            levels = data["levels"]
            beta = data["beta"]
            rates = data["rates"]
        except KeyError as exc:
            raise ValidationError(f"system description is missing key {exc.args[0]!r}") from None
        if not isinstance(rates, Mapping):
            raise ValidationError("'rates' must be an object keyed by 'i-j'")
        return cls(tuple(levels), {_parse_rate_key(k): v for k, v in rates.items()},
                   beta, data.get("dephasing", 0.0))

    def to_json(self) -> dict:
        return {
            "levels": list(self.energies),
            "beta": self.beta,
            "rates": {f"{i}-{j}": g for (i, j), g in self.rates.items()},
            "dephasing": self.dephasing,
        }


def _check_connected(w: np.ndarray) -> None:
    n = w.shape[0]
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(n):
            if j not in seen and (w[i, j] > 0 or w[j, i] > 0):
                seen.add(j)
                stack.append(j)
    if len(seen) != n:
        missing = sorted(set(range(n)) - seen)
        raise DisconnectedRates(f"levels {missing} are not connected to level 0 by any rate")


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix (immutable)."""

    __slots__ = ("_m",)

    def __init__(self, matrix, validate: bool = True, tol: float = STATE_TOL):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"density matrix must be square, got shape {m.shape}")
        if validate:
            defect = float(np.max(np.abs(m - m.conj().T)))
            if defect > tol:
                raise ValidationError(f"density matrix not Hermitian (defect {defect:.2e})")
            tr = np.trace(m).real
            if abs(tr - 1) > tol:
                raise ValidationError(f"density matrix trace is {tr!r}, not 1")
            lo = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
            if lo < -tol:
                raise ValidationError(f"density matrix has negative eigenvalue {lo:.3e}")
        m.flags.writeable = False
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    def populations(self) -> np.ndarray:
        """Level populations ordered by level label 0..N-1."""
        return self._m.diagonal().real[::-1].copy()

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix({np.array2string(self._m, precision=6)})"


def thermal_populations(energies, beta: float) -> np.ndarray:
    """Gibbs weights ``exp(-beta e_i)/Z`` by level label.

    ``beta = +inf`` gives the (possibly degenerate) ground level and
    ``beta = -inf`` the top level.  Evaluation is done in the log domain.
    """
    e = np.asarray(energies, dtype=float)
    if math.isnan(beta):
        raise ValidationError("beta is NaN")
    if math.isinf(beta):
        target = e.min() if beta > 0 else e.max()
        w = (e == target).astype(float)
    else:
        logw = -beta * e
        w = np.exp(logw - logw.max())
    return w / w.sum()


def thermal_state(system: LevelSystem, beta_any: float | None = None) -> DensityMatrix:
    """Gibbs state of ``system`` at inverse temperature ``beta_any``
    (the bath temperature when omitted)."""
    beta = system.beta if beta_any is None else float(beta_any)
    p = thermal_populations(system.energies, beta)
    return DensityMatrix(np.diag(p[::-1]).astype(complex), validate=False)


@dataclass(frozen=True)
class CoherentInitialSpec:
    beta0: float
    r: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if math.isnan(self.beta0):
            raise ValidationError("beta0 is NaN")
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ValidationError(f"coherence r must be finite and >= 0, got {self.r!r}")
        if not math.isfinite(self.phi):
            raise ValidationError("phase phi must be finite")


def coherence_bound(system: LevelSystem, beta0: float) -> float:
    """Largest coherence ``r`` keeping the two-level state positive."""
    if system.n != 2:
        raise ValidationError("coherent states are defined for two-level systems only")
    p = thermal_populations(system.energies, beta0)
    return math.sqrt(p[0] * p[1])


def coherent_state(system: LevelSystem, spec: CoherentInitialSpec) -> DensityMatrix:
    """Two-level state with thermal populations at ``beta0`` and
    off-diagonal element ``r e^{i phi}`` in the upper-right corner."""
    r_max = coherence_bound(system, spec.beta0)
    if spec.r > r_max * (1 + 1e-12) + 1e-15:
        raise CoherenceBoundViolated(spec.r, r_max)
    p = thermal_populations(system.energies, spec.beta0)
    c = spec.r * complex(math.cos(spec.phi), math.sin(spec.phi))
    m = np.array([[p[1], c], [c.conjugate(), p[0]]], dtype=complex)
    return DensityMatrix(m, validate=False)


def dipole_rates(amplitude: float, omega0: float, beta: float) -> tuple[float, float]:
    """Emission and absorption rates for dipole coupling to a thermal field.

    Returns ``(gamma01, gamma10)`` with ``gamma10 = exp(-beta |omega0|) gamma01``.
    """
    if omega0 == 0:
        raise ZeroFrequency("dipole rates need a nonzero level splitting")
    if not amplitude > 0:
        raise ValidationError("dipole amplitude must be positive")
    if not beta > 0:
        raise ValidationError("beta must be positive")
    w = abs(omega0)
    boltz = math.exp(-beta * w)
    gamma01 = amplitude * w**3 / -math.expm1(-beta * w)
    return gamma01, boltz * gamma01

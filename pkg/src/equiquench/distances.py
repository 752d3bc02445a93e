"""Distances from equilibrium: KL divergence, trace distance, the reversed
and the symmetrised KL divergence.

Near equilibrium the KL-type divergences are second order in the deviation
``delta = rho - rho_eq`` while ``Tr rho log rho`` and ``Tr rho log rho_eq``
are each of order one, so naive evaluation loses everything to
cancellation.  The functions here therefore work from ``delta``:

* when ``delta`` commutes with a diagonal ``rho_eq`` the classical sums are
  rewritten as ``sum q f(delta/q)`` with ``f`` expanded in series for small
  arguments;
* otherwise the divergence is evaluated in extended precision (mpmath) on
  ``rho_eq + delta``.
"""

from __future__ import annotations

import enum
import math
from typing import Iterable

import mpmath
import numpy as np

from .errors import DimensionMismatch, ValidationError
from .numkernel import ZERO_CLAMP, trace_norm_hermitian
from .system import DensityMatrix, LevelSystem, thermal_state

INFINITE_DIVERGENCE = math.inf
_SERIES_CUTOFF = 0.05
_SERIES_TERMS = 24
_MP_DIGITS = 40
_COMMUTE_TOL = 1e-13


class Measure(str, enum.Enum):
    KL = "kl"
    TRACE = "trace"
    REVKL = "revkl"
    SYMKL = "symkl"

    @classmethod
    def parse(cls, name) -> "Measure":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValidationError(f"unknown measure {name!r} (expected one of {names})") from None

    @classmethod
    def parse_list(cls, text: str) -> list["Measure"]:
        return [cls.parse(part) for part in text.split(",") if part.strip()]


ALL_MEASURES = tuple(Measure)


def _series(x: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    # sum_k coeffs[k] x^(k+2), Horner form
    acc = np.zeros_like(x)
    for c in coeffs[::-1]:
        acc = acc * x + c
    return acc * x * x


_N = np.arange(2, 2 + _SERIES_TERMS)
_SIGN = (-1.0) ** _N
_PHI_COEFFS = _SIGN / (_N * (_N - 1.0))
_PSI_COEFFS = _SIGN / _N


def _phi(x: np.ndarray) -> np.ndarray:
    """(1+x) log(1+x) - x, with 0 log 0 = 0 at x = -1."""
    out = np.empty_like(x)
    small = np.abs(x) < _SERIES_CUTOFF
    out[small] = _series(x[small], _PHI_COEFFS)
    big = x[~small]
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(big <= -1.0, 1.0, (1 + big) * np.log1p(np.maximum(big, -1.0)) - big)
    out[~small] = val
    return out


def _psi(x: np.ndarray) -> np.ndarray:
    """x - log(1+x); +inf at x = -1."""
    out = np.empty_like(x)
    small = np.abs(x) < _SERIES_CUTOFF
    out[small] = _series(x[small], _PSI_COEFFS)
    big = x[~small]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[~small] = np.where(big <= -1.0, np.inf, big - np.log1p(np.maximum(big, -1.0)))
    return out


def _classical(p_dev: np.ndarray, q: np.ndarray, m: Measure) -> float:
    if m is Measure.TRACE:
        return 0.5 * float(np.sum(np.abs(p_dev)))
    p = q + p_dev
    support = q > 0
    if np.any(~support & (p > ZERO_CLAMP)):
        # rho puts weight where rho_eq has none
        if m is not Measure.REVKL:
            return INFINITE_DIVERGENCE
    qs, ds = q[support], p_dev[support]
    x = ds / qs
    x = np.where(qs + ds <= ZERO_CLAMP, -1.0, x)
    kl = rev = 0.0
    if m in (Measure.KL, Measure.SYMKL):
        kl = float(np.sum(qs * _phi(x)))
    if m in (Measure.REVKL, Measure.SYMKL):
        rev = float(np.sum(qs * _psi(x)))
    if m is Measure.KL:
        return max(kl, 0.0)
    if m is Measure.REVKL:
        return max(rev, 0.0)
    return max(0.5 * (kl + rev), 0.0)


def _mp_divergence(rho_eq: np.ndarray, delta: np.ndarray, m: Measure) -> float:
    n = rho_eq.shape[0]
    with mpmath.workdps(_MP_DIGITS):
        sigma = mpmath.matrix(rho_eq.tolist())
        rho = sigma + mpmath.matrix(delta.tolist())
        for i in range(n):
            for j in range(i + 1, n):
                rho[j, i] = mpmath.conj(rho[i, j])
                sigma[j, i] = mpmath.conj(sigma[i, j])
            rho[i, i] = mpmath.re(rho[i, i])
            sigma[i, i] = mpmath.re(sigma[i, i])
        mu, u = mpmath.mp.eighe(rho)
        nu, v = mpmath.mp.eighe(sigma)
        mu = [mpmath.re(x) for x in mu]
        nu = [mpmath.re(x) for x in nu]
        clamp = mpmath.mpf(ZERO_CLAMP)

        def relative(a_vals, a_vecs, b_vals, b_vecs):
            # Tr A (log A - log B) with 0 log 0 = 0
            s = mpmath.mpf(0)
            for a in a_vals:
                if a > clamp:
                    s += a * mpmath.log(a)
            # Tr A log B = sum_k log b_k <b_k|A|b_k>
            a_mat = a_vecs * mpmath.diag(a_vals) * a_vecs.H
            for k, b in enumerate(b_vals):
                col = b_vecs[:, k]
                w = mpmath.re((col.H * a_mat * col)[0])
                if b > clamp:
                    s -= w * mpmath.log(b)
                elif w > clamp:
                    return mpmath.inf
            return s

        if m is Measure.KL:
            val = relative(mu, u, nu, v)
        elif m is Measure.REVKL:
            val = relative(nu, v, mu, u)
        else:
            val = (relative(mu, u, nu, v) + relative(nu, v, mu, u)) / 2
        if val == mpmath.inf:
            return INFINITE_DIVERGENCE
        return max(float(val), 0.0)


def _offdiag_max(a: np.ndarray) -> float:
    off = a - np.diag(a.diagonal())
    return float(np.max(np.abs(off))) if off.size else 0.0


def distance_from_deviation(delta, rho_eq, m: Measure | str) -> float:
    """Distance of ``rho_eq + delta`` from ``rho_eq`` under measure ``m``."""
    m = Measure.parse(m)
    delta = np.asarray(delta, dtype=complex)
    sigma = np.asarray(rho_eq, dtype=complex)
    if delta.shape != sigma.shape:
        raise DimensionMismatch(f"shapes {delta.shape} and {sigma.shape} differ")
    delta = 0.5 * (delta + delta.conj().T)
    if not np.any(delta):
        return 0.0
    d_diag = delta.diagonal().real
    commuting = _offdiag_max(sigma) == 0.0 and (
        _offdiag_max(delta) <= _COMMUTE_TOL * float(np.max(np.abs(d_diag))))
    if m is Measure.TRACE:
        if commuting:
            return _classical(d_diag, sigma.diagonal().real, m)
        return 0.5 * trace_norm_hermitian(delta)
    if commuting:
        return _classical(d_diag, sigma.diagonal().real, m)
    return _mp_divergence(sigma, delta, m)


def distance(rho, rho_eq, m: Measure | str) -> float:
    """``D(rho || rho_eq)``; the reversed and symmetrised KL return
    ``inf`` when ``rho`` is singular on the support of ``rho_eq``."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(rho_eq, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"shapes {rho.shape} and {sigma.shape} differ")
    return distance_from_deviation(rho - sigma, sigma, m)


def kl_coherence_split(rho_hat, rho_eq) -> tuple[float, float]:
    """Split ``KL(rho_hat || rho_eq)`` into ``(coherence_part, diagonal_part)``.

    ``coherence_part = S[rho_diag] - S[rho_hat]`` (relative entropy of
    coherence) and ``diagonal_part = KL(rho_diag || rho_eq)``, where
    ``rho_diag`` keeps only the energy-basis populations of ``rho_hat``.
    """
    rho_hat = np.asarray(rho_hat, dtype=complex)
    sigma = np.asarray(rho_eq, dtype=complex)
    if rho_hat.shape != sigma.shape:
        raise DimensionMismatch(f"shapes {rho_hat.shape} and {sigma.shape} differ")
    if _offdiag_max(sigma) != 0.0:
        raise ValidationError("rho_eq must be diagonal in the energy basis")
    rho_diag = np.diag(rho_hat.diagonal().real).astype(complex)
    off = rho_hat - rho_diag
    coherence = 0.0 if not np.any(off) else _mp_divergence(rho_diag, off, Measure.KL)
    diagonal = distance_from_deviation(rho_diag - sigma, sigma, Measure.KL)
    return coherence, diagonal


def initial_distance(system: LevelSystem, m: Measure | str, beta0: float) -> float:
    """Distance of the Gibbs state at ``beta0`` from the bath Gibbs state."""
    eq = thermal_state(system)
    return distance(thermal_state(system, beta0), eq, m)


def initial_distance_curve(system: LevelSystem, m: Measure | str,
                           beta0_grid: Iterable[float]) -> list[tuple[float, float]]:
    m = Measure.parse(m)
    return [(float(b), initial_distance(system, m, b)) for b in beta0_grid]


def distance_to_equilibrium(system: LevelSystem, rho: DensityMatrix | np.ndarray,
                            m: Measure | str) -> float:
    return distance(rho, thermal_state(system), m)

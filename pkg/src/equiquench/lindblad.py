"""Lindblad generator, its spectral decomposition and exact propagation.

Density matrices are vectorised row-major in the highest-level-first
basis, so for two levels ``vec(rho) = [rho_11, rho_10, rho_01, rho_00]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import MultipleStationaryStates, NegativeTime, NoOverlap, NumericalError
from .numkernel import DEGENERACY_TOL, general_eig
from .system import DensityMatrix, LevelSystem

STATIONARY_TOL = 1e-10
OVERLAP_TOL = 1e-12
# Mode amplitudes below this fraction of the state norm are eigensolver
# round-off, not physics.
ROUNDOFF_OVERLAP = 1e-14


@dataclass(frozen=True)
class Superoperator:
    matrix: np.ndarray  # (N^2, N^2)
    n: int

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return (self.matrix @ rho.reshape(-1)).reshape(self.n, self.n)


def build_superoperator(system: LevelSystem) -> Superoperator:
    """Matrix of ``rho -> -i[H, rho] + sum_ij G_ij D[|i><j|] rho + dephasing``.

    Row-major vectorisation: ``rho[k, l]`` sits at ``k * n + l``.  Every
    term is diagonal in the energy basis apart from the population
    transfer ``L rho L^+``, so the matrix is filled entry by entry rather
    than through Kronecker products.
    """
    n = system.n
    e = np.array(system.energies[::-1])  # matrix order
    sop = np.diag((-1j * (e[:, None] - e[None, :])).reshape(-1)).astype(complex)
    diag = sop.reshape(-1)[:: n * n + 1]  # view onto the diagonal

    w = system.rate_matrix()
    for a in range(n):
        for b in range(n):
            g = w[a, b]
            if a == b or g == 0:
                continue
            ia, ib = system.index(a), system.index(b)
            # L rho L^+ moves rho[ib, ib] into rho[ia, ia]
            sop[ia * n + ia, ib * n + ib] += g
            # -1/2 {|ib><ib|, rho}
            diag[ib * n: (ib + 1) * n] -= 0.5 * g
            diag[ib:: n] -= 0.5 * g

    if system.dephasing:
        # -(dephasing/2)(1 - sz (x) sz) damps the two coherences by `dephasing`
        diag[1] -= system.dephasing
        diag[2] -= system.dephasing
    return Superoperator(matrix=sop, n=n)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenmodes of a Lindblad superoperator.

    ``right[k]`` and ``left[k]`` are N x N eigenmatrices normalised so that
    ``Tr(left[k] @ right[m]) = delta_km``.  The stationary right eigenmatrix
    has unit trace.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    stationary_index: int
    n: int

    @property
    def stationary_state(self) -> np.ndarray:
        v = self.right[self.stationary_index]
        return 0.5 * (v + v.conj().T)

    def overlaps(self, rho0) -> np.ndarray:
        """``Tr(rho0 V_k^L)`` for every mode; round-off-sized amplitudes are zeroed."""
        rho0 = np.asarray(rho0, dtype=complex)
        c = np.einsum("kij,ji->k", self.left, rho0)
        scale = np.max(np.abs(rho0))
        size = np.abs(c) * np.max(np.abs(self.right), axis=(1, 2))
        c[size <= ROUNDOFF_OVERLAP * scale] = 0.0
        return c


def decompose(sop: Superoperator, degeneracy_tol: float = DEGENERACY_TOL) -> SpectralDecomposition:
    eig = general_eig(sop.matrix, degeneracy_tol)
    lam = eig.eigenvalues
    n = sop.n
    stationary = np.flatnonzero(np.abs(lam) <= STATIONARY_TOL)
    if len(stationary) != 1:
        raise MultipleStationaryStates(
            f"expected one stationary mode, found {len(stationary)}")
    s = int(stationary[0])
    others = np.delete(lam.real, s)
    if np.any(others >= 0):
        raise NumericalError("non-stationary mode with non-negative real part")

    right = eig.right.T.reshape(-1, n, n).copy()
    # Tr(V^L X) = left_row . vec(X)  =>  V^L = reshape(left_row).T
    left = eig.left.reshape(-1, n, n).transpose(0, 2, 1).copy()
    tr = np.trace(right[s])
    right[s] /= tr
    left[s] *= tr
    lam = lam.copy()
    lam[s] = 0.0
    for arr in (lam, right, left):
        arr.flags.writeable = False
    return SpectralDecomposition(eigenvalues=lam, right=right, left=left,
                                 stationary_index=s, n=n)


def decompose_system(system: LevelSystem) -> SpectralDecomposition:
    return decompose(build_superoperator(system))


def deviations(dec: SpectralDecomposition, rho0, times) -> np.ndarray:
    """``rho(t) - rho_eq`` at each time, summed over the decaying modes only.

    Working with the deviation directly keeps full relative precision long
    after ``rho(t)`` itself has become indistinguishable from ``rho_eq`` in
    floating point.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise NegativeTime("propagation time must be >= 0")
    c = dec.overlaps(rho0)
    c[dec.stationary_index] = 0.0
    live = np.flatnonzero(c)
    if live.size == 0:
        return np.zeros((len(times), dec.n, dec.n), dtype=complex)
    amp = c[live][None, :] * np.exp(np.outer(times, dec.eigenvalues[live]))
    d = np.einsum("tk,kij->tij", amp, dec.right[live])
    return 0.5 * (d + d.conj().transpose(0, 2, 1))


def deviation(dec: SpectralDecomposition, rho0, t: float) -> np.ndarray:
    return deviations(dec, rho0, [t])[0]


def propagate(dec: SpectralDecomposition, rho0, t: float) -> DensityMatrix:
    """Exact ``exp(L t) rho0`` via the spectral expansion."""
    rho0 = np.asarray(rho0, dtype=complex)
    c_stat = np.einsum("ij,ji->", dec.left[dec.stationary_index], rho0)
    rho = c_stat * dec.right[dec.stationary_index] + deviation(dec, rho0, t)
    return DensityMatrix(0.5 * (rho + rho.conj().T), tol=1e-8)


def propagate_expm(sop: Superoperator, rho0, t: float) -> np.ndarray:
    """Reference propagation by dense matrix exponential (scaling and squaring)."""
    if t < 0:
        raise NegativeTime("propagation time must be >= 0")
    vec = scipy.linalg.expm(sop.matrix * t) @ np.asarray(rho0, dtype=complex).reshape(-1)
    return vec.reshape(sop.n, sop.n)


@dataclass(frozen=True)
class SlowMode:
    """Slowest decaying mode group that the initial state actually excites.

    ``eigenvalue`` is the representative (non-negative imaginary part);
    ``eigenvalues`` lists every member of the group, e.g. a conjugate pair.
    ``prefactor`` is the summed ``Tr(rho0 V^L) V^R`` of the group.
    """

    eigenvalue: complex
    eigenvalues: tuple[complex, ...]
    prefactor: np.ndarray


def slowest_relevant_mode(dec: SpectralDecomposition, rho0,
                          overlap_tol: float = OVERLAP_TOL) -> SlowMode:
    """Mode group governing the late-time approach of ``rho0`` to equilibrium.

    Modes are visited by descending real part; those whose contribution
    ``|Tr(rho0 V^L)| * max|V^R|`` is at most ``overlap_tol * max|rho0|`` are
    skipped.  Modes sharing the same decay rate are returned together.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    c = dec.overlaps(rho0)
    scale = np.max(np.abs(rho0))
    size = np.abs(c) * np.max(np.abs(dec.right), axis=(1, 2))
    lam = dec.eigenvalues
    order = [k for k in range(len(lam)) if k != dec.stationary_index]
    relevant = [k for k in order if size[k] > overlap_tol * scale]
    if not relevant:
        raise NoOverlap("initial state has no overlap with any decaying mode")
    rate = lam[relevant[0]].real
    group = [k for k in relevant if abs(lam[k].real - rate) <= DEGENERACY_TOL]
    pref = np.einsum("k,kij->ij", c[group], dec.right[group])
    pref = 0.5 * (pref + pref.conj().T)
    members = tuple(complex(lam[k]) for k in group)
    rep = max(members, key=lambda z: (z.imag >= 0, -abs(z.imag)))
    return SlowMode(eigenvalue=rep, eigenvalues=members, prefactor=pref)

"""Dense complex linear algebra shared by the rest of the package.

All routines are pure functions of their inputs and accept anything
:func:`numpy.asarray` understands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NegativeEigenvalue, NonDiagonalizable, NonSquare, NotHermitian

HERMITICITY_TOL = 1e-10
DEGENERACY_TOL = 1e-9
ZERO_CLAMP = 1e-14
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray  # real, ascending
    eigenvectors: np.ndarray  # orthonormal columns


@dataclass(frozen=True)
class GeneralEig:
    """Eigensystem of a diagonalizable matrix.

    ``right[:, n]`` is the n-th right eigenvector and ``left[n, :]`` the
    matching left eigenvector, with ``left @ right == I``.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray


def _square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NonSquare(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def hermiticity_defect(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def _hermitian(a, tol: float) -> np.ndarray:
    a = _square(a)
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NotHermitian(defect, tol)
    return 0.5 * (a + a.conj().T)


def hermitian_eig(a, hermiticity_tol: float = HERMITICITY_TOL) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix (ascending eigenvalues)."""
    h = _hermitian(a, hermiticity_tol)
    w, u = np.linalg.eigh(h)
    return HermitianEig(eigenvalues=w, eigenvectors=u)


def _spectral_order(values: np.ndarray, tol: float) -> np.ndarray:
    # Descending real part; real parts closer than tol count as ties and are
    # ordered by ascending imaginary part.
    order = np.argsort(-values.real, kind="stable")
    groups: list[list[int]] = []
    for idx in order:
        if groups and abs(values[groups[-1][0]].real - values[idx].real) <= tol:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    out = []
    for g in groups:
        out.extend(sorted(g, key=lambda k: values[k].imag))
    return np.array(out, dtype=int)


def general_eig(a, degeneracy_tol: float = DEGENERACY_TOL) -> GeneralEig:
    """Right and left eigenvectors of a general square matrix.

    The left eigenvectors are the rows of the inverse of the right
    eigenvector matrix, so biorthonormality holds by construction.
    Eigenvalues come sorted by descending real part.

    Raises
    ------
    NonDiagonalizable
        If the right eigenvector matrix has condition number above 1e12.
    """
    a = _square(a)
    w, v = np.linalg.eig(a)
    cond = np.linalg.cond(v)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise NonDiagonalizable(float(cond))
    order = _spectral_order(w, degeneracy_tol)
    w = w[order]
    v = v[:, order]
    return GeneralEig(eigenvalues=w, right=v, left=np.linalg.inv(v))


def matrix_log_psd(a, zero_clamp: float = ZERO_CLAMP,
                   hermiticity_tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Matrix logarithm of a positive semidefinite matrix.

    Eigenvalues below ``zero_clamp`` are left out of the reconstruction;
    the 0 log 0 = 0 convention is then applied by whoever takes the trace.
    """
    eig = hermitian_eig(a, hermiticity_tol)
    w, u = eig.eigenvalues, eig.eigenvectors
    if w[0] < -zero_clamp:
        raise NegativeEigenvalue(float(w[0]))
    keep = w >= zero_clamp
    logs = np.log(w[keep])
    uk = u[:, keep]
    return (uk * logs) @ uk.conj().T


def trace_norm_hermitian(a, hermiticity_tol: float = HERMITICITY_TOL) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    h = _hermitian(a, hermiticity_tol)
    return float(np.sum(np.abs(np.linalg.eigvalsh(h))))

"""Dense symmetric eigendecomposition, shifted solves, and spectral matrix functions.

Thin layer over LAPACK (numpy/scipy): the eigensolver is the exact
oracle, the complex shifted solves are the workhorse of every pole
expansion.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

__all__ = [
    "EigDecomposition",
    "check_symmetric",
    "sym_eig",
    "solve_shifted",
    "matrix_function",
]


class EigDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def check_symmetric(H: np.ndarray, rtol: float = 1e-14) -> np.ndarray:
    """Validate a real symmetric square matrix and return it as float64."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    scale = np.max(np.abs(H)) or 1.0
    if np.max(np.abs(H - H.T)) > rtol * scale:
        raise ValueError("matrix is not symmetric to tolerance")
    return H


def sym_eig(H: np.ndarray) -> EigDecomposition:
    """Full spectral decomposition of a real symmetric matrix.

    Eigenvalues ascending, eigenvectors orthonormal in columns.
    """
    H = check_symmetric(H)
    try:
        w, v = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"eigendecomposition failed: {exc}") from exc
    return EigDecomposition(eigenvalues=w, eigenvectors=v)


def solve_shifted(H: np.ndarray, xi: complex, rhs: np.ndarray) -> np.ndarray:
    """Solve (xi I - H) X = rhs for complex shift xi with Im xi != 0.

    A nonreal shift of a real symmetric matrix is always nonsingular.
    """
    if xi.imag == 0.0:
        raise ValueError("shift must have nonzero imaginary part")
    H = np.asarray(H, dtype=float)
    A = -H.astype(complex)
    np.fill_diagonal(A, xi - np.diagonal(H))
    return scipy.linalg.solve(A, np.asarray(rhs, dtype=complex))


def matrix_function(eig: EigDecomposition, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """V f(Lambda) V^T for a scalar function applied to the spectrum."""
    w, v = eig
    return (v * f(w)[None, :]) @ v.T

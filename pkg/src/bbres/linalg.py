"""Characteristic-polynomial invariants and the shared non-degeneracy test."""

from __future__ import annotations

import numpy as np

DEGENERATE_TOL = 1e-10


def faddeev_leverrier(matrix) -> np.ndarray:
    """Coefficients ``a_0..a_n`` of ``det(lambda I - A) = sum_k a_k lambda**(n-k)``.

    Uses the Faddeev-LeVerrier recursion ``M_1 = I``,
    ``a_k = -tr(A M_k) / k``, ``M_{k+1} = A M_k + a_k I``; no eigensolver
    is involved, so defective matrices are handled like any other.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = 1.0
    eye = np.eye(n, dtype=complex)
    m = eye
    for k in range(1, n + 1):
        am = a @ m
        coeffs[k] = -np.trace(am) / k
        m = am + coeffs[k] * eye
    return coeffs


def elementary_symmetric_invariants(matrix) -> np.ndarray:
    """``(c_1, ..., c_n)``: elementary symmetric functions of the eigenvalues.

    ``det(lambda I - J) = lambda**n - c_1 lambda**(n-1) + c_2 lambda**(n-2) - ...``
    and ``c_n = det J``.
    """
    a = faddeev_leverrier(matrix)
    k = np.arange(1, len(a))
    return a[1:] * (-1.0) ** k


def determinant(matrix) -> complex:
    return complex(elementary_symmetric_invariants(matrix)[-1])


def degeneracy_scale(matrix) -> float:
    """``(max row norm)**n``, the scale the determinant is compared against."""
    a = np.asarray(matrix, dtype=complex)
    return float(np.max(np.linalg.norm(a, axis=1)) ** a.shape[0])


def is_nondegenerate(matrix, tol: float = DEGENERATE_TOL) -> bool:
    """``|det J| > tol * (max row norm)**n``."""
    return abs(determinant(matrix)) > tol * degeneracy_scale(matrix)

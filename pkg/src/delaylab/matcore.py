"""Dense complex matrix primitives: eigenvalues, singular values, pseudo-inverse.

This module is the numerical oracle the rest of the package is checked
against.  Everything here goes through LAPACK's Hermitian eigensolver on a
Gram matrix rather than a general SVD driver, so the one routine whose
accuracy we depend on is the one with the cleanest backward-error story.

Functions
---------
as_complex_matrix      validate and cast input to a complex128 ndarray
hermitian_eigenvalues  ascending real eigenvalues of a Hermitian matrix
hermitian_eigensystem  eigenvalues plus an orthonormal eigenbasis
singular_values        descending singular values via the smaller Gram side
spectral_summary       extremal singular values, condition number, log-det
pseudo_inverse         Moore-Penrose inverse of a full-rank matrix
generalized_determinant  log of the product of singular values
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    NonFiniteError,
    NotHermitianError,
    RankDeficientError,
)

# Relative eigenvalue threshold below which a direction counts as null.
RANK_TOL_REL = 1e-12

# Hermitian deviation allowed, relative to the largest entry magnitude.
HERMITIAN_TOL_REL = 1e-12


def as_complex_matrix(entries) -> np.ndarray:
    """Validate an array-like as a finite 2-D complex matrix.

    Parameters
    ----------
    entries : array_like
        Anything numpy can coerce to a 2-D array.

    Returns
    -------
    numpy.ndarray
        A complex128 copy with shape (rows, cols).

    Raises
    ------
    DimensionMismatchError
        If the input is not two-dimensional or has a zero-length axis.
    NonFiniteError
        If any entry is NaN or infinite.
    """
    a = np.asarray(entries)
    if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
        raise DimensionMismatchError(
            f"expected a non-empty 2-D matrix, got shape {a.shape}"
        )
    a = a.astype(np.complex128, copy=True)
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise NonFiniteError("matrix contains NaN or Inf entries")
    return a


def _require_hermitian(a: np.ndarray) -> np.ndarray:
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"matrix is not square: shape {a.shape}")
    scale = np.max(np.abs(a)) if a.size else 0.0
    dev = np.max(np.abs(a - a.conj().T))
    if dev > HERMITIAN_TOL_REL * max(scale, 1e-300):
        raise NotHermitianError(
            f"Hermitian deviation {dev:.3e} exceeds {HERMITIAN_TOL_REL:.0e} * {scale:.3e}"
        )
    # Symmetrize so LAPACK sees an exactly Hermitian operand.
    return 0.5 * (a + a.conj().T)


def hermitian_eigenvalues(a) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, ascending.

    The input must satisfy max|A - A*| <= 1e-12 * max|A| entrywise; it is
    symmetrized before the solve so roundoff in the caller's construction
    cannot leak complex parts into the spectrum.
    """
    a = _require_hermitian(as_complex_matrix(a))
    return np.linalg.eigvalsh(a)


def hermitian_eigensystem(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Returns
    -------
    (vals, vecs)
        ``vals`` real ascending, ``vecs`` unitary with ``vecs[:, k]`` the
        eigenvector for ``vals[k]``.
    """
    a = _require_hermitian(as_complex_matrix(a))
    vals, vecs = np.linalg.eigh(a)
    return vals, vecs


def _gram_eigs(m: np.ndarray) -> np.ndarray:
    # Eigenvalues of the smaller of M M* and M* M, clipped at zero.
    if m.shape[0] <= m.shape[1]:
        g = m @ m.conj().T
    else:
        g = m.conj().T @ m
    g = 0.5 * (g + g.conj().T)
    return np.clip(np.linalg.eigvalsh(g), 0.0, None)


def singular_values(m) -> np.ndarray:
    """Singular values of a matrix, descending.

    Computed as square roots of the eigenvalues of the smaller Gram side,
    which keeps the eigenproblem Hermitian positive semi-definite and of
    size min(rows, cols).
    """
    m = as_complex_matrix(m)
    return np.sqrt(_gram_eigs(m))[::-1]


@dataclass(frozen=True)
class SpectralSummary:
    """Extremal spectral data of one matrix.

    Attributes
    ----------
    sigma : numpy.ndarray
        All min(rows, cols) singular values, descending.
    sigma_max, sigma_min : float
        First and last entries of ``sigma``.
    kappa : float
        sigma_max / sigma_min, or +inf when sigma_min is numerically zero.
    gen_det_log : float
        Sum of log(sigma_j) over values above the rank tolerance.
    rank_numeric : int
        Count of singular values above the rank tolerance.
    """

    sigma: np.ndarray = field(repr=False)
    sigma_max: float
    sigma_min: float
    kappa: float
    gen_det_log: float
    rank_numeric: int


def spectral_summary(m, rank_tol_rel: float = RANK_TOL_REL) -> SpectralSummary:
    """Summarize the singular spectrum of a matrix.

    kappa is +inf (not an error) when the matrix is numerically
    rank-deficient, so degenerate sweep cells stay recordable.
    """
    sigma = singular_values(m)
    smax = float(sigma[0])
    smin = float(sigma[-1])
    tol = rank_tol_rel * smax
    above = sigma[sigma > tol]
    kappa = smax / smin if smin > tol else math.inf
    gen_det_log = float(np.sum(np.log(above))) if above.size else -math.inf
    return SpectralSummary(
        sigma=sigma,
        sigma_max=smax,
        sigma_min=smin,
        kappa=kappa,
        gen_det_log=gen_det_log,
        rank_numeric=int(above.size),
    )


def pseudo_inverse(m, rank_tol_rel: float = RANK_TOL_REL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a full-rank matrix.

    For a wide matrix with full row rank this is M* (M M*)^{-1}, the
    operator that sends a right-hand side to the minimum-norm solution.
    Computed through the singular value decomposition so the residual of
    M @ pseudo_inverse(M) against the identity stays near machine
    precision even at large condition numbers.

    Raises
    ------
    RankDeficientError
        If the smallest singular value is at or below the rank tolerance
        relative to the largest.
    """
    m = as_complex_matrix(m)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s[0] == 0.0 or s[-1] <= rank_tol_rel * s[0]:
        raise RankDeficientError(
            f"sigma_min={s[-1]:.3e} at or below tolerance; pseudo-inverse unreliable"
        )
    return (vh.conj().T / s) @ u.conj().T


def generalized_determinant(m, rank_tol_rel: float = RANK_TOL_REL) -> float:
    """Log of the generalized determinant: sum of log singular values.

    Equals 0.5 * log|det(M M*)| for wide M; the same product-of-sigmas
    definition is applied to tall inputs so the reciprocal identity with
    the pseudo-inverse holds in both orientations.  Returns -inf when the
    matrix is numerically rank-deficient (the product is zero).
    """
    sigma = singular_values(m)
    if sigma[-1] <= rank_tol_rel * sigma[0]:
        return -math.inf
    return float(np.sum(np.log(sigma)))

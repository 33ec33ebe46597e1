"""Delay-embedding matrices of linear recurrences and their block structure.

A weight matrix W of size m and a lag depth n define a block-bidiagonal
delay matrix of shape (m*n, m*(n+1)) with identity blocks on the main
block diagonal and W on the first super-diagonal, plus its Gram matrix,
which is block-tridiagonal Toeplitz.  For Hermitian weights the Gram
splits, after a basis change and a perfect-shuffle permutation, into m
independent real tridiagonal Toeplitz operators; that factorization is
what makes the fast pseudo-inverse application possible.

The simulator path uses the sign convention with -W on the
super-diagonal (the form in which the recurrence stacks into a linear
system); all spectral quantities are invariant under that sign flip and
the analysis path builds the unsigned matrix.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .exceptions import (
    DimensionMismatchError,
    InvalidParamsError,
    NotHermitianError,
    OutOfBudgetError,
    RankDeficientError,
)
from .spectra import ToeplitzTriSpec, hermitian_gram_eigs

# Largest m*n for which dense delay/Gram matrices may be materialized.
DENSE_BUDGET = 512

_UNITARY_TOL = 1e-10


class WClass(enum.Enum):
    """Structural class of the weight matrix, driving which closed forms apply."""

    SCALAR = "scalar"
    HERMITIAN = "hermitian"
    GENERAL = "general"
    UNITARY = "unitary"
    ZERO = "zero"


@dataclass(frozen=True)
class DelaySpec:
    """Weight matrix plus lag depth: everything a delay matrix needs.

    Attributes
    ----------
    n : int
        Number of lagged blocks (>= 1).
    m : int
        State dimension (>= 1); the weight is m x m.
    weight : numpy.ndarray
        The weight matrix W, complex128.
    w_class : WClass
        Declared structure; validated on construction.
    """

    n: int
    m: int
    weight: np.ndarray = field(repr=False)
    w_class: WClass = WClass.GENERAL

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidParamsError(f"n must be a positive integer, got {self.n!r}")
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise InvalidParamsError(f"m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        w = matcore.as_complex_matrix(self.weight)
        if w.shape != (self.m, self.m):
            raise DimensionMismatchError(
                f"weight shape {w.shape} does not match m={self.m}"
            )
        w.setflags(write=False)
        object.__setattr__(self, "weight", w)
        self._check_class()

    def _check_class(self):
        w, m = self.weight, self.m
        if self.w_class is WClass.SCALAR and m != 1:
            raise InvalidParamsError("scalar class requires m = 1")
        if self.w_class is WClass.HERMITIAN:
            scale = max(float(np.max(np.abs(w))), 1e-300)
            if np.max(np.abs(w - w.conj().T)) > 1e-12 * scale:
                raise NotHermitianError("weight declared Hermitian is not")
        if self.w_class is WClass.UNITARY:
            dev = np.max(np.abs(w @ w.conj().T - np.eye(m)))
            if dev > _UNITARY_TOL:
                raise InvalidParamsError(
                    f"weight declared unitary deviates from W W* = I by {dev:.3e}"
                )
        if self.w_class is WClass.ZERO and np.any(w != 0):
            raise InvalidParamsError("weight declared zero has nonzero entries")

    @classmethod
    def scalar(cls, omega, n: int) -> "DelaySpec":
        """Spec for a 1-dimensional weight omega."""
        return cls(n=n, m=1, weight=np.array([[omega]]), w_class=WClass.SCALAR)

    @property
    def omega(self) -> complex:
        """The scalar weight; only meaningful for m = 1."""
        if self.m != 1:
            raise InvalidParamsError("omega is defined only for m = 1")
        return complex(self.weight[0, 0])


def _check_budget(spec: DelaySpec):
    if spec.m * spec.n > DENSE_BUDGET:
        raise OutOfBudgetError(
            f"m*n = {spec.m * spec.n} exceeds dense budget {DENSE_BUDGET}"
        )


def build_delay_matrix(spec: DelaySpec, negate_w: bool = False) -> np.ndarray:
    """Dense delay matrix of shape (m*n, m*(n+1)).

    Block row j carries the identity in block column j and W (or -W when
    ``negate_w``, the simulator's sign convention) in block column j+1.
    """
    _check_budget(spec)
    n, m = spec.n, spec.m
    w = -spec.weight if negate_w else spec.weight
    out = np.zeros((m * n, m * (n + 1)), dtype=np.complex128)
    eye = np.eye(m, dtype=np.complex128)
    for j in range(n):
        out[j * m:(j + 1) * m, j * m:(j + 1) * m] = eye
        out[j * m:(j + 1) * m, (j + 1) * m:(j + 2) * m] = w
    return out


def build_gram(spec: DelaySpec) -> np.ndarray:
    """Dense Gram matrix of the delay matrix: block tridiagonal Toeplitz.

    Diagonal blocks I + W W*, super-diagonal W, sub-diagonal W*; shape
    (m*n, m*n).  Equals build_delay_matrix(spec) times its conjugate
    transpose.
    """
    _check_budget(spec)
    n, m = spec.n, spec.m
    w = spec.weight
    diag = np.eye(m, dtype=np.complex128) + w @ w.conj().T
    out = np.zeros((m * n, m * n), dtype=np.complex128)
    for j in range(n):
        out[j * m:(j + 1) * m, j * m:(j + 1) * m] = diag
        if j + 1 < n:
            out[j * m:(j + 1) * m, (j + 1) * m:(j + 2) * m] = w
            out[(j + 1) * m:(j + 2) * m, j * m:(j + 1) * m] = w.conj().T
    return out


def shuffle_permutation(n: int, m: int) -> np.ndarray:
    """Perfect-shuffle index map from lag-major to eigen-major ordering.

    Position (lag block j, component k) moves to (component block k,
    lag offset j): ``perm[j*m + k] = k*n + j``.  A vector z reorders as
    ``out[perm] = z``; as a matrix P with P[perm[i], i] = 1 it conjugates
    the block-tridiagonal Gram of a diagonal weight into a direct sum of
    scalar tridiagonal operators.
    """
    if n < 1 or m < 1:
        raise InvalidParamsError("n and m must be positive")
    j = np.repeat(np.arange(n), m)
    k = np.tile(np.arange(m), n)
    return k * n + j


@dataclass(frozen=True)
class HermitianFactorization:
    """Shuffle factorization of the Gram of a Hermitian-weight delay matrix.

    ``basis`` is the unitary eigenbasis U of the weight (columns are
    eigenvectors for ``eigvals_w`` ascending); ``block_eigs[j-1, k-1]``
    is the j-th spectral value of the k-th decoupled tridiagonal block,
    lambda_k^2 + 2*lambda_k*cos(j*pi/(n+1)) + 1.
    """

    n: int
    m: int
    eigvals_w: np.ndarray = field(repr=False)
    basis: np.ndarray = field(repr=False)
    block_eigs: np.ndarray = field(repr=False)

    @property
    def weight(self) -> np.ndarray:
        """Reconstructed weight U diag(eigvals_w) U*."""
        u = self.basis
        return (u * self.eigvals_w) @ u.conj().T

    def block_operator(self, k: int) -> ToeplitzTriSpec:
        """The k-th decoupled tridiagonal operator (0-based k)."""
        lam = float(self.eigvals_w[k])
        return ToeplitzTriSpec(a=1.0 + lam * lam, b=lam, c=lam, n=self.n)


def hermitian_factorization(spec: DelaySpec) -> HermitianFactorization:
    """Factor the Gram of a Hermitian weight through its eigenbasis.

    Requires the weight matrix to pass the Hermitian check regardless of
    the declared class (a real scalar weight qualifies).
    """
    vals, vecs = matcore.hermitian_eigensystem(spec.weight)
    return HermitianFactorization(
        n=spec.n,
        m=spec.m,
        eigvals_w=vals,
        basis=vecs,
        block_eigs=hermitian_gram_eigs(vals, spec.n),
    )


def sine_basis(n: int) -> np.ndarray:
    """Orthogonal eigenbasis shared by all real tridiagonal Toeplitz operators.

    V[i, j] = sqrt(2/(n+1)) * sin((i+1)(j+1)*pi/(n+1)); symmetric and
    involutory, so V is its own inverse.
    """
    if n < 1:
        raise InvalidParamsError("n must be positive")
    i = np.arange(1, n + 1)
    return np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(i, i) * np.pi / (n + 1))


def reassemble_gram(f: HermitianFactorization) -> np.ndarray:
    """Rebuild the dense Gram from its factorization (for verification).

    Computes U_blk P^T D P U_blk* where D is the direct sum of the
    decoupled tridiagonal operators, P the perfect shuffle and U_blk the
    block-diagonal eigenbasis.
    """
    n, m = f.n, f.m
    if n * m > DENSE_BUDGET:
        raise OutOfBudgetError(f"m*n = {m * n} exceeds dense budget {DENSE_BUDGET}")
    d = np.zeros((m * n, m * n), dtype=np.complex128)
    for k in range(m):
        d[k * n:(k + 1) * n, k * n:(k + 1) * n] = f.block_operator(k).dense()
    perm = shuffle_permutation(n, m)
    t = d[np.ix_(perm, perm)]
    u_blk = np.kron(np.eye(n), f.basis)
    return u_blk @ t @ u_blk.conj().T


def apply_fast_pinv(f: HermitianFactorization, rhs) -> np.ndarray:
    """Apply the delay-matrix pseudo-inverse through the factorization.

    Solves the Gram system in three O(m n^2 + n m^2) stages (eigenbasis
    rotation, shuffle, decoupled sine-transform solves) and finishes with
    one block application of the adjoint, never forming a dense
    (m*n)^2 matrix.

    Parameters
    ----------
    f : HermitianFactorization
    rhs : array_like
        Vector of length m*n.

    Returns
    -------
    numpy.ndarray
        The minimum-norm preimage, length m*(n+1).
    """
    n, m = f.n, f.m
    y = np.asarray(rhs, dtype=np.complex128)
    if y.shape != (m * n,):
        raise DimensionMismatchError(
            f"rhs must have shape ({m * n},), got {y.shape}"
        )
    if np.min(f.block_eigs) <= 1e-12:
        raise RankDeficientError("decoupled block spectrum is numerically singular")
    u = f.basis
    v = sine_basis(n)
    # Lag-major blocks as rows; rotate each into the weight eigenbasis.
    z = y.reshape(n, m) @ u.conj()
    # The perfect shuffle in row form is just a transpose.
    ze = z.T
    # Decoupled tridiagonal solves: V diag(block_eigs)^{-1} V per component.
    ze = ((ze @ v) / f.block_eigs.T) @ v
    # Undo shuffle and basis rotation.
    z = ze.T @ u.T
    # Apply the adjoint of the delay matrix blockwise.
    wc = np.conj(f.weight)
    out = np.zeros((n + 1, m), dtype=np.complex128)
    out[0] = z[0]
    if n > 1:
        out[1:n] = z[1:] + z[:-1] @ wc
    out[n] = z[n - 1] @ wc
    return out.reshape(m * (n + 1))

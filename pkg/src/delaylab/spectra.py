"""Closed-form spectra of tridiagonal Toeplitz operators and delay Grams.

These formulas are the analytic counterpart to the dense routines in
``matcore``: every function here is O(n) or O(nm) arithmetic with no
matrix ever formed, and the test suite holds the two routes against each
other.

Conventions: ``n`` is the number of lagged blocks (matrix order of the
tridiagonal operator), angles enter through cos(j*pi/(n+1)) for
j = 1..n, and determinants are carried in log magnitude so large n never
overflows.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidParamsError

# Width of the window around |sigma| = 1 treated as exactly unit.
UNIT_WINDOW = 1e-12

# Relative discriminant size below which the root pair counts as a double root.
_DEGENERATE_TOL = 1e-12


def _check_order(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidParamsError(f"order n must be a positive integer, got {n!r}")
    return int(n)


def _check_scalar(z, name: str) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidParamsError(f"{name} must be finite, got {z!r}")
    return z


@dataclass(frozen=True)
class ToeplitzTriSpec:
    """Tridiagonal Toeplitz operator of order n.

    Diagonal value ``a``, super-diagonal ``b``, sub-diagonal ``c``.
    """

    a: complex
    b: complex
    c: complex
    n: int

    def __post_init__(self):
        object.__setattr__(self, "a", _check_scalar(self.a, "a"))
        object.__setattr__(self, "b", _check_scalar(self.b, "b"))
        object.__setattr__(self, "c", _check_scalar(self.c, "c"))
        object.__setattr__(self, "n", _check_order(self.n))

    def dense(self) -> np.ndarray:
        """Materialize the operator as a dense complex matrix."""
        m = np.zeros((self.n, self.n), dtype=np.complex128)
        np.fill_diagonal(m, self.a)
        idx = np.arange(self.n - 1)
        m[idx, idx + 1] = self.b
        m[idx + 1, idx] = self.c
        return m


@dataclass(frozen=True)
class LogComplex:
    """A complex number stored as log-magnitude and phase.

    ``log_abs`` is -inf for an exact zero; ``phase`` lies in [-pi, pi].
    """

    log_abs: float
    phase: float

    @property
    def value(self) -> complex:
        if self.log_abs == -math.inf:
            return 0j
        return cmath.exp(complex(self.log_abs, self.phase))


def toeplitz_tridiag_eigs(t: ToeplitzTriSpec) -> np.ndarray:
    """Eigenvalues a + 2*sqrt(b*c)*cos(j*pi/(n+1)), j = 1..n.

    The square root is the principal branch; for b*c real negative the
    spectrum is a + 2i*sqrt(|b*c|)*cos(...).  Order follows j ascending.
    """
    root = cmath.sqrt(t.b * t.c)
    j = np.arange(1, t.n + 1)
    return t.a + 2.0 * root * np.cos(j * np.pi / (t.n + 1))


def _wrap_phase(phi: float) -> float:
    return math.remainder(phi, 2.0 * math.pi)


def toeplitz_tridiag_det(t: ToeplitzTriSpec) -> LogComplex:
    """Determinant of the order-n tridiagonal Toeplitz operator, in log form.

    With r+- = (a +- sqrt(a^2 - 4bc)) / 2 the determinant is
    (r+^{n+1} - r-^{n+1}) / (r+ - r-), degenerating to (n+1)(a/2)^n when
    the discriminant vanishes.  Evaluated entirely in log space so no
    intermediate power can overflow.
    """
    a, b, c, n = t.a, t.b, t.c, t.n
    disc = a * a - 4.0 * b * c
    scale = abs(a) ** 2 + 4.0 * abs(b) * abs(c)
    if abs(disc) <= _DEGENERATE_TOL * max(scale, 1e-300):
        half = a / 2.0
        if half == 0:
            return LogComplex(-math.inf, 0.0)
        w = math.log(n + 1) + n * cmath.log(half)
        return LogComplex(w.real, _wrap_phase(w.imag))
    s = cmath.sqrt(disc)
    rp = (a + s) / 2.0
    rm = (a - s) / 2.0
    # The formula is invariant under swapping the roots, so order them
    # with |rp| >= |rm| to keep the ratio inside the unit disk.
    if abs(rm) > abs(rp):
        rp, rm = rm, rp
    ratio = rm / rp
    term = 1.0 - ratio ** (n + 1)
    if term == 0:
        return LogComplex(-math.inf, 0.0)
    w = (n + 1) * cmath.log(rp) + cmath.log(term) - cmath.log(rp - rm)
    return LogComplex(w.real, _wrap_phase(w.imag))


def scalar_singular_values(omega, n: int) -> np.ndarray:
    """Singular values of the scalar delay matrix with weight omega, descending.

    sigma_j = sqrt(|omega|^2 + 2|omega|cos(j*pi/(n+1)) + 1), j = 1..n.
    Only |omega| enters; the phase of a scalar weight never changes the
    singular spectrum.
    """
    n = _check_order(n)
    x = abs(_check_scalar(omega, "omega"))
    j = np.arange(1, n + 1)
    sq = x * x + 2.0 * x * np.cos(j * np.pi / (n + 1)) + 1.0
    return np.sqrt(np.clip(sq, 0.0, None))


def hermitian_gram_eigs(eigvals_w, n: int) -> np.ndarray:
    """Gram eigenvalues for a Hermitian weight with eigenvalues ``eigvals_w``.

    Returns an (n, m) array with entry [j-1, k-1] equal to
    lambda_k^2 + 2*lambda_k*cos(j*pi/(n+1)) + 1.  Every entry is at least
    sin^2(j*pi/(n+1)), hence strictly positive.
    """
    n = _check_order(n)
    lam = np.asarray(eigvals_w, dtype=np.float64)
    if lam.ndim != 1 or lam.size == 0:
        raise InvalidParamsError("eigvals_w must be a non-empty 1-D real array")
    if not np.all(np.isfinite(lam)):
        raise InvalidParamsError("eigvals_w must be finite")
    j = np.arange(1, n + 1)
    cos_col = np.cos(j * np.pi / (n + 1))[:, None]
    return lam[None, :] ** 2 + 2.0 * cos_col * lam[None, :] + 1.0


def _log_geom_sum(x: float, n: int) -> float:
    # log(1 + x + ... + x^n) for x >= 0, safe against overflow for x > 1.
    if x <= 1.0:
        return math.log(np.power(x, np.arange(n + 1)).sum())
    inv = 1.0 / x
    return n * math.log(x) + math.log(np.power(inv, np.arange(n + 1)).sum())


def scalar_gen_det(omega, n: int) -> float:
    """Log generalized determinant of the scalar delay matrix.

    log S = 0.5 * log(sum_{k=0}^{n} |omega|^{2k}); continuous in |omega|
    and equal to 0.5*log(n+1) on the unit circle.
    """
    n = _check_order(n)
    x = abs(_check_scalar(omega, "omega"))
    return 0.5 * _log_geom_sum(x * x, n)


def hermitian_gen_det(sing_w, n: int) -> float:
    """Log generalized determinant of the delay matrix of a Hermitian weight.

    ``sing_w`` holds the singular values of the weight (moduli of its
    eigenvalues).  Unit singular values, detected within UNIT_WINDOW,
    contribute 0.5*log(n+1) each; the rest contribute through the
    geometric sum exactly as in the scalar case.  The result is always
    >= 0: each factor's sum starts at the k=0 term 1.
    """
    n = _check_order(n)
    s = np.asarray(sing_w, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise InvalidParamsError("sing_w must be a non-empty 1-D array")
    if not np.all(np.isfinite(s)) or np.any(s < 0):
        raise InvalidParamsError("sing_w must be finite and non-negative")
    total = 0.0
    for val in s:
        if abs(val - 1.0) <= UNIT_WINDOW:
            total += 0.5 * math.log(n + 1)
        else:
            total += 0.5 * _log_geom_sum(val * val, n)
    return total

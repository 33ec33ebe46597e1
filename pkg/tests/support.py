"""Shared helpers for the delaylab test suite.

Random objects are always drawn from an explicitly seeded generator so
every failure reproduces; helpers that build structured weights return
plain ndarrays and leave spec construction to the tests.
"""

import numpy as np


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish unitary from the sign-fixed QR of a complex Gaussian."""
    a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    q, r = np.linalg.qr(a)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian_with_eigs(eigs, rng: np.random.Generator) -> np.ndarray:
    """Hermitian matrix with the prescribed real eigenvalues."""
    eigs = np.asarray(eigs, dtype=np.float64)
    u = random_unitary(eigs.size, rng)
    return (u * eigs) @ u.conj().T


def random_with_singular_values(sigma, rng: np.random.Generator) -> np.ndarray:
    """General complex matrix with the prescribed singular values."""
    sigma = np.asarray(sigma, dtype=np.float64)
    m = sigma.size
    return (random_unitary(m, rng) * sigma) @ random_unitary(m, rng).conj().T


def assert_close(actual, expected, tol, label=""):
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    dev = float(np.max(np.abs(actual - expected)))
    assert dev <= tol, f"{label} max deviation {dev:.3e} > {tol:.1e}"


def rel_dev(actual, expected) -> float:
    actual = np.asarray(actual, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    scale = max(float(np.max(np.abs(expected))), 1e-300)
    return float(np.max(np.abs(actual - expected))) / scale

"""Delay matrix construction, shuffle factorization, fast pseudo-inverse."""

import math

import numpy as np
import pytest

from support import random_hermitian_with_eigs, random_unitary, rel_dev
from delaylab import delaymat, matcore, spectra
from delaylab.delaymat import (
    DelaySpec,
    WClass,
    apply_fast_pinv,
    build_delay_matrix,
    build_gram,
    hermitian_factorization,
    reassemble_gram,
    shuffle_permutation,
    sine_basis,
)
from delaylab.exceptions import (
    DimensionMismatchError,
    InvalidParamsError,
    NotHermitianError,
    OutOfBudgetError,
)


class TestDelaySpec:
    def test_scalar_constructor(self):
        spec = DelaySpec.scalar(0.5 + 0.25j, 4)
        assert spec.m == 1 and spec.n == 4
        assert spec.omega == 0.5 + 0.25j
        assert spec.w_class is WClass.SCALAR

    def test_rejects_bad_n(self):
        with pytest.raises(InvalidParamsError):
            DelaySpec.scalar(1.0, 0)

    def test_rejects_scalar_with_m2(self):
        with pytest.raises(InvalidParamsError):
            DelaySpec(n=2, m=2, weight=np.eye(2), w_class=WClass.SCALAR)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            DelaySpec(n=2, m=3, weight=np.eye(2))

    def test_rejects_false_hermitian(self):
        with pytest.raises(NotHermitianError):
            DelaySpec(n=1, m=2, weight=np.array([[0.0, 1.0], [0.0, 0.0]]),
                      w_class=WClass.HERMITIAN)

    def test_rejects_false_unitary(self):
        with pytest.raises(InvalidParamsError):
            DelaySpec(n=1, m=2, weight=2 * np.eye(2), w_class=WClass.UNITARY)

    def test_rejects_false_zero(self):
        with pytest.raises(InvalidParamsError):
            DelaySpec(n=1, m=1, weight=[[1e-30]], w_class=WClass.ZERO)

    def test_weight_is_frozen(self):
        spec = DelaySpec.scalar(1.0, 2)
        with pytest.raises(ValueError):
            spec.weight[0, 0] = 2.0


class TestBuildDelayMatrix:
    def test_shape_and_blocks(self):
        w = np.array([[1.0, 2.0], [3.0, 4.0]])
        spec = DelaySpec(n=3, m=2, weight=w)
        mat = build_delay_matrix(spec)
        assert mat.shape == (6, 8)
        for j in range(3):
            blk_i = mat[2 * j:2 * j + 2, 2 * j:2 * j + 2]
            blk_w = mat[2 * j:2 * j + 2, 2 * j + 2:2 * j + 4]
            assert np.array_equal(blk_i, np.eye(2))
            assert np.array_equal(blk_w, w)
        # Everything off the two block diagonals is zero.
        assert np.count_nonzero(mat) == 3 * (2 + 4)

    def test_signed_flips_weight_blocks(self):
        spec = DelaySpec.scalar(0.7, 2)
        plain = build_delay_matrix(spec)
        signed = build_delay_matrix(spec, negate_w=True)
        assert signed[0, 1] == -plain[0, 1]
        assert np.array_equal(np.diag(signed), np.diag(plain))

    def test_sign_invariant_singular_values(self, rng):
        w = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        spec = DelaySpec(n=4, m=3, weight=w)
        a = matcore.singular_values(build_delay_matrix(spec))
        b = matcore.singular_values(build_delay_matrix(spec, negate_w=True))
        assert rel_dev(a, b) <= 1e-12

    def test_budget_guard(self):
        spec = DelaySpec(n=513, m=1, weight=[[0.5]])
        with pytest.raises(OutOfBudgetError):
            build_delay_matrix(spec)
        with pytest.raises(OutOfBudgetError):
            build_gram(spec)


class TestBuildGram:
    def test_equals_product(self, rng):
        for _ in range(10):
            m = int(rng.integers(1, 5))
            n = int(rng.integers(1, 7))
            w = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            spec = DelaySpec(n=n, m=m, weight=w)
            mat = build_delay_matrix(spec)
            gram = build_gram(spec)
            assert np.max(np.abs(gram - mat @ mat.conj().T)) <= 1e-13 * max(
                1.0, float(np.max(np.abs(gram))))

    def test_hermitian(self, rng):
        w = rng.standard_normal((2, 2))
        gram = build_gram(DelaySpec(n=5, m=2, weight=w))
        assert np.max(np.abs(gram - gram.conj().T)) == 0.0


class TestShufflePermutation:
    def test_frozen_small(self):
        assert shuffle_permutation(2, 2).tolist() == [0, 2, 1, 3]
        assert shuffle_permutation(3, 2).tolist() == [0, 3, 1, 4, 2, 5]
        assert shuffle_permutation(1, 4).tolist() == [0, 1, 2, 3]

    def test_is_permutation(self):
        for n, m in [(2, 3), (5, 4), (7, 1)]:
            p = shuffle_permutation(n, m)
            assert sorted(p.tolist()) == list(range(n * m))

    def test_block_diagonalizes_diagonal_weight(self, rng):
        # For a diagonal weight, conjugating the Gram by the shuffle
        # gives a direct sum of scalar tridiagonal operators.
        lam = rng.uniform(-1.5, 1.5, size=3)
        n, m = 4, 3
        spec = DelaySpec(n=n, m=m, weight=np.diag(lam), w_class=WClass.HERMITIAN)
        gram = build_gram(spec)
        perm = shuffle_permutation(n, m)
        shuffled = np.zeros_like(gram)
        shuffled[np.ix_(perm, perm)] = gram
        for k in range(m):
            blk = shuffled[k * n:(k + 1) * n, k * n:(k + 1) * n]
            t = spectra.ToeplitzTriSpec(
                a=1.0 + lam[k] ** 2, b=lam[k], c=lam[k], n=n).dense()
            assert np.max(np.abs(blk - t)) <= 1e-14
            shuffled[k * n:(k + 1) * n, k * n:(k + 1) * n] = 0.0
        assert np.max(np.abs(shuffled)) == 0.0


class TestSineBasis:
    def test_symmetric_involutory(self):
        for n in (1, 2, 5, 12):
            v = sine_basis(n)
            assert np.max(np.abs(v - v.T)) <= 1e-15
            assert np.max(np.abs(v @ v - np.eye(n))) <= 1e-13

    def test_diagonalizes_tridiagonal(self, rng):
        n = 8
        lam = float(rng.uniform(-2, 2))
        t = spectra.ToeplitzTriSpec(a=1 + lam * lam, b=lam, c=lam, n=n).dense().real
        v = sine_basis(n)
        d = v @ t @ v
        off = d - np.diag(np.diag(d))
        assert np.max(np.abs(off)) <= 1e-12
        expected = spectra.hermitian_gram_eigs([lam], n)[:, 0]
        assert rel_dev(np.diag(d), expected) <= 1e-12


class TestHermitianFactorization:
    def test_frozen_diag_half(self):
        spec = DelaySpec(n=2, m=2, weight=np.diag([0.5, -0.5]),
                         w_class=WClass.HERMITIAN)
        f = hermitian_factorization(spec)
        # eigvals_w ascending: -0.5 then 0.5.
        assert np.allclose(f.eigvals_w, [-0.5, 0.5], atol=1e-14)
        assert np.max(np.abs(f.block_eigs
                             - np.array([[0.75, 1.75], [1.75, 0.75]]))) <= 1e-14

    def test_rejects_non_hermitian_weight(self):
        spec = DelaySpec(n=2, m=2, weight=np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(NotHermitianError):
            hermitian_factorization(spec)

    def test_weight_roundtrip(self, rng):
        w = random_hermitian_with_eigs([0.3, -1.2, 2.0], rng)
        spec = DelaySpec(n=3, m=3, weight=w, w_class=WClass.HERMITIAN)
        f = hermitian_factorization(spec)
        assert np.max(np.abs(f.weight - w)) <= 1e-12

    def test_reassembles_gram(self, rng):
        for _ in range(8):
            m = int(rng.integers(1, 6))
            n = int(rng.integers(1, 9))
            w = random_hermitian_with_eigs(rng.uniform(-2, 2, size=m), rng)
            spec = DelaySpec(n=n, m=m, weight=w, w_class=WClass.HERMITIAN)
            f = hermitian_factorization(spec)
            gram = build_gram(spec)
            dev = np.max(np.abs(reassemble_gram(f) - gram))
            assert dev <= 1e-10 * max(1.0, float(np.max(np.abs(gram))))

    def test_block_eigs_match_gram_spectrum(self, rng):
        # The multiset of decoupled block eigenvalues is the Gram spectrum.
        w = random_hermitian_with_eigs(rng.uniform(-1.5, 1.5, size=4), rng)
        spec = DelaySpec(n=6, m=4, weight=w, w_class=WClass.HERMITIAN)
        f = hermitian_factorization(spec)
        closed = np.sort(f.block_eigs.reshape(-1))
        dense = matcore.hermitian_eigenvalues(build_gram(spec))
        assert rel_dev(closed, dense) <= 1e-9


class TestApplyFastPinv:
    def test_matches_dense_pinv(self, rng):
        for _ in range(10):
            m = int(rng.integers(1, 6))
            n = int(rng.integers(1, 10))
            w = random_hermitian_with_eigs(rng.uniform(-1.5, 1.5, size=m), rng)
            spec = DelaySpec(n=n, m=m, weight=w, w_class=WClass.HERMITIAN)
            f = hermitian_factorization(spec)
            rhs = rng.standard_normal(m * n) + 1j * rng.standard_normal(m * n)
            fast = apply_fast_pinv(f, rhs)
            dense = matcore.pseudo_inverse(build_delay_matrix(spec)) @ rhs
            scale = max(float(np.max(np.abs(dense))), 1e-300)
            assert float(np.max(np.abs(fast - dense))) / scale <= 1e-10

    def test_solves_the_system(self, rng):
        w = random_hermitian_with_eigs([1.0, -0.5], rng)
        spec = DelaySpec(n=5, m=2, weight=w, w_class=WClass.HERMITIAN)
        f = hermitian_factorization(spec)
        rhs = rng.standard_normal(10)
        x = apply_fast_pinv(f, rhs)
        assert np.max(np.abs(build_delay_matrix(spec) @ x - rhs)) <= 1e-11

    def test_zero_weight_stacks_identity(self):
        spec = DelaySpec(n=3, m=2, weight=np.zeros((2, 2)), w_class=WClass.ZERO)
        f = hermitian_factorization(spec)
        rhs = np.arange(6.0)
        out = apply_fast_pinv(f, rhs)
        assert np.max(np.abs(out[:6] - rhs)) <= 1e-14
        assert np.max(np.abs(out[6:])) <= 1e-14

    def test_rejects_wrong_length(self, rng):
        spec = DelaySpec(n=2, m=2, weight=np.eye(2), w_class=WClass.HERMITIAN)
        f = hermitian_factorization(spec)
        with pytest.raises(DimensionMismatchError):
            apply_fast_pinv(f, np.zeros(5))

    def test_faster_than_dense_at_scale(self):
        import time
        rng = np.random.default_rng(99)
        m, n = 8, 32  # m*n = 256
        w = random_hermitian_with_eigs(rng.uniform(-1.2, 1.2, size=m), rng)
        spec = DelaySpec(n=n, m=m, weight=w, w_class=WClass.HERMITIAN)
        rhs = [rng.standard_normal(m * n) for _ in range(20)]

        def fast_route():
            f = hermitian_factorization(spec)
            for r in rhs:
                apply_fast_pinv(f, r)

        def dense_route():
            p = matcore.pseudo_inverse(build_delay_matrix(spec))
            for r in rhs:
                p @ r

        fast_route(); dense_route()  # warm caches
        t_fast = min(_timed(fast_route, time) for _ in range(3))
        t_dense = min(_timed(dense_route, time) for _ in range(3))
        assert t_fast < t_dense, f"fast {t_fast:.4f}s vs dense {t_dense:.4f}s"


def _timed(fn, time) -> float:
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


class TestClosedFormVsOracleHermitian:
    def test_spot_checks(self, rng):
        for _ in range(10):
            m = int(rng.integers(1, 7))
            n = int(rng.integers(1, 12))
            w = random_hermitian_with_eigs(rng.uniform(-2, 2, size=m), rng)
            spec = DelaySpec(n=n, m=m, weight=w, w_class=WClass.HERMITIAN)
            eigs = matcore.hermitian_eigenvalues(w)
            closed = np.sort(
                np.sqrt(spectra.hermitian_gram_eigs(eigs, n).reshape(-1)))[::-1]
            oracle = matcore.singular_values(build_delay_matrix(spec))
            assert rel_dev(closed, oracle) <= 1e-10

    def test_gen_det_matches(self, rng):
        w = random_hermitian_with_eigs([0.5, 1.0, -1.7], rng)
        spec = DelaySpec(n=4, m=3, weight=w, w_class=WClass.HERMITIAN)
        sing_w = matcore.singular_values(w)
        closed = spectra.hermitian_gen_det(sing_w, 4)
        oracle = matcore.generalized_determinant(build_delay_matrix(spec))
        assert abs(closed - oracle) <= 1e-9 * max(1.0, abs(oracle))

    def test_frozen_gen_det_eigs_one_three(self):
        # Weight eigenvalues (1, 3) at depth 2: S^2 = det(Gram) = 273.
        spec = DelaySpec(n=2, m=2, weight=np.array([[2.0, 1.0], [1.0, 2.0]]),
                         w_class=WClass.HERMITIAN)
        oracle = matcore.generalized_determinant(build_delay_matrix(spec))
        assert abs(oracle - 0.5 * math.log(273.0)) <= 1e-12
        closed = spectra.hermitian_gen_det([1.0, 3.0], 2)
        assert abs(closed - 0.5 * math.log(273.0)) <= 1e-12


class TestUnitaryWeights:
    def test_spectrum_is_theta_free(self, rng):
        # Any unitary weight shares the unit-scalar delay spectrum with
        # multiplicity m.
        m, n = 3, 5
        u = random_unitary(m, rng)
        spec = DelaySpec(n=n, m=m, weight=u, w_class=WClass.UNITARY)
        oracle = matcore.singular_values(build_delay_matrix(spec))
        base = spectra.scalar_singular_values(1.0, n)
        expected = np.sort(np.repeat(base, m))[::-1]
        assert rel_dev(oracle, expected) <= 1e-10

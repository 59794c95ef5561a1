import numpy as np
import pytest

from qbrisk.bounds_sdp import z_lambda
from qbrisk.errors import InvalidInput
from qbrisk.lambda_maps import is_symmetric_hermitian, map_lambda, map_minus, map_plus
from qbrisk.linalg import BlockOperator, hermitian_part, max_abs, outer_xxT1, trace_norm

LAMBDAS = (-1.0, -0.5, 0.0, 0.5, 1.0)


def random_state(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    s = g @ g.conj().T
    return s / np.trace(s).real


def random_hermitian(rng, d):
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return hermitian_part(m)


def random_symmetric_hermitian(rng, n, d):
    blocks = np.zeros((n, n, d, d), dtype=complex)
    for j in range(n):
        for k in range(j, n):
            m = random_hermitian(rng, d)
            blocks[j, k] = blocks[k, j] = m
    return BlockOperator(blocks)


class TestMapPlus:
    def test_separable_left_factor(self):
        rng = np.random.default_rng(0)
        s = random_state(rng, 3)
        a = np.array([[1.0, 0.25], [0.25, 2.0]])
        x = BlockOperator(np.einsum("jk,ab->jkab", a, np.eye(3, dtype=complex)))
        assert max_abs(map_plus(x, s) - a) < 1e-12

    def test_separable_right_factor(self):
        rng = np.random.default_rng(1)
        s = random_state(rng, 3)
        b = random_hermitian(rng, 3)
        x = BlockOperator(np.einsum("jk,ab->jkab", np.eye(2), b))
        expected = np.trace(s @ b) * np.eye(2)
        assert max_abs(map_plus(x, s) - expected) < 1e-12

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(2)
        x = random_symmetric_hermitian(rng, 2, 2)
        with pytest.raises(InvalidInput):
            map_plus(x, random_state(rng, 3))


class TestMapLambda:
    def test_lambda_one_is_map_plus(self):
        rng = np.random.default_rng(3)
        s = random_state(rng, 2)
        x = BlockOperator(rng.standard_normal((2, 2, 2, 2)) * (1 + 0.5j))
        assert max_abs(map_lambda(x, s, 1.0) - map_plus(x, s)) < 1e-14

    def test_lambda_minus_one_is_map_minus(self):
        rng = np.random.default_rng(4)
        s = random_state(rng, 2)
        x = BlockOperator(rng.standard_normal((2, 2, 2, 2)) * (1 - 0.3j))
        assert max_abs(map_lambda(x, s, -1.0) - map_minus(x, s)) < 1e-14

    def test_real_symmetric_on_symmetric_hermitian(self):
        rng = np.random.default_rng(5)
        s = random_state(rng, 3)
        for _ in range(50):
            x = random_symmetric_hermitian(rng, 2, 3)
            assert is_symmetric_hermitian(x)
            for lam in LAMBDAS:
                m = map_lambda(x, s, lam)
                assert max_abs(m.imag) <= 1e-10
                assert max_abs(m.real - m.real.T) <= 1e-10

    def test_positive_on_psd(self):
        rng = np.random.default_rng(6)
        s = random_state(rng, 3)
        for _ in range(50):
            g = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
            x = BlockOperator.from_matrix(g @ g.conj().T / 6, 2)
            for lam in LAMBDAS:
                m = map_lambda(x, s, lam)
                assert np.linalg.eigvalsh(hermitian_part(m))[0] >= -1e-9

    def test_relaxation_step_on_feasible_pairs(self):
        # L - X X^T1 >= 0 maps to a PSD matrix for every lambda
        rng = np.random.default_rng(7)
        s = random_state(rng, 2)
        for _ in range(20):
            xops = [random_hermitian(rng, 2) for _ in range(2)]
            gram = outer_xxT1(xops)
            slack = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            lmat = gram.to_matrix() + slack @ slack.conj().T / 4
            lop = BlockOperator.from_matrix(lmat, 2)
            diff = BlockOperator(lop.blocks - gram.blocks)
            for lam in LAMBDAS:
                m = map_lambda(diff, s, lam)
                assert np.linalg.eigvalsh(hermitian_part(m))[0] >= -1e-9

    def test_lambda_out_of_range(self):
        rng = np.random.default_rng(8)
        x = random_symmetric_hermitian(rng, 2, 2)
        with pytest.raises(InvalidInput):
            map_lambda(x, random_state(rng, 2), 1.5)


class TestZConsistency:
    def test_matches_gram_route_entrywise(self):
        rng = np.random.default_rng(9)
        s = random_state(rng, 3)
        xops = np.array([random_hermitian(rng, 3) for _ in range(2)])
        for lam in LAMBDAS:
            via_map = map_lambda(outer_xxT1(xops), s, lam)
            assert max_abs(z_lambda(xops, s, lam) - via_map) <= 1e-12

    def test_re_im_split(self):
        rng = np.random.default_rng(10)
        s = random_state(rng, 2)
        xops = np.array([random_hermitian(rng, 2) for _ in range(2)])
        z1 = z_lambda(xops, s, 1.0)
        for lam in LAMBDAS:
            z = z_lambda(xops, s, lam)
            assert max_abs(z.real - z1.real) <= 1e-10
            assert abs(trace_norm(z.imag) - abs(lam) * trace_norm(z1.imag)) <= 1e-10

import numpy as np
import pytest

from zfsim.linalg import gram, hermitian_inverse
from zfsim.neumann import (NotEvaluable, error_magnitude, frobenius_error,
                           neumann_inverse, neumann_order2)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def scaled_orthogonal_rows(n_ues, m):
    """Rows with H H^H = M I exactly (zero fluctuation around the mean)."""
    h = np.zeros((n_ues, m), dtype=complex)
    for l in range(n_ues):
        h[l, l] = np.sqrt(m)
    return h


def series_by_powers(h, delta, order):
    """Independent power-form evaluation sum_n S^n Delta^-1."""
    delta_inv = np.linalg.inv(delta).astype(complex)
    step = -delta_inv @ (gram(h) - delta)
    out = np.zeros_like(step)
    for n in range(order + 1):
        out += np.linalg.matrix_power(step, n) @ delta_inv
    return out


class TestNeumannInverse:
    def test_zero_fluctuation_returns_delta_inverse(self):
        m, n_ues = 16, 4
        h = scaled_orthogonal_rows(n_ues, m)
        delta = m * np.eye(n_ues)
        for order in (0, 1, 2, 5, 8):
            assert np.allclose(neumann_inverse(h, delta, order), np.eye(n_ues) / m,
                               atol=1e-14)

    def test_order_zero(self):
        rng = np.random.default_rng(0)
        h = random_complex(rng, (3, 12))
        delta = 12 * np.eye(3)
        assert np.allclose(neumann_inverse(h, delta, 0), np.eye(3) / 12)

    def test_order_bounds(self):
        h = scaled_orthogonal_rows(2, 4)
        with pytest.raises(ValueError):
            neumann_inverse(h, 4 * np.eye(2), 9)
        with pytest.raises(ValueError):
            neumann_inverse(h, 4 * np.eye(2), -1)

    def test_horner_matches_power_form(self):
        rng = np.random.default_rng(1)
        for order in range(9):
            h = random_complex(rng, (3, 24))
            delta = 24 * np.eye(3)
            got = neumann_inverse(h, delta, order)
            want = series_by_powers(h, delta, order)
            assert np.abs(got - want).max() <= 1e-12

    def test_converges_to_exact_inverse_when_contractive(self):
        # spectral radius filter is computed explicitly, then the error
        # must shrink with the order
        rng = np.random.default_rng(2)
        m, n_ues = 32, 2
        delta = m * np.eye(n_ues)
        tested = 0
        while tested < 10:
            h = random_complex(rng, (n_ues, m)) / np.sqrt(2.0)
            step = -(gram(h) - delta) / m
            if np.abs(np.linalg.eigvals(step)).max() >= 0.8:
                continue
            tested += 1
            exact = hermitian_inverse(gram(h))
            errs = [np.abs(neumann_inverse(h, delta, order) - exact).max()
                    for order in (0, 2, 4, 6, 8)]
            for lo, hi in zip(errs[1:], errs[:-1]):
                assert lo <= hi or hi < 1e-13

    def test_high_order_matches_exact_inverse(self):
        # large well-conditioned instance: order 6 lands within 1e-6
        rng = np.random.default_rng(3)
        h = random_complex(rng, (4, 128)) / np.sqrt(2.0)
        exact = hermitian_inverse(gram(h))
        approx = neumann_inverse(h, 128 * np.eye(4), 6)
        assert np.abs(approx - exact).max() <= 1e-6


class TestOrderTwoClosedForm:
    def test_zero_fluctuation(self):
        h = scaled_orthogonal_rows(3, 9)
        assert np.allclose(neumann_order2(h, 9 * np.eye(3)), np.eye(3) / 9)

    def test_scalar_formula(self):
        rng = np.random.default_rng(4)
        m = 8
        h = random_complex(rng, (1, m))
        g = float(np.sum(np.abs(h) ** 2))
        expected = (3 * m ** 2 - 3 * m * g + g ** 2) / m ** 3
        got = neumann_order2(h, m * np.eye(1))
        assert np.isclose(got[0, 0].real, expected)
        assert abs(got[0, 0].imag) < 1e-12

    def test_matches_generic_series_at_order_two(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            h = random_complex(rng, (4, 16))
            delta = 16 * np.eye(4)
            a = neumann_order2(h, delta)
            b = neumann_inverse(h, delta, 2)
            assert np.abs(a - b).max() <= 1e-12


class TestErrorMagnitude:
    def test_perfect_approximation(self):
        rng = np.random.default_rng(6)
        true_inv = hermitian_inverse(gram(random_complex(rng, (4, 16))))
        assert abs(error_magnitude(true_inv, true_inv)) <= 1e-12

    def test_scalar_multiple(self):
        rng = np.random.default_rng(7)
        true_inv = hermitian_inverse(gram(random_complex(rng, (4, 16))))
        # alpha = L (1 - 1/c); c = 2, L = 4 -> 2
        assert np.isclose(error_magnitude(true_inv, 2.0 * true_inv), 2.0)
        assert np.isclose(error_magnitude(true_inv, 0.5 * true_inv), -4.0)

    def test_unitary_conjugation_invariance(self):
        rng = np.random.default_rng(8)
        true_inv = hermitian_inverse(gram(random_complex(rng, (4, 16))))
        approx = neumann_order2(random_complex(rng, (4, 16)), 16 * np.eye(4))
        unitary, _ = np.linalg.qr(random_complex(rng, (4, 4)))
        a1 = error_magnitude(true_inv, approx)
        a2 = error_magnitude(unitary @ true_inv @ unitary.conj().T,
                             unitary @ approx @ unitary.conj().T)
        assert abs(a1 - a2) <= 1e-9 * max(1.0, abs(a1))

    def test_singular_approximation_not_evaluable(self):
        rng = np.random.default_rng(9)
        true_inv = hermitian_inverse(gram(random_complex(rng, (3, 8))))
        singular = np.diag([1.0, 1.0, 0.0]).astype(complex)
        with pytest.raises(NotEvaluable):
            error_magnitude(true_inv, singular)

    def test_elementwise_diagonal_mode(self):
        rng = np.random.default_rng(10)
        true_inv = hermitian_inverse(gram(random_complex(rng, (4, 16))))
        val = error_magnitude(true_inv, 2.0 * true_inv, mode="elementwise_diagonal")
        assert np.isclose(val, 2.0)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            error_magnitude(np.eye(2), np.eye(2), mode="left_division")


class TestFrobeniusError:
    def test_zero_for_exact(self):
        rng = np.random.default_rng(11)
        true_inv = hermitian_inverse(gram(random_complex(rng, (3, 8))))
        assert frobenius_error(true_inv, true_inv) == 0.0

    def test_relative_scale(self):
        rng = np.random.default_rng(12)
        true_inv = hermitian_inverse(gram(random_complex(rng, (3, 8))))
        assert np.isclose(frobenius_error(true_inv, 2.0 * true_inv), 1.0)

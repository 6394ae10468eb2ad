import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from lifpocs.signal import (DB_CEIL, DB_FLOOR, PeriodicBandlimitedSignal, TimeGrid, check_period,
                            dirichlet_eval, inner_product, leak_integral, leaky_antiderivative,
                            mse_db, random_bandlimited, to_db)

from conftest import quad_inner

odd_T = st.integers(0, 15).map(lambda i: 2 * i + 1)


class TestPeriod:

    @pytest.mark.parametrize('T', [0, -3, 4, 2.5, True])
    def test_rejects(self, T):
        with pytest.raises(ValueError):
            check_period(T)

    def test_accepts_odd(self):
        assert check_period(61) == 61
        assert check_period(np.int64(5)) == 5


class TestSignal:

    def test_samples_round_trip(self):
        rng = np.random.default_rng(1)
        s = rng.normal(size=15)
        x = PeriodicBandlimitedSignal.from_samples(s)
        np.testing.assert_allclose(x.samples(), s, atol=1e-13)
        np.testing.assert_allclose(x(np.arange(15)), s, atol=1e-13)

    def test_coefficients_hermitian(self):
        x = random_bandlimited(11, seed=2)
        np.testing.assert_allclose(x.coeffs, np.conj(x.coeffs[::-1]), atol=0)
        assert np.isrealobj(x(np.linspace(0, 11, 7)))

    def test_immutable(self):
        x = random_bandlimited(7, seed=0)
        with pytest.raises(ValueError):
            x.coeffs[0] = 1.0

    def test_arithmetic(self):
        x, y = random_bandlimited(9, seed=1), random_bandlimited(9, seed=2)
        t = np.linspace(0, 9, 50)
        np.testing.assert_allclose((x + y)(t), x(t) + y(t), atol=1e-13)
        np.testing.assert_allclose((x - 0.5)(t), x(t) - 0.5, atol=1e-13)
        np.testing.assert_allclose((2 * x)(t), 2 * x(t), atol=1e-13)
        with pytest.raises(ValueError):
            x + random_bandlimited(11, seed=0)

    def test_periodic(self):
        x = random_bandlimited(13, seed=5)
        t = np.linspace(0, 13, 31)
        np.testing.assert_allclose(x(t + 13), x(t), atol=1e-12)

    def test_dict_round_trip(self):
        x = random_bandlimited(9, seed=3)
        y = PeriodicBandlimitedSignal.from_dict(x.to_dict())
        np.testing.assert_array_equal(y.coeffs, x.coeffs)

    def test_seeded(self):
        np.testing.assert_array_equal(random_bandlimited(9, seed=4).coeffs,
                                      random_bandlimited(9, seed=4).coeffs)
        assert np.max(np.abs(random_bandlimited(9, 0.7, 4).samples())) <= 0.7


class TestInnerProduct:

    def test_against_quadrature(self):
        x, y = random_bandlimited(11, seed=1), random_bandlimited(11, seed=2)
        assert inner_product(x, y) == pytest.approx(quad_inner(x, y, 11), rel=1e-12)
        assert x.norm_sq() == pytest.approx(quad_inner(x, x, 11), rel=1e-12)

    @given(odd_T, st.integers(0, 2 ** 31))
    @settings(max_examples=40, deadline=None)
    def test_basis_is_orthonormal(self, T, seed):
        x = random_bandlimited(T, seed=seed)
        a = x.basis_coords()
        assert len(a) == T
        assert np.dot(a, a) == pytest.approx(x.norm_sq(), rel=1e-12, abs=1e-14)
        np.testing.assert_allclose(PeriodicBandlimitedSignal.from_basis(a).coeffs, x.coeffs, atol=1e-14)

    def test_sample_norm(self):
        # ||x||^2 equals the sum of squared Nyquist samples
        x = random_bandlimited(15, seed=8)
        assert x.norm_sq() == pytest.approx(np.sum(x.samples() ** 2), rel=1e-12)


class TestDirichlet:

    def test_interpolates(self):
        T = 9
        np.testing.assert_allclose(dirichlet_eval(np.arange(T), T), np.eye(T)[0], atol=1e-14)

    def test_matches_coefficients(self):
        T = 7
        phi = PeriodicBandlimitedSignal(T, np.full(T, 1 / T))
        t = np.linspace(0.01, 6.9, 40)
        np.testing.assert_allclose(dirichlet_eval(t, T), phi(t), atol=1e-13)

    def test_reproducing(self):
        x = random_bandlimited(9, seed=3)
        phi = PeriodicBandlimitedSignal(9, np.exp(-1j * 2 * np.pi * np.arange(-4, 5) * 2.3 / 9) / 9)
        assert inner_product(phi, x) == pytest.approx(x(2.3), abs=1e-13)


class TestLeakIntegral:

    def test_series_branch_continuous(self):
        for dt in (0.3, 2.0):
            a = 0.99e-6 / dt
            assert leak_integral(a, dt) == pytest.approx(-np.expm1(-a * dt) / a, rel=1e-12)
        assert leak_integral(0.0, 1.7) == 1.7

    def test_negative_interval(self):
        assert leak_integral(0.8, -1.0) == pytest.approx(-np.expm1(0.8) / 0.8, rel=1e-14)

    @pytest.mark.parametrize('alpha', [0.0, 0.03, 1.5])
    def test_leaky_antiderivative(self, alpha):
        x = random_bandlimited(9, seed=11)
        c, tau, t = 0.4, 1.2, 3.9
        ref, _ = quad(lambda s: np.exp(-alpha * (t - s)) * (x(s) + c), tau, t, epsabs=1e-13, limit=200)
        assert leaky_antiderivative(x, c, tau, t, alpha) == pytest.approx(ref, abs=1e-11)
        assert leaky_antiderivative(x, c, tau, tau, alpha) == 0.0

    def test_rejects_backwards(self):
        with pytest.raises(ValueError):
            leaky_antiderivative(random_bandlimited(5, seed=0), 0, 2.0, 1.0, 0.1)


class TestDecibels:

    def test_clipping(self):
        assert to_db(0.0) == DB_FLOOR
        assert to_db(np.inf) == DB_CEIL
        assert to_db(np.nan) == DB_CEIL
        assert to_db(0.01) == pytest.approx(-20.0)

    def test_mse_db(self):
        x = random_bandlimited(7, seed=0)
        assert mse_db(x, x, 1.0) == DB_FLOOR
        assert mse_db(x * 1.1, x, x.norm_sq()) == pytest.approx(-20.0)
        with pytest.raises(ValueError):
            mse_db(x, x, 0.0)

    def test_grid(self):
        g = TimeGrid(5, 4)
        assert len(g.instants) == 20
        assert g.instants[1] == 0.25

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import trapezoid

from adaptkde.kernels import eval_ul, make_default_base, make_kernel, moment, product_kernel_eval
from adaptkde.quadrature import adaptive_simpson
from oracles import kernel_moment, u_l

ORDERS = [2, 3, 4]


class TestBase:
    def test_values_l2(self):
        u = make_default_base(2)
        assert float(u(0.0)) == 4.0
        assert float(u(0.3)) == 0.0

    @pytest.mark.parametrize("l", ORDERS)
    def test_unit_mass(self, l):
        u = make_default_base(l)
        a = u.support_halfwidth
        assert a == 1 / (2 * l)
        mass = adaptive_simpson(lambda z: float(u(z)), -a, 0) + adaptive_simpson(lambda z: float(u(z)), 0, a)
        assert mass == pytest.approx(1.0, abs=1e-12)
        assert u.lipschitz_bound == pytest.approx(4 * l * l)

    @given(st.floats(-1, 1), st.sampled_from(ORDERS))
    def test_symmetric_and_supported(self, z, l):
        u = make_default_base(l)
        assert float(u(z)) == float(u(-z))
        if abs(z) > 1 / (2 * l):
            assert float(u(z)) == 0.0

    @pytest.mark.parametrize("l", [1, 0, 2.5])
    def test_rejects_low_order(self, l):
        with pytest.raises(ValueError):
            make_default_base(l)


class TestHigherOrder:
    def test_center_value_l2(self):
        # 2 u(0) - (1/2) u(0) with u(0) = 4
        assert float(eval_ul(make_kernel(2), 0.0)) == pytest.approx(6.0)

    @pytest.mark.parametrize("l", ORDERS)
    def test_outside_support(self, l):
        assert float(eval_ul(make_kernel(l), 0.6)) == 0.0
        assert float(eval_ul(make_kernel(l), -0.6)) == 0.0

    @pytest.mark.parametrize("l", ORDERS)
    def test_matches_termwise_oracle(self, l):
        K = make_kernel(l)
        zs = np.linspace(-0.6, 0.6, 241)
        np.testing.assert_allclose(K(zs), [u_l(z, l) for z in zs], rtol=0, atol=1e-12)

    @pytest.mark.parametrize("l", ORDERS)
    def test_moments(self, l):
        K = make_kernel(l)
        assert abs(moment(K, 0) - 1.0) <= 1e-10
        for k in range(1, l):
            assert abs(moment(K, k)) <= 1e-8
        assert abs(moment(K, 1)) <= 1e-12

    def test_moment_l3_against_independent_quadrature(self):
        K = make_kernel(3)
        assert moment(K, 0) == pytest.approx(1.0, abs=1e-10)
        assert abs(kernel_moment(3, 2)) <= 1e-8
        assert moment(K, 2) == pytest.approx(kernel_moment(3, 2), abs=1e-10)

    @pytest.mark.parametrize("l", ORDERS)
    def test_first_nonvanishing_moment(self, l):
        # odd moments vanish by symmetry, so the first nonzero one is the even order >= l
        k = l if l % 2 == 0 else l + 1
        K = make_kernel(l)
        assert abs(moment(K, k)) > 1e-6
        assert moment(K, k) == pytest.approx(kernel_moment(l, k), rel=1e-9)

    def test_moment_argument_checks(self):
        with pytest.raises(ValueError):
            moment(make_kernel(2), 1, quadrature_points=8)

    @pytest.mark.parametrize("l", ORDERS)
    def test_lipschitz_holds_on_random_pairs(self, l):
        K = make_kernel(l)
        rng = np.random.default_rng(l)
        x, y = rng.uniform(-1, 1, 100_000), rng.uniform(-1, 1, 100_000)
        assert np.all(np.abs(K(x) - K(y)) <= K.lipschitz * np.abs(x - y) + 1e-12)

    @pytest.mark.parametrize("l", ORDERS)
    def test_norms(self, l):
        K = make_kernel(l)
        zs = np.linspace(-0.5, 0.5, 200_001)
        assert K.sup_norm == pytest.approx(np.max(np.abs(K(zs))), rel=1e-9)
        assert K.l1_norm >= 1.0
        zs = np.linspace(-0.5, 0.5, 20_001)
        ref = trapezoid([abs(u_l(z, l)) for z in zs], zs)
        assert K.l1_norm == pytest.approx(ref, rel=1e-4)

    def test_l1_closed_form_order2(self):
        assert make_kernel(2).l1_norm == pytest.approx(11 / 7, rel=1e-12)

    @given(st.floats(-0.5, 0.5), st.sampled_from(ORDERS))
    def test_symmetric(self, z, l):
        K = make_kernel(l)
        assert float(K(z)) == pytest.approx(float(K(-z)), abs=1e-12)


class TestProduct:
    def test_examples(self):
        K = make_kernel(2)
        K0 = float(K(0.0))
        assert product_kernel_eval(K, [1.0], [0.0]) == K0
        assert product_kernel_eval(K, [0.5, 0.5], [0.0, 0.0]) == pytest.approx(4 * K0**2)
        assert product_kernel_eval(K, [0.5, 0.25], [0.0, 0.2]) == 0.0

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            product_kernel_eval(make_kernel(2), [0.0, 1.0], [0.0, 0.0])

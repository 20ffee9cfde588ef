import math

import numpy as np
import pytest

from adaptkde.constants import (a_from_lambda, build_table, c_s, c_s1, delta_star, lambda_s_q, lambda_s_q_z,
                                s_star)
from adaptkde.kernels import make_kernel

K2 = make_kernel(2)


def oracle_delta_star():
    # plain bisection written independently, stopping on the absolute bracket width
    f = lambda x: 8 * math.pi**2 * x * (1 + math.log(x) ** 2) - 1
    lo, hi = 1e-6, 1e-2
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if f(mid) < 0 else (lo, mid)
    return (lo + hi) / 2


@pytest.fixture(scope="module")
def dstar():
    return delta_star()


class TestDeltaStar:
    def test_residual(self, dstar):
        assert abs(8 * math.pi**2 * dstar * (1 + math.log(dstar) ** 2) - 1) <= 1e-10

    def test_value(self, dstar):
        assert dstar == pytest.approx(1.64e-4, abs=2e-6)
        assert dstar == pytest.approx(oracle_delta_star(), rel=1e-12)
        assert 1e-5 < dstar < 1e-3

    def test_upper_bracket(self):
        assert 8 * math.pi**2 * 1e-3 * (1 + math.log(1e-3) ** 2) > 1


class TestCs:
    def test_positive_and_monotone(self, dstar):
        vals = [c_s(s, dstar) for s in range(1, 7)]
        assert all(v > 0 for v in vals)
        assert all(a <= b for a, b in zip(vals, vals[1:]))

    def test_against_dense_grid(self, dstar):
        # independent evaluation on a finer grid over a shorter range
        s = 2
        x = np.geomspace(dstar, 1.0, 400_000)
        ss = (6 / math.pi**2) / (1 + np.log(x) ** 2)
        f1 = np.maximum(0, 1 + np.log(9216 * (s + 1) * x**2 / ss**2)) / x**2
        f2 = np.maximum(0, 1 + np.log(9216 * (s + 1) * x / ss)) / x**2
        ref = s * f1.max() + s * f2.max()
        assert c_s(s, dstar) == pytest.approx(ref, rel=1e-3)

    def test_sup_near_delta_star(self, dstar):
        x = np.geomspace(dstar, 10, 20_000)
        ss = s_star(x)
        f1 = np.maximum(0, 1 + np.log(9216 * 2 * x**2 / ss**2)) / x**2
        assert x[np.argmax(f1)] <= 1.01 * dstar

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            c_s(0)


class TestLambda:
    def test_cs1_order_of_magnitude(self, dstar):
        for s in (1, 2, 3):
            assert c_s1(s, 2, dstar) >= 144 * s / dstar**2
            assert 144 * s / dstar**2 == pytest.approx(5.3e9 * s, rel=0.02)

    def test_floor(self, dstar):
        assert lambda_s_q(1, 1, K2, dstar) >= 48 * math.e * math.sqrt(7)

    def test_monotone_in_s_and_q(self, dstar):
        tab = {(s, q): lambda_s_q(s, q, K2, dstar) for s in range(1, 5) for q in (1, 2, 4)}
        for q in (1, 2, 4):
            assert all(tab[(s, q)] < tab[(s + 1, q)] for s in range(1, 4))
        for s in range(1, 5):
            assert tab[(s, 1)] < tab[(s, 2)] < tab[(s, 4)]

    def test_inflation(self, dstar):
        base = lambda_s_q(2, 2, K2, dstar)
        assert lambda_s_q_z(2, 2, K2, 0.5, 0.5, dstar) == pytest.approx(base * math.sqrt(6 + 4 * 1 * 3))

    @pytest.mark.parametrize("tau", [0.0, -1.0, 1.5])
    def test_tau_floor_checked(self, tau):
        with pytest.raises(ValueError):
            lambda_s_q_z(1, 1, K2, 1.0, tau)

    @pytest.mark.parametrize("lam,q", [(1.0, 1), (3.7, 2), (1e9, 1.5)])
    def test_a_identity(self, lam, q):
        a = a_from_lambda(lam, q)
        assert a * (2 * lam) ** 2 * (1 + 2 * q) == pytest.approx(1.0, abs=1e-12)


class TestTable:
    def test_theory_table_d2(self):
        tab = build_table(1, 2, K2)
        assert tab.lambda_ > 1e9
        assert tab.lambda_ == max(1.0, *tab.lambda_s)
        assert tab.lambda_s[0] < tab.lambda_s[1]
        assert 0 < tab.a < 1
        assert tab.a * (2 * tab.lambda_) ** 2 * (1 + 2 * tab.q) == pytest.approx(1.0, abs=1e-12)
        assert set(tab.to_dict()) >= {"lambda", "a", "delta_star", "c_s", "c_s1", "lambda_s", "kernel_sup"}

    def test_d1_single_entry(self, dstar):
        tab = build_table(2, 1, K2, z=0.5, tau_floor=0.5)
        assert tab.lambda_ == max(1.0, lambda_s_q_z(1, 4, K2, 0.5, 0.5, dstar))

    def test_deterministic(self):
        assert build_table(1, 2, K2) == build_table(1, 2, K2)

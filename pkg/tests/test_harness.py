import math

import numpy as np
import pytest
from scipy import integrate, stats

from adaptkde.config import EstimatorConfig, ExperimentConfig
from adaptkde.harness.bias import bias_bound_check, bias_functional
from adaptkde.harness.models import (Example1Marginal, density_eval, example1, gaussian, make_rng, model_from_name,
                                     sample)
from adaptkde.harness.risk import fit_slope, mc_risk, report_csv, risk_from_errors, run_replications
from adaptkde.kernels import make_kernel
from adaptkde.partitions import Partition

M = Example1Marginal()


class TestExample1:
    def test_values(self):
        assert float(M.pdf(0.5)) == pytest.approx(16 / 15)
        assert float(M.pdf(-0.1)) == 0.0 and float(M.pdf(1.2)) == 0.0

    def test_unit_mass(self):
        total = sum(integrate.quad(lambda t: float(M.pdf(t)), a, b, epsabs=1e-13)[0]
                    for a, b in [(0, 0.125), (0.125, 0.25), (0.25, 0.75), (0.75, 1)])
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_cdf_ppf_inverse(self):
        u = np.linspace(0, 1, 1001)
        np.testing.assert_allclose(M.cdf(M.ppf(u)), u, atol=1e-12)
        t = np.linspace(0, 1, 101)
        ref = [integrate.quad(lambda s: float(M.pdf(s)), 0, x, points=[0.125, 0.25, 0.75])[0] for x in t]
        np.testing.assert_allclose(M.cdf(t), ref, atol=1e-10)

    def test_sampler_ks_and_chisquare(self):
        n = 100_000
        x = M.sample(make_rng(1, 0), n)
        ks = stats.kstest(x, M.cdf).statistic
        assert ks <= 1.5 / math.sqrt(n)
        edges = np.linspace(0, 1, 51)
        obs, _ = np.histogram(x, edges)
        exp = n * np.diff(M.cdf(edges))
        assert stats.chisquare(obs, exp).pvalue > 0.001

    def test_product_density(self):
        assert density_eval(example1(2), [0.5, 0.5]) == pytest.approx((16 / 15) ** 2)
        assert density_eval(example1(2), [0.5, 1.5]) == 0.0


class TestGaussian:
    def test_mode(self):
        assert density_eval(gaussian(1.0, 1), [0.0]) == pytest.approx(1 / math.sqrt(2 * math.pi))

    def test_sampler(self):
        x = sample(gaussian(2.0, 1), 100_000, 3).rows[:, 0]
        assert stats.kstest(x, stats.norm(scale=2.0).cdf).statistic <= 1.5 / math.sqrt(len(x))

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            model_from_name("cauchy", 1)


def test_rng_streams_are_keyed():
    a = make_rng(5, 100, 0).random(4)
    assert np.array_equal(a, make_rng(5, 100, 0).random(4))
    assert not np.array_equal(a, make_rng(5, 100, 1).random(4))


def small_experiment(**kw):
    est = EstimatorConfig(l=2, q=2, beta_max=1, lambda_scale=0.05, hbar="dyadic:1..6")
    base = dict(estimator=est, density="example1", d=2, n=1024, replications=40, seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


class TestRisk:
    def test_identical_seeds_identical_errors(self):
        cfg = small_experiment(replications=2)
        a = mc_risk(cfg).points[0].errors
        b = mc_risk(cfg).points[0].errors
        assert np.array_equal(a, b)

    def test_thread_count_does_not_matter(self):
        cfg = small_experiment(replications=6)
        model = example1(2)
        r1 = run_replications(model, cfg.estimator, (0.5, 0.5), 1024, 6, 3, threads=1)
        r3 = run_replications(model, cfg.estimator, (0.5, 0.5), 1024, 6, 3, threads=3)
        assert r1 == r3

    def test_report_fields(self):
        pt = mc_risk(small_experiment(compare_pbar="1,2")).points[0]
        assert pt.risk >= 0 and pt.stderr >= 0
        assert sum(pt.partition_freq.values()) == pytest.approx(1.0)
        assert pt.compare_risk is not None and 0 <= pt.paired_p <= 1
        assert len(pt.mean_h) == 2

    def test_consistency_between_sizes(self):
        small = mc_risk(small_experiment(replications=200), n=1024).points[0]
        large = mc_risk(small_experiment(replications=200), n=16384).points[0]
        p = stats.ttest_rel(large.errors**2, small.errors**2, alternative="less").pvalue
        assert large.risk < small.risk and p < 0.01

    def test_stderr_scales_with_replications(self):
        a = mc_risk(small_experiment(replications=100)).points[0]
        b = mc_risk(small_experiment(replications=400)).points[0]
        assert b.stderr / a.stderr == pytest.approx(0.5, rel=0.3)

    def test_delta_method(self):
        e = np.array([1.0, -2.0, 3.0, -4.0])
        r, se = risk_from_errors(e, 2)
        m = np.mean(e**2)
        assert r == pytest.approx(math.sqrt(m))
        assert se == pytest.approx(0.5 / math.sqrt(m) * np.std(e**2, ddof=1) / 2)

    def test_slope_fit(self):
        ns = [100, 200, 400, 800]
        slope, icpt, ci = fit_slope(ns, [3 * n**-0.4 for n in ns])
        assert slope == pytest.approx(-0.4) and icpt == pytest.approx(math.log(3))
        assert ci[0] <= slope <= ci[1]
        with pytest.raises(ValueError):
            fit_slope([1, 2], [1, 2])

    def test_csv_uses_repr(self):
        rep = mc_risk(small_experiment(replications=3))
        text = report_csv(rep)
        header, row = text.strip().split("\n")
        assert header.startswith("n,risk,stderr,mean_h1,mean_h2,freq[")
        assert row.split(",")[1] == repr(rep.points[0].risk)


class TestBias:
    def test_zero_when_equal(self):
        K = make_kernel(2)
        for h in (0.5, 0.1, 0.01):
            assert bias_functional(gaussian(1.0, 2), K, (0, 1), (h, h), (h, h), (0.3, -0.2)) == 0.0

    def test_vanishes_as_h_shrinks(self):
        K = make_kernel(2)
        vals = [abs(bias_functional(gaussian(1.0, 1), K, (0,), (h,), (0.0,), (0.0,))) for h in (0.1, 0.01, 0.001)]
        assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-6

    def test_decay_exponent(self):
        (rep,) = bias_bound_check(gaussian(1.0, 1), make_kernel(2), (2.0,), Partition.one_block(1))
        assert rep.exponent == pytest.approx(2.0, abs=0.15)
        assert rep.passed

"""Change-point detector: schedules, L2 statistic, two-half detection."""

import math

import numpy as np
import pytest

from nsbandits.cpd import (
    CpdConfig,
    delta_hat_sq,
    detect,
    min_sample_size,
    rho_cpd,
    schedule_exponent,
    theta,
)
from nsbandits.gpr import Dataset
from nsbandits.kernel import KernelSpec

SPEC = KernelSpec(alpha=2.5, lengthscale=1.0)
GRID = np.linspace(0, 5, 1000)


def make_cfg(**kw):
    defaults = dict(kernel=SPEC, quad_grid=GRID, domain_measure=5.0, sigma2=1.0)
    defaults.update(kw)
    return CpdConfig(**defaults)


class TestSchedules:
    def test_exponent_six_sevenths(self):
        assert schedule_exponent(2.5, 1) == pytest.approx(6.0 / 7.0, abs=1e-15)

    def test_rho_at_one(self):
        assert rho_cpd(make_cfg(c_rho=1.0), 1) == 1.0

    def test_rho_at_128(self):
        # arbitrary-precision oracle: exp(-(6/7) ln 128)
        expected = math.exp(-(6.0 / 7.0) * math.log(128.0))
        assert rho_cpd(make_cfg(c_rho=1.0), 128) == pytest.approx(expected, rel=1e-14)

    def test_theta_examples(self):
        cfg = make_cfg(theta_coeff=2.6)
        assert theta(cfg, 1) == 2.6
        expected = 2.6 * math.exp(-(6.0 / 7.0) * math.log(128.0))
        assert theta(cfg, 128) == pytest.approx(expected, rel=1e-14)

    def test_infinite_threshold(self):
        cfg = make_cfg(theta_coeff=math.inf)
        assert theta(cfg, 1) == math.inf
        assert theta(cfg, 1000) == math.inf

    def test_schedules_positive_strictly_decreasing(self):
        cfg = make_cfg(c_rho=0.7, theta_coeff=2.6)
        rs = [rho_cpd(cfg, n) for n in range(1, 60)]
        ts = [theta(cfg, n) for n in range(1, 60)]
        assert all(v > 0 for v in rs + ts)
        assert all(a > b for a, b in zip(rs, rs[1:]))
        assert all(a > b for a, b in zip(ts, ts[1:]))

    def test_n_zero_rejected(self):
        cfg = make_cfg()
        with pytest.raises(ValueError):
            rho_cpd(cfg, 0)
        with pytest.raises(ValueError):
            theta(cfg, 0)


class TestDeltaHatSq:
    def test_identical_is_zero(self):
        cfg = make_cfg()
        mu = np.sin(GRID)
        assert delta_hat_sq(mu, mu, cfg) == 0.0

    def test_constant_offset(self):
        cfg = make_cfg()
        mu = np.zeros(1000)
        assert delta_hat_sq(mu, mu + 1.0, cfg) == pytest.approx(5.0, abs=1e-12)

    def test_sine_quadrature_vs_analytic(self):
        cfg = make_cfg()
        # integral of sin^2 over [0,5] = 5/2 - sin(10)/4
        expected = 2.5 - math.sin(10.0) / 4.0
        assert delta_hat_sq(np.sin(GRID), np.zeros(1000), cfg) == pytest.approx(
            expected, abs=1e-3)

    def test_symmetry(self):
        cfg = make_cfg()
        rng = np.random.default_rng(0)
        a, b = rng.standard_normal((2, 1000))
        assert delta_hat_sq(a, b, cfg) == delta_hat_sq(b, a, cfg)

    def test_triangle_inequality_on_roots(self):
        cfg = make_cfg()
        rng = np.random.default_rng(1)
        for _ in range(20):
            a, b, c = rng.standard_normal((3, 1000))
            lhs = math.sqrt(delta_hat_sq(a, c, cfg))
            rhs = math.sqrt(delta_hat_sq(a, b, cfg)) + math.sqrt(delta_hat_sq(b, c, cfg))
            assert lhs <= rhs + 1e-9

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            delta_hat_sq(np.zeros(10), np.zeros(1000), make_cfg())


class TestDetect:
    def test_identical_halves_no_detection(self):
        cfg = make_cfg(theta_coeff=2.6)
        X = np.linspace(0, 5, 10)
        y = np.sin(X)
        sample = Dataset(np.concatenate([X, X]), np.concatenate([y, y]))
        res = detect(cfg, sample)
        assert res.delta_hat_sq == pytest.approx(0.0, abs=1e-20)
        assert not res.detected

    def test_large_offset_detected(self):
        cfg = make_cfg(theta_coeff=2.6)
        rng = np.random.default_rng(2)
        X = rng.uniform(0, 5, 60)
        f = np.sin(X)
        y = np.concatenate([f[:30], f[30:] + 10.0])
        res = detect(cfg, Dataset(X, y))
        assert res.detected
        assert res.threshold == pytest.approx(2.6 * 30 ** (-6.0 / 7.0), rel=1e-12)
        # statistic is near 100 * 5 = 500 up to regularization bias
        assert res.delta_hat_sq > 100.0

    def test_infinite_threshold_never_detects(self):
        cfg = make_cfg(theta_coeff=math.inf)
        rng = np.random.default_rng(3)
        X = rng.uniform(0, 5, 40)
        y = np.concatenate([np.zeros(20), np.full(20, 50.0)])
        res = detect(cfg, Dataset(X, y))
        assert not res.detected and res.threshold == math.inf

    @pytest.mark.parametrize("size", [0, 1, 3, 7])
    def test_odd_or_empty_rejected(self, size):
        cfg = make_cfg()
        with pytest.raises(ValueError):
            detect(cfg, Dataset(np.linspace(0, 5, size), np.zeros(size)))

    def test_detected_iff_stat_exceeds_threshold(self):
        cfg = make_cfg(theta_coeff=2.6)
        rng = np.random.default_rng(4)
        for _ in range(10):
            n2 = 2 * int(rng.integers(1, 20))
            X = rng.uniform(0, 5, n2)
            y = rng.standard_normal(n2)
            res = detect(cfg, Dataset(X, y))
            assert res.detected == (res.delta_hat_sq > res.threshold)


class TestMinSampleSize:
    def test_zero_numerator(self):
        assert min_sample_size(1.0, 0.0, 0.0, 2.0, 2.0, 2.5, 1) == 0.0

    def test_unit_ratio(self):
        assert min_sample_size(1.0, 1.0, 0.0, 2.0, 1.0, 2.5, 1) == pytest.approx(2.0)

    def test_general_value(self):
        # 2 * 5^(7/6), arbitrary-precision oracle
        expected = 2.0 * math.exp((7.0 / 6.0) * math.log(5.0))
        assert min_sample_size(1.0, 1.0, 1.0, 2.0, 1.0, 2.5, 1) == pytest.approx(
            expected, rel=1e-14)

    def test_invalid_inputs_rejected(self):
        with pytest.raises(ValueError):
            min_sample_size(1.0, 1.0, 1.0, 2.0, 0.0, 2.5, 1)
        with pytest.raises(ValueError):
            min_sample_size(1.0, 1.0, 1.0, 1.0, 1.0, 2.5, 1)


class TestConfigValidation:
    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            make_cfg(quad_grid=np.empty((0, 1)))

    @pytest.mark.parametrize("kw", [dict(domain_measure=0.0), dict(c_rho=0.0),
                                    dict(theta_coeff=0.0), dict(sigma2=0.0)])
    def test_nonpositive_params_rejected(self, kw):
        with pytest.raises(ValueError):
            make_cfg(**kw)

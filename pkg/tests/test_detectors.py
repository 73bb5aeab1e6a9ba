"""Tests for the first-stage statistics and second-stage discriminators."""

import numpy as np
import pytest

from dtdroc.detectors import (
    ABOVE, BELOW, DetectorConfig, StatisticTrace,
    decide, epcd_constant, epcd_error_corr, epcd_oracle,
    epsilon_from_statistic, geigel_statistic, run_detector, xcorr_statistic,
)
from dtdroc.signals import Signal


def _sig(arr):
    return Signal(np.asarray(arr, dtype=np.float64), 8000)


class TestGeigel:
    def test_matches_naive_loop(self):
        rng = np.random.default_rng(31)
        n, w = 400, 16
        far = rng.standard_normal(n)
        mic = rng.standard_normal(n)
        trace = geigel_statistic(_sig(far), _sig(mic), window=w)
        for i in rng.integers(0, n, 50):
            xmax = np.max(np.abs(far[max(0, i - w + 1):i + 1]))
            assert trace.values[i] == pytest.approx(abs(mic[i]) / xmax)
        assert trace.orientation == ABOVE

    def test_silent_far_sentinels(self):
        far = _sig(np.zeros(10))
        mic = _sig([0, 0, 1, 0, 0, 0, 0, 0, 0, 0])
        values = geigel_statistic(far, mic, window=4).values
        assert values[2] == np.inf
        assert values[0] == 0.0

    def test_scales_with_echo_path_gain(self):
        # a damping change moves the statistic proportionally: the Geigel
        # statistic is not scale-invariant in the echo path
        rng = np.random.default_rng(32)
        far = rng.standard_normal(500)
        t1 = geigel_statistic(_sig(far), _sig(0.5 * far), window=32).values
        t2 = geigel_statistic(_sig(far), _sig(0.05 * far), window=32).values
        assert np.allclose(t2[32:], 0.1 * t1[32:])


class TestXcorr:
    def test_matches_naive_loop(self):
        rng = np.random.default_rng(33)
        n, w = 300, 24
        far = rng.standard_normal(n)
        mic = 0.8 * far + 0.3 * rng.standard_normal(n)
        trace = xcorr_statistic(_sig(far), _sig(mic), window=w)
        for i in rng.integers(w, n, 40):
            xs, ds = far[i - w + 1:i + 1], mic[i - w + 1:i + 1]
            expected = abs(np.dot(xs, ds)) / np.sqrt(np.dot(xs, xs) * np.dot(ds, ds))
            assert trace.values[i] == pytest.approx(min(expected, 1.0), abs=1e-10)
        assert trace.orientation == BELOW

    def test_scale_invariant_in_echo_gain(self):
        rng = np.random.default_rng(34)
        far = rng.standard_normal(500)
        mic = 0.7 * far + 0.1 * rng.standard_normal(500)
        v1 = xcorr_statistic(_sig(far), _sig(mic), window=32).values
        v2 = xcorr_statistic(_sig(far), _sig(10.0 * mic), window=32).values
        assert np.allclose(v1, v2, atol=1e-10)

    def test_zero_energy_yields_one(self):
        values = xcorr_statistic(_sig(np.zeros(20)), _sig(np.zeros(20)), window=8).values
        assert np.all(values == 1.0)

    def test_bounded_by_one(self):
        rng = np.random.default_rng(35)
        far = rng.standard_normal(1000)
        values = xcorr_statistic(_sig(far), _sig(far), window=64).values
        assert np.all(values <= 1.0)


class TestDecide:
    def test_above_and_below(self):
        stat = StatisticTrace(np.array([0.1, 0.5, 0.9]), ABOVE)
        assert np.array_equal(decide(stat, 0.5), [0, 0, 1])
        stat = StatisticTrace(np.array([0.1, 0.5, 0.9]), BELOW)
        assert np.array_equal(decide(stat, 0.5), [1, 0, 0])

    def test_infinite_thresholds(self):
        stat = StatisticTrace(np.array([0.1, 0.9]), ABOVE)
        assert np.all(decide(stat, -np.inf) == 1)
        assert np.all(decide(stat, np.inf) == 0)
        stat = StatisticTrace(np.array([0.1, 0.9]), BELOW)
        assert np.all(decide(stat, np.inf) == 1)
        assert np.all(decide(stat, -np.inf) == 0)

    def test_hangover_extends(self):
        stat = StatisticTrace(np.array([1.0, 0, 0, 0, 0]), ABOVE)
        assert np.array_equal(decide(stat, 0.5, hangover=2), [1, 1, 1, 0, 0])

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(36)
        stat = StatisticTrace(rng.uniform(0, 1, 500), ABOVE)
        prev = None
        for t in np.linspace(0, 1, 11):
            hits = int(decide(stat, t).sum())
            if prev is not None:
                assert hits <= prev
            prev = hits


class TestEpcd:
    def test_constant(self):
        assert np.all(epcd_constant(5) == 1)

    def test_oracle(self):
        c = np.array([1, 1, 0, 0, 1], dtype=np.uint8)
        v = np.array([0, 1, 0, 1, 0], dtype=np.uint8)
        assert np.array_equal(epcd_oracle(c, v), [0, 1, 1, 1, 0])

    def test_error_corr_separates_change_from_doubletalk(self):
        rng = np.random.default_rng(37)
        n = 2000
        far = rng.standard_normal(n)
        err_change = 0.9 * far + 0.05 * rng.standard_normal(n)   # residual echoes far
        err_dbl = rng.standard_normal(n)                          # near-end dominated
        sc = epcd_error_corr(_sig(far), _sig(err_change)).values
        sd = epcd_error_corr(_sig(far), _sig(err_dbl)).values
        assert np.median(sc[256:]) > 0.9
        assert np.median(sd[256:]) < 0.3

    def test_epsilon_from_statistic_inverts_decide(self):
        stat = epcd_error_corr(_sig(np.ones(10)), _sig(np.ones(10)))
        eps = epsilon_from_statistic(stat, 0.5)
        assert np.array_equal(eps, 1 - decide(stat, 0.5))


class TestDetectorConfig:
    def test_kind_defaults(self):
        assert DetectorConfig(kind="geigel").window == 1024
        assert DetectorConfig(kind="xcorr").window == 256
        with pytest.raises(ValueError):
            DetectorConfig(kind="nlms")
        with pytest.raises(ValueError):
            DetectorConfig(kind="xcorr", window=1)

    def test_run_detector_dispatch(self):
        rng = np.random.default_rng(38)
        far, mic = _sig(rng.standard_normal(300)), _sig(rng.standard_normal(300))
        g = run_detector(DetectorConfig(kind="geigel", window=8), far, mic)
        x = run_detector(DetectorConfig(kind="xcorr", window=8), far, mic)
        assert g.orientation == ABOVE
        assert x.orientation == BELOW

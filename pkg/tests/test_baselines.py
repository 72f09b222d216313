import math

import numpy as np
import pytest

from waterx import (
    DegenerateHistogramError,
    GmmParams,
    NoSeparatingRootError,
    NoValleyError,
    SIGMA_FLOOR,
    em_fit,
    gmm_bayes_threshold,
    kmeans2_threshold,
    otsu_linear,
    synth_histogram,
    valley_threshold,
)

from conftest import mk_hist, random_lattice_hist


class TestValley:
    def test_obvious_valley(self):
        h = mk_hist([0.0, 1.0, 2.0], [5, 1, 5], 1.0)
        r = valley_threshold(h, window=1)
        assert r.threshold == 1.0
        assert r.objective == 1.0

    def test_unimodal_is_error(self):
        h = mk_hist([0.0, 1.0, 2.0, 3.0], [1, 2, 3, 4], 1.0)
        with pytest.raises(NoValleyError):
            valley_threshold(h, window=1)
        with pytest.raises(NoValleyError):
            valley_threshold(h, window=3)

    def test_flat_valley_takes_first_minimum(self):
        h = mk_hist([0.0, 1.0, 2.0, 3.0, 4.0], [5, 1, 1, 1, 5], 1.0)
        r = valley_threshold(h, window=1)
        assert r.threshold == 1.0

    def test_between_two_highest_peaks(self):
        # three peaks; the valley must lie between the two TALLEST
        h = mk_hist(np.arange(7.0), [9, 1, 8, 2, 3, 2, 3], 1.0)
        r = valley_threshold(h, window=1)
        assert r.threshold == 1.0

    def test_smoothed_bimodal_valley_strictly_between(self, rng):
        def brute_peaks(counts):
            # plateau-aware local maxima, ends open
            peaks, i = [], 0
            while i < len(counts):
                j = i
                while j + 1 < len(counts) and counts[j + 1] == counts[i]:
                    j += 1
                left = counts[i - 1] if i > 0 else -np.inf
                right = counts[j + 1] if j + 1 < len(counts) else -np.inf
                if counts[i] > left and counts[i] > right:
                    peaks.append(i)
                i = j + 1
            return peaks

        from waterx import smooth_histogram

        checked = 0
        for _ in range(20):
            n = 21
            counts = np.concatenate([
                rng.integers(50, 100, 7),
                rng.integers(1, 10, 7),
                rng.integers(50, 100, 7),
            ]).astype(float)
            h = mk_hist((np.arange(n) + 0.5) * 0.5, counts, 0.5)
            try:
                r = valley_threshold(h, window=3)
            except NoValleyError:
                continue
            hs = smooth_histogram(h, 3)
            peaks = brute_peaks(hs.counts.tolist())
            top_two = sorted(sorted(peaks, key=lambda i: -hs.counts[i])[:2])
            ti = int(np.searchsorted(h.values, r.threshold))
            assert top_two[0] < ti < top_two[1]
            checked += 1
        assert checked > 10


class TestEmFit:
    def test_round_trip_recovery(self):
        g = GmmParams(0.4, 0.6, -18.0, -11.0, 1.2, 1.8)
        h = synth_histogram(g, 10 ** 6, 0.5, seed=99)
        fit = em_fit(h)
        assert fit.converged
        assert fit.mu1 == pytest.approx(-18.0, abs=0.1)
        assert fit.mu2 == pytest.approx(-11.0, abs=0.1)
        assert fit.sigma1 == pytest.approx(1.2, abs=0.1)
        assert fit.sigma2 == pytest.approx(1.8, abs=0.1)
        assert fit.w1 == pytest.approx(0.4, abs=0.02)
        assert fit.w2 == pytest.approx(0.6, abs=0.02)

    def test_log_likelihood_monotone(self):
        g = GmmParams(0.4, 0.6, -18.0, -11.0, 1.2, 1.8)
        h = synth_histogram(g, 10 ** 5, 0.5, seed=7)
        fit = em_fit(h)
        ll = np.array(fit.log_likelihoods)
        assert (np.diff(ll) >= -1e-10).all()
        assert fit.log_likelihood == ll[-1]

    def test_two_spikes_collapse_to_floor(self):
        h = mk_hist([-20.0, -10.0], [50, 50], 10.0)
        fit = em_fit(h)
        assert fit.mu1 == pytest.approx(-20.0, abs=1e-9)
        assert fit.mu2 == pytest.approx(-10.0, abs=1e-9)
        assert fit.sigma1 == SIGMA_FLOOR
        assert fit.sigma2 == SIGMA_FLOOR
        assert fit.w1 == pytest.approx(0.5, abs=1e-12)

    def test_zero_iterations_returns_otsu_init(self):
        h = mk_hist([-20.0, -10.0], [50, 50], 10.0)
        fit = em_fit(h, max_iter=0)
        assert not fit.converged
        assert fit.iterations == 0
        init = otsu_linear(h).stats
        assert fit.mu1 == init.mu0
        assert fit.mu2 == init.mu1
        assert fit.w1 == init.omega0

    def test_degenerate_error(self):
        with pytest.raises(DegenerateHistogramError):
            em_fit(mk_hist([1.0], [5], 0.5))


class TestGmmBayes:
    def test_symmetric_midpoint(self):
        g = GmmParams(0.5, 0.5, -18.0, -12.0, 1.0, 1.0)
        assert gmm_bayes_threshold(g).threshold == -15.0

    def test_symmetric_family(self, rng):
        for _ in range(20):
            a = float(rng.uniform(-30, -10))
            b = a + float(rng.uniform(0.5, 15))
            s = float(rng.uniform(0.2, 3))
            g = GmmParams(0.5, 0.5, a, b, s, s)
            assert gmm_bayes_threshold(g).threshold == pytest.approx(
                (a + b) / 2, rel=1e-12)

    def test_asymmetric_against_bisection(self):
        g = GmmParams(0.4, 0.6, -18.0, -11.0, 1.2, 1.8)
        t = gmm_bayes_threshold(g).threshold

        def diff(x):
            l1 = math.log(g.w1) - 0.5 * ((x - g.mu1) / g.sigma1) ** 2 \
                - math.log(g.sigma1)
            l2 = math.log(g.w2) - 0.5 * ((x - g.mu2) / g.sigma2) ** 2 \
                - math.log(g.sigma2)
            return l1 - l2

        lo, hi = g.mu1, g.mu2
        assert diff(lo) > 0 > diff(hi)
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if diff(mid) > 0:
                lo = mid
            else:
                hi = mid
        assert t == pytest.approx(0.5 * (lo + hi), abs=1e-9)

    def test_densities_agree_at_root(self, rng):
        for _ in range(30):
            w1 = float(rng.uniform(0.2, 0.8))
            g = GmmParams(w1, 1 - w1,
                          float(rng.uniform(-25, -15)),
                          float(rng.uniform(-12, -5)),
                          float(rng.uniform(0.5, 2.5)),
                          float(rng.uniform(0.5, 2.5)))
            try:
                t = gmm_bayes_threshold(g).threshold
            except NoSeparatingRootError:
                continue
            d1 = g.w1 * math.exp(-0.5 * ((t - g.mu1) / g.sigma1) ** 2) \
                / (g.sigma1 * math.sqrt(2 * math.pi))
            d2 = g.w2 * math.exp(-0.5 * ((t - g.mu2) / g.sigma2) ** 2) \
                / (g.sigma2 * math.sqrt(2 * math.pi))
            assert d1 == pytest.approx(d2, rel=1e-9)

    def test_no_root_under_extreme_skew(self):
        g = GmmParams(1e-6, 1 - 1e-6, -18.0, -11.0, 1.2, 1.8)
        with pytest.raises(NoSeparatingRootError):
            gmm_bayes_threshold(g)

    def test_identical_means_error(self):
        g = GmmParams(0.5, 0.5, -15.0, -15.0, 1.0, 1.0)
        with pytest.raises(NoSeparatingRootError):
            gmm_bayes_threshold(g)


class TestGmmParams:
    def test_canonical_order(self):
        g = GmmParams(0.3, 0.7, -5.0, -20.0, 2.0, 1.0)
        assert g.mu1 == -20.0 and g.mu2 == -5.0
        assert g.w1 == 0.7 and g.sigma1 == 1.0

    def test_weight_sum_enforced(self):
        with pytest.raises(ValueError):
            GmmParams(0.5, 0.6, -20.0, -10.0, 1.0, 1.0)

    def test_sigma_floor_enforced(self):
        with pytest.raises(ValueError):
            GmmParams(0.5, 0.5, -20.0, -10.0, 1e-6, 1.0)


class TestKmeans:
    def test_two_spikes(self):
        h = mk_hist([-20.0, -10.0], [50, 50], 10.0)
        r = kmeans2_threshold(h)
        assert r.threshold == -10.0
        assert r.details["center_low"] == -20.0
        assert r.details["center_high"] == -10.0
        assert r.objective == 0.0

    def test_never_beats_otsu(self, rng):
        for _ in range(50):
            h = random_lattice_hist(rng)
            km = kmeans2_threshold(h)
            ot = otsu_linear(h)
            otsu_intra = ot.stats.v0 + ot.stats.v1
            assert km.objective >= otsu_intra - 1e-12 * ot.stats.v_total

    def test_degenerate_error(self):
        with pytest.raises(DegenerateHistogramError):
            kmeans2_threshold(mk_hist([1.0], [5], 0.5))

    def test_deterministic(self, rng):
        h = random_lattice_hist(rng)
        a = kmeans2_threshold(h, seed=1)
        b = kmeans2_threshold(h, seed=1)
        assert a.threshold == b.threshold
        assert a.details == b.details

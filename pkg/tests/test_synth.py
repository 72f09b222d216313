import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ndtr

from waterx import (
    BlobSet,
    Disc,
    GmmParams,
    HalfPlane,
    bayes_error,
    classify,
    gmm_bayes_threshold,
    parse_geometry,
    sample_mixture,
    synth_histogram,
    synth_scene,
)
from waterx.baselines import _weighted_density_crossings

STUDY_MIX = GmmParams(0.4, 0.6, -18.0, -11.0, 1.2, 1.8)


def mixture_cdf(g, x):
    return g.w1 * ndtr((x - g.mu1) / g.sigma1) + g.w2 * ndtr((x - g.mu2) / g.sigma2)


class TestSynthHistogram:
    def test_same_seed_identical(self):
        a = synth_histogram(STUDY_MIX, 5000, 0.5, seed=4)
        b = synth_histogram(STUDY_MIX, 5000, 0.5, seed=4)
        assert a == b
        c = synth_histogram(STUDY_MIX, 5000, 0.5, seed=5)
        assert a != c

    def test_mass_below_midpoint_matches_cdf(self):
        g = STUDY_MIX
        h = synth_histogram(g, 10 ** 6, 0.5, seed=21)
        mid = 0.5 * (g.mu1 + g.mu2)
        frac = h.counts[h.values < mid].sum() / h.total_count
        # bin straddling: the bin holding the midpoint is fully counted one
        # way, so compare against the CDF at the nearest bin edge
        edge = math.floor(mid / 0.5) * 0.5
        assert frac == pytest.approx(mixture_cdf(g, edge), abs=0.005)

    def test_single_draw(self):
        h = synth_histogram(STUDY_MIX, 1, 0.5, seed=0)
        assert h.n_bins == 1
        assert h.total_count == 1

    def test_bad_n(self):
        with pytest.raises(ValueError):
            synth_histogram(STUDY_MIX, 0, 0.5, seed=0)


class TestSampleMixture:
    def test_component_fractions(self):
        rng = np.random.default_rng(8)
        x, low = sample_mixture(STUDY_MIX, 200_000, rng)
        assert low.mean() == pytest.approx(0.4, abs=0.005)
        assert x[low].mean() == pytest.approx(-18.0, abs=0.02)
        assert x[~low].mean() == pytest.approx(-11.0, abs=0.02)
        assert x[low].std() == pytest.approx(1.2, abs=0.02)


class TestScene:
    def test_disc_truth_count(self):
        raster, truth = synth_scene(STUDY_MIX, 50, 40, Disc(20, 25, 10),
                                    cellsize=10.0, seed=1)
        expected = 0
        for r in range(40):
            for c in range(50):
                if (r - 20) ** 2 + (c - 25) ** 2 <= 100:
                    expected += 1
        assert int((truth.cells == 1).sum()) == expected
        assert raster.header == truth.header

    def test_same_seed_identical_raster(self):
        a, _ = synth_scene(STUDY_MIX, 30, 30, Disc(15, 15, 8), 10.0, seed=9)
        b, _ = synth_scene(STUDY_MIX, 30, 30, Disc(15, 15, 8), 10.0, seed=9)
        assert np.array_equal(a.values, b.values)

    def test_separable_mixture_classifies_exactly(self):
        g = GmmParams(0.5, 0.5, -30.0, -5.0, 1e-3, 1e-3)
        raster, truth = synth_scene(g, 40, 40, HalfPlane("row", 20), 10.0,
                                    seed=2)
        cmap = classify(raster, 0.5 * (g.mu1 + g.mu2))
        assert np.array_equal(cmap.cells, truth.cells)

    def test_geometry_out_of_bounds(self):
        with pytest.raises(ValueError):
            synth_scene(STUDY_MIX, 20, 20, Disc(10, 10, 15), 10.0, seed=0)
        with pytest.raises(ValueError):
            synth_scene(STUDY_MIX, 20, 20, HalfPlane("row", 40), 10.0, seed=0)

    def test_blob_set_union(self):
        geometry = BlobSet((Disc(5, 5, 2), Disc(14, 14, 3)))
        _, truth = synth_scene(STUDY_MIX, 20, 20, geometry, 10.0, seed=0)
        water = truth.cells == 1
        assert water[5, 5] and water[14, 14]
        assert not water[10, 10]

    def test_empirical_error_near_bayes(self):
        # classification at the mixture's own crossing converges on the
        # Bayes error as the scene grows
        g = STUDY_MIX
        raster, truth = synth_scene(g, 400, 400, HalfPlane("row", 240),
                                    10.0, seed=6)
        # water fraction of the scene differs from g.w1; rescale mixture
        w1 = (truth.cells == 1).mean()
        g_scene = GmmParams(w1, 1 - w1, g.mu1, g.mu2, g.sigma1, g.sigma2)
        t = gmm_bayes_threshold(g_scene).threshold
        cmap = classify(raster, t)
        err = float((cmap.cells != truth.cells).mean())
        expected = bayes_error(g_scene)
        stderr = math.sqrt(expected * (1 - expected) / truth.cells.size)
        assert abs(err - expected) <= 3 * stderr


class TestBayesError:
    def test_identical_components(self):
        g = GmmParams(0.3, 0.7, -15.0, -15.0, 1.5, 1.5)
        assert bayes_error(g) == pytest.approx(0.3, abs=1e-12)

    def test_well_separated(self):
        g = GmmParams(0.5, 0.5, -20.0, -10.0, 1.0, 1.0)  # 10 sigma apart
        assert bayes_error(g) < 1e-6

    def test_quadrature_oracle(self):
        g = STUDY_MIX

        def min_density(t):
            f1 = g.w1 * math.exp(-0.5 * ((t - g.mu1) / g.sigma1) ** 2) \
                / (g.sigma1 * math.sqrt(2 * math.pi))
            f2 = g.w2 * math.exp(-0.5 * ((t - g.mu2) / g.sigma2) ** 2) \
                / (g.sigma2 * math.sqrt(2 * math.pi))
            return min(f1, f2)

        crossings = _weighted_density_crossings(g)
        val, err = quad(min_density, g.mu1 - 40 * g.sigma1,
                        g.mu2 + 40 * g.sigma2, points=crossings,
                        limit=200, epsabs=1e-13, epsrel=1e-13)
        assert err < 1e-10
        assert bayes_error(g) == pytest.approx(val, abs=1e-9)

    def test_no_rule_beats_it(self, rng):
        for _ in range(20):
            w1 = float(rng.uniform(0.1, 0.9))
            g = GmmParams(w1, 1 - w1,
                          float(rng.uniform(-25, -15)),
                          float(rng.uniform(-14, -5)),
                          float(rng.uniform(0.5, 2.5)),
                          float(rng.uniform(0.5, 2.5)))
            best = bayes_error(g)
            for t in np.linspace(-30, 0, 301):
                err = g.w1 * (1 - ndtr((t - g.mu1) / g.sigma1)) \
                    + g.w2 * ndtr((t - g.mu2) / g.sigma2)
                assert err >= best - 1e-12


class TestParseGeometry:
    def test_forms(self):
        assert parse_geometry("disc:10,20,5") == Disc(10, 20, 5)
        assert parse_geometry("halfplane:row,7") == HalfPlane("row", 7)
        assert parse_geometry("blobs:1,2,3;4,5,6") == BlobSet(
            (Disc(1, 2, 3), Disc(4, 5, 6)))

    def test_bad_specs(self):
        for bad in ("disc:1,2", "halfplane:diag,3", "circle:1,2,3", "disc"):
            with pytest.raises(ValueError):
                parse_geometry(bad)

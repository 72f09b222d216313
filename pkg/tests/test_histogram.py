import numpy as np
import pytest

from waterx import (
    EmptyInputError,
    Histogram,
    IncompatibleHistogramError,
    build_histogram,
    merge_histograms,
    read_histogram_csv,
    smooth_histogram,
    write_histogram_csv,
)

from conftest import mk_hist, random_lattice_hist


class TestBuild:
    def test_interval_rule(self):
        # -20.1 and -20.4 share the bin [-20.5, -20.0) centered at -20.25;
        # -10.0 sits in [-10.0, -9.5) centered at -9.75.
        h = build_histogram([-20.1, -20.4, -10.0], 0.5)
        assert h.values[0] == -20.25
        assert h.values[-1] == -9.75
        assert h.n_bins == 22
        assert h.counts[0] == 2
        assert h.counts[-1] == 1
        assert h.counts[1:-1].sum() == 0  # interior zeros materialized
        assert h.total_count == 3

    def test_single_sample(self):
        h = build_histogram([7.0], 0.5)
        assert h.n_bins == 1
        assert h.values[0] == 7.25
        assert h.counts[0] == 1
        assert h.densities.sum() == 1.0

    def test_all_nodata_is_error(self):
        with pytest.raises(EmptyInputError):
            build_histogram([-9999.0, -9999.0], 0.5, nodata=-9999.0)
        with pytest.raises(EmptyInputError):
            build_histogram([np.nan, np.inf, -np.inf], 0.5)

    def test_nonpositive_width_is_error(self):
        with pytest.raises(ValueError):
            build_histogram([1.0], 0.0)
        with pytest.raises(ValueError):
            build_histogram([1.0], -0.5)

    def test_skipped_tally(self):
        h = build_histogram([1.0, np.nan, -9999.0, 2.0, np.inf], 0.5,
                            nodata=-9999.0)
        assert h.skipped == 3
        assert h.total_count == 2

    def test_boundary_sample_goes_to_upper_interval(self):
        # v on the boundary k*w belongs to bin k, not k-1
        h = build_histogram([-10.0], 0.5)
        assert h.values[0] == -9.75

    def test_density_normalization(self, rng):
        for _ in range(50):
            h = random_lattice_hist(rng)
            assert abs(h.densities.sum() - 1.0) <= 1e-12


class TestValidation:
    def test_spacing_enforced(self):
        with pytest.raises(ValueError):
            Histogram(0.5, np.array([0.0, 0.5, 1.2]), np.array([1.0, 1, 1]))

    def test_strictly_increasing(self):
        with pytest.raises(ValueError):
            Histogram(0.5, np.array([1.0, 0.5]), np.array([1.0, 1]))

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            Histogram(0.5, np.array([0.25, 0.75]), np.array([1.0, -1]))

    def test_immutable_arrays(self):
        h = mk_hist([0.25, 0.75], [1, 2], 0.5)
        with pytest.raises(ValueError):
            h.counts[0] = 5


class TestMerge:
    def test_identity_with_empty(self):
        h = build_histogram([1.0, 2.0, 2.2], 0.5)
        empty = Histogram(0.5, np.array([]), np.array([]))
        assert merge_histograms(h, empty) == h
        assert merge_histograms(empty, h) == h

    def test_commutative(self, rng):
        for _ in range(20):
            a = random_lattice_hist(rng)
            b = random_lattice_hist(rng)
            assert merge_histograms(a, b) == merge_histograms(b, a)

    def test_same_bin_counts_add(self):
        a = build_histogram([7.0, 7.1, 7.2], 0.5)
        b = build_histogram([7.05] * 4, 0.5)
        m = merge_histograms(a, b)
        assert m.n_bins == 1
        assert m.counts[0] == 7

    def test_width_mismatch(self):
        a = build_histogram([1.0], 0.5)
        b = build_histogram([1.0], 0.25)
        with pytest.raises(IncompatibleHistogramError):
            merge_histograms(a, b)

    def test_lattice_mismatch(self):
        a = mk_hist([0.0, 1.0], [1, 1], 1.0)
        b = mk_hist([0.4, 1.4], [1, 1], 1.0)
        with pytest.raises(IncompatibleHistogramError):
            merge_histograms(a, b)

    def test_associative(self, rng):
        for _ in range(20):
            a = random_lattice_hist(rng)
            b = random_lattice_hist(rng)
            c = random_lattice_hist(rng)
            left = merge_histograms(merge_histograms(a, b), c)
            right = merge_histograms(a, merge_histograms(b, c))
            assert left == right

    def test_chunked_equivalence_bitexact(self, rng):
        for _ in range(20):
            samples = rng.normal(-15, 3, size=500)
            samples[rng.random(500) < 0.05] = np.nan
            whole = build_histogram(samples, 0.5)
            cuts = np.sort(rng.choice(np.arange(1, 500), size=3, replace=False))
            parts = np.split(samples, cuts)
            merged = None
            for part in parts:
                h = build_histogram(part, 0.5)
                merged = h if merged is None else merge_histograms(merged, h)
            assert merged == whole
            assert np.array_equal(merged.values, whole.values)


class TestSmooth:
    def test_window_one_is_identity(self):
        h = build_histogram([1.0, 2.0, 2.1], 0.5)
        assert smooth_histogram(h, 1) == h

    def test_reflect_padding_hand_case(self):
        # reflect pad of [0, 9, 0] is [9, 0, 9, 0, 9]; window-3 averages
        # are (9+0+9)/3, (0+9+0)/3, (9+0+9)/3
        h = mk_hist([0.0, 1.0, 2.0], [0, 9, 0], 1.0)
        s = smooth_histogram(h, 3)
        assert s.counts.tolist() == [6.0, 3.0, 6.0]

    def test_matches_bruteforce_reflect(self, rng):
        for _ in range(20):
            h = random_lattice_hist(rng, n_bins=int(rng.integers(3, 30)))
            window = int(rng.choice([3, 5, 7]))
            if window > h.n_bins:
                continue
            pad = window // 2
            padded = np.pad(h.counts, pad, mode="reflect")
            expected = np.array([
                padded[i:i + window].sum() / window for i in range(h.n_bins)
            ])
            s = smooth_histogram(h, window)
            np.testing.assert_allclose(s.counts, expected, rtol=1e-12)

    def test_window_errors(self):
        h = mk_hist([0.0, 1.0, 2.0], [1, 2, 3], 1.0)
        with pytest.raises(ValueError):
            smooth_histogram(h, 2)
        with pytest.raises(ValueError):
            smooth_histogram(h, 0)
        with pytest.raises(ValueError):
            smooth_histogram(h, 5)

    def test_preserves_values_and_count(self, rng):
        h = random_lattice_hist(rng, n_bins=15)
        s = smooth_histogram(h, 5)
        assert s.n_bins == h.n_bins
        assert np.array_equal(s.values, h.values)


class TestCsv:
    def test_round_trip(self, tmp_path, rng):
        h = random_lattice_hist(rng, n_bins=12)
        path = tmp_path / "h.csv"
        write_histogram_csv(h, path)
        back = read_histogram_csv(path)
        assert back.bin_width == h.bin_width
        assert np.array_equal(back.values, h.values)
        assert np.array_equal(back.counts, h.counts)

    def test_header_and_order(self, tmp_path):
        h = mk_hist([0.25, 0.75], [3, 4], 0.5)
        path = tmp_path / "h.csv"
        write_histogram_csv(h, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "bin_value,count,density"
        vals = [float(line.split(",")[0]) for line in lines[1:]]
        assert vals == sorted(vals)

    def test_single_bin_needs_width(self, tmp_path):
        h = mk_hist([0.25], [3], 0.5)
        path = tmp_path / "h.csv"
        write_histogram_csv(h, path)
        from waterx import CsvFormatError
        with pytest.raises(CsvFormatError):
            read_histogram_csv(path)
        back = read_histogram_csv(path, bin_width=0.5)
        assert back == h

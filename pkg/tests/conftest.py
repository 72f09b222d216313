import numpy as np
import pytest

from waterx import ClassMap, Histogram


def mk_hist(values, counts, width=None, skipped=0) -> Histogram:
    values = np.asarray(values, dtype=np.float64)
    if width is None:
        width = float(values[1] - values[0]) if values.size > 1 else 1.0
    return Histogram(width, values, np.asarray(counts, dtype=np.float64),
                     skipped=skipped)


def mk_map(cells, cellsize=10.0) -> ClassMap:
    cells = np.asarray(cells, dtype=np.uint8)
    return ClassMap(cells.shape[1], cells.shape[0], 0.0, 0.0, cellsize, cells)


def random_lattice_hist(rng, n_bins=None, width=0.5, allow_zeros=True) -> Histogram:
    """Random histogram on the zero-anchored center lattice."""
    if n_bins is None:
        n_bins = int(rng.integers(2, 40))
    k0 = int(rng.integers(-100, 100))
    vals = (np.arange(k0, k0 + n_bins, dtype=np.float64) + 0.5) * width
    counts = rng.integers(0, 50, n_bins).astype(np.float64)
    if allow_zeros:
        counts[rng.random(n_bins) < 0.2] = 0.0
    # keep at least two occupied bins
    if np.count_nonzero(counts) < 2:
        counts[0] = 1.0
        counts[-1] = 2.0
    return Histogram(width, vals, counts)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)

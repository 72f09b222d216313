"""Binned densities of raster values and the operations on them.

The histogram is the hypothesis space for threshold selection: every bin
value is a candidate threshold, and every selector in this package works
on the (value, count) lattice built here.  Bins are equally spaced; the
lattice produced by :func:`build_histogram` is anchored at zero so that
binning is independent of how the input samples were partitioned, which
makes :func:`merge_histograms` an exact reduction for chunked builds.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import CsvFormatError, EmptyInputError, IncompatibleHistogramError

__all__ = [
    "Histogram",
    "build_histogram",
    "merge_histograms",
    "smooth_histogram",
    "write_histogram_csv",
    "read_histogram_csv",
]

# Maximum admissible offset, in widths, between a bin value and the lattice
# implied by the first bin.  Anything larger is a different lattice.
_LATTICE_REL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Histogram:
    """Equally spaced bins of sample values.

    Parameters
    ----------
    bin_width : float
        Spacing between consecutive bin values, > 0.
    values : ndarray
        Representative value of each bin, strictly ascending, spaced by
        ``bin_width`` to within ulp-level rounding.
    counts : ndarray
        Per-bin tallies, >= 0.  Integral for histograms built from
        samples; real-valued after smoothing.
    skipped : int
        Number of input samples dropped as nodata or non-finite.
    """

    bin_width: float
    values: np.ndarray
    counts: np.ndarray
    skipped: int = 0

    def __post_init__(self):
        w = float(self.bin_width)
        if not w > 0:
            raise ValueError(f"bin_width must be > 0, got {self.bin_width}")
        values = np.asarray(self.values, dtype=np.float64).copy()
        counts = np.asarray(self.counts, dtype=np.float64).copy()
        if values.ndim != 1 or counts.ndim != 1:
            raise ValueError("values and counts must be one-dimensional")
        if values.shape != counts.shape:
            raise ValueError("values and counts must have equal length")
        if not np.isfinite(values).all():
            raise ValueError("bin values must be finite")
        if not np.isfinite(counts).all() or (counts < 0).any():
            raise ValueError("counts must be finite and non-negative")
        if values.size > 1:
            if not (np.diff(values) > 0).all():
                raise ValueError("bin values must be strictly increasing")
            ref = values[0] + np.arange(values.size) * w
            tol = 4.0 * np.spacing(np.abs(values).max() + w)
            if np.abs(values - ref).max() > tol:
                raise ValueError("bin values do not lie on an arithmetic "
                                 f"lattice of width {w}")
        values.flags.writeable = False
        counts.flags.writeable = False
        object.__setattr__(self, "bin_width", w)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "skipped", int(self.skipped))

    @property
    def n_bins(self) -> int:
        return self.values.size

    @property
    def total_count(self) -> float:
        """Sum of all counts (integral when built from samples)."""
        return float(self.counts.sum())

    @property
    def densities(self) -> np.ndarray:
        """Per-bin probability mass, summing to 1."""
        total = self.counts.sum()
        if total <= 0:
            raise ValueError("histogram has no mass")
        return self.counts / total

    @property
    def bins(self) -> list[tuple[float, float]]:
        """Ordered (value, count) pairs."""
        return list(zip(self.values.tolist(), self.counts.tolist()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Histogram):
            return NotImplemented
        return (
            self.bin_width == other.bin_width
            and self.skipped == other.skipped
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.counts, other.counts)
        )

    def __repr__(self) -> str:
        if self.n_bins == 0:
            return f"Histogram(width={self.bin_width}, empty)"
        return (
            f"Histogram(width={self.bin_width}, bins={self.n_bins}, "
            f"range=({self.values[0]:g}, {self.values[-1]:g}), "
            f"total={self.total_count:g})"
        )


def build_histogram(values, bin_width: float, nodata: float | None = None) -> Histogram:
    """Bin samples onto the zero-anchored lattice of the given width.

    Each finite, non-nodata sample ``v`` lands in the bin whose interval
    ``[k*w, (k+1)*w)`` contains it; the bin's representative value is the
    interval center ``(k + 0.5)*w``.  Interior bins between the lowest and
    highest occupied bins are materialized with count 0.  Nodata and
    non-finite samples are skipped and tallied in ``skipped``.

    Raises
    ------
    EmptyInputError
        If no usable sample remains.
    ValueError
        If ``bin_width`` is not positive.
    """
    if not bin_width > 0:
        raise ValueError(f"bin_width must be > 0, got {bin_width}")
    w = float(bin_width)
    arr = np.asarray(values, dtype=np.float64).ravel()
    keep = np.isfinite(arr)
    if nodata is not None:
        keep &= arr != float(nodata)
    data = arr[keep]
    skipped = int(arr.size - data.size)
    if data.size == 0:
        raise EmptyInputError("all samples are nodata or non-finite")

    k = np.floor(data / w).astype(np.int64)
    # floor(v / w) can be off by one ulp near interval boundaries; repair
    # against the exact float intervals.
    k -= (data < k * w).astype(np.int64)
    k += (data >= (k + 1) * w).astype(np.int64)

    k0 = int(k.min())
    k1 = int(k.max())
    counts = np.bincount(k - k0, minlength=k1 - k0 + 1).astype(np.float64)
    vals = (np.arange(k0, k1 + 1, dtype=np.float64) + 0.5) * w
    return Histogram(w, vals, counts, skipped=skipped)


def _center_anchor(h: Histogram) -> int | None:
    """Lattice index of the first bin if values are zero-anchored centers."""
    if h.n_bins == 0:
        return None
    k = round(float(h.values[0]) / h.bin_width - 0.5)
    if (k + 0.5) * h.bin_width == h.values[0]:
        return int(k)
    return None


def merge_histograms(a: Histogram, b: Histogram) -> Histogram:
    """Add counts bin-wise over the union of two aligned bin ranges.

    Associative and commutative (exactly so for integral counts), which
    makes it the designated reduction for data-parallel accumulation.

    Raises
    ------
    IncompatibleHistogramError
        If widths differ or the two histograms sit on different lattices.
    """
    if a.bin_width != b.bin_width:
        raise IncompatibleHistogramError(
            f"bin widths differ: {a.bin_width} vs {b.bin_width}")
    if a.n_bins == 0 and b.n_bins == 0:
        return Histogram(a.bin_width, a.values, a.counts, a.skipped + b.skipped)
    if a.n_bins == 0:
        return Histogram(b.bin_width, b.values, b.counts, a.skipped + b.skipped)
    if b.n_bins == 0:
        return Histogram(a.bin_width, a.values, a.counts, a.skipped + b.skipped)

    w = a.bin_width
    d = (float(b.values[0]) - float(a.values[0])) / w
    rd = round(d)
    if abs(d - rd) > _LATTICE_REL_TOL:
        raise IncompatibleHistogramError(
            f"histograms are on different lattices (offset {d} widths)")

    lo = min(0, rd)
    hi = max(a.n_bins, rd + b.n_bins)
    counts = np.zeros(hi - lo, dtype=np.float64)
    counts[-lo:-lo + a.n_bins] += a.counts
    counts[rd - lo:rd - lo + b.n_bins] += b.counts

    ka = _center_anchor(a)
    kb = _center_anchor(b)
    if ka is not None and kb is not None and kb == ka + rd:
        # Both inputs carry zero-anchored centers: recompute every union
        # value the same way build_histogram does, so chunked builds merge
        # bit-for-bit.
        vals = (np.arange(lo, hi, dtype=np.float64) + ka + 0.5) * w
    else:
        vals = float(a.values[0]) + np.arange(lo, hi, dtype=np.float64) * w
        vals[-lo:-lo + a.n_bins] = a.values
        vals[rd - lo:rd - lo + b.n_bins] = b.values
    return Histogram(w, vals, counts, a.skipped + b.skipped)


def smooth_histogram(h: Histogram, window: int) -> Histogram:
    """Centered moving average of the counts with reflect padding.

    Bin values are unchanged; output counts are real-valued.  ``window``
    must be odd, >= 1 and no larger than the number of bins.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be an odd integer >= 1, got {window}")
    if window > h.n_bins:
        raise ValueError(
            f"window {window} exceeds the number of bins {h.n_bins}")
    if window == 1:
        return h
    pad = window // 2
    padded = np.pad(h.counts, pad, mode="reflect")
    sums = np.convolve(padded, np.ones(window), mode="valid")
    return Histogram(h.bin_width, h.values, sums / window, h.skipped)


def write_histogram_csv(h: Histogram, path) -> None:
    """Write ``bin_value,count,density`` rows, ascending, round-trippable."""
    total = h.counts.sum()
    with open(path, "w", newline="") as f:
        f.write("bin_value,count,density\n")
        for v, c in zip(h.values.tolist(), h.counts.tolist()):
            d = c / total if total > 0 else 0.0
            f.write(f"{v!r},{c!r},{d!r}\n")


def read_histogram_csv(path, bin_width: float | None = None) -> Histogram:
    """Read a histogram written by :func:`write_histogram_csv`.

    The bin width is inferred from the value spacing; it must be passed
    explicitly for single-bin files.  The skipped-sample tally is not part
    of the CSV and resets to 0.
    """
    values: list[float] = []
    counts: list[float] = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [s.strip() for s in header] != ["bin_value", "count", "density"]:
            raise CsvFormatError(f"{path}: expected header 'bin_value,count,density'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise CsvFormatError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                values.append(float(row[0]))
                counts.append(float(row[1]))
            except ValueError as e:
                raise CsvFormatError(f"{path}:{lineno}: {e}") from None
    if not values:
        raise CsvFormatError(f"{path}: no histogram rows")
    if bin_width is None:
        if len(values) < 2:
            raise CsvFormatError(
                f"{path}: single-bin file needs an explicit bin_width")
        bin_width = values[1] - values[0]
    try:
        return Histogram(bin_width, np.array(values), np.array(counts))
    except ValueError as e:
        raise CsvFormatError(f"{path}: {e}") from None

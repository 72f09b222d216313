"""Synthetic ground truth: mixture samples, labeled scenes, Bayes error.

Everything here is deterministic given a seed.  Normal deviates come
from inverse-CDF transformation of PCG64 uniforms (``ndtri`` applied to
integers drawn on (0, 2^53)), a documented transform that does not
depend on any library's rejection sampler.  Parallel generation, if ever
added, must derive one child seed per chunk from the master seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .baselines import GmmParams, _weighted_density_crossings
from .histogram import Histogram, build_histogram
from .raster import ClassMap, Raster

__all__ = [
    "Disc",
    "HalfPlane",
    "BlobSet",
    "parse_geometry",
    "sample_mixture",
    "synth_histogram",
    "synth_scene",
    "bayes_error",
]

_DEFAULT_NODATA = -9999.0


@dataclass(frozen=True)
class Disc:
    """Filled disc in cell coordinates: water iff (r,c) within radius."""

    row: float
    col: float
    radius: float

    def mask(self, nrows: int, ncols: int) -> np.ndarray:
        rr, cc = np.ogrid[0:nrows, 0:ncols]
        return ((rr - self.row) ** 2 + (cc - self.col) ** 2
                <= self.radius ** 2)

    def validate(self, nrows: int, ncols: int) -> None:
        if self.radius <= 0:
            raise ValueError(f"disc radius must be > 0, got {self.radius}")
        if (self.row - self.radius < 0 or self.row + self.radius > nrows - 1
                or self.col - self.radius < 0
                or self.col + self.radius > ncols - 1):
            raise ValueError("disc does not fit inside the grid")


@dataclass(frozen=True)
class HalfPlane:
    """Water where the row (or column) index is >= ``index``."""

    axis: str  # "row" or "col"
    index: int

    def __post_init__(self):
        if self.axis not in ("row", "col"):
            raise ValueError(f"half-plane axis must be 'row' or 'col', "
                             f"got {self.axis!r}")

    def mask(self, nrows: int, ncols: int) -> np.ndarray:
        if self.axis == "row":
            line = (np.arange(nrows) >= self.index)[:, None]
        else:
            line = (np.arange(ncols) >= self.index)[None, :]
        return np.broadcast_to(line, (nrows, ncols)).copy()

    def validate(self, nrows: int, ncols: int) -> None:
        limit = nrows if self.axis == "row" else ncols
        if not 0 <= self.index <= limit:
            raise ValueError(
                f"half-plane index {self.index} outside [0, {limit}]")


@dataclass(frozen=True)
class BlobSet:
    """Union of discs; exercises islands, holes and edges in one scene."""

    blobs: tuple[Disc, ...]

    def mask(self, nrows: int, ncols: int) -> np.ndarray:
        out = np.zeros((nrows, ncols), dtype=bool)
        for blob in self.blobs:
            out |= blob.mask(nrows, ncols)
        return out

    def validate(self, nrows: int, ncols: int) -> None:
        if not self.blobs:
            raise ValueError("blob set must contain at least one disc")
        for blob in self.blobs:
            blob.validate(nrows, ncols)


WaterGeometry = Disc | HalfPlane | BlobSet


def parse_geometry(spec: str) -> WaterGeometry:
    """Parse a CLI geometry spec.

    Forms: ``disc:row,col,radius``; ``halfplane:row|col,index``;
    ``blobs:r,c,rad;r,c,rad;...``.
    """
    kind, _, rest = spec.partition(":")
    try:
        if kind == "disc":
            row, col, radius = (float(t) for t in rest.split(","))
            return Disc(row, col, radius)
        if kind == "halfplane":
            axis, index = rest.split(",")
            return HalfPlane(axis.strip(), int(index))
        if kind == "blobs":
            discs = []
            for part in rest.split(";"):
                row, col, radius = (float(t) for t in part.split(","))
                discs.append(Disc(row, col, radius))
            return BlobSet(tuple(discs))
    except (TypeError, ValueError) as e:
        raise ValueError(f"bad geometry spec {spec!r}: {e}") from None
    raise ValueError(f"unknown geometry kind {kind!r} "
                     "(expected disc, halfplane or blobs)")


def _open_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniforms on the open interval (0, 1): safe input for ndtri."""
    return rng.integers(1, 1 << 53, size=n).astype(np.float64) / float(1 << 53)


def sample_mixture(g: GmmParams, n: int,
                   rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw n mixture samples; also return component-1 membership."""
    from_low = rng.random(n) < g.w1
    z = ndtri(_open_uniform(rng, n))
    x = np.where(from_low, g.mu1 + g.sigma1 * z, g.mu2 + g.sigma2 * z)
    return x, from_low


def synth_histogram(g: GmmParams, n: int, bin_width: float,
                    seed: int) -> Histogram:
    """Histogram of n seeded mixture draws at the given bin width."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    x, _ = sample_mixture(g, n, rng)
    return build_histogram(x, bin_width)


def synth_scene(g: GmmParams, ncols: int, nrows: int,
                geometry: WaterGeometry, cellsize: float, seed: int,
                xllcorner: float = 0.0, yllcorner: float = 0.0,
                nodata: float = _DEFAULT_NODATA) -> tuple[Raster, ClassMap]:
    """Labeled synthetic scene: water cells draw from component 1.

    Returns the dB raster and the truth map with matching headers.
    """
    if ncols < 1 or nrows < 1:
        raise ValueError("scene dimensions must be positive")
    geometry.validate(nrows, ncols)
    water = geometry.mask(nrows, ncols)
    rng = np.random.default_rng(seed)
    z = ndtri(_open_uniform(rng, nrows * ncols)).reshape(nrows, ncols)
    values = np.where(water, g.mu1 + g.sigma1 * z, g.mu2 + g.sigma2 * z)
    raster = Raster(ncols, nrows, xllcorner, yllcorner, cellsize, nodata,
                    values.astype(np.float32))
    truth = ClassMap(ncols, nrows, xllcorner, yllcorner, cellsize,
                     water.astype(np.uint8))
    return raster, truth


def _threshold_error(g: GmmParams, t: float) -> float:
    """Misclassification of the rule 'water iff x < t' under the mixture."""
    return (g.w1 * (1.0 - float(ndtr((t - g.mu1) / g.sigma1)))
            + g.w2 * float(ndtr((t - g.mu2) / g.sigma2)))


def bayes_error(g: GmmParams) -> float:
    """Minimal misclassification probability of any single-threshold rule.

    Candidate thresholds are the weighted-density crossings plus the two
    degenerate all-one-class rules (errors w2 and w1); the normal CDF is
    evaluated to better than 1e-12.
    """
    candidates = [g.w1, g.w2]
    candidates.extend(_threshold_error(g, t)
                      for t in _weighted_density_crossings(g))
    return min(candidates)

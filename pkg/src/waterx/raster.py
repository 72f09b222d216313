"""Georeferenced grids: file I/O, dB conversion, classification, areas.

The interchange format is a plain text grid: six header lines (``ncols``,
``nrows``, ``xllcorner``, ``yllcorner``, ``cellsize``, ``nodata_value``)
followed by ``nrows`` rows of ``ncols`` whitespace-separated values, top
row first.  Raster cells are 32-bit floats serialized as the shortest
decimal strings that round-trip them bit-exactly; class maps use the same
container with integer cells 0 (nonwater), 1 (water) and 255 (nodata).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import GridFormatError, GridMismatchError

__all__ = [
    "Raster",
    "ClassMap",
    "WATER",
    "NONWATER",
    "NODATA",
    "read_grid",
    "read_class_map",
    "write_grid",
    "linear_to_db",
    "classify",
    "apply_mask",
    "mask_raster",
    "water_area",
    "AreaSummary",
    "median_prefilter",
]

NONWATER = 0
WATER = 1
NODATA = 255

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize",
                "nodata_value")


def _coerce_header(grid) -> None:
    object.__setattr__(grid, "ncols", int(grid.ncols))
    object.__setattr__(grid, "nrows", int(grid.nrows))
    object.__setattr__(grid, "xllcorner", float(grid.xllcorner))
    object.__setattr__(grid, "yllcorner", float(grid.yllcorner))
    object.__setattr__(grid, "cellsize", float(grid.cellsize))
    if grid.ncols < 1 or grid.nrows < 1:
        raise ValueError("grid dimensions must be positive")
    if not grid.cellsize > 0:
        raise ValueError(f"cellsize must be > 0, got {grid.cellsize}")


@dataclass(frozen=True, eq=False)
class Raster:
    """Row-major grid of 32-bit float values with a nodata sentinel."""

    ncols: int
    nrows: int
    xllcorner: float
    yllcorner: float
    cellsize: float
    nodata_value: float
    values: np.ndarray

    def __post_init__(self):
        _coerce_header(self)
        object.__setattr__(self, "nodata_value", float(self.nodata_value))
        values = np.asarray(self.values, dtype=np.float32)
        if values.shape != (self.nrows, self.ncols):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{self.nrows}x{self.ncols}")
        bad = ~np.isfinite(values) & (values != np.float32(self.nodata_value))
        if bad.any():
            raise ValueError("raster values must be finite or exactly nodata")
        object.__setattr__(self, "values", values)

    @property
    def header(self) -> tuple:
        return (self.ncols, self.nrows, self.xllcorner, self.yllcorner,
                self.cellsize)

    @property
    def nodata_mask(self) -> np.ndarray:
        return self.values == np.float32(self.nodata_value)


@dataclass(frozen=True, eq=False)
class ClassMap:
    """Binary water map on the same grid container; 255 marks nodata."""

    ncols: int
    nrows: int
    xllcorner: float
    yllcorner: float
    cellsize: float
    cells: np.ndarray

    def __post_init__(self):
        _coerce_header(self)
        cells = np.asarray(self.cells)
        if cells.shape != (self.nrows, self.ncols):
            raise ValueError(
                f"cells shape {cells.shape} does not match "
                f"{self.nrows}x{self.ncols}")
        ok = (cells == NONWATER) | (cells == WATER) | (cells == NODATA)
        if not ok.all():
            raise ValueError("class map cells must be 0, 1 or 255")
        object.__setattr__(self, "cells", cells.astype(np.uint8))

    @property
    def header(self) -> tuple:
        return (self.ncols, self.nrows, self.xllcorner, self.yllcorner,
                self.cellsize)

    def like(self, cells: np.ndarray) -> "ClassMap":
        """New map with the same header and different cells."""
        return ClassMap(self.ncols, self.nrows, self.xllcorner,
                        self.yllcorner, self.cellsize, cells)


def _fmt32(v) -> str:
    """Shortest decimal string that round-trips the float32 value."""
    return np.format_float_positional(np.float32(v), unique=True, trim="-")


def _parse_header(lines: list[str], path) -> dict:
    if len(lines) < 6:
        raise GridFormatError(f"{path}: expected 6 header lines, "
                              f"found {len(lines)}")
    header = {}
    for i, key in enumerate(_HEADER_KEYS):
        parts = lines[i].split()
        if len(parts) != 2 or parts[0] != key:
            raise GridFormatError(
                f"{path}: line {i + 1}: expected '{key} <value>', "
                f"got {lines[i]!r}")
        try:
            header[key] = int(parts[1]) if key in ("ncols", "nrows") \
                else float(parts[1])
        except ValueError:
            raise GridFormatError(
                f"{path}: line {i + 1}: cannot parse value {parts[1]!r}"
            ) from None
    if header["ncols"] < 1 or header["nrows"] < 1:
        raise GridFormatError(f"{path}: grid dimensions must be positive")
    if not header["cellsize"] > 0:
        raise GridFormatError(f"{path}: cellsize must be > 0")
    if not math.isfinite(header["nodata_value"]):
        raise GridFormatError(f"{path}: nodata_value must be finite")
    return header


def _parse_rows(lines: list[str], header: dict, path) -> np.ndarray:
    ncols, nrows = header["ncols"], header["nrows"]
    data_lines = lines[6:]
    if len(data_lines) < nrows:
        raise GridFormatError(
            f"{path}: expected {nrows} data rows, found {len(data_lines)}")
    for extra in data_lines[nrows:]:
        if extra.strip():
            raise GridFormatError(
                f"{path}: unexpected content after row {nrows}")
    out = np.empty((nrows, ncols), dtype=np.float64)
    for r in range(nrows):
        lineno = r + 7
        toks = data_lines[r].split()
        if len(toks) != ncols:
            raise GridFormatError(
                f"{path}: line {lineno}: expected {ncols} values, "
                f"found {len(toks)}")
        try:
            row = np.array(toks, dtype=np.float64)
        except ValueError:
            for j, tk in enumerate(toks):
                try:
                    float(tk)
                except ValueError:
                    raise GridFormatError(
                        f"{path}: line {lineno}, value {j + 1}: "
                        f"cannot parse {tk!r}") from None
            raise
        finite = np.isfinite(row)
        if not finite.all():
            j = int(np.flatnonzero(~finite)[0])
            raise GridFormatError(
                f"{path}: line {lineno}, value {j + 1}: non-finite value")
        out[r] = row
    return out


def read_grid(path) -> Raster:
    """Read a text-grid raster; tokens round-trip to float32 bit-exactly."""
    with open(path) as f:
        lines = f.read().splitlines()
    header = _parse_header(lines, path)
    data = _parse_rows(lines, header, path)
    values = data.astype(np.float32)
    blown = ~np.isfinite(values) & np.isfinite(data)
    if blown.any():
        r, c = np.argwhere(blown)[0]
        raise GridFormatError(
            f"{path}: line {int(r) + 7}, value {int(c) + 1}: "
            f"out of float32 range")
    try:
        return Raster(header["ncols"], header["nrows"], header["xllcorner"],
                      header["yllcorner"], header["cellsize"],
                      header["nodata_value"], values)
    except ValueError as e:
        raise GridFormatError(f"{path}: {e}") from None


def read_class_map(path) -> ClassMap:
    """Read a class map stored in the text-grid container."""
    with open(path) as f:
        lines = f.read().splitlines()
    header = _parse_header(lines, path)
    data = _parse_rows(lines, header, path)
    cells = data.astype(np.int64)
    if (cells != data).any():
        r, c = np.argwhere(cells != data)[0]
        raise GridFormatError(
            f"{path}: line {int(r) + 7}, value {int(c) + 1}: "
            f"class cells must be integers")
    try:
        return ClassMap(header["ncols"], header["nrows"], header["xllcorner"],
                        header["yllcorner"], header["cellsize"], cells)
    except ValueError as e:
        raise GridFormatError(f"{path}: {e}") from None


def write_grid(grid: Raster | ClassMap, path) -> None:
    """Write a raster or class map so that rereading is bit-identical."""
    if isinstance(grid, Raster):
        nodata = grid.nodata_value
        rows = (" ".join(_fmt32(v) for v in row)
                for row in grid.values)
    elif isinstance(grid, ClassMap):
        nodata = float(NODATA)
        cells = grid.cells
        ok = (cells == NONWATER) | (cells == WATER) | (cells == NODATA)
        if not ok.all():
            raise ValueError("class map cells must be 0, 1 or 255")
        rows = (" ".join(map(str, row.tolist())) for row in cells)
    else:
        raise TypeError(f"cannot write {type(grid).__name__}")
    with open(path, "w") as f:
        f.write(f"ncols {grid.ncols}\n")
        f.write(f"nrows {grid.nrows}\n")
        f.write(f"xllcorner {grid.xllcorner!r}\n")
        f.write(f"yllcorner {grid.yllcorner!r}\n")
        f.write(f"cellsize {grid.cellsize!r}\n")
        f.write(f"nodata_value {nodata!r}\n")
        for row in rows:
            f.write(row)
            f.write("\n")


def linear_to_db(r: Raster) -> tuple[Raster, int]:
    """Convert linear power to dB (10*log10); also return the masked count.

    Non-positive and nodata cells become nodata; the second return value
    tallies cells newly masked by the conversion.
    """
    nd = np.float32(r.nodata_value)
    valid = r.values != nd
    positive = valid & (r.values > 0)
    out = np.full_like(r.values, nd)
    out[positive] = (10.0 * np.log10(r.values[positive].astype(np.float64))
                     ).astype(np.float32)
    masked = int(valid.sum() - positive.sum())
    return (Raster(r.ncols, r.nrows, r.xllcorner, r.yllcorner, r.cellsize,
                   r.nodata_value, out), masked)


def classify(r: Raster, threshold: float) -> ClassMap:
    """Label cells water (1) iff value < threshold, strictly.

    Values equal to the threshold are nonwater; nodata propagates as 255.
    """
    water = r.values < np.float64(threshold)
    cells = np.where(water, WATER, NONWATER).astype(np.uint8)
    cells[r.nodata_mask] = NODATA
    return ClassMap(r.ncols, r.nrows, r.xllcorner, r.yllcorner, r.cellsize,
                    cells)


def _require_same_header(a, b) -> None:
    if a.header != b.header:
        raise GridMismatchError(
            f"grid headers differ: {a.header} vs {b.header}")


def apply_mask(c: ClassMap, mask: ClassMap) -> ClassMap:
    """Set cells outside the mask (mask != 1) to nodata."""
    _require_same_header(c, mask)
    cells = np.where(mask.cells == WATER, c.cells, NODATA).astype(np.uint8)
    return c.like(cells)


def mask_raster(r: Raster, mask: ClassMap) -> Raster:
    """Set raster cells outside the mask (mask != 1) to the nodata value."""
    _require_same_header(r, mask)
    nd = np.float32(r.nodata_value)
    out = np.where(mask.cells == WATER, r.values, nd)
    return Raster(r.ncols, r.nrows, r.xllcorner, r.yllcorner, r.cellsize,
                  r.nodata_value, out)


@dataclass(frozen=True)
class AreaSummary:
    water_cells: int
    nonwater_cells: int
    nodata_cells: int
    cellsize: float
    area_km2: float


def water_area(c: ClassMap) -> AreaSummary:
    """Water area in km^2 (cellsize in meters) plus per-class cell counts."""
    water = int(np.count_nonzero(c.cells == WATER))
    nonwater = int(np.count_nonzero(c.cells == NONWATER))
    nodata = int(np.count_nonzero(c.cells == NODATA))
    area = water * c.cellsize * c.cellsize / 1e6
    return AreaSummary(water, nonwater, nodata, c.cellsize, area)


def median_prefilter(r: Raster) -> Raster:
    """Optional 3x3 median pre-filter; off by default in the pipeline.

    The median runs over the in-bounds, non-nodata neighbors of each
    cell; nodata cells stay nodata.
    """
    nd = np.float32(r.nodata_value)
    vals = np.where(r.values == nd, np.nan, r.values.astype(np.float64))
    padded = np.pad(vals, 1, constant_values=np.nan)
    windows = np.lib.stride_tricks.sliding_window_view(padded, (3, 3))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        med = np.nanmedian(windows, axis=(2, 3))
    out = np.where(np.isnan(med), nd, med).astype(np.float32)
    out[r.nodata_mask] = nd
    return Raster(r.ncols, r.nrows, r.xllcorner, r.yllcorner, r.cellsize,
                  r.nodata_value, out)

"""Cleanup chain for classified maps: majority vote, sieve, edge smoothing.

All operations preserve the grid header and never touch nodata cells;
nodata also breaks connectivity and is excluded from votes.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .raster import NODATA, NONWATER, WATER, ClassMap

__all__ = ["majority_filter", "remove_small_components", "boundary_clean"]

_SQUARE3 = np.ones((3, 3), dtype=bool)


def _box_sum(a: np.ndarray, k: int) -> np.ndarray:
    """Exact k*k window sums with shrunken windows at the edges."""
    half = k // 2
    padded = np.pad(a, half).astype(np.int64)
    sat = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int64)
    sat[1:, 1:] = padded.cumsum(axis=0).cumsum(axis=1)
    return sat[k:, k:] - sat[:-k, k:] - sat[k:, :-k] + sat[:-k, :-k]


def majority_filter(c: ClassMap, kernel: int = 3, iterations: int = 1) -> ClassMap:
    """Reassign each cell to the majority class of its neighborhood.

    The vote runs over the kernel x kernel window (center included,
    nodata neighbors excluded, edges use the in-bounds part); exact ties
    keep the original class.  Each pass reads the previous pass's output.
    """
    if kernel % 2 == 0 or kernel < 3:
        raise ValueError(f"kernel must be an odd integer >= 3, got {kernel}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    cells = c.cells
    nodata = cells == NODATA
    for _ in range(iterations):
        water_sum = _box_sum(cells == WATER, kernel)
        valid_sum = _box_sum(cells != NODATA, kernel)
        out = np.where(2 * water_sum > valid_sum, WATER,
                       np.where(2 * water_sum < valid_sum, NONWATER, cells))
        out = out.astype(np.uint8)
        out[nodata] = NODATA
        cells = out
    return c.like(cells)


def remove_small_components(c: ClassMap, min_size: int = 10,
                            connectivity: int = 8) -> ClassMap:
    """Flip connected components smaller than ``min_size`` cells.

    Water components are flipped to nonwater first; nonwater components
    are then measured on the updated map and flipped to water.  Nodata
    never flips and breaks connectivity.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    if min_size < 1:
        raise ValueError(f"min_size must be >= 1, got {min_size}")
    if min_size == 1:
        return c.like(c.cells.copy())
    structure = ndimage.generate_binary_structure(2, 1 if connectivity == 4 else 2)
    cells = c.cells.copy()
    for code_from, code_to in ((WATER, NONWATER), (NONWATER, WATER)):
        labels, n = ndimage.label(cells == code_from, structure=structure)
        if n == 0:
            continue
        sizes = np.bincount(labels.ravel())
        small = sizes < min_size
        small[0] = False
        cells[small[labels]] = code_to
    return c.like(cells)


def boundary_clean(c: ClassMap) -> ClassMap:
    """Smooth water edges: morphological closing then opening, 3x3 square.

    Nodata cells count as nonwater during the morphology and are restored
    afterwards.  Outside the grid nothing constrains the operations
    (dilation sees background there, erosion sees foreground).
    """
    water = c.cells == WATER
    nodata = c.cells == NODATA
    closed = ndimage.binary_erosion(
        ndimage.binary_dilation(water, _SQUARE3, border_value=0),
        _SQUARE3, border_value=1)
    opened = ndimage.binary_dilation(
        ndimage.binary_erosion(closed, _SQUARE3, border_value=1),
        _SQUARE3, border_value=0)
    out = np.where(opened, WATER, NONWATER).astype(np.uint8)
    out[nodata] = NODATA
    return c.like(out)

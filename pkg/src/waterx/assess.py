"""Accuracy assessment: seeded test-site sampling, confusion matrix, rates.

Test sites are drawn uniformly without replacement from the valid cells
of a sampling-domain map, using a partial Fisher-Yates shuffle driven by
a seeded PCG64 generator (algorithm tag ``SAMPLER_ALGORITHM``), so site
lists are reproducible from (domain, n, seed).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    CsvFormatError,
    EmptyMatrixError,
    SamplingError,
    SiteCoverageError,
    SiteLabelError,
)
from .raster import NODATA, WATER, ClassMap

__all__ = [
    "TestSite",
    "ConfusionMatrix",
    "ErrorRates",
    "SAMPLER_ALGORITHM",
    "sample_sites",
    "confusion_matrix",
    "accuracy_of",
    "omission_commission",
    "write_sites_csv",
    "read_sites_csv",
]

SAMPLER_ALGORITHM = "fisher-yates-partial/pcg64/v1"

_TRUE_LABELS = ("water", "nonwater", "unlabeled")
_PRED_LABELS = ("water", "nonwater", "none")


@dataclass
class TestSite:
    """A sampled grid location with ground-truth and predicted labels.

    ``rectified`` records that the ground-truth label was corrected after
    collection; since labels are binary, the pre-rectification label is
    the opposite one, so both the original and the rectified confusion
    matrices can be derived from one site list.
    """

    __test__ = False  # not a pytest class, despite the name

    id: int
    col: int
    row: int
    true_label: str = "unlabeled"
    predicted_label: str = "none"
    rectified: bool = False


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 counts; tp = water predicted water, fn = water predicted nonwater."""

    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def n(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


@dataclass(frozen=True)
class ErrorRates:
    """Per-class omission/commission rates; None where undefined."""

    water_omission: float | None
    water_commission: float | None
    nonwater_omission: float | None
    nonwater_commission: float | None


def sample_sites(valid: ClassMap, n: int, seed: int) -> list[TestSite]:
    """Draw n distinct cells uniformly from the valid (code 1) cells.

    Deterministic for a given (domain, n, seed).  Sites come back in draw
    order with fresh ids, unlabeled.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    pool = np.flatnonzero(valid.cells.ravel() == WATER)
    if n > pool.size:
        raise SamplingError(
            f"requested {n} sites but the domain has {pool.size} valid cells")
    rng = np.random.default_rng(seed)
    pool = pool.copy()
    m = pool.size
    for i in range(n):
        j = i + int(rng.integers(0, m - i))
        pool[i], pool[j] = pool[j], pool[i]
    ncols = valid.ncols
    return [
        TestSite(id=i, col=int(ix % ncols), row=int(ix // ncols))
        for i, ix in enumerate(pool[:n].tolist())
    ]


def _effective_label(site: TestSite, use_rectified: bool) -> str:
    label = site.true_label
    if not use_rectified and site.rectified and label in ("water", "nonwater"):
        return "nonwater" if label == "water" else "water"
    return label


def confusion_matrix(sites: list[TestSite], c: ClassMap,
                     use_rectified_labels: bool = True) -> ConfusionMatrix:
    """Fill predictions from the class map and tally the 2x2 counts.

    Every site must carry a water/nonwater truth label and sit on a
    non-nodata cell.  With ``use_rectified_labels=False`` the tally uses
    the pre-rectification labels (rectified sites flipped back), which
    reproduces the original-survey matrix from the same file.
    """
    tp = fn = fp = tn = 0
    for site in sites:
        label = _effective_label(site, use_rectified_labels)
        if label not in ("water", "nonwater"):
            raise SiteLabelError(f"site {site.id} has no usable label "
                                 f"({site.true_label!r})")
        code = int(c.cells[site.row, site.col])
        if code == NODATA:
            raise SiteCoverageError(
                f"site {site.id} at (row={site.row}, col={site.col}) "
                "falls on nodata")
        pred = "water" if code == WATER else "nonwater"
        site.predicted_label = pred
        if label == "water":
            if pred == "water":
                tp += 1
            else:
                fn += 1
        else:
            if pred == "water":
                fp += 1
            else:
                tn += 1
    return ConfusionMatrix(tp, fn, fp, tn)


def accuracy_of(m: ConfusionMatrix) -> float:
    """Empirical accuracy: the agreement fraction (tp + tn) / n."""
    if m.n == 0:
        raise EmptyMatrixError("confusion matrix has no observations")
    return (m.tp + m.tn) / m.n


def omission_commission(m: ConfusionMatrix) -> ErrorRates:
    """Per-class omission and commission error rates.

    Water omission is fn/(tp+fn), water commission fp/(tp+fp), and the
    nonwater rates are symmetric.  A rate with a zero denominator comes
    back as None rather than NaN.
    """
    if m.n == 0:
        raise EmptyMatrixError("confusion matrix has no observations")

    def rate(num: int, den: int) -> float | None:
        return num / den if den > 0 else None

    return ErrorRates(
        water_omission=rate(m.fn, m.tp + m.fn),
        water_commission=rate(m.fp, m.tp + m.fp),
        nonwater_omission=rate(m.fp, m.fp + m.tn),
        nonwater_commission=rate(m.fn, m.fn + m.tn),
    )


_SITES_HEADER = ["id", "col", "row", "true_label", "predicted_label",
                 "rectified"]


def write_sites_csv(sites: list[TestSite], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(_SITES_HEADER)
        for s in sites:
            writer.writerow([s.id, s.col, s.row, s.true_label,
                             s.predicted_label,
                             "true" if s.rectified else "false"])


def read_sites_csv(path) -> list[TestSite]:
    sites = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [s.strip() for s in header] != _SITES_HEADER:
            raise CsvFormatError(
                f"{path}: expected header {','.join(_SITES_HEADER)!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 6:
                raise CsvFormatError(
                    f"{path}:{lineno}: expected 6 fields, got {len(row)}")
            try:
                site_id, col, r = int(row[0]), int(row[1]), int(row[2])
            except ValueError as e:
                raise CsvFormatError(f"{path}:{lineno}: {e}") from None
            true_label = row[3].strip()
            pred_label = row[4].strip()
            rect = row[5].strip().lower()
            if true_label not in _TRUE_LABELS:
                raise CsvFormatError(
                    f"{path}:{lineno}: bad true_label {true_label!r}")
            if pred_label not in _PRED_LABELS:
                raise CsvFormatError(
                    f"{path}:{lineno}: bad predicted_label {pred_label!r}")
            if rect not in ("true", "false", "0", "1"):
                raise CsvFormatError(
                    f"{path}:{lineno}: bad rectified flag {row[5]!r}")
            sites.append(TestSite(site_id, col, r, true_label, pred_label,
                                  rect in ("true", "1")))
    return sites

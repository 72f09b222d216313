"""Exception types shared across the package."""

from __future__ import annotations


class WaterxError(Exception):
    """Base class for all library-specific errors."""


class EmptyInputError(WaterxError):
    """No usable samples remain after nodata/non-finite filtering."""


class IncompatibleHistogramError(WaterxError):
    """Histograms differ in bin width or lattice alignment."""


class DegenerateHistogramError(WaterxError):
    """Histogram cannot support a two-class split (fewer than two occupied bins)."""


class DegeneratePartitionError(WaterxError):
    """Threshold leaves one class with zero probability mass."""


class NoValleyError(WaterxError):
    """Smoothed histogram has no valley between two peaks."""


class NoSeparatingRootError(WaterxError):
    """Weighted component densities never cross between the two means."""


class FormatError(WaterxError):
    """Malformed input file."""


class GridFormatError(FormatError):
    """Malformed text-grid file."""


class CsvFormatError(FormatError):
    """Malformed CSV file."""


class GridMismatchError(WaterxError):
    """Grids do not share the same header geometry."""


class SamplingError(WaterxError):
    """Requested more test sites than the sampling domain contains."""


class SiteLabelError(WaterxError):
    """Test site lacks a usable ground-truth label."""


class SiteCoverageError(WaterxError):
    """Test site falls on a nodata cell of the classified map."""


class EmptyMatrixError(WaterxError):
    """Confusion matrix has no observations."""


class ConfigError(WaterxError):
    """Invalid pipeline configuration."""


class PipelineError(WaterxError):
    """A pipeline stage failed; carries the stage name and the partial report."""

    def __init__(self, stage: str, cause: Exception, report: dict):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.report = report

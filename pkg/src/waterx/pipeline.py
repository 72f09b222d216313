"""End-to-end orchestration: read, threshold, classify, clean, assess.

The pipeline is configured by a JSON document whose keys mirror the CLI
flags; explicit flags override config values.  Every run is fully
deterministic: all randomness takes an explicit seed and reports are
serialized with sorted keys, so identical inputs produce byte-identical
outputs.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from functools import reduce

import numpy as np

from .assess import (
    accuracy_of,
    confusion_matrix,
    omission_commission,
    read_sites_csv,
)
from .baselines import (
    EmFitResult,
    em_fit,
    gmm_bayes_threshold,
    kmeans2_threshold,
    valley_threshold,
)
from .errors import ConfigError, EmptyInputError, PipelineError
from .histogram import (
    Histogram,
    build_histogram,
    merge_histograms,
    write_histogram_csv,
)
from .otsu import (
    ThresholdResult,
    class_statistics,
    objective_curve,
    otsu_linear,
    otsu_quadratic,
)
from .postprocess import boundary_clean, majority_filter, remove_small_components
from .raster import (
    Raster,
    classify,
    linear_to_db,
    mask_raster,
    median_prefilter,
    read_class_map,
    read_grid,
    water_area,
    write_grid,
)

__all__ = [
    "PipelineConfig",
    "load_config",
    "run_pipeline",
    "select_threshold",
    "threshold_report",
    "assessment_report",
    "write_report",
    "write_curve_csv",
]

METHODS = ("otsu", "otsu-quadratic", "valley", "gmm", "kmeans")


@dataclass
class PipelineConfig:
    """Resolved pipeline parameters; one JSON document mirrors this."""

    input: str
    output_dir: str
    mask: str | None = None
    sites: str | None = None
    linear_to_db: bool = False
    median_prefilter: bool = False
    bin_width: float = 0.5
    method: str = "otsu"
    threshold: float | None = None
    valley_window: int = 3
    majority: int = 3
    majority_iters: int = 1
    min_size: int = 10
    connectivity: int = 8
    boundary_clean: bool = False
    seed: int = 0
    threads: int = 1
    report: str | None = None
    curve: str | None = None

    def validate(self) -> None:
        if not self.input:
            raise ConfigError("config is missing the input raster path")
        if not self.output_dir:
            raise ConfigError("config is missing the output directory")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; "
                              f"expected one of {', '.join(METHODS)}")
        if not self.bin_width > 0:
            raise ConfigError(f"bin_width must be > 0, got {self.bin_width}")
        if self.majority != 0 and (self.majority % 2 == 0 or self.majority < 3):
            raise ConfigError("majority kernel must be an odd integer >= 3 "
                              "(or 0 to skip)")
        if self.majority_iters < 1:
            raise ConfigError("majority_iters must be >= 1")
        if self.min_size < 1:
            raise ConfigError("min_size must be >= 1")
        if self.connectivity not in (4, 8):
            raise ConfigError("connectivity must be 4 or 8")
        if self.valley_window < 1 or self.valley_window % 2 == 0:
            raise ConfigError("valley_window must be an odd integer >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


def load_config(path: str | None, overrides: dict) -> PipelineConfig:
    """Merge a JSON config file with CLI overrides (overrides win)."""
    doc: dict = {}
    if path is not None:
        try:
            with open(path) as f:
                doc = json.load(f)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    doc.update({k: v for k, v in overrides.items() if v is not None})
    missing = {"input", "output_dir"} - set(doc)
    if missing:
        raise ConfigError(f"config is missing: {', '.join(sorted(missing))}")
    try:
        cfg = PipelineConfig(**doc)
    except TypeError as e:
        raise ConfigError(str(e)) from None
    cfg.validate()
    return cfg


def select_threshold(h: Histogram, method: str, valley_window: int = 3,
                     seed: int = 0) -> tuple[ThresholdResult, EmFitResult | None]:
    """Dispatch to the configured selector.

    For the mixture method the class statistics are attached from the
    histogram, and the fitted parameters ride along as the second value.
    """
    if method == "otsu":
        return otsu_linear(h), None
    if method == "otsu-quadratic":
        return otsu_quadratic(h), None
    if method == "valley":
        return valley_threshold(h, valley_window), None
    if method == "kmeans":
        return kmeans2_threshold(h, seed=seed), None
    if method == "gmm":
        fit = em_fit(h)
        result = gmm_bayes_threshold(fit)
        stats = class_statistics(h, result.threshold)
        return (ThresholdResult(result.threshold, result.objective, "gmm",
                                stats=stats, details=result.details), fit)
    raise ConfigError(f"unknown method {method!r}")


def threshold_report(result: ThresholdResult, h: Histogram,
                     fit: EmFitResult | None = None) -> dict:
    """Threshold report fields shared by every selector."""
    stats = result.stats
    report = {
        "method": result.method,
        "threshold": result.threshold,
        "objective": result.objective,
        "omega0": stats.omega0 if stats else None,
        "omega1": stats.omega1 if stats else None,
        "mu0": stats.mu0 if stats else None,
        "mu1": stats.mu1 if stats else None,
        "mu": stats.mu if stats else None,
        "v0": stats.v0 if stats else None,
        "v1": stats.v1 if stats else None,
        "v_between": stats.v_between if stats else None,
        "v_total": stats.v_total if stats else None,
        "bin_width": h.bin_width,
        "n_bins": h.n_bins,
        "skipped_samples": h.skipped,
    }
    if result.details:
        report["details"] = dict(result.details)
    if fit is not None:
        report["em"] = {
            "w1": fit.w1, "w2": fit.w2,
            "mu1": fit.mu1, "mu2": fit.mu2,
            "sigma1": fit.sigma1, "sigma2": fit.sigma2,
            "iterations": fit.iterations,
            "converged": fit.converged,
            "log_likelihood": fit.log_likelihood,
        }
    return report


def _matrix_report(m, rates) -> dict:
    return {
        "tp": m.tp, "fn": m.fn, "fp": m.fp, "tn": m.tn, "n": m.n,
        "accuracy": accuracy_of(m),
        "water_omission": rates.water_omission,
        "water_commission": rates.water_commission,
        "nonwater_omission": rates.nonwater_omission,
        "nonwater_commission": rates.nonwater_commission,
    }


def assessment_report(sites, class_map) -> dict:
    """Confusion report; adds the pre-rectification matrix when relevant."""
    m = confusion_matrix(sites, class_map, use_rectified_labels=True)
    report = _matrix_report(m, omission_commission(m))
    if any(s.rectified for s in sites):
        m0 = confusion_matrix(sites, class_map, use_rectified_labels=False)
        report["original_labels"] = _matrix_report(m0, omission_commission(m0))
    return report


def write_report(report: dict, path) -> None:
    with open(path, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")


def write_curve_csv(curve: list[tuple[float, float]], path) -> None:
    with open(path, "w", newline="") as f:
        f.write("threshold,v_between\n")
        for t, vb in curve:
            f.write(f"{t!r},{vb!r}\n")


def build_histogram_threaded(r: Raster, bin_width: float,
                             threads: int) -> Histogram:
    """Histogram of a raster's valid cells, optionally over row bands.

    Band histograms are merged with :func:`merge_histograms`, which is
    exact, so the thread count never changes the result.
    """
    if threads <= 1 or r.nrows < 2 * threads:
        return build_histogram(r.values, bin_width, nodata=r.nodata_value)
    bands = np.array_split(r.values, threads, axis=0)

    def one(band: np.ndarray) -> Histogram:
        try:
            return build_histogram(band, bin_width, nodata=r.nodata_value)
        except EmptyInputError:
            return Histogram(bin_width, np.array([]), np.array([]),
                             skipped=band.size)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(one, bands))
    merged = reduce(merge_histograms, parts)
    if merged.n_bins == 0:
        raise EmptyInputError("all samples are nodata or non-finite")
    return merged


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run the detection chain and return the aggregated report.

    Stage order: read, optional dB conversion, optional masking and
    median pre-filter, histogram, threshold selection (or a fixed
    threshold), classification, the cleanup chain, area, and, when a
    labeled sites file is configured, accuracy assessment.  On failure a
    :class:`PipelineError` carries the partial report, with the failed
    stage flagged.
    """
    cfg.validate()
    report: dict = {
        "config": asdict(cfg),
        "completed_stages": [],
        "failed_stage": None,
        "error": None,
        "artifacts": {},
    }
    stage = "setup"
    try:
        os.makedirs(cfg.output_dir, exist_ok=True)

        stage = "read"
        r = read_grid(cfg.input)
        report["completed_stages"].append(stage)

        if cfg.linear_to_db:
            stage = "linear_to_db"
            r, masked = linear_to_db(r)
            report["db_masked_cells"] = masked
            report["completed_stages"].append(stage)

        if cfg.mask:
            stage = "mask"
            m = read_class_map(cfg.mask)
            r = mask_raster(r, m)
            report["completed_stages"].append(stage)

        if cfg.median_prefilter:
            stage = "median_prefilter"
            r = median_prefilter(r)
            report["completed_stages"].append(stage)

        stage = "histogram"
        h = build_histogram_threaded(r, cfg.bin_width, cfg.threads)
        hist_path = os.path.join(cfg.output_dir, "histogram.csv")
        write_histogram_csv(h, hist_path)
        report["artifacts"]["histogram_csv"] = hist_path
        report["histogram"] = {
            "bin_width": h.bin_width,
            "n_bins": h.n_bins,
            "total_count": h.total_count,
            "skipped_samples": h.skipped,
        }
        report["completed_stages"].append(stage)

        stage = "threshold"
        if cfg.threshold is not None:
            stats = class_statistics(h, cfg.threshold)
            result = ThresholdResult(float(cfg.threshold), stats.v_between,
                                     "fixed", stats=stats)
            fit = None
        else:
            result, fit = select_threshold(h, cfg.method, cfg.valley_window,
                                           cfg.seed)
        report["threshold_report"] = threshold_report(result, h, fit)
        if cfg.curve:
            write_curve_csv(objective_curve(h), cfg.curve)
            report["artifacts"]["curve_csv"] = cfg.curve
        report["completed_stages"].append(stage)

        stage = "classify"
        cmap = classify(r, result.threshold)
        classified_path = os.path.join(cfg.output_dir, "classified.grid")
        write_grid(cmap, classified_path)
        report["artifacts"]["classified"] = classified_path
        report["completed_stages"].append(stage)

        stage = "postprocess"
        if cfg.majority != 0:
            cmap = majority_filter(cmap, cfg.majority, cfg.majority_iters)
        cmap = remove_small_components(cmap, cfg.min_size, cfg.connectivity)
        if cfg.boundary_clean:
            cmap = boundary_clean(cmap)
        post_path = os.path.join(cfg.output_dir, "postprocessed.grid")
        write_grid(cmap, post_path)
        report["artifacts"]["postprocessed"] = post_path
        report["completed_stages"].append(stage)

        stage = "area"
        area = water_area(cmap)
        report["area"] = {
            "water_cells": area.water_cells,
            "nonwater_cells": area.nonwater_cells,
            "nodata_cells": area.nodata_cells,
            "cellsize": area.cellsize,
            "area_km2": area.area_km2,
        }
        report["completed_stages"].append(stage)

        if cfg.sites:
            stage = "assess"
            sites = read_sites_csv(cfg.sites)
            report["assessment"] = assessment_report(sites, cmap)
            report["completed_stages"].append(stage)

        stage = "report"
        report_path = cfg.report or os.path.join(cfg.output_dir, "report.json")
        write_report(report, report_path)
        return report
    except Exception as e:
        report["failed_stage"] = stage
        report["error"] = str(e)
        raise PipelineError(stage, e, report) from e

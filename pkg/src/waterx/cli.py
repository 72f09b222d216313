"""Command-line interface: per-stage subcommands plus the full pipeline.

Exit codes: 0 success, 2 usage/config error, 3 data/format error,
4 numeric/degenerate-input error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .assess import read_sites_csv, sample_sites, write_sites_csv, SAMPLER_ALGORITHM
from .baselines import GmmParams
from .errors import (
    ConfigError,
    DegenerateHistogramError,
    DegeneratePartitionError,
    EmptyInputError,
    EmptyMatrixError,
    FormatError,
    GridMismatchError,
    IncompatibleHistogramError,
    NoSeparatingRootError,
    NoValleyError,
    PipelineError,
    SamplingError,
    SiteCoverageError,
    SiteLabelError,
    WaterxError,
)
from .histogram import write_histogram_csv
from .otsu import objective_curve
from .pipeline import (
    assessment_report,
    build_histogram_threaded,
    load_config,
    run_pipeline,
    select_threshold,
    threshold_report,
    write_curve_csv,
    write_report,
)
from .postprocess import boundary_clean, majority_filter, remove_small_components
from .raster import (
    classify,
    linear_to_db,
    mask_raster,
    read_class_map,
    read_grid,
    water_area,
    write_grid,
)
from .synth import parse_geometry, synth_histogram, synth_scene

_USAGE_EXIT = 2
_DATA_EXIT = 3
_NUMERIC_EXIT = 4

_DATA_ERRORS = (FormatError, GridMismatchError, IncompatibleHistogramError,
                OSError)
_NUMERIC_ERRORS = (DegenerateHistogramError, DegeneratePartitionError,
                   NoValleyError, NoSeparatingRootError, SamplingError,
                   SiteLabelError, SiteCoverageError, EmptyMatrixError,
                   EmptyInputError, ValueError)


def _exit_code(e: Exception) -> int:
    if isinstance(e, ConfigError):
        return _USAGE_EXIT
    if isinstance(e, _DATA_ERRORS):
        return _DATA_EXIT
    if isinstance(e, _NUMERIC_ERRORS):
        return _NUMERIC_EXIT
    return 1


def _parse_mix(text: str) -> GmmParams:
    parts = text.split(",")
    if len(parts) != 6:
        raise ConfigError(
            "--mix needs 6 comma-separated numbers: w1,mu1,sigma1,w2,mu2,sigma2")
    try:
        w1, mu1, s1, w2, mu2, s2 = (float(t) for t in parts)
        return GmmParams(w1=w1, w2=w2, mu1=mu1, mu2=mu2, sigma1=s1, sigma2=s2)
    except ValueError as e:
        raise ConfigError(f"bad --mix value: {e}") from None


def _read_input_raster(args):
    r = read_grid(args.input)
    if getattr(args, "linear_db", False):
        r, _ = linear_to_db(r)
    if getattr(args, "mask", None):
        r = mask_raster(r, read_class_map(args.mask))
    return r


def _cmd_threshold(args) -> int:
    r = _read_input_raster(args)
    h = build_histogram_threaded(r, args.bin_width, args.threads)
    result, fit = select_threshold(h, args.method, args.valley_window,
                                   args.seed)
    report = threshold_report(result, h, fit)
    if args.hist:
        write_histogram_csv(h, args.hist)
    if args.curve:
        write_curve_csv(objective_curve(h), args.curve)
    if args.report:
        write_report(report, args.report)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _cmd_classify(args) -> int:
    r = _read_input_raster(args)
    cmap = classify(r, args.threshold)
    write_grid(cmap, args.output)
    return 0


def _cmd_postprocess(args) -> int:
    cmap = read_class_map(args.input)
    if args.majority != 0:
        cmap = majority_filter(cmap, args.majority, args.majority_iters)
    cmap = remove_small_components(cmap, args.min_size, args.connectivity)
    if args.boundary_clean:
        cmap = boundary_clean(cmap)
    write_grid(cmap, args.output)
    return 0


def _cmd_area(args) -> int:
    area = water_area(read_class_map(args.input))
    report = {
        "water_cells": area.water_cells,
        "nonwater_cells": area.nonwater_cells,
        "nodata_cells": area.nodata_cells,
        "cellsize": area.cellsize,
        "area_km2": area.area_km2,
    }
    if args.report:
        write_report(report, args.report)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _cmd_sample(args) -> int:
    domain = read_class_map(args.input)
    sites = sample_sites(domain, args.n, args.seed)
    write_sites_csv(sites, args.output)
    print(json.dumps({"n": len(sites), "seed": args.seed,
                      "sampler": SAMPLER_ALGORITHM, "output": args.output},
                     indent=2, sort_keys=True))
    return 0


def _cmd_assess(args) -> int:
    sites = read_sites_csv(args.sites)
    cmap = read_class_map(args.input)
    report = assessment_report(sites, cmap)
    if args.output:
        write_sites_csv(sites, args.output)
    if args.report:
        write_report(report, args.report)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _cmd_synth_hist(args) -> int:
    g = _parse_mix(args.mix)
    h = synth_histogram(g, args.n, args.bin_width, args.seed)
    write_histogram_csv(h, args.output)
    print(json.dumps({"n_bins": h.n_bins, "total_count": h.total_count,
                      "output": args.output}, indent=2, sort_keys=True))
    return 0


def _cmd_synth_scene(args) -> int:
    g = _parse_mix(args.mix)
    geometry = parse_geometry(args.geometry)
    raster, truth = synth_scene(g, args.ncols, args.nrows, geometry,
                                args.cellsize, args.seed)
    grid_path = f"{args.output}.grid"
    truth_path = f"{args.output}.truth.grid"
    write_grid(raster, grid_path)
    write_grid(truth, truth_path)
    print(json.dumps({"grid": grid_path, "truth": truth_path},
                     indent=2, sort_keys=True))
    return 0


def _cmd_pipeline(args) -> int:
    overrides = {
        "input": args.input,
        "output_dir": args.output,
        "mask": args.mask,
        "sites": args.sites,
        "bin_width": args.bin_width,
        "method": args.method,
        "threshold": args.threshold,
        "valley_window": args.valley_window,
        "majority": args.majority,
        "majority_iters": args.majority_iters,
        "min_size": args.min_size,
        "connectivity": args.connectivity,
        "seed": args.seed,
        "threads": args.threads,
        "report": args.report,
        "curve": args.curve,
    }
    if args.linear_db:
        overrides["linear_to_db"] = True
    if args.median_prefilter:
        overrides["median_prefilter"] = True
    if args.boundary_clean:
        overrides["boundary_clean"] = True
    cfg = load_config(args.config, overrides)
    try:
        report = run_pipeline(cfg)
    except PipelineError as e:
        report_path = cfg.report or f"{cfg.output_dir}/report.json"
        try:
            write_report(e.report, report_path)
        except OSError:
            pass
        print(f"error: {e}", file=sys.stderr)
        return _exit_code(e.cause)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _add_common_input_flags(p, mask: bool = True) -> None:
    p.add_argument("--input", required=True, help="input text-grid raster")
    if mask:
        p.add_argument("--mask", help="region mask class map; cells outside "
                                      "mask=1 become nodata")
    p.add_argument("--linear-db", action="store_true",
                   help="convert linear power to dB before anything else")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="waterx",
        description="Surface-water thresholding, classification and "
                    "accuracy assessment on text-grid rasters.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="select a threshold from a raster")
    _add_common_input_flags(p)
    p.add_argument("--bin-width", type=float, default=0.5)
    p.add_argument("--method", choices=["otsu", "otsu-quadratic", "valley",
                                        "gmm", "kmeans"], default="otsu")
    p.add_argument("--valley-window", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--hist", help="write the histogram CSV here")
    p.add_argument("--curve", help="write the objective-curve CSV here")
    p.add_argument("--report", help="write the threshold report JSON here")
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("classify", help="classify a raster at a threshold")
    _add_common_input_flags(p)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--output", required=True, help="output class map path")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("postprocess", help="clean up a classified map")
    p.add_argument("--input", required=True, help="input class map")
    p.add_argument("--output", required=True, help="output class map")
    p.add_argument("--majority", type=int, default=3,
                   help="majority kernel (odd >= 3; 0 skips the filter)")
    p.add_argument("--majority-iters", type=int, default=1)
    p.add_argument("--min-size", type=int, default=10,
                   help="flip components smaller than this many cells")
    p.add_argument("--connectivity", type=int, choices=[4, 8], default=8)
    p.add_argument("--boundary-clean", action="store_true",
                   help="morphological closing then opening of water")
    p.set_defaults(func=_cmd_postprocess)

    p = sub.add_parser("area", help="water area of a class map")
    p.add_argument("--input", required=True, help="input class map")
    p.add_argument("--report", help="write the area report JSON here")
    p.set_defaults(func=_cmd_area)

    p = sub.add_parser("sample", help="draw random test sites")
    p.add_argument("--input", required=True,
                   help="sampling-domain class map (cells=1 are eligible)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="output sites CSV")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("assess", help="confusion matrix and accuracy")
    p.add_argument("--sites", required=True, help="labeled sites CSV")
    p.add_argument("--input", required=True, help="classified map")
    p.add_argument("--output", help="write sites with predictions here")
    p.add_argument("--report", help="write the confusion report JSON here")
    p.set_defaults(func=_cmd_assess)

    p = sub.add_parser("synth", help="synthetic fixtures")
    synth_sub = p.add_subparsers(dest="synth_command", required=True)

    ph = synth_sub.add_parser("hist", help="histogram of mixture draws")
    ph.add_argument("--mix", required=True,
                    help="w1,mu1,sigma1,w2,mu2,sigma2")
    ph.add_argument("--n", type=int, required=True)
    ph.add_argument("--bin-width", type=float, default=0.5)
    ph.add_argument("--seed", type=int, default=0)
    ph.add_argument("--output", required=True, help="output histogram CSV")
    ph.set_defaults(func=_cmd_synth_hist)

    ps = synth_sub.add_parser("scene", help="labeled synthetic scene")
    ps.add_argument("--mix", required=True,
                    help="w1,mu1,sigma1,w2,mu2,sigma2")
    ps.add_argument("--ncols", type=int, required=True)
    ps.add_argument("--nrows", type=int, required=True)
    ps.add_argument("--geometry", required=True,
                    help="disc:row,col,radius | halfplane:row|col,index | "
                         "blobs:r,c,rad;r,c,rad")
    ps.add_argument("--cellsize", type=float, default=10.0)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--output", required=True,
                    help="output prefix; writes <prefix>.grid and "
                         "<prefix>.truth.grid")
    ps.set_defaults(func=_cmd_synth_scene)

    p = sub.add_parser("pipeline", help="run the full detection chain")
    p.add_argument("--config", help="JSON config; flags override it")
    p.add_argument("--input")
    p.add_argument("--output", help="output directory for artifacts")
    p.add_argument("--mask")
    p.add_argument("--sites", help="labeled sites CSV for assessment")
    p.add_argument("--linear-db", action="store_true")
    p.add_argument("--median-prefilter", action="store_true")
    p.add_argument("--bin-width", type=float)
    p.add_argument("--method", choices=["otsu", "otsu-quadratic", "valley",
                                        "gmm", "kmeans"])
    p.add_argument("--threshold", type=float,
                   help="skip selection and classify at this threshold")
    p.add_argument("--valley-window", type=int)
    p.add_argument("--majority", type=int)
    p.add_argument("--majority-iters", type=int)
    p.add_argument("--min-size", type=int)
    p.add_argument("--connectivity", type=int, choices=[4, 8])
    p.add_argument("--boundary-clean", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--report")
    p.add_argument("--curve")
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        return args.func(args)
    except WaterxError as e:
        print(f"error: {e}", file=sys.stderr)
        return _exit_code(e)
    except _DATA_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return _DATA_EXIT
    except _NUMERIC_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return _NUMERIC_EXIT


if __name__ == "__main__":
    sys.exit(main())

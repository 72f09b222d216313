"""Detect a synthetic lake end to end and compare against the known truth.

Builds a scene whose water body is a disc with two small satellite
ponds, classifies it at the Otsu threshold, runs the cleanup chain
(majority vote, sieve, boundary smoothing), and reports how close the
detected area lands to the truth map's area.
"""

import numpy as np

import waterx
from waterx.synth import BlobSet, Disc

MIX = waterx.GmmParams(w1=0.3, w2=0.7, mu1=-18.0, mu2=-9.0,
                       sigma1=1.5, sigma2=2.0)
GEOMETRY = BlobSet((
    Disc(row=200, col=260, radius=120),
    Disc(row=70, col=80, radius=25),
    Disc(row=340, col=90, radius=18),
))


def area_km2(cells, cellsize):
    return int((cells == 1).sum()) * cellsize ** 2 / 1e6


def main():
    raster, truth = waterx.synth_scene(MIX, ncols=500, nrows=400,
                                       geometry=GEOMETRY, cellsize=10.0,
                                       seed=7)
    truth_km2 = area_km2(truth.cells, 10.0)
    print(f"scene: {raster.nrows}x{raster.ncols} cells, "
          f"truth water area {truth_km2:.3f} km^2")

    h = waterx.build_histogram(raster.values, 0.5,
                               nodata=raster.nodata_value)
    result = waterx.otsu_linear(h)
    print(f"otsu threshold: {result.threshold:.2f} dB "
          f"(interclass variance {result.objective:.3f})")

    cmap = waterx.classify(raster, result.threshold)
    raw_km2 = area_km2(cmap.cells, 10.0)
    raw_wrong = int((cmap.cells != truth.cells).sum())
    print(f"raw classification: {raw_km2:.3f} km^2, "
          f"{raw_wrong} cells differ from truth")

    cleaned = waterx.majority_filter(cmap, kernel=3, iterations=1)
    cleaned = waterx.remove_small_components(cleaned, min_size=10,
                                             connectivity=8)
    cleaned = waterx.boundary_clean(cleaned)
    clean_km2 = area_km2(cleaned.cells, 10.0)
    clean_wrong = int((cleaned.cells != truth.cells).sum())
    print(f"after cleanup:      {clean_km2:.3f} km^2, "
          f"{clean_wrong} cells differ from truth")

    rel = abs(clean_km2 - truth_km2) / truth_km2
    print(f"area error vs truth: {rel:.2%}")

    # Water is rarer than the mixture weight suggests here, because the
    # geometry, not the weight, decides which cells are water.
    summary = waterx.water_area(cleaned)
    print(f"cell counts: water {summary.water_cells}, "
          f"nonwater {summary.nonwater_cells}, "
          f"nodata {summary.nodata_cells}")

    # The same chain, driven by the pipeline orchestrator, writes every
    # intermediate artifact plus a JSON report (see the README for the
    # equivalent waterx CLI invocation).
    import tempfile
    out = tempfile.mkdtemp(prefix="waterx-demo-")
    grid = f"{out}/scene.grid"
    waterx.write_grid(raster, grid)
    report = waterx.run_pipeline(waterx.PipelineConfig(
        input=grid, output_dir=out, boundary_clean=True))
    print(f"\npipeline report area: {report['area']['area_km2']:.3f} km^2")
    print(f"artifacts under {out}:")
    for name, path in sorted(report["artifacts"].items()):
        print(f"  {name}: {path}")


if __name__ == "__main__":
    main()

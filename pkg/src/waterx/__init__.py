"""Surface-water threshold selection and accuracy assessment toolkit.

Builds backscatter histograms, selects water/nonwater thresholds by
interclass-variance maximization (with valley, Gaussian-mixture and
2-means baselines), classifies and cleans rasters, computes inundation
area, and assesses accuracy on randomly sampled test sites.  Synthetic
mixtures and scenes with known truth make every piece testable without
satellite data.
"""

from .assess import (
    ConfusionMatrix,
    ErrorRates,
    SAMPLER_ALGORITHM,
    TestSite,
    accuracy_of,
    confusion_matrix,
    omission_commission,
    read_sites_csv,
    sample_sites,
    write_sites_csv,
)
from .baselines import (
    EmFitResult,
    GmmParams,
    SIGMA_FLOOR,
    em_fit,
    gmm_bayes_threshold,
    kmeans2_threshold,
    valley_threshold,
)
from .errors import (
    ConfigError,
    CsvFormatError,
    DegenerateHistogramError,
    DegeneratePartitionError,
    EmptyInputError,
    EmptyMatrixError,
    FormatError,
    GridFormatError,
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
from .histogram import (
    Histogram,
    build_histogram,
    merge_histograms,
    read_histogram_csv,
    smooth_histogram,
    write_histogram_csv,
)
from .otsu import (
    ClassStats,
    ThresholdResult,
    class_statistics,
    decomposition_curve,
    objective_curve,
    otsu_linear,
    otsu_quadratic,
)
from .pipeline import (
    PipelineConfig,
    load_config,
    run_pipeline,
    select_threshold,
)
from .postprocess import boundary_clean, majority_filter, remove_small_components
from .raster import (
    AreaSummary,
    ClassMap,
    NODATA,
    NONWATER,
    Raster,
    WATER,
    apply_mask,
    classify,
    linear_to_db,
    mask_raster,
    median_prefilter,
    read_class_map,
    read_grid,
    water_area,
    write_grid,
)
from .synth import (
    BlobSet,
    Disc,
    HalfPlane,
    bayes_error,
    parse_geometry,
    sample_mixture,
    synth_histogram,
    synth_scene,
)

__version__ = "0.1.0"

"""Co-localization of the common object across image sets from
convolutional descriptor fields, plus noisy-image detection, evaluation and
webly dataset cleaning."""

from .cleaning import FilterPolicy, export_voc, filter_dataset
from .errors import DdtError
from .evaluate import CorLocReport, RocCurve, corloc, iou, noise_roc
from .formats import (
    BoundingBox,
    DescriptorTensor,
    ImageRecord,
    ImageSetManifest,
    load_manifest,
    read_descriptor_file,
    write_descriptor_file,
    write_manifest,
)
from .localize import (
    LocalizationResult,
    Method,
    binarize,
    compute_set_statistics,
    ddt_localize,
    ddt_plus_localize,
    largest_connected_component,
    min_covering_box,
    resize_nearest,
    scda_localize,
)
from .stats import (
    CovarianceAccumulator,
    SetStatistics,
    accumulate,
    empty_accumulator,
    finalize,
    merge,
    orient_eigenvector,
)
from .synth import SynthSpec, generate, random_spec
from .transform import IndicatorMap, normalize_signed, project

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "CorLocReport",
    "CovarianceAccumulator",
    "DdtError",
    "DescriptorTensor",
    "FilterPolicy",
    "ImageRecord",
    "ImageSetManifest",
    "IndicatorMap",
    "LocalizationResult",
    "Method",
    "RocCurve",
    "SetStatistics",
    "SynthSpec",
    "accumulate",
    "binarize",
    "compute_set_statistics",
    "corloc",
    "ddt_localize",
    "ddt_plus_localize",
    "empty_accumulator",
    "export_voc",
    "filter_dataset",
    "finalize",
    "generate",
    "iou",
    "largest_connected_component",
    "load_manifest",
    "merge",
    "min_covering_box",
    "noise_roc",
    "normalize_signed",
    "orient_eigenvector",
    "project",
    "random_spec",
    "read_descriptor_file",
    "resize_nearest",
    "scda_localize",
    "write_descriptor_file",
    "write_manifest",
]

"""Barcode fidelity/diversity metrics for embedding sets.

The package scores how close and how spread-out two finite point sets are,
using the max-normalized multiset of their pairwise L2 distances, alongside
PRDC (precision/recall/density/coverage) and Frechet-distance baselines,
joint SVD dimension reduction, distance-domain outlier trimming, and a
seeded experiment harness.

Submodules load lazily so CLI startup does not pay for estimator-framework
imports unless projection features are used.
"""

import importlib

from ._meta import VERSION as __version__

_ATTR_TO_MODULE = {}
for _module, _names in {
    "barcode": ("BarcodeMetrics", "OutlierPolicy", "barcode_metrics", "diversity",
                "fidelity", "metrics_from_summaries", "relative_diversity",
                "relative_fidelity", "remove_outliers"),
    "baselines": ("PrdcScores", "frechet_distance", "knn_radius", "prdc"),
    "distances": ("DEFAULT_EXACT_LIMIT", "BarcodeCurve", "ConcentrationDiagnostics",
                  "DistanceSummary", "NormalizedMoments", "barcode_curve",
                  "concentration_diagnostics", "cross_distances", "normalize",
                  "self_distances"),
    "embeddings": ("DatasetManifest", "EmbeddingSet", "ManifestEntry",
                   "load_embeddings", "load_manifest", "load_manifest_entry",
                   "sample_gaussian", "save_embeddings"),
    "errors": ("BarcodeError", "CapacityError", "ConfigError", "DataError",
               "FormatError", "IoError", "NumericalError", "ParameterError",
               "ShapeError"),
    "evaluator": ("BarcodeEvaluator",),
    "experiments": ("ExperimentResult", "ExperimentSpec", "ResultRow", "load_spec",
                    "run_contamination", "run_experiment", "run_gaussian_pair",
                    "run_mean_sweep", "run_outlier_injection", "run_swap_stress"),
    "reduction": ("JointProjection", "fit_projection", "project"),
    "report": ("compute_report", "file_digest", "report_to_csv", "report_to_json"),
}.items():
    for _name in _names:
        _ATTR_TO_MODULE[_name] = _module

__all__ = ["__version__"] + sorted(_ATTR_TO_MODULE)


def __getattr__(name):
    module_name = _ATTR_TO_MODULE.get(name)
    if module_name is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    value = getattr(importlib.import_module(f".{module_name}", __name__), name)
    globals()[name] = value
    return value


def __dir__():
    return sorted(set(globals()) | set(__all__))

"""Machine-readable metric reports: assembly, JSON canonicalization, csv view.

Reports are deterministic: identical inputs, flags and seed serialize to
byte-identical JSON apart from the timing block, which tests and consumers
strip before comparing.
"""

import hashlib
import json
import time

from ._meta import VERSION
from .barcode import OutlierPolicy, barcode_metrics
from .baselines import frechet_distance, prdc
from .distances import DEFAULT_EXACT_LIMIT
from .embeddings import RNG_DESCRIPTION, EmbeddingSet
from .errors import ParameterError

KNOWN_METRICS = ("barcode", "prdc", "fid")


def file_digest(path) -> str:
    """64-bit content digest, hex encoded."""
    h = hashlib.blake2b(digest_size=8)
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _input_block(embeddings: EmbeddingSet, digest=None) -> dict:
    return {
        "label": embeddings.label,
        "rows": embeddings.n_samples,
        "dims": embeddings.n_features,
        "source": embeddings.source,
        "digest": digest,
    }


def compute_report(real: EmbeddingSet, fake: EmbeddingSet, metrics=("barcode",),
                   k: int = 5, dims=None, min_explainability=None, center=False,
                   policy: OutlierPolicy = None, convention: str = "survival",
                   exact_limit: int = DEFAULT_EXACT_LIMIT,
                   include_self_pairs: bool = False, seed: int = 0,
                   digests=(None, None)) -> dict:
    """Run the requested metrics on a pair of embedding sets.

    An optional joint projection (by target dimension or minimum
    explainability) is fitted and applied before any metric runs.
    """
    if not metrics:
        raise ParameterError(f"no metrics requested, expected a subset of {KNOWN_METRICS}")
    for name in metrics:
        if name not in KNOWN_METRICS:
            raise ParameterError(f"unknown metric {name!r}, expected subset of {KNOWN_METRICS}")
    report = {
        "inputs": {"real": _input_block(real, digests[0]),
                   "fake": _input_block(fake, digests[1])},
        "projection": None,
        "barcode": None,
        "prdc": None,
        "fid": None,
        "outlier_policy": None if policy is None else
            {"prob": policy.prob, "position": policy.position},
        "engine": {
            "version": VERSION,
            "rng": RNG_DESCRIPTION,
            "fidelity_convention": convention,
            "exact_limit": exact_limit,
            "include_self_pairs": include_self_pairs,
            "seed": seed,
        },
        "timing": {},
    }
    timing = report["timing"]

    if dims is not None or min_explainability is not None:
        from .reduction import fit_projection, project  # defers the sklearn import
        t0 = time.perf_counter()
        model = fit_projection(real, fake, n_components=dims,
                               min_explainability=min_explainability, center=center)
        real = project(model, real)
        fake = project(model, fake)
        report["projection"] = {
            "dims": int(model.components_.shape[0]),
            "explainability": model.explainability_,
            "centered": bool(center),
        }
        timing["projection_s"] = time.perf_counter() - t0

    if "barcode" in metrics:
        t0 = time.perf_counter()
        report["barcode"] = barcode_metrics(
            real, fake, policy=policy, convention=convention,
            exact_limit=exact_limit, include_self_pairs=include_self_pairs).as_dict()
        timing["barcode_s"] = time.perf_counter() - t0
    if "prdc" in metrics:
        t0 = time.perf_counter()
        report["prdc"] = prdc(real, fake, k=k).as_dict()
        timing["prdc_s"] = time.perf_counter() - t0
    if "fid" in metrics:
        t0 = time.perf_counter()
        report["fid"] = frechet_distance(real, fake)
        timing["fid_s"] = time.perf_counter() - t0
    return report


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _flatten(node, prefix=""):
    rows = []
    if isinstance(node, dict):
        for key in sorted(node):
            rows.extend(_flatten(node[key], f"{prefix}{key}."))
    else:
        rows.append((prefix[:-1], node))
    return rows


def report_to_csv(report: dict) -> str:
    """Flat key,value projection of the JSON report."""
    lines = ["key,value"]
    for key, value in _flatten(report):
        if isinstance(value, float):
            value = repr(value)
        elif value is None:
            value = ""
        lines.append(f"{key},{value}")
    return "\n".join(lines) + "\n"

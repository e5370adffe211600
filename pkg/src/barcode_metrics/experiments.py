"""Seeded, declarative experiment protocols over synthetic and file inputs.

Each runner produces long-format rows (sweep_point, metric, value, rep, seed)
plus a provenance record, and every run is exactly reproducible from its
spec and base seed: per-point sampling seeds are derived deterministically,
sweep points use fresh copies of the inputs, and swap/replacement index
choices are logged.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._meta import VERSION
from .barcode import OutlierPolicy, barcode_metrics
from .baselines import frechet_distance, prdc
from .embeddings import (RNG_DESCRIPTION, EmbeddingSet, load_embeddings,
                         load_manifest, load_manifest_entry, sample_gaussian)
from .errors import ConfigError, ParameterError
from .validation import as_matrix

KINDS = ("gaussian_pair", "outlier_injection", "mean_sweep", "swap_stress",
         "contamination")

BARCODE_METRIC_NAMES = ("fidelity_pq", "fidelity_pp", "fidelity_qq",
                        "diversity_pq", "diversity_pp", "diversity_qq",
                        "relative_fidelity", "relative_diversity")


@dataclass(frozen=True)
class ResultRow:
    sweep_point: str
    metric: str
    value: float
    rep: int
    seed: int


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        keys = [(r.sweep_point, r.metric, r.rep) for r in self.rows]
        if len(set(keys)) != len(keys):
            dup = next(k for k in keys if keys.count(k) > 1)
            raise ParameterError(f"duplicate result row {dup}")

    def value(self, sweep_point: str, metric: str, rep: int = 0) -> float:
        for r in self.rows:
            if (r.sweep_point, r.metric, r.rep) == (str(sweep_point), metric, rep):
                return r.value
        raise KeyError((sweep_point, metric, rep))

    def series(self, metric: str, rep: int = 0):
        """Values of one metric across sweep points, in sweep order."""
        out = []
        seen = []
        for r in self.rows:
            if r.metric == metric and r.rep == rep and r.sweep_point not in seen:
                seen.append(r.sweep_point)
                out.append(r.value)
        return seen, out

    def summary(self) -> dict:
        agg = {}
        for r in self.rows:
            agg.setdefault(r.sweep_point, {}).setdefault(r.metric, []).append(r.value)
        return {
            sweep: {metric: {"mean": float(np.mean(vals)),
                             "std": float(np.std(vals)),
                             "n": len(vals)}
                    for metric, vals in metrics.items()}
            for sweep, metrics in agg.items()
        }

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("sweep_point,metric,value,rep,seed\n")
            for r in self.rows:
                fh.write(f"{r.sweep_point},{r.metric},{r.value!r},{r.rep},{r.seed}\n")

    def write_json(self, path) -> None:
        doc = {
            "provenance": self.provenance,
            "summary": self.summary(),
            "rows": [{"sweep_point": r.sweep_point, "metric": r.metric,
                      "value": r.value, "rep": r.rep, "seed": r.seed}
                     for r in self.rows],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=2, allow_nan=True)
            fh.write("\n")


def child_seed(*parts) -> int:
    """Deterministic 64-bit seed derived from integer parts."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1, np.uint64)[0])


def _provenance(kind, seed, repetitions, parameters, policy, details=None) -> dict:
    return {
        "kind": kind,
        "seed": int(seed),
        "repetitions": int(repetitions),
        "parameters": parameters,
        "outlier_policy": None if policy is None else
            {"prob": policy.prob, "position": policy.position},
        "engine": {"version": VERSION, "rng": RNG_DESCRIPTION},
        "details": details or {},
    }


def _nan_if_none(value):
    return math.nan if value is None else float(value)


def _emit_barcode(rows, sweep, rep, seed, bm):
    data = bm.as_dict()
    for name in BARCODE_METRIC_NAMES:
        rows.append(ResultRow(str(sweep), name, _nan_if_none(data[name]), rep, seed))


def _emit_prdc(rows, sweep, rep, seed, scores):
    for name in ("precision", "recall", "density", "coverage"):
        rows.append(ResultRow(str(sweep), name, getattr(scores, name), rep, seed))


def _pair_metrics(rows, sweep, rep, seed, real, fake, metrics, k, policy, convention):
    _emit_barcode(rows, sweep, rep, seed,
                  barcode_metrics(real, fake, policy=policy, convention=convention))
    if "prdc" in metrics:
        _emit_prdc(rows, sweep, rep, seed, prdc(real, fake, k=k))
    if "fid" in metrics:
        rows.append(ResultRow(str(sweep), "fid", frechet_distance(real, fake), rep, seed))


def _map_ordered(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def run_gaussian_pair(n: int, d: int, seed=0, metrics=("barcode",), k: int = 5,
                      policy: OutlierPolicy = None, convention: str = "survival",
                      repetitions: int = 1) -> ExperimentResult:
    """Metrics between two independent isotropic Gaussian samples."""
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    rows = []
    for rep in range(repetitions):
        rep_seed = child_seed(seed, rep)
        P = sample_gaussian(n, d, seed=child_seed(seed, rep, 0), label="reference")
        Q = sample_gaussian(n, d, seed=child_seed(seed, rep, 1), label="candidate")
        _pair_metrics(rows, "baseline", rep, rep_seed, P, Q, metrics, k, policy, convention)
    return ExperimentResult(
        rows=tuple(rows),
        provenance=_provenance("gaussian_pair", seed, repetitions,
                               {"n": n, "d": d, "metrics": list(metrics), "k": k},
                               policy))


def run_outlier_injection(n_clean: int, d: int, outlier_value: float = 3.0,
                          k: int = 5, policy: OutlierPolicy = None, seed=0,
                          metrics=("barcode", "prdc"), convention: str = "survival",
                          repetitions: int = 1) -> ExperimentResult:
    """Inject one constant vector into a clean cohort and compare against a
    clean opposite cohort, with and without the trimming policy.

    Sweep points: "clean" (no injection), "contaminated" (reference side
    gains the outlier row), and "trimmed" (same pair, policy applied). The
    injected vector's norm is reported under "contaminated".
    """
    if n_clean < 2:
        raise ParameterError(f"n_clean must be >= 2, got {n_clean}")
    rows = []
    for rep in range(repetitions):
        rep_seed = child_seed(seed, rep)
        base = sample_gaussian(n_clean, d, seed=child_seed(seed, rep, 0), label="base")
        other = sample_gaussian(n_clean, d, seed=child_seed(seed, rep, 1), label="other")
        outlier = np.full((1, d), float(outlier_value))
        contaminated = np.vstack([base.data, outlier])
        _pair_metrics(rows, "clean", rep, rep_seed, base.data, other.data,
                      metrics, k, None, convention)
        _pair_metrics(rows, "contaminated", rep, rep_seed, contaminated, other.data,
                      metrics, k, None, convention)
        rows.append(ResultRow("contaminated", "outlier_norm",
                              float(np.linalg.norm(outlier)), rep, rep_seed))
        if policy is not None:
            _pair_metrics(rows, "trimmed", rep, rep_seed, contaminated, other.data,
                          metrics, k, policy, convention)
    return ExperimentResult(
        rows=tuple(rows),
        provenance=_provenance("outlier_injection", seed, repetitions,
                               {"n_clean": n_clean, "d": d,
                                "outlier_value": outlier_value,
                                "metrics": list(metrics), "k": k},
                               policy))


def run_mean_sweep(n: int, d: int, means, policy: OutlierPolicy = None, seed=0,
                   convention: str = "survival", repetitions: int = 1,
                   threads: int = 1) -> ExperimentResult:
    """Barcode metrics of N(mu*1, I) samples against an N(0, I) reference,
    for each mu in the grid."""
    means = list(means)
    if not means:
        raise ParameterError("mean sweep grid must be non-empty")
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    rows = []
    for rep in range(repetitions):
        rep_seed = child_seed(seed, rep)
        reference = sample_gaussian(n, d, seed=child_seed(seed, rep, 0), label="reference")

        def point(args):
            idx, mu = args
            shifted = sample_gaussian(n, d, mean=mu,
                                      seed=child_seed(seed, rep, 1 + idx),
                                      label=f"mean={mu}")
            return barcode_metrics(reference.data, shifted.data, policy=policy,
                                   convention=convention)

        results = _map_ordered(point, list(enumerate(means)), threads)
        for mu, bm in zip(means, results):
            _emit_barcode(rows, mu, rep, rep_seed, bm)
    return ExperimentResult(
        rows=tuple(rows),
        provenance=_provenance("mean_sweep", seed, repetitions,
                               {"n": n, "d": d, "means": means},
                               policy))


def run_swap_stress(A, B, exponents, metrics=("barcode",), k: int = 5, seed=0,
                    policy: OutlierPolicy = None, convention: str = "survival",
                    repetitions: int = 1, threads: int = 1) -> ExperimentResult:
    """Swap 2^n randomly chosen rows between copies of A and B per sweep point.

    A baseline point ("0", no swaps) is always included; each point also
    reports the intrinsic diversity ratio diversity(A',A')/diversity(B',B'),
    whose baseline value is the unswapped self-diversity ratio.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    exponents = list(exponents)
    counts = [0] + [2 ** int(e) for e in exponents]
    limit = min(A.shape[0], B.shape[0])
    if counts and max(counts) > limit:
        raise ParameterError(f"cannot swap {max(counts)} rows between sets of "
                             f"{A.shape[0]} and {B.shape[0]} rows")
    rows = []
    details = {}
    for rep in range(repetitions):
        rep_seed = child_seed(seed, rep)

        def point(args):
            idx, count = args
            a_mod, b_mod = A.copy(), B.copy()
            chosen = None
            if count:
                rng = np.random.Generator(np.random.Philox(child_seed(seed, rep, idx)))
                ia = rng.choice(A.shape[0], size=count, replace=False)
                ib = rng.choice(B.shape[0], size=count, replace=False)
                a_mod[ia], b_mod[ib] = B[ib], A[ia]
                chosen = {"a": sorted(int(i) for i in ia),
                          "b": sorted(int(i) for i in ib)}
            bm = barcode_metrics(a_mod, b_mod, policy=policy, convention=convention)
            extra_rows = []
            if "prdc" in metrics:
                extra_rows.append(("prdc", prdc(a_mod, b_mod, k=k)))
            if "fid" in metrics:
                extra_rows.append(("fid", frechet_distance(a_mod, b_mod)))
            ratio = (bm.diversity_pp / bm.diversity_qq
                     if bm.diversity_qq > 0 else math.nan)
            return bm, extra_rows, ratio, chosen

        results = _map_ordered(point, list(enumerate(counts)), threads)
        for count, (bm, extra, ratio, chosen) in zip(counts, results):
            _emit_barcode(rows, count, rep, rep_seed, bm)
            rows.append(ResultRow(str(count), "diversity_ratio", ratio, rep, rep_seed))
            for name, payload in extra:
                if name == "prdc":
                    _emit_prdc(rows, count, rep, rep_seed, payload)
                else:
                    rows.append(ResultRow(str(count), "fid", payload, rep, rep_seed))
            if chosen is not None:
                details[f"rep{rep}/swap{count}"] = chosen
    return ExperimentResult(
        rows=tuple(rows),
        provenance=_provenance("swap_stress", seed, repetitions,
                               {"exponents": exponents, "metrics": list(metrics),
                                "k": k, "rows_a": int(A.shape[0]),
                                "rows_b": int(B.shape[0])},
                               policy, details))


def run_contamination(base, foreign, exponents, metrics=("barcode", "prdc"),
                      k: int = 5, seed=0, policy: OutlierPolicy = None,
                      convention: str = "survival", repetitions: int = 1,
                      threads: int = 1) -> ExperimentResult:
    """Replace min(2^i, N) rows of the base set with foreign rows per sweep
    point and score the contaminated copy against the unmodified base.

    When the foreign set has at least as many rows as the base, replacement
    is position-aligned (row i of base becomes row i of foreign), so a
    foreign set equal to the base is a literal no-op; otherwise donor rows
    are drawn without replacement from the foreign set.
    """
    base = as_matrix(base, "base")
    foreign = as_matrix(foreign, "foreign")
    exponents = list(exponents)
    if not exponents:
        raise ParameterError("contamination needs at least one exponent")
    n = base.shape[0]
    counts = [min(2 ** int(e), n) for e in exponents]
    if max(counts) > foreign.shape[0]:
        raise ParameterError(f"need {max(counts)} foreign rows, got {foreign.shape[0]}")
    rows = []
    details = {}
    for rep in range(repetitions):
        rep_seed = child_seed(seed, rep)

        def point(args):
            idx, count = args
            modified = base.copy()
            chosen = None
            if count:
                rng = np.random.Generator(np.random.Philox(child_seed(seed, rep, idx)))
                targets = rng.choice(n, size=count, replace=False)
                if foreign.shape[0] >= n:
                    sources = targets
                else:
                    sources = rng.choice(foreign.shape[0], size=count, replace=False)
                modified[targets] = foreign[sources]
                chosen = {"targets": sorted(int(i) for i in targets),
                          "sources": sorted(int(i) for i in sources)}
            bm = barcode_metrics(base, modified, policy=policy, convention=convention)
            scores = prdc(base, modified, k=k) if "prdc" in metrics else None
            fid = frechet_distance(base, modified) if "fid" in metrics else None
            return bm, scores, fid, chosen

        results = _map_ordered(point, list(enumerate(counts)), threads)
        for count, (bm, scores, fid, chosen) in zip(counts, results):
            _emit_barcode(rows, count, rep, rep_seed, bm)
            if scores is not None:
                _emit_prdc(rows, count, rep, rep_seed, scores)
            if fid is not None:
                rows.append(ResultRow(str(count), "fid", fid, rep, rep_seed))
            if chosen is not None:
                details[f"rep{rep}/replace{count}"] = chosen
    return ExperimentResult(
        rows=tuple(rows),
        provenance=_provenance("contamination", seed, repetitions,
                               {"exponents": exponents, "metrics": list(metrics),
                                "k": k, "rows_base": int(n),
                                "rows_foreign": int(foreign.shape[0])},
                               policy, details))


# --- declarative spec files ------------------------------------------------

@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    parameters: dict
    outlier_policy: OutlierPolicy = None
    repetitions: int = 1
    seed: int = 0


def _require(params: dict, key: str, where: str):
    if key not in params:
        raise ConfigError(f"{where}.{key}: missing required key")
    return params[key]


def load_spec(path) -> ExperimentSpec:
    """Parse and validate a JSON experiment spec; errors name the bad key."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: spec must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind: must be one of {KINDS}, got {kind!r}")
    repetitions = doc.get("repetitions", 1)
    if not isinstance(repetitions, int) or repetitions < 1:
        raise ConfigError(f"repetitions: must be a positive integer, got {repetitions!r}")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed: must be a non-negative integer, got {seed!r}")
    policy = None
    if doc.get("outlier_policy") is not None:
        node = doc["outlier_policy"]
        if not isinstance(node, dict) or "prob" not in node:
            raise ConfigError("outlier_policy: must be an object with 'prob'")
        try:
            policy = OutlierPolicy(prob=float(node["prob"]),
                                   position=node.get("position", "out"))
        except ParameterError as exc:
            raise ConfigError(f"outlier_policy: {exc}") from exc
    parameters = doc.get("parameters")
    if not isinstance(parameters, dict):
        raise ConfigError("parameters: must be an object")
    _validate_parameters(kind, parameters)
    return ExperimentSpec(kind=kind, parameters=parameters, outlier_policy=policy,
                          repetitions=repetitions, seed=seed)


def _validate_parameters(kind: str, params: dict) -> None:
    where = "parameters"
    if kind == "gaussian_pair":
        n = _require(params, "n", where)
        if not isinstance(n, int) or n < 2:
            raise ConfigError(f"{where}.n: must be an integer >= 2")
        d = _require(params, "d", where)
        if not isinstance(d, int) or d < 1:
            raise ConfigError(f"{where}.d: must be a positive integer")
    elif kind == "outlier_injection":
        for key in ("n_clean", "d"):
            value = _require(params, key, where)
            if not isinstance(value, int) or value < 2:
                raise ConfigError(f"{where}.{key}: must be an integer >= 2")
    elif kind == "mean_sweep":
        for key in ("n", "d"):
            value = _require(params, key, where)
            if not isinstance(value, int) or value < 2:
                raise ConfigError(f"{where}.{key}: must be an integer >= 2")
        means = _require(params, "means", where)
        if not isinstance(means, list) or not means:
            raise ConfigError(f"{where}.means: must be a non-empty list")
    elif kind == "swap_stress":
        for key in ("a", "b"):
            _validate_input_node(_require(params, key, where), f"{where}.{key}")
        _validate_exponents(params.get("exponents", []), f"{where}.exponents")
    elif kind == "contamination":
        for key in ("base", "foreign"):
            _validate_input_node(_require(params, key, where), f"{where}.{key}")
        exps = _require(params, "exponents", where)
        _validate_exponents(exps, f"{where}.exponents")
        if not exps:
            raise ConfigError(f"{where}.exponents: must be non-empty")


def _validate_exponents(value, where: str) -> None:
    if not isinstance(value, list) or not all(isinstance(e, int) and e >= 0 for e in value):
        raise ConfigError(f"{where}: must be a list of non-negative integers")


def _validate_input_node(node, where: str) -> None:
    if not isinstance(node, dict):
        raise ConfigError(f"{where}: must be an object")
    sources = [key for key in ("path", "gaussian", "manifest") if key in node]
    if len(sources) != 1:
        raise ConfigError(f"{where}: needs exactly one of 'path', 'gaussian', 'manifest'")
    if "gaussian" in node:
        g = node["gaussian"]
        if not isinstance(g, dict):
            raise ConfigError(f"{where}.gaussian: must be an object")
        for key in ("n", "d"):
            if not isinstance(g.get(key), int) or g[key] < 1:
                raise ConfigError(f"{where}.gaussian.{key}: must be a positive integer")
    if "manifest" in node and "label" not in node:
        raise ConfigError(f"{where}.label: required with 'manifest'")


def _resolve_input(node: dict, seed: int, stream: int) -> EmbeddingSet:
    if "path" in node:
        return load_embeddings(node["path"], format=node.get("format"),
                               label=node.get("label"))
    if "manifest" in node:
        return load_manifest_entry(load_manifest(node["manifest"]), node["label"])
    g = node["gaussian"]
    sampled = sample_gaussian(g["n"], g["d"], mean=float(g.get("mean", 0.0)),
                              seed=child_seed(seed, stream),
                              label=node.get("label"))
    scale = float(g.get("scale", 1.0))
    if scale != 1.0:
        shifted = (sampled.data - float(g.get("mean", 0.0))) * scale + float(g.get("mean", 0.0))
        sampled = EmbeddingSet(shifted, label=sampled.label,
                               source=sampled.source + f"|scale={scale}")
    return sampled


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> ExperimentResult:
    """Dispatch a validated spec to its runner."""
    p = dict(spec.parameters)
    common = dict(seed=spec.seed, policy=spec.outlier_policy,
                  repetitions=spec.repetitions)
    if spec.kind == "gaussian_pair":
        return run_gaussian_pair(p["n"], p["d"],
                                 metrics=tuple(p.get("metrics", ("barcode",))),
                                 k=p.get("k", 5),
                                 convention=p.get("convention", "survival"),
                                 **common)
    if spec.kind == "outlier_injection":
        return run_outlier_injection(p["n_clean"], p["d"],
                                     outlier_value=float(p.get("outlier_value", 3.0)),
                                     k=p.get("k", 5),
                                     metrics=tuple(p.get("metrics", ("barcode", "prdc"))),
                                     convention=p.get("convention", "survival"),
                                     **common)
    if spec.kind == "mean_sweep":
        return run_mean_sweep(p["n"], p["d"], p["means"],
                              convention=p.get("convention", "survival"),
                              threads=threads, **common)
    if spec.kind == "swap_stress":
        a = _resolve_input(p["a"], spec.seed, 1000)
        b = _resolve_input(p["b"], spec.seed, 1001)
        return run_swap_stress(a, b, p.get("exponents", []),
                               metrics=tuple(p.get("metrics", ("barcode",))),
                               k=p.get("k", 5),
                               convention=p.get("convention", "survival"),
                               threads=threads, **common)
    if spec.kind == "contamination":
        base = _resolve_input(p["base"], spec.seed, 1000)
        foreign = _resolve_input(p["foreign"], spec.seed, 1001)
        return run_contamination(base, foreign, p["exponents"],
                                 metrics=tuple(p.get("metrics", ("barcode", "prdc"))),
                                 k=p.get("k", 5),
                                 convention=p.get("convention", "survival"),
                                 threads=threads, **common)
    raise ConfigError(f"kind: unknown experiment kind {spec.kind!r}")

"""Pairwise L2 distance multisets and their streaming moment summaries.

Distances are computed blockwise as sqrt(|a|^2 + |b|^2 - 2 a.b) through
matrix-multiply kernels, with tiny negative squared distances clamped to
zero before the square root. Moments are accumulated per row in fixed row
order with Kahan compensation. The default block schedule is a pure
function of the input shapes, so identical inputs give bit-identical
summaries regardless of BLAS thread count; overriding block_rows can move
individual distances by an ulp (BLAS picks shape-dependent kernels) and is
meant for capacity tuning and tests only.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DataError, ParameterError
from .validation import as_matrix, check_same_features

# default cap on exactly stored pair multisets: 2^27 float64 ~ 1 GiB
DEFAULT_EXACT_LIMIT = 2 ** 27

# target elements per distance block (~32 MiB of float64)
_BLOCK_TARGET = 4_000_000


@dataclass(frozen=True)
class DistanceSummary:
    """Moments (and optionally the sorted multiset) of a pair-distance multiset."""

    count: int
    sum: float
    sum_sq: float
    max: float
    min: float
    mode: str  # "exact" | "streaming"
    excluded_self_pairs: int = 0
    distances: np.ndarray = None  # sorted ascending, exact mode only

    @property
    def mean(self) -> float:
        return self.sum / self.count

    @property
    def variance(self) -> float:
        # population variance of the raw distances
        return max(0.0, self.sum_sq / self.count - self.mean ** 2)


@dataclass(frozen=True)
class NormalizedMoments:
    """Moments of d / max(d), the distances normalized by the multiset maximum."""

    mean_norm: float
    var_norm: float
    max_raw: float
    degenerate: bool = False


@dataclass(frozen=True)
class BarcodeCurve:
    """Sampled threshold curve: fraction of pairs at or below each threshold."""

    thresholds: np.ndarray  # in [0, 1]
    below_fraction: np.ndarray
    alive_fraction: np.ndarray
    degenerate: bool = False


@dataclass(frozen=True)
class ConcentrationDiagnostics:
    cv_distance: float
    mean_abs_cosine: float
    orthogonality_bound: float
    pairs_used: int


class _Kahan:
    """Compensated scalar accumulator; addition order defines the result bits."""

    __slots__ = ("total", "comp")

    def __init__(self):
        self.total = 0.0
        self.comp = 0.0

    def add(self, value: float) -> None:
        y = value - self.comp
        t = self.total + y
        self.comp = (t - self.total) - y
        self.total = t

    def extend(self, values) -> None:
        for v in values:
            self.add(float(v))


def _rows_per_block(n_cols: int, block_rows=None) -> int:
    if block_rows is not None:
        if block_rows < 1:
            raise ParameterError(f"block_rows must be >= 1, got {block_rows}")
        return int(block_rows)
    return max(1, min(4096, _BLOCK_TARGET // max(1, n_cols)))


def _squared_block(P_blk, Q, p_sq_blk, q_sq):
    d2 = p_sq_blk[:, None] + q_sq[None, :] - 2.0 * (P_blk @ Q.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _resolve_mode(mode: str, count: int, exact_limit: int) -> str:
    if mode not in ("exact", "streaming", "auto"):
        raise ParameterError(f"unknown mode {mode!r}")
    if mode == "auto":
        return "exact" if count <= exact_limit else "streaming"
    if mode == "exact" and count > exact_limit:
        raise CapacityError(
            f"exact mode needs {count} stored pair distances, above the limit "
            f"{exact_limit}; raise exact_limit or use streaming/auto mode")
    return mode


def _summarize(P, Q, diag_offset=None, keep=False, block_rows=None,
               excluded=0):
    """Shared accumulation loop.

    diag_offset, when not None, marks entries (i, i + diag_offset) of the
    full P x Q distance matrix as structurally excluded (self pairs): they
    are forced to exact zero so they cannot pollute sums or the maximum,
    skipped for the minimum, and dropped from the stored multiset.
    """
    n, m = P.shape[0], Q.shape[0]
    p_sq = np.einsum("ij,ij->i", P, P)
    q_sq = p_sq if Q is P else np.einsum("ij,ij->i", Q, Q)
    if Q is P:
        # numpy routes same-buffer A @ A.T to a symmetric-product BLAS kernel
        # whose rounding differs from the general kernel; a fresh buffer keeps
        # results identical whether callers pass the same object or a copy
        Q = P.copy()
    step = _rows_per_block(m, block_rows)

    sum_acc, sq_acc = _Kahan(), _Kahan()
    max_val, min_val = 0.0, math.inf
    parts = [] if keep else None
    for i0 in range(0, n, step):
        i1 = min(n, i0 + step)
        d2 = _squared_block(P[i0:i1], Q, p_sq[i0:i1], q_sq)
        mask = None
        if diag_offset is not None:
            rows = np.arange(i0, i1)
            cols = rows + diag_offset
            ok = (cols >= 0) & (cols < m)
            if ok.any():
                mask = np.ones(d2.shape, dtype=bool)
                mask[rows[ok] - i0, cols[ok]] = False
                d2[~mask] = 0.0
        sq_acc.extend(d2.sum(axis=1))
        d = np.sqrt(d2)
        sum_acc.extend(d.sum(axis=1))
        max_val = max(max_val, float(d.max()))
        if mask is None:
            min_val = min(min_val, float(d.min()))
            if keep:
                parts.append(d.ravel())
        else:
            min_val = min(min_val, float(np.min(d, initial=math.inf, where=mask)))
            if keep:
                parts.append(d[mask])

    count = n * m - excluded
    distances = None
    if keep:
        distances = np.sort(np.concatenate(parts)) if parts else np.array([])
    return DistanceSummary(
        count=count,
        sum=sum_acc.total,
        sum_sq=sq_acc.total,
        max=max_val,
        min=min_val if count else math.inf,
        mode="exact" if keep else "streaming",
        excluded_self_pairs=excluded,
        distances=distances,
    )


def cross_distances(P, Q, mode: str = "auto",
                    exact_limit: int = DEFAULT_EXACT_LIMIT,
                    block_rows=None) -> DistanceSummary:
    """Summarize the N*M distances between every row of P and every row of Q.

    The multiset keeps duplicates: each ordered pair (i, j) contributes
    exactly one distance. `mode` picks exact storage of the sorted multiset,
    streaming moments only, or auto (exact while N*M <= exact_limit).
    """
    P = as_matrix(P, "P")
    Q = as_matrix(Q, "Q")
    check_same_features(P, Q)
    resolved = _resolve_mode(mode, P.shape[0] * Q.shape[0], exact_limit)
    return _summarize(P, Q, keep=resolved == "exact", block_rows=block_rows)


def self_distances(P, mode: str = "auto",
                   exact_limit: int = DEFAULT_EXACT_LIMIT,
                   include_self_pairs: bool = False,
                   block_rows=None) -> DistanceSummary:
    """Summarize distances over all ordered pairs (i, j) of rows of P.

    The N structural zeros from i == j are excluded by default (count is
    N*(N-1)); zero distances between duplicate rows at distinct indices are
    kept. Pass include_self_pairs=True to keep the diagonal for sensitivity
    studies.
    """
    P = as_matrix(P, "P")
    if P.shape[0] < 2:
        raise DataError(f"self distances need at least 2 rows, got {P.shape[0]}")
    n = P.shape[0]
    pair_count = n * n if include_self_pairs else n * (n - 1)
    resolved = _resolve_mode(mode, pair_count, exact_limit)
    diag = None if include_self_pairs else 0
    return _summarize(P, P, diag_offset=diag, keep=resolved == "exact",
                      block_rows=block_rows, excluded=0 if include_self_pairs else n)


def normalize(summary: DistanceSummary) -> NormalizedMoments:
    """Moments of the max-normalized distances d~ = d / max(d).

    Uses the population variance: the multiset is the entire population of
    pair distances, not a sample from it. A zero maximum (all points
    coincide) is flagged degenerate rather than raising.
    """
    if summary.count < 1:
        raise DataError("cannot normalize an empty distance summary")
    if summary.max == 0.0:
        return NormalizedMoments(0.0, 0.0, 0.0, degenerate=True)
    mean = summary.sum / summary.count
    var = max(0.0, summary.sum_sq / summary.count - mean * mean)
    return NormalizedMoments(
        mean_norm=mean / summary.max,
        var_norm=var / (summary.max * summary.max),
        max_raw=summary.max,
    )


def barcode_curve(summary: DistanceSummary, resolution: int = 101) -> BarcodeCurve:
    """Sample the empirical curve of pair fractions against the normalized threshold.

    At each of `resolution` evenly spaced thresholds t in [0, 1],
    below_fraction counts the pairs with d~ <= t (so it reaches exactly 1 at
    t = 1) and alive_fraction is its complement.
    """
    if resolution < 2:
        raise ParameterError(f"resolution must be >= 2, got {resolution}")
    if summary.mode != "exact" or summary.distances is None:
        raise CapacityError(
            "the curve needs the exact distance multiset; recompute with "
            "mode='exact' (raising exact_limit if needed) or subsample the inputs")
    thresholds = np.linspace(0.0, 1.0, resolution)
    if summary.max == 0.0:
        below = np.ones_like(thresholds)
        return BarcodeCurve(thresholds, below, 1.0 - below, degenerate=True)
    normed = summary.distances / summary.max
    below = np.searchsorted(normed, thresholds, side="right") / summary.count
    return BarcodeCurve(thresholds, below, 1.0 - below)


def dump_distances(summary: DistanceSummary, path) -> None:
    """Debug dump of the exact multiset as a raw little-endian float64 stream."""
    if summary.mode != "exact" or summary.distances is None:
        raise CapacityError("only exact summaries carry the multiset to dump")
    with open(path, "wb") as fh:
        fh.write(np.ascontiguousarray(summary.distances, dtype="<f8").tobytes())


def _sample_distinct_pairs(n: int, budget: int, seed) -> np.ndarray:
    total = n * (n - 1) // 2
    if total <= budget:
        i, j = np.triu_indices(n, k=1)
        return np.column_stack([i, j])
    rng = np.random.Generator(np.random.Philox(seed))
    seen = set()
    out = []
    while len(out) < budget:
        i, j = (int(v) for v in rng.integers(0, n, 2))
        if i == j:
            continue
        key = (i, j) if i < j else (j, i)
        if key in seen:
            continue
        seen.add(key)
        out.append(key)
    return np.array(out)


def concentration_diagnostics(P, pair_budget: int = 20000,
                              seed=0) -> ConcentrationDiagnostics:
    """High-dimension concentration diagnostics over sampled distinct row pairs.

    cv_distance is std/mean of the raw pair distances; mean_abs_cosine
    averages |cos| between the directions of the two points as seen from the
    centroid; orthogonality_bound is sqrt(6 ln N) / sqrt(D - 1), the
    near-orthogonality envelope those cosines fall under in high dimension.
    """
    P = as_matrix(P, "P")
    n, d = P.shape
    if n < 2:
        raise DataError(f"diagnostics need at least 2 rows, got {n}")
    if pair_budget < 1:
        raise ParameterError(f"pair_budget must be >= 1, got {pair_budget}")
    pairs = _sample_distinct_pairs(n, pair_budget, seed)

    centered = P - P.mean(axis=0)
    norms = np.linalg.norm(centered, axis=1)

    dists = np.empty(len(pairs))
    cosines = np.empty(len(pairs))
    valid = np.ones(len(pairs), dtype=bool)
    chunk = max(1, _BLOCK_TARGET // max(1, d))
    for s in range(0, len(pairs), chunk):
        block = pairs[s:s + chunk]
        diff = P[block[:, 0]] - P[block[:, 1]]
        dists[s:s + chunk] = np.linalg.norm(diff, axis=1)
        dots = np.einsum("ij,ij->i", centered[block[:, 0]], centered[block[:, 1]])
        denom = norms[block[:, 0]] * norms[block[:, 1]]
        ok = denom > 0.0
        valid[s:s + chunk] = ok
        cosines[s:s + chunk] = np.where(ok, np.abs(dots) / np.where(ok, denom, 1.0), 0.0)

    mean_dist = float(dists.mean())
    cv = float(dists.std() / mean_dist) if mean_dist > 0 else 0.0
    mean_cos = float(cosines[valid].mean()) if valid.any() else 0.0
    bound = math.sqrt(6.0 * math.log(n)) / math.sqrt(d - 1) if d > 1 else math.inf
    return ConcentrationDiagnostics(
        cv_distance=cv,
        mean_abs_cosine=mean_cos,
        orthogonality_bound=bound,
        pairs_used=len(pairs),
    )

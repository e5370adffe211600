"""Fidelity and diversity of embedding-set pairs from distance summaries.

Both statistics live on the max-normalized distance multiset d~ = d/max(d):
fidelity under the default "survival" convention is 1 - mean(d~) (the area
above the non-increasing curve of still-alive pairs), diversity is the
population standard deviation of d~. The literal "cdf" convention
(fidelity = mean(d~)) stays available for sensitivity studies.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .distances import (DEFAULT_EXACT_LIMIT, DistanceSummary, NormalizedMoments,
                        cross_distances, normalize, self_distances)
from .errors import CapacityError, DataError, ParameterError
from .validation import as_matrix, check_same_features

CONVENTIONS = ("survival", "cdf")
OUTLIER_POSITIONS = ("in", "out", "both")


@dataclass(frozen=True)
class OutlierPolicy:
    """Trim a fixed fraction of the smallest/largest distances before scoring.

    floor(prob * count) distances are removed from each designated side of
    the sorted multiset; position "in" trims the smallest, "out" the largest,
    "both" trims that many from each side.
    """

    prob: float
    position: str = "out"

    def __post_init__(self):
        if not (0.0 <= self.prob < 0.5):
            raise ParameterError(f"outlier probability must be in [0, 0.5), got {self.prob}")
        if self.position not in OUTLIER_POSITIONS:
            raise ParameterError(f"outlier position must be one of {OUTLIER_POSITIONS}, "
                                 f"got {self.position!r}")

    def removal_count(self, count: int) -> int:
        return int(math.floor(self.prob * count))


@dataclass(frozen=True)
class BarcodeMetrics:
    """The six base quantities plus their relative forms.

    relative_fidelity is fidelity_pq / fidelity_pp (P is the reference set);
    relative_diversity is diversity_pq / sqrt(diversity_pp * diversity_qq).
    Either is None when its denominator is degenerate or zero.
    degenerate_flags marks, per base quantity, a multiset whose maximum
    distance was zero.
    """

    fidelity_pq: float
    fidelity_pp: float
    fidelity_qq: float
    diversity_pq: float
    diversity_pp: float
    diversity_qq: float
    relative_fidelity: float = None
    relative_diversity: float = None
    degenerate_flags: dict = field(default_factory=dict)
    convention: str = "survival"

    def as_dict(self) -> dict:
        return {
            "fidelity_pq": self.fidelity_pq,
            "fidelity_pp": self.fidelity_pp,
            "fidelity_qq": self.fidelity_qq,
            "diversity_pq": self.diversity_pq,
            "diversity_pp": self.diversity_pp,
            "diversity_qq": self.diversity_qq,
            "relative_fidelity": self.relative_fidelity,
            "relative_diversity": self.relative_diversity,
            "degenerate_flags": dict(self.degenerate_flags),
            "convention": self.convention,
        }


def fidelity(moments: NormalizedMoments, convention: str = "survival") -> float:
    """Scalar in [0, 1]: how relatively small the distances are.

    survival: 1 - mean(d~); cdf: mean(d~). A degenerate multiset (max = 0,
    all points coincide) scores 1 under either convention: perfect proximity.
    """
    if convention not in CONVENTIONS:
        raise ParameterError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    if moments.degenerate:
        return 1.0
    return 1.0 - moments.mean_norm if convention == "survival" else moments.mean_norm


def diversity(moments: NormalizedMoments) -> float:
    """Population standard deviation of the normalized distances, in [0, 1/2]."""
    if moments.degenerate:
        return 0.0
    return math.sqrt(moments.var_norm)


def relative_fidelity(fidelity_pq: float, fidelity_pp: float):
    """fidelity_pq / fidelity_pp, or None when the reference fidelity is 0."""
    if fidelity_pp <= 0.0:
        return None
    return fidelity_pq / fidelity_pp


def relative_diversity(diversity_pq: float, diversity_pp: float, diversity_qq: float):
    """diversity_pq / sqrt(diversity_pp * diversity_qq), None on a zero denominator."""
    if diversity_pp <= 0.0 or diversity_qq <= 0.0:
        return None
    return diversity_pq / math.sqrt(diversity_pp * diversity_qq)


def remove_outliers(summary: DistanceSummary, policy: OutlierPolicy) -> DistanceSummary:
    """Drop floor(prob*count) distances per designated side and recompute moments.

    Trimming the "out" side can shrink the multiset maximum, which changes
    the normalization downstream. Removal never empties the multiset.
    """
    if summary.mode != "exact" or summary.distances is None:
        raise CapacityError("outlier removal needs the exact sorted multiset; "
                            "recompute in exact mode")
    k = policy.removal_count(summary.count)
    if k == 0:
        return summary
    lo = k if policy.position in ("in", "both") else 0
    hi = k if policy.position in ("out", "both") else 0
    if lo + hi >= summary.count:
        raise DataError(f"removing {lo + hi} of {summary.count} distances would "
                        f"empty the multiset")
    survivors = summary.distances[lo:summary.count - hi]
    return DistanceSummary(
        count=int(survivors.size),
        sum=float(np.sum(survivors)),
        sum_sq=float(np.dot(survivors, survivors)),
        max=float(survivors[-1]),
        min=float(survivors[0]),
        mode="exact",
        excluded_self_pairs=summary.excluded_self_pairs,
        distances=survivors,
    )


def _apply_policy(summary: DistanceSummary, policy) -> DistanceSummary:
    if policy is None or policy.prob == 0.0:
        return summary
    return remove_outliers(summary, policy)


def metrics_from_summaries(cross: DistanceSummary, self_p: DistanceSummary,
                           self_q: DistanceSummary, policy: OutlierPolicy = None,
                           convention: str = "survival") -> BarcodeMetrics:
    """Assemble the six base quantities and the relative forms.

    The policy, when given, trims each multiset independently; each multiset
    is then normalized by its own surviving maximum.
    """
    moments = {}
    flags = {}
    for key, summary in (("pq", cross), ("pp", self_p), ("qq", self_q)):
        m = normalize(_apply_policy(summary, policy))
        moments[key] = m
        flags[f"fidelity_{key}"] = m.degenerate
        flags[f"diversity_{key}"] = m.degenerate
    f = {key: fidelity(m, convention) for key, m in moments.items()}
    d = {key: diversity(m) for key, m in moments.items()}
    return BarcodeMetrics(
        fidelity_pq=f["pq"], fidelity_pp=f["pp"], fidelity_qq=f["qq"],
        diversity_pq=d["pq"], diversity_pp=d["pp"], diversity_qq=d["qq"],
        relative_fidelity=relative_fidelity(f["pq"], f["pp"]),
        relative_diversity=relative_diversity(d["pq"], d["pp"], d["qq"]),
        degenerate_flags=flags,
        convention=convention,
    )


def barcode_metrics(P, Q, policy: OutlierPolicy = None, convention: str = "survival",
                    mode: str = "auto", exact_limit: int = DEFAULT_EXACT_LIMIT,
                    include_self_pairs: bool = False) -> BarcodeMetrics:
    """Compute cross and intrinsic fidelity/diversity between two embedding sets.

    P is the reference (real) set, Q the candidate. Self multisets exclude
    the structural i == i zeros unless include_self_pairs is set. An outlier
    policy forces exact mode, since trimming needs the sorted multisets.
    """
    P = as_matrix(P, "P")
    Q = as_matrix(Q, "Q")
    check_same_features(P, Q)
    if P.shape[0] < 2 or Q.shape[0] < 2:
        raise DataError("intrinsic statistics need at least 2 rows per set, got "
                        f"{P.shape[0]} and {Q.shape[0]}")
    if convention not in CONVENTIONS:
        raise ParameterError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    if policy is not None and policy.prob > 0.0 and mode != "exact":
        mode = "exact"  # trimming needs stored multisets; capacity errors surface here
    cross = cross_distances(P, Q, mode=mode, exact_limit=exact_limit)
    self_p = self_distances(P, mode=mode, exact_limit=exact_limit,
                            include_self_pairs=include_self_pairs)
    self_q = self_distances(Q, mode=mode, exact_limit=exact_limit,
                            include_self_pairs=include_self_pairs)
    return metrics_from_summaries(cross, self_p, self_q, policy, convention)

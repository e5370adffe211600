"""Estimator-style front end: fit on a reference set, evaluate candidates."""

import math

from sklearn.base import BaseEstimator

from .barcode import (CONVENTIONS, BarcodeMetrics, OutlierPolicy,
                      metrics_from_summaries)
from .distances import DEFAULT_EXACT_LIMIT, cross_distances, self_distances
from .errors import ParameterError
from .validation import as_matrix, check_min_rows, check_same_features


class BarcodeEvaluator(BaseEstimator):
    """Score candidate embedding sets against a fitted reference set.

    fit(X) caches the reference set and its self-distance summary; evaluate(Y)
    returns the full BarcodeMetrics for the pair, and score(Y) the relative
    fidelity as a plain float (nan when undefined), so the evaluator drops
    into parameter searches that expect a scalar score.
    """

    def __init__(self, convention="survival", outlier_prob=0.0,
                 outlier_position="out", mode="auto",
                 exact_limit=DEFAULT_EXACT_LIMIT, include_self_pairs=False):
        self.convention = convention
        self.outlier_prob = outlier_prob
        self.outlier_position = outlier_position
        self.mode = mode
        self.exact_limit = exact_limit
        self.include_self_pairs = include_self_pairs

    def _policy(self):
        if self.outlier_prob == 0.0:
            return None
        return OutlierPolicy(prob=self.outlier_prob, position=self.outlier_position)

    def _mode(self):
        # trimming needs stored multisets
        if self.outlier_prob > 0.0 and self.mode != "exact":
            return "exact"
        return self.mode

    def fit(self, X, y=None):
        if self.convention not in CONVENTIONS:
            raise ParameterError(f"convention must be one of {CONVENTIONS}, "
                                 f"got {self.convention!r}")
        X = as_matrix(X, "X")
        check_min_rows(X, 2, "X")
        self._policy()  # validate eagerly
        self.reference_ = X
        self.reference_summary_ = self_distances(
            X, mode=self._mode(), exact_limit=self.exact_limit,
            include_self_pairs=self.include_self_pairs)
        return self

    def evaluate(self, Y) -> BarcodeMetrics:
        if not hasattr(self, "reference_"):
            raise ParameterError("evaluator is not fitted")
        Y = as_matrix(Y, "Y")
        check_same_features(self.reference_, Y, ("reference", "Y"))
        check_min_rows(Y, 2, "Y")
        cross = cross_distances(self.reference_, Y, mode=self._mode(),
                                exact_limit=self.exact_limit)
        self_q = self_distances(Y, mode=self._mode(), exact_limit=self.exact_limit,
                                include_self_pairs=self.include_self_pairs)
        return metrics_from_summaries(cross, self.reference_summary_, self_q,
                                      self._policy(), self.convention)

    def score(self, Y, y=None) -> float:
        value = self.evaluate(Y).relative_fidelity
        return math.nan if value is None else value

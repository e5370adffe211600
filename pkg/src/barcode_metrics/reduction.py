"""Joint SVD projection of embedding-set pairs with explainability accounting.

The basis comes from one uncentered SVD of the two sets stacked row-wise:
cross-set distances only make sense when both sets are projected into the
same subspace. Explainability is the squared-singular-value energy fraction
retained by the leading components; trailing singular values are zero-padded
to the full feature count when there are fewer rows than features, so the
denominator always sums over all D terms.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .embeddings import EmbeddingSet, _read_npy, _write_npy
from .errors import NumericalError, ParameterError, ShapeError
from .validation import as_matrix, check_same_features


class JointProjection(BaseEstimator, TransformerMixin):
    """Project onto the top right-singular vectors of the fitted data.

    Exactly one of `n_components` (a target dimension) or
    `min_explainability` (pick the smallest dimension whose retained energy
    fraction meets the threshold) may be given; with neither, the full
    dimension is kept. `center` subtracts the column means before the SVD
    for sensitivity studies; the default decomposes the raw matrix.

    Attributes after fit: `components_` (n_components x D), full
    `singular_values_` (non-increasing, length D), `explainability_`,
    `n_features_in_`.
    """

    def __init__(self, n_components=None, min_explainability=None, center=False):
        self.n_components = n_components
        self.min_explainability = min_explainability
        self.center = center

    def fit(self, X, y=None):
        X = as_matrix(X, "X")
        n, d = X.shape
        if self.n_components is not None and self.min_explainability is not None:
            raise ParameterError("pass either n_components or min_explainability, not both")
        if self.n_components is not None and not 1 <= self.n_components <= d:
            raise ParameterError(f"n_components must satisfy 1 <= n <= D = {d}, "
                                 f"got {self.n_components}")
        if self.min_explainability is not None and not 0.0 < self.min_explainability <= 1.0:
            raise ParameterError("min_explainability must be in (0, 1], got "
                                 f"{self.min_explainability}")
        work = X - X.mean(axis=0) if self.center else X
        try:
            _, s, vt = np.linalg.svd(work, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD failed to converge: {exc}") from exc
        singular = np.zeros(d)
        singular[:s.size] = s
        energy = np.cumsum(singular ** 2)
        total = energy[-1]

        if self.min_explainability is not None:
            if total == 0.0:
                dp = 1
            else:
                target = self.min_explainability * total
                dp = int(np.searchsorted(energy, target * (1.0 - 1e-12))) + 1
                dp = min(dp, d)
        else:
            dp = self.n_components if self.n_components is not None else d

        basis = np.zeros((dp, d))
        rows = min(dp, vt.shape[0])
        basis[:rows] = vt[:rows]
        if rows < dp:
            # fewer data rows than requested components: complete the basis
            # with an orthonormal extension so transform stays well defined
            basis[rows:] = _orthonormal_completion(vt[:rows], dp - rows)
        self.components_ = basis
        self.singular_values_ = singular
        self.explainability_ = 1.0 if total == 0.0 else float(energy[dp - 1] / total)
        self.n_features_in_ = d
        return self

    def transform(self, X):
        if not hasattr(self, "components_"):
            raise ParameterError("projection model is not fitted")
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(f"X has {X.shape[1]} features, projection was fitted "
                             f"on {self.n_features_in_}")
        return X @ self.components_.T

    def save(self, prefix) -> None:
        """Persist as an npy pair: <prefix>.basis.npy (D x D'), <prefix>.singular_values.npy."""
        _write_npy(f"{prefix}.basis.npy", self.components_.T)
        _write_npy(f"{prefix}.singular_values.npy", self.singular_values_[None, :])

    @classmethod
    def load(cls, prefix) -> "JointProjection":
        basis = _read_npy(f"{prefix}.basis.npy")
        singular = _read_npy(f"{prefix}.singular_values.npy")[0]
        model = cls(n_components=basis.shape[1])
        model.components_ = basis.T
        model.singular_values_ = singular
        energy = np.cumsum(singular ** 2)
        total = energy[-1]
        model.explainability_ = 1.0 if total == 0.0 else float(energy[basis.shape[1] - 1] / total)
        model.n_features_in_ = basis.shape[0]
        return model


def _orthonormal_completion(rows, extra):
    d = rows.shape[1]
    rng = np.random.Generator(np.random.Philox(0))
    out = []
    basis = list(rows)
    while len(out) < extra:
        v = rng.standard_normal(d)
        for b in basis:
            v -= (v @ b) * b
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            v /= norm
            basis.append(v)
            out.append(v)
    return np.array(out)


def fit_projection(P, Q, n_components=None, min_explainability=None,
                   center=False) -> JointProjection:
    """Fit one projection on the row-stacked pair so both sets share a basis."""
    P = as_matrix(P, "P")
    Q = as_matrix(Q, "Q")
    check_same_features(P, Q)
    stacked = np.vstack([P, Q])
    return JointProjection(n_components=n_components,
                           min_explainability=min_explainability,
                           center=center).fit(stacked)


def project(model: JointProjection, X):
    """Apply a fitted projection; EmbeddingSet in, EmbeddingSet out."""
    if isinstance(X, EmbeddingSet):
        return EmbeddingSet(model.transform(X.data), label=X.label,
                            source=f"{X.source}|projected(d={model.components_.shape[0]})")
    return model.transform(X)

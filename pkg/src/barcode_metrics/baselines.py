"""Reference baselines: kNN-manifold precision/recall/density/coverage and
the Frechet distance between Gaussian surrogates of two embedding sets.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError, ParameterError
from .validation import as_matrix, check_same_features

DEFAULT_K = 5

_KNN_BLOCK = 1024


@dataclass(frozen=True)
class PrdcScores:
    precision: float
    recall: float
    density: float
    coverage: float
    k: int

    def as_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall,
                "density": self.density, "coverage": self.coverage, "k": self.k}


def _distance_block(A, B, a_sq, b_sq):
    d2 = a_sq[:, None] + b_sq[None, :] - 2.0 * (A @ B.T)
    np.maximum(d2, 0.0, out=d2)
    return np.sqrt(d2)


def knn_radius(X, k: int) -> np.ndarray:
    """Distance from each row to its k-th nearest neighbor among the other rows.

    Exact brute force; ties are broken by distance value (the radius is the
    k-th order statistic of the N-1 distances from the row).
    """
    X = as_matrix(X, "X")
    n = X.shape[0]
    if not 1 <= k <= n - 1:
        raise ParameterError(f"k must satisfy 1 <= k <= N-1 = {n - 1}, got {k}")
    x_sq = np.einsum("ij,ij->i", X, X)
    radii = np.empty(n)
    for i0 in range(0, n, _KNN_BLOCK):
        i1 = min(n, i0 + _KNN_BLOCK)
        d = _distance_block(X[i0:i1], X, x_sq[i0:i1], x_sq)
        d[np.arange(i0, i1) - i0, np.arange(i0, i1)] = np.inf  # drop self
        radii[i0:i1] = np.partition(d, k - 1, axis=1)[:, k - 1]
    return radii


def prdc(X, Y, k: int = DEFAULT_K) -> PrdcScores:
    """Precision, recall, density and coverage of candidate Y against real X.

    Ball membership uses closed balls (<=) of radius NND_k. precision is the
    fraction of Y inside the union of real balls; recall the fraction of X
    inside the union of candidate balls; density the mean per-pair membership
    count scaled by 1/k; coverage the fraction of real balls containing at
    least one candidate point.
    """
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    check_same_features(X, Y, ("X", "Y"))
    rx = knn_radius(X, k)
    ry = knn_radius(Y, k)
    n, m = X.shape[0], Y.shape[0]
    x_sq = np.einsum("ij,ij->i", X, X)
    y_sq = np.einsum("ij,ij->i", Y, Y)

    in_real_ball = np.zeros(m, dtype=bool)   # per Y: inside any real ball
    covered = np.zeros(n, dtype=bool)        # per X: ball contains some Y
    member_count = 0
    for i0 in range(0, n, _KNN_BLOCK):
        i1 = min(n, i0 + _KNN_BLOCK)
        member = _distance_block(X[i0:i1], Y, x_sq[i0:i1], y_sq) <= rx[i0:i1, None]
        in_real_ball |= member.any(axis=0)
        covered[i0:i1] = member.any(axis=1)
        member_count += int(member.sum())

    in_fake_ball = np.zeros(n, dtype=bool)   # per X: inside any candidate ball
    for j0 in range(0, m, _KNN_BLOCK):
        j1 = min(m, j0 + _KNN_BLOCK)
        member = _distance_block(Y[j0:j1], X, y_sq[j0:j1], x_sq) <= ry[j0:j1, None]
        in_fake_ball |= member.any(axis=0)

    return PrdcScores(
        precision=float(in_real_ball.mean()),
        recall=float(in_fake_ball.mean()),
        density=member_count / (k * m),
        coverage=float(covered.mean()),
        k=k,
    )


def _gaussian_surrogate(X):
    mean = X.mean(axis=0)
    cov = np.cov(X, rowvar=False)  # unbiased (N-1) estimator
    return mean, np.atleast_2d(cov)


def _psd_sqrt(S, name):
    S = 0.5 * (S + S.T)
    try:
        w, V = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition of {name} failed: {exc}") from exc
    floor = -1e-10 * max(1.0, float(np.abs(w).max()))
    if w.min() < floor:
        raise NumericalError(f"{name} is not positive semi-definite "
                             f"(eigenvalue {w.min():.3e})")
    np.clip(w, 0.0, None, out=w)
    return (V * np.sqrt(w)) @ V.T


def frechet_distance(P, Q) -> float:
    """Frechet distance between Gaussian surrogates fitted to each set.

    ||m - m_w||^2 + Tr(S) + Tr(S_w) - 2 * sum_i sqrt(l_i), with l_i the
    eigenvalues of S^(1/2) S_w S^(1/2) clamped at zero. The symmetric
    product form avoids taking a matrix square root of the non-symmetric
    S S_w.
    """
    P = as_matrix(P, "P")
    Q = as_matrix(Q, "Q")
    check_same_features(P, Q)
    if P.shape[0] < 2 or Q.shape[0] < 2:
        raise DataError("covariance needs at least 2 rows per set")
    m1, s1 = _gaussian_surrogate(P)
    m2, s2 = _gaussian_surrogate(Q)
    root = _psd_sqrt(s1, "covariance(P)")
    inner = root @ s2 @ root
    inner = 0.5 * (inner + inner.T)
    try:
        eigs = np.linalg.eigvalsh(inner)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    np.clip(eigs, 0.0, None, out=eigs)
    diff = m1 - m2
    return float(diff @ diff + np.trace(s1) + np.trace(s2) - 2.0 * np.sum(np.sqrt(eigs)))

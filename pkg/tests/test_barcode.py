import math

import numpy as np
import pytest

from barcode_metrics import (CapacityError, DataError, DistanceSummary,
                             NormalizedMoments, OutlierPolicy, ParameterError,
                             ShapeError, barcode_metrics, cross_distances,
                             diversity, fidelity, normalize, relative_diversity,
                             relative_fidelity, remove_outliers, self_distances)


def summary_of(values):
    d = np.sort(np.asarray(values, dtype=float))
    return DistanceSummary(count=d.size, sum=float(d.sum()),
                           sum_sq=float(d @ d), max=float(d[-1]),
                           min=float(d[0]), mode="exact", distances=d)


def moments_of(values):
    return normalize(summary_of(values))


def test_fidelity_hand_example():
    m = moments_of([1.0, math.sqrt(2)])
    assert fidelity(m) == pytest.approx(0.14644660940672627, abs=1e-12)
    assert fidelity(m, "cdf") == pytest.approx(0.8535533905932737, abs=1e-12)


def test_fidelity_constant_multiset_is_zero_under_survival():
    m = moments_of([3.0, 3.0, 3.0])
    assert fidelity(m) == 0.0
    assert fidelity(m, "cdf") == 1.0


def test_fidelity_degenerate_scores_one_either_way():
    m = moments_of([0.0, 0.0])
    assert m.degenerate
    assert fidelity(m) == 1.0
    assert fidelity(m, "cdf") == 1.0
    assert diversity(m) == 0.0


def test_fidelity_conventions_sum_to_one():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m = moments_of(rng.uniform(0.1, 5.0, size=rng.integers(2, 30)))
        assert fidelity(m, "survival") + fidelity(m, "cdf") == pytest.approx(1.0, abs=1e-12)


def test_fidelity_rejects_unknown_convention():
    with pytest.raises(ParameterError):
        fidelity(moments_of([1.0]), "area")


def test_diversity_hand_examples():
    assert diversity(moments_of([1.0, math.sqrt(2)])) == pytest.approx(
        0.14644660940672627, abs=1e-12)
    assert diversity(moments_of([0.25, 0.5, 0.75, 1.0])) == pytest.approx(
        math.sqrt(0.078125), abs=1e-12)
    assert diversity(moments_of([2.0, 2.0])) == 0.0


def test_diversity_popoviciu_bound():
    rng = np.random.default_rng(1)
    for _ in range(50):
        m = moments_of(rng.uniform(0.0, 7.0, size=rng.integers(2, 40)))
        assert diversity(m) ** 2 <= 0.25 + 1e-12


def test_relative_forms():
    assert relative_fidelity(0.519, 0.489) == pytest.approx(0.519 / 0.489, abs=1e-15)
    assert relative_fidelity(0.3, 0.0) is None
    rho = relative_diversity(0.071, 0.088, 0.085)
    assert rho == pytest.approx(0.071 / math.sqrt(0.088 * 0.085), abs=1e-15)
    assert relative_diversity(0.1, 0.0, 0.2) is None


def test_remove_outliers_examples():
    ten = summary_of(range(1, 11))
    out = remove_outliers(ten, OutlierPolicy(prob=0.1, position="out"))
    assert np.array_equal(out.distances, np.arange(1.0, 10.0))
    assert out.max == 9.0 and out.count == 9
    inner = remove_outliers(ten, OutlierPolicy(prob=0.1, position="in"))
    assert np.array_equal(inner.distances, np.arange(2.0, 11.0))
    both = remove_outliers(ten, OutlierPolicy(prob=0.1, position="both"))
    assert np.array_equal(both.distances, np.arange(2.0, 10.0))


def test_remove_outliers_floor_keeps_multiset():
    ten = summary_of(range(1, 11))
    for pos in ("in", "out", "both"):
        unchanged = remove_outliers(ten, OutlierPolicy(prob=0.05, position=pos))
        assert unchanged.count == 10


def test_remove_outliers_zero_probability_is_identity():
    ten = summary_of(range(1, 11))
    assert remove_outliers(ten, OutlierPolicy(prob=0.0)) is ten


def test_remove_outliers_recomputes_moments():
    ten = summary_of(range(1, 11))
    out = remove_outliers(ten, OutlierPolicy(prob=0.1, position="out"))
    survivors = np.arange(1.0, 10.0)
    assert out.sum == pytest.approx(math.fsum(survivors), rel=1e-15)
    assert out.sum_sq == pytest.approx(math.fsum(v * v for v in survivors), rel=1e-15)
    assert out.min == 1.0


def test_remove_outliers_never_empties():
    # floor(p * count) per side with p < 0.5 always leaves a survivor
    for count in (2, 3, 5, 10, 101):
        s = summary_of(range(1, count + 1))
        trimmed = remove_outliers(s, OutlierPolicy(prob=0.499, position="both"))
        assert trimmed.count >= 1


def test_remove_outliers_requires_exact_mode():
    rng = np.random.default_rng(2)
    s = cross_distances(rng.normal(size=(4, 2)), rng.normal(size=(4, 2)),
                        mode="streaming")
    with pytest.raises(CapacityError):
        remove_outliers(s, OutlierPolicy(prob=0.1))


def test_outlier_policy_validation():
    with pytest.raises(ParameterError):
        OutlierPolicy(prob=0.5)
    with pytest.raises(ParameterError):
        OutlierPolicy(prob=-0.1)
    with pytest.raises(ParameterError):
        OutlierPolicy(prob=0.1, position="top")


def brute_metrics(P, Q, convention="survival"):
    """Oracle: explicit multisets, no shared code with the engine path."""
    def stats(values):
        mx = max(values)
        if mx == 0:
            return 1.0, 0.0
        normed = [v / mx for v in values]
        mean = math.fsum(normed) / len(normed)
        var = math.fsum((v - mean) ** 2 for v in normed) / len(normed)
        fid = 1.0 - mean if convention == "survival" else mean
        return fid, math.sqrt(var)

    cross = [math.dist(p, q) for p in P for q in Q]
    self_p = [math.dist(P[i], P[j]) for i in range(len(P)) for j in range(len(P)) if i != j]
    self_q = [math.dist(Q[i], Q[j]) for i in range(len(Q)) for j in range(len(Q)) if i != j]
    f_pq, d_pq = stats(cross)
    f_pp, d_pp = stats(self_p)
    f_qq, d_qq = stats(self_q)
    return f_pq, f_pp, f_qq, d_pq, d_pp, d_qq


@pytest.mark.parametrize("seed", range(8))
def test_barcode_metrics_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(rng.integers(2, 15), 4))
    Q = rng.normal(size=(rng.integers(2, 15), 4))
    bm = barcode_metrics(P, Q)
    expected = brute_metrics(P, Q)
    got = (bm.fidelity_pq, bm.fidelity_pp, bm.fidelity_qq,
           bm.diversity_pq, bm.diversity_pp, bm.diversity_qq)
    assert got == pytest.approx(expected, abs=1e-12)
    assert bm.relative_fidelity == pytest.approx(expected[0] / expected[1], abs=1e-12)
    assert bm.relative_diversity == pytest.approx(
        expected[3] / math.sqrt(expected[4] * expected[5]), abs=1e-12)


def test_barcode_metrics_scale_invariant():
    rng = np.random.default_rng(10)
    P = rng.normal(size=(12, 5))
    Q = rng.normal(size=(9, 5))
    base = barcode_metrics(P, Q)
    for c in (1e-3, 1e3):
        scaled = barcode_metrics(c * P, c * Q)
        assert scaled.fidelity_pq == pytest.approx(base.fidelity_pq, abs=1e-9)
        assert scaled.diversity_pq == pytest.approx(base.diversity_pq, abs=1e-9)
        assert scaled.relative_fidelity == pytest.approx(base.relative_fidelity, abs=1e-9)


def test_extrinsic_symmetry_and_phi_asymmetry():
    rng = np.random.default_rng(11)
    P = rng.normal(size=(10, 3))
    Q = rng.normal(size=(14, 3)) + 0.5
    ab = barcode_metrics(P, Q)
    ba = barcode_metrics(Q, P)
    assert ab.fidelity_pq == pytest.approx(ba.fidelity_pq, abs=1e-12)
    assert ab.diversity_pq == pytest.approx(ba.diversity_pq, abs=1e-12)
    # phi divides by the first argument's intrinsic fidelity
    assert ab.relative_fidelity != pytest.approx(ba.relative_fidelity, abs=1e-6)
    assert ab.fidelity_pp == pytest.approx(ba.fidelity_qq, abs=1e-12)


def test_barcode_metrics_policy_trims_each_multiset():
    rng = np.random.default_rng(12)
    P = rng.normal(size=(30, 4))
    Q = rng.normal(size=(30, 4))
    policy = OutlierPolicy(prob=0.02, position="out")
    bm = barcode_metrics(P, Q, policy=policy)
    # oracle through the summary path
    cross = remove_outliers(cross_distances(P, Q), policy)
    self_p = remove_outliers(self_distances(P), policy)
    m_cross, m_p = normalize(cross), normalize(self_p)
    assert bm.fidelity_pq == pytest.approx(fidelity(m_cross), abs=1e-15)
    assert bm.fidelity_pp == pytest.approx(fidelity(m_p), abs=1e-15)


def test_barcode_metrics_self_comparison_includes_matched_zeros():
    rng = np.random.default_rng(13)
    P = rng.normal(size=(6, 3))
    bm = barcode_metrics(P, P)
    # cross multiset of a set against itself has N zero distances
    cross = cross_distances(P, P)
    assert cross.min == 0.0
    assert bm.fidelity_pq > bm.fidelity_pp


def test_barcode_metrics_include_self_pairs_flag_changes_intrinsics():
    rng = np.random.default_rng(14)
    P = rng.normal(size=(8, 3))
    Q = rng.normal(size=(8, 3))
    with_flag = barcode_metrics(P, Q, include_self_pairs=True)
    without = barcode_metrics(P, Q)
    assert with_flag.fidelity_pq == pytest.approx(without.fidelity_pq, abs=1e-15)
    assert with_flag.fidelity_pp > without.fidelity_pp  # extra zeros raise it


def test_barcode_metrics_validations():
    with pytest.raises(ShapeError):
        barcode_metrics(np.ones((3, 2)), np.ones((3, 3)))
    with pytest.raises(DataError):
        barcode_metrics(np.ones((1, 2)), np.ones((3, 2)))


def test_degenerate_flags_and_undefined_ratios():
    P = np.array([[1.0, 1.0], [1.0, 1.0]])
    Q = np.array([[1.0, 1.0], [1.0, 1.0]])
    bm = barcode_metrics(P, Q)
    assert bm.degenerate_flags["fidelity_pq"]
    assert bm.fidelity_pq == 1.0 and bm.diversity_pq == 0.0
    assert bm.relative_diversity is None
    assert bm.relative_fidelity == 1.0  # 1/1: degenerate fidelity is defined


def test_constant_distances_make_survival_fidelity_zero_and_phi_undefined():
    # three unit-spaced collinear points: all self distances equal only for pairs;
    # use two points so every multiset is constant
    P = np.array([[0.0], [1.0]])
    Q = np.array([[5.0], [6.0]])
    bm = barcode_metrics(P, Q)
    assert bm.fidelity_pp == 0.0  # constant intrinsic multiset, survival = 0
    assert bm.relative_fidelity is None

from fractions import Fraction

import numpy as np
import pytest

from contracta.errors import ArgumentError, DomainError, EvaluationError
from contracta.space import (BMetricSpace, DistanceSpec, DomainDescriptor, SampleSet, distance,
                             estimate_s, grid_triples, is_bounded, sample_pairs, subset_diameter,
                             verify_axioms)


def harmonic_exact(n):
    return sum(Fraction(1, k) for k in range(1, n + 1))


def test_harmonic_points_match_exact_partial_sums():
    dom = DomainDescriptor.enumerated("harmonic", n_max=200)
    for k in (0, 1, 3, 99, 199):
        assert dom.point(k) == pytest.approx(float(harmonic_exact(k + 1)), rel=1e-15)
    assert dom.point(3) == pytest.approx(25 / 12, abs=1e-15)


def test_harmonic_cap_value():
    dom = DomainDescriptor.enumerated("harmonic")
    # H_n = ln n + gamma + 1/(2n) - ...
    expected = np.log(1e6) + np.euler_gamma + 1 / 2e6
    assert dom.point(dom.n_max - 1) == pytest.approx(expected, abs=1e-9)
    with pytest.raises(DomainError):
        dom.point(dom.n_max)


def test_index_of_and_membership():
    dom = DomainDescriptor.enumerated("harmonic", n_max=50)
    assert dom.index_of(1.5) == 1
    assert dom.index_of(1.4) == -1
    assert bool(dom.contains(dom.point(10)))
    with pytest.raises(DomainError):
        dom.require(1.4)


def test_interval_validation():
    with pytest.raises(ArgumentError):
        DomainDescriptor.interval(1.0, 1.0)
    with pytest.raises(ArgumentError):
        DomainDescriptor.interval(0.0, float("inf"))


def test_grid_is_exact_at_rational_nodes():
    g = DomainDescriptor.interval(0.0, 0.75).grid(301)
    assert g[0] == 0.0 and g[-1] == 0.75
    assert g[200] == 0.5  # 1/2 is a node of this grid
    assert len(g) == 301 and np.all(np.diff(g) > 0)


def test_builtin_distances_match_expressions():
    xs = np.linspace(-2, 2, 1000)
    ys = xs[::-1]
    for tag in ("abs", "half_abs", "square"):
        builtin = DistanceSpec(tag)
        parsed = DistanceSpec(builtin.expression)
        assert np.max(np.abs(builtin(xs, ys) - parsed(xs, ys))) <= 1e-12


def test_distance_checks_domain(banach):
    assert distance(banach.space, 0.25, 1.0) == 0.75
    with pytest.raises(DomainError):
        distance(banach.space, 0.5, 1.5)


def test_nan_distance_raises():
    space = BMetricSpace(DomainDescriptor.interval(-1, 1), DistanceSpec("abs(x - y)^0.5 + x^0.5"))
    with pytest.raises(EvaluationError):
        space.dist(np.array([-1.0]), np.array([0.0]))


def test_s_below_one_rejected():
    with pytest.raises(ArgumentError):
        BMetricSpace(DomainDescriptor.interval(0, 1), DistanceSpec("abs"), 0.5)


def test_subset_diameter_and_bounded(banach):
    pts = [0.0, 0.25, 1.0]
    assert subset_diameter(banach.space, pts) == 1.0
    assert is_bounded(banach.space, pts, 1.0)
    assert not is_bounded(banach.space, pts, 0.99)
    assert subset_diameter(banach.space, [0.3]) == 0.0


def test_sampling_is_deterministic():
    dom = DomainDescriptor.interval(0, 1)
    a = sample_pairs(dom, "random", 20, seed=42)
    b = sample_pairs(dom, "random", 20, seed=42)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    assert not np.array_equal(a.points, sample_pairs(dom, "random", 20, seed=43).points)
    assert len(a) == 400


def test_pair_layout_is_row_major():
    s = sample_pairs(DomainDescriptor.interval(0, 1), "grid", 3)
    assert s.pairs[:4] == [(0.0, 0.0), (0.0, 0.5), (0.0, 1.0), (0.5, 0.0)]


def test_random_needs_seed():
    with pytest.raises(ArgumentError):
        sample_pairs(DomainDescriptor.interval(0, 1), "random", 10)


def test_enumerated_capacity():
    dom = DomainDescriptor.enumerated("harmonic", n_max=10)
    with pytest.raises(ArgumentError):
        sample_pairs(dom, "grid", 11)
    assert len(sample_pairs(dom, "grid", 10).points) == 10


def test_explicit_pairs():
    s = SampleSet.from_pairs([(0.5, 0.75)])
    assert s.pairs == [(0.5, 0.75)] and s.strategy == "explicit"


def test_square_b_axioms(square_b):
    samples = sample_pairs(square_b.space.domain, "grid", 41)
    assert verify_axioms(square_b.space, samples).all_passed
    one = square_b.space.replace(s_claimed=1.0)
    rep = verify_axioms(one, samples, triples=[(-2.0, 2.0, 0.0)])
    assert rep["relaxed_triangle"].status == "fail"
    assert rep["relaxed_triangle"].witness == (-2.0, 2.0, 0.0)
    assert rep["relaxed_triangle"].value == pytest.approx(2.0)


def test_asymmetric_expression_fails_symmetry_audit():
    space = BMetricSpace(DomainDescriptor.interval(0, 1), DistanceSpec("abs(x - y) + (x - y)/4"), 1.0)
    rep = verify_axioms(space, sample_pairs(space.domain, "grid", 5))
    assert rep["symmetry"].status == "fail"


def test_positivity_failure():
    space = BMetricSpace(DomainDescriptor.interval(0, 1), DistanceSpec("abs(x - y) * x"))
    rep = verify_axioms(space, sample_pairs(space.domain, "grid", 5))
    assert rep["positivity"].status == "fail"
    assert rep["positivity"].witness == (0.0, 0.25)


def test_triangle_skipped_when_not_enforced():
    space = BMetricSpace(DomainDescriptor.interval(0, 1), DistanceSpec("square"), triangle_enforced=False)
    rep = verify_axioms(space, sample_pairs(space.domain, "grid", 5))
    assert rep["relaxed_triangle"].status == "skipped" and rep.all_passed


def test_estimate_s_square(square_b):
    s_hat = estimate_s(square_b.space, grid_triples(square_b.space.domain, 41))
    assert 1.99 <= s_hat <= 2.0 + 1e-9


def test_estimate_s_metric_is_one(banach):
    assert estimate_s(banach.space, grid_triples(banach.space.domain, 11)) == pytest.approx(1.0)


def test_estimate_s_degenerate():
    space = BMetricSpace(DomainDescriptor.interval(0, 1), DistanceSpec("abs"))
    with pytest.raises(ArgumentError):
        estimate_s(space, [(0.5, 0.5, 0.5)])

import json
import math

import numpy as np
import pytest

from errors import CatalogError, DomainError, NormMismatchError, PreconditionError, RegionError
from geometry import L1, L2, LINF, PRODUCT, Blocks, Planar, metric, pairwise_metrics
from regions import (
    Box, DistanceEstimator, budget_schedule, corpus_region, frontier_distance, golden_section_search,
    midpoint_ball_inclusion, planar_region, point_to_set_distance, polygon_region, product_region,
    product_set_distance, set_distance, write_catalog,
)


def test_polygon_membership():
    a = corpus_region("ex15_A")
    assert a.contains(Planar(0.5, 0.0))
    assert a.contains(Planar(1.0, 0.0))
    assert a.contains(Planar(0.0, -1.0))
    assert not a.contains(Planar(1.5, 0.0))
    assert not a.contains(Planar(0.6, 0.6))


def test_polygon_orientation_does_not_matter():
    ccw = polygon_region("ccw", [(0, 0), (1, 0), (1, 1), (0, 1)])
    cw = polygon_region("cw", [(0, 1), (1, 1), (1, 0), (0, 0)])
    probes = np.array([[0.5, 0.5], [1.5, 0.5], [0.0, 0.0], [-0.1, 0.2]])
    assert ccw.contains_array(probes).tolist() == cw.contains_array(probes).tolist() == [True, False, True, False]


def test_degenerate_box():
    with pytest.raises(DomainError):
        Box(1.0, 1.0, 0.0, 2.0)


def test_unknown_region_lists_valid_names():
    with pytest.raises(CatalogError) as info:
        corpus_region("ex99_A")
    assert "ex15_A" in info.value.valid
    assert "valid names" in str(info.value)


def test_variant_mismatch_on_membership():
    with pytest.raises(NormMismatchError):
        corpus_region("ex15_A").contains(Blocks.single(2, (0.0, 0.0)))
    with pytest.raises(NormMismatchError):
        corpus_region("unit_ball_product").contains(Planar(0.0, 0.0))


def test_product_region_membership():
    a, b = corpus_region("coupled_A"), corpus_region("coupled_B")
    a2 = product_region(a, a)
    assert a2.contains((Planar(1, 0), Planar(2, 5)))
    assert not a2.contains((Planar(1, 0), Planar(-1, 5)))
    assert not product_region(b, b).contains((Planar(1, 0), Planar(2, 5)))


def test_sampling_is_deterministic_and_inside():
    region = corpus_region("ex43_A")
    first = region.sample(64, Box(0.1, 10, 0.1, 10), seed=5)
    second = region.sample(64, Box(0.1, 10, 0.1, 10), seed=5)
    assert first == second
    assert len(first) == 64
    assert all(region.contains(p) for p in first)


def test_sampling_empty_region():
    empty = planar_region("empty", lambda xy: np.zeros(np.shape(xy)[:-1], dtype=bool), (), Box(0, 1, 0, 1))
    with pytest.raises(RegionError):
        empty.sample(16)


def test_golden_section_search():
    x, value = golden_section_search(lambda t: (t - 0.3) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-6)
    assert value == pytest.approx(0.0, abs=1e-12)
    # monotone objective: the bracket endpoint wins
    x, value = golden_section_search(lambda t: t, 0.0, 1.0)
    assert x == 0.0 and value == 0.0


def test_budget_schedule():
    assert budget_schedule(128) == [8, 16, 32, 64, 128]
    assert budget_schedule(100) == [12, 25, 50, 100]
    assert budget_schedule(128, nested=False) == [128]


@pytest.mark.parametrize("norm,a,b", [
    (L1, "ex15_A", "ex15_B"),
    (LINF, "ex16_A", "ex16_B"),
    (LINF, "ex16_B", "ex16_C"),
    (LINF, "ex43_A", "ex43_B"),
    (LINF, "ex49_A", "ex49_B"),
    (L2, "unit_ball_l2", "shell_l2"),
])
def test_corpus_set_distances(norm, a, b):
    estimate = set_distance(norm, corpus_region(a), corpus_region(b))
    assert estimate.value == pytest.approx(1.0, abs=1e-6)
    p, q = estimate.argmin_pair
    assert corpus_region(a).contains(p) and corpus_region(b).contains(q)


def test_refinement_history_is_monotone():
    estimate = set_distance(L2, corpus_region("unit_ball_l2"), corpus_region("ex15_C"), 128)
    values = [v for _, v in estimate.refinement_history]
    assert [level for level, _ in estimate.refinement_history] == budget_schedule(128)
    assert all(later <= earlier for earlier, later in zip(values, values[1:]))
    assert estimate.value == pytest.approx(4.0, abs=1e-6)


def test_overlapping_sets_have_zero_distance():
    estimate = set_distance(L2, corpus_region("half_plane_right"), corpus_region("half_plane_left_of_one"))
    assert estimate.value == 0.0


def test_point_to_set():
    ball = corpus_region("unit_ball_l2")
    assert point_to_set_distance(L2, Planar(0.2, 0.1), ball).value == 0.0
    assert point_to_set_distance(L2, Planar(3.0, 4.0), ball).value == pytest.approx(4.0, abs=1e-9)
    assert frontier_distance(L2, Planar(0.0, 0.0), ball).value == pytest.approx(1.0, abs=1e-9)
    assert point_to_set_distance(LINF, Planar(2.0, 2.0), corpus_region("ex49_A_bar")).value == pytest.approx(1.0)


def test_product_set_distance_doubles():
    a, b = corpus_region("ex15_A"), corpus_region("ex15_B")
    single = set_distance(L1, a, b).value
    double = product_set_distance(L1, a, b)
    assert double.value == pytest.approx(2 * single, abs=2e-6)
    (p1, p2), (q1, q2) = double.argmin_pair
    assert p1 == p2 and q1 == q2


def test_estimator_preconditions():
    estimator = DistanceEstimator()
    ball = corpus_region("unit_ball_l2")
    with pytest.raises(NormMismatchError):
        estimator.frontier_distance(PRODUCT, Planar(0, 0), ball)
    with pytest.raises(PreconditionError):
        estimator.frontier_distance(L2, Planar(0, 0), ball, budget=4)
    no_frontier = planar_region("no_frontier", lambda xy: np.ones(np.shape(xy)[:-1], dtype=bool))
    with pytest.raises(RegionError, match="unestimable"):
        estimator.frontier_distance(L2, Planar(0, 0), no_frontier)


def test_box_only_region_frontier():
    disc = planar_region("disc", lambda xy: np.hypot(xy[..., 0], xy[..., 1]) <= 1.0, (), Box(-2, 2, -2, 2))
    value = frontier_distance(L2, Planar(0, 0), disc, 256).value
    assert value == pytest.approx(1.0, abs=0.05)


def test_parallel_refinement_matches_serial():
    a, b = corpus_region("ex43_A"), corpus_region("ex43_B")
    serial = DistanceEstimator(n_jobs=1).set_distance(LINF, a, b, 64)
    threaded = DistanceEstimator(n_jobs=2).set_distance(LINF, a, b, 64)
    assert serial.value == threaded.value
    assert serial.refinement_history == threaded.refinement_history


def test_midpoint_ball_inclusion():
    ball = corpus_region("unit_ball_l2")
    x, y = Planar(0.1, 0.0), Planar(-0.1, 0.0)
    assert midpoint_ball_inclusion(L2, ball, x, y, 0.5)
    escaped = midpoint_ball_inclusion(L2, ball, x, y, 1.5)
    assert not escaped
    assert not ball.contains(escaped.violation)
    with pytest.raises(PreconditionError):
        midpoint_ball_inclusion(L2, ball, x, y, 0.5, probes=8)
    with pytest.raises(PreconditionError):
        midpoint_ball_inclusion(L2, ball, Planar(3, 0), y, 0.5)
    with pytest.raises(DomainError):
        midpoint_ball_inclusion(L2, ball, x, y, 0.0)


def test_write_catalog(tmp_path):
    path = tmp_path / "regions.json"
    write_catalog(path)
    data = json.loads(path.read_text())
    assert data["schema"] == 1
    names = {record["name"] for record in data["regions"]}
    assert {"ex15_A", "ex43_B", "ex49_B2", "unit_ball_product"} <= names
    ex15 = next(r for r in data["regions"] if r["name"] == "ex15_A")
    assert ex15["figure_reconstruction"] is True
    assert ex15["bounding_box"] == [0.0, 1.0, -1.0, 1.0]
    assert math.isclose(next(r for r in data["regions"] if r["name"] == "ex43_A")["bounding_box"][1], 1e4)


def test_set_distance_monotone_under_containment():
    a, big = corpus_region("ex15_A"), corpus_region("ex15_B")
    small = polygon_region("ex15_B_inner", [(3, 0), (4, 1), (4, -1)])
    assert all(big.contains(p) for p in small.sample(100, seed=0))
    far, near = set_distance(L1, a, small, 128).value, set_distance(L1, a, big, 128).value
    assert far == pytest.approx(2.0, abs=1e-9)
    assert near == pytest.approx(1.0, abs=1e-9)
    assert far >= near

    hyperbola = corpus_region("ex49_A")
    union, part = corpus_region("ex49_B"), corpus_region("ex49_B1")
    assert set_distance(LINF, hyperbola, part, 128).value >= set_distance(LINF, hyperbola, union, 128).value - 1e-9


@pytest.mark.parametrize("norm,a,b", [
    (L1, "ex15_A", "ex15_B"),
    (LINF, "ex43_A", "ex43_B"),
    (L2, "unit_ball_l2", "shell_l2"),
])
def test_set_distance_bounds_sampled_pairs(norm, a, b):
    region_a, region_b = corpus_region(a), corpus_region(b)
    estimate = set_distance(norm, region_a, region_b, 128)
    box = Box(-6, 6, -6, 6)
    xs, ys = region_a.sample(300, box, seed=4), region_b.sample(300, box, seed=5)
    assert pairwise_metrics(norm, xs, ys).min() >= estimate.value - 1e-9
    p, q = estimate.argmin_pair
    assert metric(norm, p, q) == pytest.approx(estimate.value, abs=1e-12)


def test_ball_inclusion_checks_sphere_and_interior():
    ball = corpus_region("unit_ball_l2")
    inside = midpoint_ball_inclusion(L2, ball, Planar(0.1, 0.0), Planar(-0.1, 0.0), 0.5, probes=16)
    # center plus one sphere ring and three interior rings
    assert inside.probes_checked >= 1 + 4 * 16
    assert (inside.probes_checked - 1) % 4 == 0
    # a ball poking out only near the sphere is caught by the outer ring
    edge = midpoint_ball_inclusion(L2, ball, Planar(0.3, 0.0), Planar(0.3, 0.0), 0.7 + 1e-6, probes=16)
    assert not edge
    assert not ball.contains(edge.violation)
    assert metric(L2, edge.violation, Planar(0.3, 0.0)) < 0.7 + 1e-6
    # an inner hole is caught by the interior grid only
    holed = planar_region("holed_disc", lambda xy: (np.hypot(xy[..., 0], xy[..., 1]) <= 1.0)
                          & (np.hypot(xy[..., 0] - 0.225, xy[..., 1]) > 0.02), (), Box(-1, 1, -1, 1))
    pierced = midpoint_ball_inclusion(L2, holed, Planar(-0.5, 0.0), Planar(0.5, 0.0), 0.9, probes=16)
    assert not pierced
    assert metric(L2, pierced.violation, Planar(0.225, 0.0)) <= 0.02

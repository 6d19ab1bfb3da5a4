import json

import pytest

from errors import BudgetError, CatalogError, MapIntegrityError, PreconditionError
from geometry import L2, Planar, metric, sum_metric
from regions import Box, corpus_region
from solver import (
    ContractionClass, ContractionKind, CoupledMapDef, CyclicMapDef, IterationTrace, PointDistanceCache, Side,
    best_proximity_point, check_iterate_bounds, corpus_coupled, corpus_map, coupled_solve, coupled_to_cyclic,
    iterate, iterate_bounds, verify_contraction, verify_cyclic,
)


@pytest.fixture
def overlap():
    return corpus_map("overlap_contraction")


@pytest.fixture
def coupled():
    return corpus_coupled("reflection_quarter")


def test_overlap_map_fixed_point(overlap):
    point, certificate = best_proximity_point(overlap, Planar(0.0, 3.0))
    assert metric(L2, point, Planar(0.5, 0.0)) < 1e-7
    assert certificate.residual < 1e-8
    assert certificate.dist_ab == 0.0


def test_side_of_prefers_a(overlap):
    assert overlap.side_of(Planar(0.5, 0.0)) == Side.A
    assert overlap.side_of(Planar(-2.0, 0.0)) == Side.B


def test_verify_cyclic(overlap):
    check = verify_cyclic(overlap, samples=200)
    assert check.ok and check.checked == 400

    a, b = corpus_region("coupled_A"), corpus_region("coupled_B")
    lazy = CyclicMapDef("identity", lambda p: p, (a, b), L2, 1.0)
    check = verify_cyclic(lazy, samples=50)
    assert not check
    assert a.contains(check.violator)


def test_verify_contraction(overlap):
    report = verify_contraction(overlap, 0.5, pair_samples=400)
    assert report.passed
    assert report.pairs_checked >= 300
    tight = verify_contraction(overlap, 0.3, pair_samples=400)
    assert not tight.passed
    assert tight.max_violation > 0
    with pytest.raises(PreconditionError):
        verify_contraction(overlap, 1.0)


def test_suzuki_condition_is_weaker(overlap):
    banach = verify_contraction(overlap, 0.5, pair_samples=400)
    suzuki = verify_contraction(overlap, 0.5, pair_samples=400, suzuki=True)
    assert suzuki.max_violation <= banach.max_violation


def test_iterate_trace_shape(overlap):
    trace = iterate(overlap, Planar(0.0, 3.0), 200, 1e-10)
    assert trace.converged
    assert trace.gaps[0] == 0.0
    assert len(trace.gaps) == len(trace.iterates) == len(trace.proximities)
    assert trace.steps % 2 == 1
    assert trace.limit_even == trace.iterates[-2]
    assert trace.proximities[3] == pytest.approx(metric(L2, trace.iterates[3], trace.iterates[4]))


def test_iterate_preconditions(overlap):
    with pytest.raises(PreconditionError):
        iterate(overlap, Planar(0.0, 0.0), 3, 1e-8)
    a, b = corpus_region("coupled_A"), corpus_region("coupled_B")
    escaping = CyclicMapDef("escaping", lambda p: Planar(p.x + 10.0, p.y), (a, b), L2, 1.0)
    with pytest.raises(MapIntegrityError):
        iterate(escaping, Planar(1.0, 0.0), 10, 1e-8)
    with pytest.raises(MapIntegrityError):
        iterate(escaping, Planar(0.0, 0.0), 10, 1e-8)


def test_budget_exhaustion_carries_trace(overlap):
    with pytest.raises(BudgetError) as info:
        best_proximity_point(overlap, Planar(0.0, 3.0), tol=1e-12, n_max=4)
    assert info.value.trace is not None
    assert info.value.trace.steps == 4


def test_trace_jsonl(overlap, tmp_path):
    trace = iterate(overlap, Planar(0.0, 3.0), 200, 1e-10)
    _, certificate = best_proximity_point(overlap, Planar(0.0, 3.0), 1e-10, 200)
    first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    trace.write_jsonl(first, certificate)
    trace.write_jsonl(second, certificate)
    assert first.read_bytes() == second.read_bytes()

    lines = [json.loads(line) for line in first.read_text().splitlines()]
    assert lines[0]["schema"] == 1 and lines[0]["kind"] == "trace" and lines[0]["map"] == "overlap_contraction"
    assert set(lines[1]) == {"n", "point", "gap", "proximity"}
    assert [line["n"] for line in lines[1:-1]] == list(range(len(trace.iterates)))
    assert lines[-1]["certificate"]["residual"] < 1e-10


def test_iterate_bounds(overlap):
    even, odd = iterate_bounds(0.5, 1.0, 0.0)
    assert even == pytest.approx(4.0)
    assert odd == pytest.approx(6.0)
    assert check_iterate_bounds(overlap, Planar(0.0, 3.0), 0.5, 60, pair_samples=400)
    with pytest.raises(PreconditionError):
        check_iterate_bounds(overlap, Planar(0.0, 3.0), 0.3, 60, pair_samples=400)


def test_point_distance_cache():
    cache = PointDistanceCache()
    calls = []

    def compute():
        calls.append(1)
        return 2.5

    assert cache.get_or_compute(Planar(1, 1), compute) == 2.5
    assert cache.get_or_compute(Planar(1, 1), compute) == 2.5
    assert len(calls) == 1 and len(cache) == 1


def test_coupled_validation(coupled):
    a, b = coupled.domain
    with pytest.raises(PreconditionError):
        CoupledMapDef("bad", coupled.f, coupled.g, (a, b), L2, 0.6, 0.5, 1.0)
    with pytest.raises(PreconditionError):
        CoupledMapDef("negative", coupled.f, coupled.g, (a, b), L2, -0.1, 0.5, 1.0)


def test_coupled_to_cyclic(coupled):
    cmap = coupled_to_cyclic(coupled)
    assert cmap.product
    assert cmap.dist_ab == pytest.approx(2.0)
    assert cmap.claimed_class == ContractionClass(ContractionKind.BANACH, 0.5)
    assert verify_cyclic(cmap, samples=100)
    assert verify_contraction(cmap, 0.5, pair_samples=400).passed


def test_coupled_solve(coupled):
    solution = coupled_solve(coupled, Planar(2.0, 1.0), Planar(1.0, -1.0))
    assert solution.residual < 1e-8
    x, y = solution.xy
    u, v = solution.uv
    assert metric(L2, x, Planar(0.5, 0.0)) < 1e-7 and metric(L2, y, Planar(0.5, 0.0)) < 1e-7
    assert sum_metric(L2, solution.xy, solution.uv) == pytest.approx(2.0, abs=1e-8)
    assert u == coupled.f(x, y) and v == coupled.f(y, x)
    assert metric(L2, u, Planar(-0.5, 0.0)) < 1e-7


def test_coupled_solve_is_the_product_iteration(coupled):
    solution = coupled_solve(coupled, Planar(2.0, 1.0), Planar(1.0, -1.0), 1e-8, 500)
    trace = iterate(coupled_to_cyclic(coupled), (Planar(2.0, 1.0), Planar(1.0, -1.0)), 500, 1e-8)
    assert solution.trace.iterates == trace.iterates
    assert solution.xy == trace.limit_even


def test_example49_map():
    cmap = corpus_map("example49")
    assert cmap.dist_ab == pytest.approx(1.0, abs=1e-9)
    assert cmap(Planar(2.0, 2.0)) == Planar(-0.5, -0.5)
    point, certificate = best_proximity_point(cmap, Planar(2.0, 2.0), 1e-8, 200)
    assert metric(L2, point, Planar(1.0, 1.0)) < 1e-7
    assert certificate.residual < 1e-8
    assert certificate.steps < 200


def test_example49_contraction_and_cyclicity():
    cmap = corpus_map("example49")
    assert verify_cyclic(cmap, samples=40, box=Box(-20, 20, -20, 20))
    assert verify_contraction(cmap, 0.5, pair_samples=400, box=Box(-20, 20, -20, 20)).passed


def test_unknown_map():
    with pytest.raises(CatalogError):
        corpus_map("example99")
    with pytest.raises(CatalogError):
        corpus_coupled("nope")


def test_example49_proximities_halve():
    cmap = corpus_map("example49")
    trace = iterate(cmap, Planar(2.0, 2.0), 12, tol=0.0, stop_early=False)
    excess = [r - 1.0 for r in trace.proximities]
    assert excess[0] == pytest.approx(1.5, abs=1e-9)
    for n in range(10):
        assert excess[n + 1] == pytest.approx(0.5 * excess[n], rel=1e-6, abs=1e-9)


def test_example49_iterate_bounds_over_long_orbits():
    cmap = corpus_map("example49")
    starts = corpus_region("ex49_A").sample(8, Box(0.2, 5, 0.2, 5), seed=5)
    assert len(starts) == 8
    for start in starts:
        assert check_iterate_bounds(cmap, start, cmap.claimed_class.k, 1000, pair_samples=300,
                                    box=Box(-20, 20, -20, 20))


def test_trace_read_back(overlap, tmp_path):
    trace = iterate(overlap, Planar(0.0, 3.0), 200, 1e-10)
    _, certificate = best_proximity_point(overlap, Planar(0.0, 3.0), 1e-10, 200)
    path = tmp_path / "trace.jsonl"
    trace.write_jsonl(path, certificate)

    loaded = IterationTrace.read_jsonl(path)
    assert loaded.map_name == "overlap_contraction"
    assert loaded.iterates == trace.iterates
    assert loaded.proximities == trace.proximities
    assert loaded.converged and loaded.limit_even == trace.limit_even
    assert loaded.last_even() == trace.iterates[trace.steps - trace.steps % 2]


def test_trace_read_rejects_other_files(tmp_path):
    cases = {
        "empty.jsonl": "",
        "garbage.jsonl": "not json\n",
        "verdict.jsonl": json.dumps({"schema": 1, "kind": "verdict"}) + "\n",
        "headless.jsonl": json.dumps({"schema": 1, "kind": "trace", "map": "example49", "dist_ab": 1.0,
                                      "converged": False, "tol": 0.1}) + "\n",
    }
    for name, text in cases.items():
        path = tmp_path / name
        path.write_text(text)
        with pytest.raises(PreconditionError):
            IterationTrace.read_jsonl(path)

import math

import numpy as np
import pytest

from errors import DomainError, NormMismatchError
from geometry import (
    L1, L2, LINF, PRODUCT, Blocks, Norm, Planar, decode_point, encode_point, lp, metric, metrics, midpoint,
    norm_eval, open_ball_contains, pairwise_metrics, planar_norms, sphere_points, sum_metric,
)


@pytest.mark.parametrize("text,expected", [
    ("l1", L1), ("L2", L2), ("linf", LINF), ("product", PRODUCT), ("l3", lp(3)), ("lp4", lp(4)),
])
def test_parse_norm(text, expected):
    assert Norm.parse(text) == expected


def test_parse_unknown_norm():
    with pytest.raises(DomainError):
        Norm.parse("sup")


def test_lp_exponent_domain():
    with pytest.raises(DomainError):
        lp(1)


@pytest.mark.parametrize("norm,expected", [
    (L1, 7.0), (L2, 5.0), (LINF, 4.0), (lp(3), 91.0 ** (1 / 3)),
])
def test_planar_norms(norm, expected):
    assert norm_eval(norm, Planar(3, -4)) == pytest.approx(expected)


def test_large_exponent_through_logsumexp():
    assert norm_eval(lp(64), Planar(1, 1)) == pytest.approx(2 ** (1 / 64))
    assert norm_eval(lp(400), Planar(3, 0)) == pytest.approx(3.0)


def test_sphere_points_have_unit_norm():
    theta = np.linspace(0, 2 * math.pi, 37)
    for norm in (L1, L2, LINF, lp(5)):
        assert np.allclose(planar_norms(norm, sphere_points(norm, theta)), 1.0)


def test_blocks_validation():
    with pytest.raises(DomainError):
        Blocks(((1, (1.0, 0.0)),))
    with pytest.raises(DomainError):
        Blocks(((3, (1.0, 0.0)), (2, (0.0, 1.0))))


def test_blocks_arithmetic_drops_zero_blocks():
    x = Blocks(((2, (1.0, 1.0)), (5, (0.0, 2.0))))
    y = Blocks.single(2, (1.0, 1.0))
    assert (x - y).entries == ((5, (0.0, 2.0)),)
    assert (y - y) == Blocks()
    assert (x * 0.0) == Blocks()


def test_product_norm():
    x = Blocks(((2, (3.0, 4.0)), (3, (1.0, 1.0))))
    assert norm_eval(PRODUCT, x) == pytest.approx(math.sqrt(25 + 2 ** (2 / 3)))
    assert norm_eval(PRODUCT, Blocks()) == 0.0


def test_norm_point_mismatch():
    with pytest.raises(NormMismatchError):
        norm_eval(PRODUCT, Planar(1, 0))
    with pytest.raises(NormMismatchError):
        norm_eval(L2, Blocks.single(2, (1.0, 0.0)))
    with pytest.raises(NormMismatchError, match="norm/point mismatch"):
        metric(L2, Planar(0, 0), Blocks.single(2, (1.0, 0.0)))


def test_sum_metric():
    pair1 = (Planar(0, 0), Planar(1, 1))
    pair2 = (Planar(3, 4), Planar(1, 0))
    assert sum_metric(L2, pair1, pair2) == pytest.approx(6.0)


def test_vectorized_metrics_match_scalar():
    rng = np.random.default_rng(3)
    ps = [Planar(*v) for v in rng.normal(size=(20, 2))]
    qs = [Planar(*v) for v in rng.normal(size=(20, 2))]
    for norm in (L1, L2, LINF):
        expected = [metric(norm, p, q) for p, q in zip(ps, qs)]
        assert np.allclose(metrics(norm, ps, qs), expected)
        table = pairwise_metrics(norm, ps, qs[:5])
        assert table.shape == (20, 5)
        assert table[7, 3] == pytest.approx(metric(norm, ps[7], qs[3]))


def test_metric_axioms_on_random_triples():
    rng = np.random.default_rng(0)
    xyz = rng.uniform(-10, 10, size=(1000, 3, 2))
    for norm in (L1, L2, LINF, lp(3)):
        x, y, z = ([Planar(*row) for row in xyz[:, k]] for k in range(3))
        dxy, dyz, dxz = metrics(norm, x, y), metrics(norm, y, z), metrics(norm, x, z)
        assert np.allclose(dxy, metrics(norm, y, x))
        assert np.all(dxz <= dxy + dyz + 1e-12)
        assert np.all(metrics(norm, x, x) == 0.0)


def test_midpoint_and_open_ball():
    assert midpoint(Planar(0, 0), Planar(2, 4)) == Planar(1, 2)
    assert open_ball_contains(L2, Planar(0, 0), 1.0, Planar(0.5, 0.5))
    assert not open_ball_contains(L2, Planar(0, 0), 1.0, Planar(1.0, 0.0))


def test_point_encoding():
    blocks = Blocks(((2, (0.5, -0.5)),))
    assert encode_point(Planar(1, 2)) == [1.0, 2.0]
    assert encode_point(blocks) == {"blocks": [[2, [0.5, -0.5]]]}
    pair = (Planar(1, 2), Planar(3, 4))
    assert decode_point(encode_point(pair)) == pair


@pytest.mark.parametrize("norm", [L1, L2, LINF, lp(3), lp(20)])
def test_planar_norm_homogeneity(norm):
    rng = np.random.default_rng(5)
    for v in rng.normal(size=(50, 2)):
        p = Planar(*v)
        for t in (-3.0, -0.5, 0.25, 7.0):
            assert norm_eval(norm, p * t) == pytest.approx(abs(t) * norm_eval(norm, p), rel=1e-12)


def random_blocks(rng, count):
    points = []
    for _ in range(count):
        indices = sorted(rng.choice(np.arange(2, 40), size=int(rng.integers(1, 5)), replace=False).tolist())
        points.append(Blocks(tuple((k, tuple(rng.normal(size=2))) for k in indices)))
    return points


def test_product_norm_homogeneity():
    for x in random_blocks(np.random.default_rng(6), 50):
        for t in (-2.0, 0.5, 3.0):
            assert norm_eval(PRODUCT, x * t) == pytest.approx(abs(t) * norm_eval(PRODUCT, x), rel=1e-12)


def test_product_norm_triangle_inequality():
    rng = np.random.default_rng(7)
    xs, ys, zs = (random_blocks(rng, 300) for _ in range(3))
    for x, y, z in zip(xs, ys, zs):
        assert metric(PRODUCT, x, z) <= metric(PRODUCT, x, y) + metric(PRODUCT, y, z) + 1e-12
        assert norm_eval(PRODUCT, x + y) <= norm_eval(PRODUCT, x) + norm_eval(PRODUCT, y) + 1e-12
        assert metric(PRODUCT, x, y) == pytest.approx(metric(PRODUCT, y, x))

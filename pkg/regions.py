"""
Regions and distance estimation

Features:
- Region model: membership predicate, boundary curves, sampler, bounding box
- Catalog of the worked-example sets, exportable as JSON
- Point-to-set and set-to-set distance estimates: coarse grid over the boundary
  parametrizations, multi-start golden-section refinement, nested budget schedule
- Midpoint ball inclusion probes
"""

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from errors import CatalogError, DomainError, NormMismatchError, PreconditionError, RegionError
from geometry import (
    L1, L2, LINF, PRODUCT, Blocks, Norm, NormKind, Planar, Point, from_xy, metric,
    midpoint, norm_eval, open_ball_contains, planar_norm_xy, planar_norms, sphere_points,
)

# -------------------- CONFIG --------------------
BOX_LIMIT = 1e4
DEFAULT_BUDGET = 128
MIN_BUDGET = 8
N_STARTS = 8
REFINE_SWEEPS = 4
GOLDEN_TOL = 1e-13
MEMBER_SLACK = 1e-12   # relative slack of closed inequalities
CURVE_SLACK = 1e-12    # on-curve tolerance of curve regions
BOUNDARY_TOL = 1e-9
SPHERE_SCALE = 1.0 - 1e-9              # open ball: sphere points sit just inside
INTERIOR_FRACTIONS = (0.25, 0.5, 0.75)  # radial levels of the interior grid
SCHEMA_VERSION = 1

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2
LOG_LIMIT = math.log(BOX_LIMIT)


class Ambient(Enum):
    PLANAR = "planar"
    BLOCKS = "blocks"
    PAIR = "pair"


@dataclass(frozen=True)
class Box:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise DomainError(f"degenerate box {self.as_list()}")

    def contains_array(self, xy: np.ndarray) -> np.ndarray:
        """Closed-box membership of coordinates stored along the last axis"""
        xy = np.asarray(xy, dtype=float)
        return ((xy[..., 0] >= self.x_lo) & (xy[..., 0] <= self.x_hi)
                & (xy[..., 1] >= self.y_lo) & (xy[..., 1] <= self.y_hi))

    def contains(self, p: Planar) -> bool:
        return self.x_lo <= p.x <= self.x_hi and self.y_lo <= p.y <= self.y_hi

    def corners(self) -> List[Planar]:
        return [Planar(self.x_lo, self.y_lo), Planar(self.x_hi, self.y_lo),
                Planar(self.x_hi, self.y_hi), Planar(self.x_lo, self.y_hi)]

    def diameter(self, norm: Norm = L2) -> float:
        return metric(norm, Planar(self.x_lo, self.y_lo), Planar(self.x_hi, self.y_hi))

    def expanded(self, margin: float) -> "Box":
        return Box(self.x_lo - margin, self.x_hi + margin, self.y_lo - margin, self.y_hi + margin)

    def as_list(self) -> List[float]:
        return [self.x_lo, self.x_hi, self.y_lo, self.y_hi]


DEFAULT_BOX = Box(-BOX_LIMIT, BOX_LIMIT, -BOX_LIMIT, BOX_LIMIT)


@dataclass(frozen=True)
class Curve:
    """Planar curve t ↦ evaluate(t) on [t_lo, t_hi]; knots always join the grid"""
    name: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    t_lo: float
    t_hi: float
    knots: Tuple[float, ...] = ()

    def grid(self, count: int) -> np.ndarray:
        base = np.linspace(self.t_lo, self.t_hi, count + 1)
        extra = np.array([k for k in self.knots if self.t_lo <= k <= self.t_hi], dtype=float)
        return np.unique(np.concatenate([base, extra]))

    def at(self, t: float) -> np.ndarray:
        return self.evaluate(np.array([t], dtype=float))[0]

    def point(self, t: float) -> Planar:
        return Planar.from_array(self.at(t))


Sampler = Callable[[int, Optional[Box], np.random.Generator], List[Point]]


@dataclass(frozen=True)
class Region:
    """A set given by membership, with optional boundary curves and sampler"""
    name: str
    membership: Callable[[Point], bool]
    ambient: Ambient = Ambient.PLANAR
    inside: Optional[Callable[[np.ndarray], np.ndarray]] = None
    boundary: Tuple[Curve, ...] = ()
    bounding_box: Optional[Box] = None
    sampler: Optional[Sampler] = None
    description: str = ""
    figure_reconstruction: bool = False

    def contains(self, p) -> bool:
        self._check_variant(p)
        return bool(self.membership(p))

    def contains_array(self, xy) -> np.ndarray:
        """Vectorized membership for planar coordinates stored along the last axis"""
        if self.ambient != Ambient.PLANAR:
            raise NormMismatchError(PRODUCT, xy)
        xy = np.asarray(xy, dtype=float)
        if self.inside is not None:
            return np.asarray(self.inside(xy), dtype=bool)
        flat = xy.reshape(-1, 2)
        result = np.array([bool(self.membership(Planar(row[0], row[1]))) for row in flat], dtype=bool)
        return result.reshape(xy.shape[:-1])

    @property
    def estimable(self) -> bool:
        return self.ambient == Ambient.PLANAR and (bool(self.boundary) or self.bounding_box is not None)

    def sample(self, budget: int, box: Optional[Box] = None, seed: int = 0) -> List[Point]:
        """Deterministic sample of at most `budget` members"""
        rng = np.random.default_rng(seed)
        if self.sampler is not None:
            candidates = self.sampler(budget, box, rng)
        elif self.ambient == Ambient.PLANAR:
            candidates = _planar_sample(self, budget, box, rng)
        else:
            raise RegionError(f"region '{self.name}' has no sampler")
        points = [p for p in candidates if self.contains(p)][:budget]
        if not points:
            raise RegionError(f"sampling '{self.name}' produced no members")
        return points

    def _check_variant(self, p):
        if self.ambient == Ambient.PLANAR and not isinstance(p, Planar):
            raise NormMismatchError(L2, p)
        if self.ambient == Ambient.BLOCKS and not isinstance(p, Blocks):
            raise NormMismatchError(PRODUCT, p)
        if self.ambient == Ambient.PAIR and not (isinstance(p, tuple) and len(p) == 2):
            raise NormMismatchError(L2, p)


@dataclass
class DistanceEstimate:
    value: float
    argmin_pair: Tuple[Point, Point]
    budget_used: int
    refinement_history: List[Tuple[int, float]] = field(default_factory=list)


@dataclass
class BallInclusion:
    inside: bool
    violation: Optional[Planar] = None
    probes_checked: int = 0

    def __bool__(self) -> bool:
        return self.inside


# -------------------- SAMPLING --------------------

def _planar_sample(region: Region, budget: int, box: Optional[Box], rng: np.random.Generator) -> List[Point]:
    """Boundary points first (in curve order), then rejection samples in the box"""
    box = box or region.bounding_box or DEFAULT_BOX
    chunks = []
    if region.boundary:
        per_curve = max(budget // (4 * len(region.boundary)), 8)
        for curve in region.boundary:
            xy = curve.evaluate(curve.grid(per_curve))
            keep = box.contains_array(xy) & region.contains_array(xy)
            chunks.append(xy[keep][:per_curve])
    edge_count = sum(len(c) for c in chunks)
    wanted = max(budget - edge_count, 0)
    found = 0
    for _ in range(50):
        if found >= wanted:
            break
        xy = np.column_stack([rng.uniform(box.x_lo, box.x_hi, 4 * budget),
                              rng.uniform(box.y_lo, box.y_hi, 4 * budget)])
        hits = xy[region.contains_array(xy)][: wanted - found]
        chunks.append(hits)
        found += len(hits)
    if not chunks:
        return []
    return from_xy(np.concatenate(chunks))


def _ball_sampler(norm: Norm, radius: float, outward: bool) -> Sampler:
    """Samples of ‖x‖ ≤ radius (or ‖x‖ ≥ radius) in the block product space"""

    def sample(budget: int, box: Optional[Box], rng: np.random.Generator) -> List[Point]:
        points = []
        for _ in range(budget):
            count = int(rng.integers(1, 4))
            indices = sorted(rng.choice(np.arange(2, 14), size=count, replace=False).tolist())
            raw = Blocks(tuple((k, tuple(rng.normal(size=2))) for k in indices))
            size = norm_eval(norm, raw)
            if size == 0.0:
                continue
            scale = radius * (1.0 + rng.uniform(0, 1)) if outward else radius * rng.uniform(0, 1)
            points.append(raw * (scale / size))
        return points

    return sample


# -------------------- CONSTRUCTORS --------------------

def _slack(values: np.ndarray) -> np.ndarray:
    return MEMBER_SLACK * (1.0 + np.abs(values))


def _planar_membership(inside: Callable[[np.ndarray], np.ndarray]) -> Callable[[Point], bool]:
    def membership(p: Point) -> bool:
        return bool(inside(np.array([[p.x, p.y]]))[0])
    return membership


def planar_region(name: str, inside, boundary=(), bounding_box=None, description="",
                  figure_reconstruction=False) -> Region:
    return Region(name=name, membership=_planar_membership(inside), inside=inside,
                  boundary=tuple(boundary), bounding_box=bounding_box, description=description,
                  figure_reconstruction=figure_reconstruction)


def polygon_curve(name: str, vertices: Sequence[Tuple[float, float]]) -> Curve:
    """Closed polyline parametrized by t ∈ [0, n] with vertex knots"""
    ring = np.array(list(vertices) + [vertices[0]], dtype=float)
    n = len(vertices)

    def evaluate(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        index = np.clip(np.floor(t).astype(int), 0, n - 1)
        frac = (t - index)[:, None]
        return ring[index] + frac * (ring[index + 1] - ring[index])

    return Curve(name, evaluate, 0.0, float(n), knots=tuple(float(i) for i in range(n + 1)))


def polygon_region(name: str, vertices: Sequence[Tuple[float, float]], description="",
                   figure_reconstruction=False) -> Region:
    """Closed convex polygon"""
    verts = np.array(vertices, dtype=float)
    signed_area = 0.5 * np.sum(verts[:, 0] * np.roll(verts[:, 1], -1) - np.roll(verts[:, 0], -1) * verts[:, 1])
    if signed_area < 0:
        verts = verts[::-1]
    edges = np.roll(verts, -1, axis=0) - verts

    def inside(xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float)
        rel = xy[..., None, :] - verts
        cross = edges[:, 0] * rel[..., 1] - edges[:, 1] * rel[..., 0]
        return np.all(cross >= -MEMBER_SLACK, axis=-1)

    box = Box(verts[:, 0].min(), verts[:, 0].max(), verts[:, 1].min(), verts[:, 1].max())
    return planar_region(name, inside, (polygon_curve(f"{name}_edge", [tuple(v) for v in verts]),),
                         box, description, figure_reconstruction)


def sphere_curve(norm: Norm, radius: float) -> Curve:
    """Sphere of the given radius with knots at the compass directions"""
    return Curve(f"{norm.label}_sphere_{radius:g}",
                 lambda t: radius * sphere_points(norm, t), 0.0, 2 * math.pi,
                 knots=tuple(k * math.pi / 4 for k in range(9)))


def norm_ball(norm: Norm, radius: float = 1.0, name: Optional[str] = None) -> Region:
    """Closed ball ‖x‖ ≤ radius"""
    name = name or f"ball_{norm.label}_{radius:g}"
    description = f"||x||_{norm.label} <= {radius:g}"
    if norm.kind == NormKind.PRODUCT:
        return Region(name=name, membership=lambda p: norm_eval(norm, p) <= radius * (1 + MEMBER_SLACK),
                      ambient=Ambient.BLOCKS, sampler=_ball_sampler(norm, radius, outward=False),
                      description=description)

    def inside(xy):
        return planar_norms(norm, xy) <= radius * (1 + MEMBER_SLACK)

    return planar_region(name, inside, (sphere_curve(norm, radius),),
                         Box(-radius, radius, -radius, radius), description)


def norm_shell(norm: Norm, radius: float = 2.0, name: Optional[str] = None) -> Region:
    """Closed exterior ‖x‖ ≥ radius"""
    name = name or f"shell_{norm.label}_{radius:g}"
    description = f"||x||_{norm.label} >= {radius:g}"
    if norm.kind == NormKind.PRODUCT:
        return Region(name=name, membership=lambda p: norm_eval(norm, p) >= radius * (1 - MEMBER_SLACK),
                      ambient=Ambient.BLOCKS, sampler=_ball_sampler(norm, radius, outward=True),
                      description=description)

    def inside(xy):
        return planar_norms(norm, xy) >= radius * (1 - MEMBER_SLACK)

    return planar_region(name, inside, (sphere_curve(norm, radius),), None, description)


def product_region(a: Region, b: Region, name: Optional[str] = None) -> Region:
    """a × b with pair points (p, q)"""

    def sample(budget: int, box: Optional[Box], rng: np.random.Generator):
        left = a.sample(budget, box, seed=int(rng.integers(2 ** 31)))
        right = b.sample(budget, box, seed=int(rng.integers(2 ** 31)))
        return list(zip(left, right))

    return Region(name=name or f"{a.name}x{b.name}",
                  membership=lambda pair: a.contains(pair[0]) and b.contains(pair[1]),
                  ambient=Ambient.PAIR, sampler=sample,
                  description=f"({a.description}) x ({b.description})")


def vertical_line(name: str, x0: float) -> Curve:
    return Curve(name, lambda t: np.column_stack([np.full(len(t), x0), t]), -BOX_LIMIT, BOX_LIMIT,
                 knots=(-1.0, 0.0, 1.0))


def horizontal_line(name: str, y0: float) -> Curve:
    return Curve(name, lambda t: np.column_stack([t, np.full(len(t), y0)]), -BOX_LIMIT, BOX_LIMIT,
                 knots=(-1.0, 0.0, 1.0))


def _reciprocal(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 1.0 / x


# y = 1/x (x > 0) and y = 1/(x+1) − 1 (x > −1), both in log-parameter form
HYPERBOLA = Curve("y=1/x", lambda t: np.column_stack([np.exp(t), np.exp(-t)]), -LOG_LIMIT, LOG_LIMIT,
                  knots=(0.0,))
SHIFTED_HYPERBOLA = Curve("y=1/(x+1)-1", lambda t: np.column_stack([np.exp(t) - 1.0, np.exp(-t) - 1.0]),
                          -LOG_LIMIT, LOG_LIMIT, knots=(0.0,))
MIRRORED_HYPERBOLA = Curve("y=-1/x", lambda t: np.column_stack([-np.exp(t), np.exp(-t)]), -LOG_LIMIT,
                           LOG_LIMIT, knots=(0.0,))


def _above_hyperbola(xy):
    x, y = xy[..., 0], xy[..., 1]
    return (x > 0) & (y >= _reciprocal(np.where(x > 0, x, 1.0)) - _slack(y))


def _above_mirrored_hyperbola(xy):
    x, y = xy[..., 0], xy[..., 1]
    return (x < 0) & (y >= _reciprocal(np.where(x < 0, -x, 1.0)) - _slack(y))


def _below_shifted_hyperbola(xy):
    x, y = xy[..., 0], xy[..., 1]
    shifted = np.where(x > -1, x + 1.0, 1.0)
    return (x > -1) & (y <= _reciprocal(shifted) - 1.0 + _slack(y))


def _left_of_minus_one(xy):
    return xy[..., 0] <= -1.0 + MEMBER_SLACK


def _on_hyperbola(xy):
    x, y = xy[..., 0], xy[..., 1]
    target = _reciprocal(np.where(x > 0, x, 1.0))
    return (x > 0) & (np.abs(y - target) <= CURVE_SLACK * (1.0 + np.abs(y)))


def _on_shifted_hyperbola(xy):
    x, y = xy[..., 0], xy[..., 1]
    target = _reciprocal(np.where(x > -1, x + 1.0, 1.0)) - 1.0
    return (x > -1) & (np.abs(y - target) <= CURVE_SLACK * (1.0 + np.abs(y)))


def _half_plane(axis: int, bound: float, upper: bool):
    def inside(xy):
        values = np.asarray(xy, dtype=float)[..., axis]
        if upper:
            return values >= bound - MEMBER_SLACK * (1 + abs(bound))
        return values <= bound + MEMBER_SLACK * (1 + abs(bound))
    return inside


def _figure(description: str) -> str:
    return f"{description} [reconstructed from the stated distances, figure not available]"


REGION_CATALOG: Dict[str, Callable[[], Region]] = {
    "ex15_A": lambda: polygon_region("ex15_A", [(0, 1), (1, 0), (0, -1)],
                                     _figure("x in [0,1], |y| <= 1 - x"), True),
    "ex15_B": lambda: polygon_region("ex15_B", [(2, 0), (4, 2), (4, -2)],
                                     _figure("x in [2,4], |y| <= x - 2"), True),
    "ex15_C": lambda: polygon_region("ex15_C", [(5, -0.5), (6, -0.5), (6, 0.5), (5, 0.5)],
                                     _figure("x in [5,6], |y| <= 1/2"), True),
    "ex16_A": lambda: polygon_region("ex16_A", [(0, 1), (1, 0), (0, -1)],
                                     _figure("x in [0,1], |y| <= 1 - x"), True),
    "ex16_B": lambda: polygon_region("ex16_B", [(2, 0), (2.5, -0.5), (3, 0), (2.5, 0.5)],
                                     _figure("x in [2,3], |y| <= min(x - 2, 3 - x)"), True),
    "ex16_C": lambda: polygon_region("ex16_C", [(4, 0), (5, -1), (5, 1)],
                                     _figure("x in [4,5], |y| <= x - 4"), True),
    "ex28_A": lambda: planar_region("ex28_A", _above_hyperbola, (HYPERBOLA,), None, "y >= 1/x, x > 0"),
    "ex28_B": lambda: planar_region("ex28_B", _above_mirrored_hyperbola, (MIRRORED_HYPERBOLA,), None,
                                    "y >= 1/|x|, x < 0"),
    "ex43_A": lambda: planar_region("ex43_A", _above_hyperbola, (HYPERBOLA,), None, "1/x <= y, x > 0"),
    "ex43_B": lambda: planar_region("ex43_B", _below_shifted_hyperbola,
                                    (SHIFTED_HYPERBOLA, vertical_line("x=-1", -1.0)), None,
                                    "1/(x+1) - 1 >= y, x > -1"),
    "ex49_A": lambda: planar_region("ex49_A", _above_hyperbola, (HYPERBOLA,), None, "1/x <= y, x > 0"),
    "ex49_B1": lambda: planar_region("ex49_B1", _below_shifted_hyperbola,
                                     (SHIFTED_HYPERBOLA, vertical_line("x=-1", -1.0)), None,
                                     "1/(x+1) - 1 >= y, x > -1"),
    "ex49_B2": lambda: planar_region("ex49_B2", _left_of_minus_one, (vertical_line("x=-1", -1.0),), None,
                                     "x <= -1"),
    "ex49_B": lambda: planar_region("ex49_B", lambda xy: _below_shifted_hyperbola(xy) | _left_of_minus_one(xy),
                                    (SHIFTED_HYPERBOLA,), None, "B1 union B2"),
    "ex49_A_bar": lambda: planar_region("ex49_A_bar", _on_hyperbola, (HYPERBOLA,), None, "y = 1/x, x > 0"),
    "ex49_B_bar": lambda: planar_region("ex49_B_bar", _on_shifted_hyperbola, (SHIFTED_HYPERBOLA,), None,
                                        "y = 1/(x+1) - 1, x > -1"),
    "half_plane_upper": lambda: planar_region("half_plane_upper", _half_plane(1, 0.0, True),
                                              (horizontal_line("y=0", 0.0),), None, "y >= 0"),
    "half_plane_right": lambda: planar_region("half_plane_right", _half_plane(0, 0.0, True),
                                              (vertical_line("x=0", 0.0),), None, "x >= 0"),
    "half_plane_left_of_one": lambda: planar_region("half_plane_left_of_one", _half_plane(0, 1.0, False),
                                                    (vertical_line("x=1", 1.0),), None, "x <= 1"),
    "coupled_A": lambda: planar_region("coupled_A", _half_plane(0, 0.5, True),
                                       (vertical_line("x=1/2", 0.5),), None, "x >= 1/2"),
    "coupled_B": lambda: planar_region("coupled_B", _half_plane(0, -0.5, False),
                                       (vertical_line("x=-1/2", -0.5),), None, "x <= -1/2"),
}

for _norm in (L1, L2, LINF, PRODUCT):
    REGION_CATALOG[f"unit_ball_{_norm.label}"] = (lambda n=_norm: norm_ball(n, 1.0, f"unit_ball_{n.label}"))
    REGION_CATALOG[f"shell_{_norm.label}"] = (lambda n=_norm: norm_shell(n, 2.0, f"shell_{n.label}"))


@lru_cache(maxsize=None)
def corpus_region(name: str) -> Region:
    """Catalog region by name, built once"""
    try:
        factory = REGION_CATALOG[name]
    except KeyError:
        raise CatalogError("region", name, REGION_CATALOG) from None
    return factory()


def catalog_records() -> List[Dict]:
    """One JSON-ready record per catalog region; unbounded planar sets report DEFAULT_BOX"""
    records = []
    for name in REGION_CATALOG:
        region = corpus_region(name)
        box = region.bounding_box or (DEFAULT_BOX if region.ambient == Ambient.PLANAR else None)
        records.append({
            "name": name,
            "description": region.description,
            "ambient": region.ambient.value,
            "bounding_box": box.as_list() if box else None,
            "figure_reconstruction": region.figure_reconstruction,
        })
    return records


def write_catalog(path) -> None:
    with open(path, "w") as f:
        json.dump({"schema": SCHEMA_VERSION, "regions": catalog_records()}, f, indent=2, sort_keys=True)
    logging.info(f"Region catalog written to {path}")


# -------------------- ESTIMATION --------------------

def golden_section_search(f: Callable[[float], float], a: float, b: float,
                          tol: float = GOLDEN_TOL) -> Tuple[float, float]:
    """Minimum of f on [a, b]; the bracket endpoints are candidates too"""
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)
    candidates = [(yc, c), (yd, d), (f(a), a), (f(b), b)]
    value, x = min(candidates)
    return x, value


def budget_schedule(budget: int, nested: bool = True) -> List[int]:
    """Coarsest-first levels budget, budget//2, ... down to MIN_BUDGET"""
    if not nested:
        return [budget]
    levels = [budget]
    while levels[-1] // 2 >= MIN_BUDGET:
        levels.append(levels[-1] // 2)
    return levels[::-1]


class DistanceEstimator:
    """
    Grid-plus-refinement distance estimator over boundary parametrizations.

    Every level of the budget schedule evaluates the boundary grids, picks the
    `n_starts` best grid cells and refines each by golden-section search along
    the curve parameters. The reported value is the minimum over all levels.
    """

    def __init__(self, n_starts: int = N_STARTS, n_jobs: int = 1, nested: bool = True):
        self.n_starts = n_starts
        self.n_jobs = n_jobs
        self.nested = nested
        self.sweeps = REFINE_SWEEPS
        self.tol = GOLDEN_TOL

    # ---- validation ----

    def _check(self, norm: Norm, region: Region, budget: int):
        """Planar norm, budget at least MIN_BUDGET and a frontier to search"""
        if not norm.is_planar:
            raise NormMismatchError(norm, region.name)
        if budget < MIN_BUDGET:
            raise PreconditionError(f"budget must be >= {MIN_BUDGET}, got {budget}")
        if not region.estimable:
            raise RegionError(f"unestimable region: '{region.name}' has neither boundary nor bounding box")

    def _pieces(self, region: Region, level: int):
        """(curve or None, parameters, points) for every frontier piece"""
        if region.boundary:
            pieces = []
            for curve in region.boundary:
                ts = curve.grid(level)
                pieces.append((curve, ts, curve.evaluate(ts)))
            return pieces
        return [(None, None, _box_frontier(region, region.bounding_box, level))]

    def _parallel(self, tasks):
        """Threaded map that keeps submission order, so results do not depend on n_jobs"""
        return Parallel(n_jobs=self.n_jobs, prefer="threads")(tasks)

    # ---- point to frontier ----

    def frontier_distance(self, norm: Norm, p: Planar, region: Region, budget: int = DEFAULT_BUDGET) -> DistanceEstimate:
        """Distance from p to the frontier of region, whether p lies inside or not"""
        self._check(norm, region, budget)
        center = p.as_array()
        best_value, best_point = math.inf, None
        history, used = [], 0
        for level in budget_schedule(budget, self.nested):
            starts = []
            # best grid cells of every piece compete for the refinement starts
            for curve, ts, xy in self._pieces(region, level):
                values = planar_norms(norm, xy - center)
                used += len(values)
                for i in np.argsort(values, kind="stable")[: self.n_starts]:
                    spacing = (curve.t_hi - curve.t_lo) / level if curve is not None else 0.0
                    starts.append((values[i], curve, ts[i] if curve is not None else None, spacing, xy[i]))
            starts.sort(key=lambda s: s[0])
            starts = starts[: self.n_starts]
            refined = self._parallel(delayed(self._refine_point)(norm, center, *start) for start in starts)
            for value, xy in refined:
                if value < best_value:
                    best_value, best_point = value, xy
            history.append((level, best_value))
        return DistanceEstimate(best_value, (p, Planar.from_array(best_point)), used, history)

    def _refine_point(self, norm, center, value, curve, t0, spacing, xy):
        """Golden-section search within one grid spacing of t0; box frontiers stay as they are"""
        if curve is None:
            return value, xy

        def objective(t):
            q = curve.at(t)
            return planar_norm_xy(norm, q[0] - center[0], q[1] - center[1])

        lo, hi = max(curve.t_lo, t0 - spacing), min(curve.t_hi, t0 + spacing)
        t, refined = golden_section_search(objective, lo, hi, self.tol)
        if refined < value:
            return refined, curve.at(t)
        return value, xy

    def point_to_set(self, norm: Norm, p: Planar, region: Region, budget: int = DEFAULT_BUDGET) -> DistanceEstimate:
        """Zero for members, the frontier distance otherwise"""
        self._check(norm, region, budget)
        if region.contains(p):
            return DistanceEstimate(0.0, (p, p), 1, [(budget, 0.0)])
        return self.frontier_distance(norm, p, region, budget)

    # ---- set to set ----

    def set_distance(self, norm: Norm, a: Region, b: Region, budget: int = DEFAULT_BUDGET) -> DistanceEstimate:
        """
        Upper estimate of dist(a, b), the minimum over every schedule level.
        A frontier grid point shared by both regions settles the level at zero.
        """
        self._check(norm, a, budget)
        self._check(norm, b, budget)
        best_value, best_pair = math.inf, None
        history, used = [], 0
        for level in budget_schedule(budget, self.nested):
            pieces_a, pieces_b = self._pieces(a, level), self._pieces(b, level)
            overlap = _first_shared_point(a, b, pieces_a, pieces_b)
            if overlap is not None:
                best_value, best_pair = 0.0, (overlap, overlap)
                history.append((level, 0.0))
                continue
            starts = []
            for curve_a, ts_a, xy_a in pieces_a:
                for curve_b, ts_b, xy_b in pieces_b:
                    values = planar_norms(norm, xy_a[:, None, :] - xy_b[None, :, :])
                    used += values.size
                    flat = np.argsort(values, axis=None, kind="stable")[: self.n_starts]
                    for i, j in zip(*np.unravel_index(flat, values.shape)):
                        starts.append((values[i, j],
                                        curve_a, ts_a[i] if curve_a is not None else None, xy_a[i],
                                        curve_b, ts_b[j] if curve_b is not None else None, xy_b[j], level))
            starts.sort(key=lambda s: s[0])
            refined = self._parallel(delayed(self._refine_pair)(norm, *start) for start in starts[: self.n_starts])
            for value, pa, pb in refined:
                if value < best_value:
                    best_value, best_pair = value, (Planar.from_array(pa), Planar.from_array(pb))
            history.append((level, best_value))
        logging.debug(f"set_distance {a.name}/{b.name} under {norm}: {best_value}")
        return DistanceEstimate(best_value, best_pair, used, history)

    def _refine_pair(self, norm, value, curve_a, s0, pa, curve_b, t0, pb, level):
        """Alternating golden-section sweeps over both curve parameters"""
        pa, pb = np.array(pa, dtype=float), np.array(pb, dtype=float)
        s_range = t_range = None
        if curve_a is not None:
            hs = (curve_a.t_hi - curve_a.t_lo) / level
            s_range = (max(curve_a.t_lo, s0 - hs), min(curve_a.t_hi, s0 + hs))
        if curve_b is not None:
            ht = (curve_b.t_hi - curve_b.t_lo) / level
            t_range = (max(curve_b.t_lo, t0 - ht), min(curve_b.t_hi, t0 + ht))
        for _ in range(self.sweeps):
            improved = False
            if s_range is not None:
                s, v = golden_section_search(
                    lambda u: _gap(norm, curve_a.at(u), pb), s_range[0], s_range[1], self.tol)
                if v < value:
                    value, pa, improved = v, curve_a.at(s), True
            if t_range is not None:
                t, v = golden_section_search(
                    lambda u: _gap(norm, pa, curve_b.at(u)), t_range[0], t_range[1], self.tol)
                if v < value:
                    value, pb, improved = v, curve_b.at(t), True
            if not improved:
                break
        return value, pa, pb


def _gap(norm: Norm, p: np.ndarray, q: np.ndarray) -> float:
    return planar_norm_xy(norm, p[0] - q[0], p[1] - q[1])


def _first_shared_point(a: Region, b: Region, pieces_a, pieces_b) -> Optional[Planar]:
    """A frontier grid point of one region that belongs to the other, if any"""
    for pieces, other in ((pieces_a, b), (pieces_b, a)):
        for _, _, xy in pieces:
            hits = np.flatnonzero(other.contains_array(xy))
            if hits.size:
                return Planar.from_array(xy[hits[0]])
    return None


def _box_frontier(region: Region, box: Box, level: int) -> np.ndarray:
    """Midpoints of grid edges of the box across which membership flips"""
    xs = np.linspace(box.x_lo, box.x_hi, level + 1)
    ys = np.linspace(box.y_lo, box.y_hi, level + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    grid = np.stack([gx, gy], axis=-1)
    inside = region.contains_array(grid)
    flips = [0.5 * (grid[:-1, :] + grid[1:, :])[inside[:-1, :] != inside[1:, :]],
             0.5 * (grid[:, :-1] + grid[:, 1:])[inside[:, :-1] != inside[:, 1:]]]
    points = np.concatenate(flips)
    if len(points) == 0:
        raise RegionError(f"no frontier of '{region.name}' inside its bounding box")
    return points


_DEFAULT_ESTIMATOR = DistanceEstimator()


def frontier_distance(norm: Norm, p: Planar, r: Region, budget: int = DEFAULT_BUDGET) -> DistanceEstimate:
    return _DEFAULT_ESTIMATOR.frontier_distance(norm, p, r, budget)


def point_to_set_distance(norm: Norm, p: Planar, r: Region, budget: int = DEFAULT_BUDGET) -> DistanceEstimate:
    return _DEFAULT_ESTIMATOR.point_to_set(norm, p, r, budget)


def set_distance(norm: Norm, a: Region, b: Region, budget: int = DEFAULT_BUDGET) -> DistanceEstimate:
    return _DEFAULT_ESTIMATOR.set_distance(norm, a, b, budget)


def product_set_distance(norm: Norm, a: Region, b: Region, budget: int = DEFAULT_BUDGET) -> DistanceEstimate:
    """dist(A×A, B×B) under the sum metric; the infimum separates coordinatewise"""
    base = set_distance(norm, a, b, budget)
    p, q = base.argmin_pair
    history = [(level, 2.0 * value) for level, value in base.refinement_history]
    return DistanceEstimate(metric(norm, p, q) + metric(norm, p, q), ((p, p), (q, q)), base.budget_used, history)


# -------------------- BALL INCLUSION --------------------

@lru_cache(maxsize=64)
def _probe_directions(norm: Norm, probes: int) -> np.ndarray:
    """`probes` equally spaced sphere directions plus the eight compass ones"""
    angles = np.union1d(np.linspace(0, 2 * math.pi, probes, endpoint=False),
                        np.arange(8) * math.pi / 4)
    return sphere_points(norm, angles)


def ball_points(norm: Norm, center: Planar, radius: float, probes: int) -> np.ndarray:
    """
    Test points of the open ball B(center, radius): the center, a ring just
    inside the sphere and a radial × angular grid of the interior.
    """
    directions = _probe_directions(norm, probes)
    c = center.as_array()
    rings = [c[None, :], c + SPHERE_SCALE * radius * directions]
    rings += [c + fraction * radius * directions for fraction in INTERIOR_FRACTIONS]
    return np.concatenate(rings)


def midpoint_ball_inclusion(norm: Norm, r: Region, x: Planar, y: Planar, radius: float,
                            probes: int = 32) -> BallInclusion:
    """Probe whether B((x+y)/2, radius) ⊂ r"""
    if probes < 16:
        raise PreconditionError(f"probes must be >= 16, got {probes}")
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    if not norm.is_planar:
        raise NormMismatchError(norm, x)
    for p in (x, y):
        if not r.contains(p):
            raise PreconditionError(f"{p} is not in {r.name}")
    center = midpoint(x, y)
    points = ball_points(norm, center, radius, probes)
    inside = r.contains_array(points)
    if inside.all():
        return BallInclusion(True, None, len(points))
    # an escaping point only counts if rounding left it strictly inside the ball
    for row in points[~inside]:
        candidate = Planar.from_array(row)
        if open_ball_contains(norm, center, radius, candidate):
            logging.debug(f"ball around midpoint of {x}, {y} escapes {r.name} at {candidate}")
            return BallInclusion(False, candidate, len(points))
    return BallInclusion(True, None, len(points))

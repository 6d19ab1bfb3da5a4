"""
Cyclic and coupled maps: best proximity points by successive iteration

Features:
- Side-tagged cyclic maps with claimed contraction class
- Cyclicity and contraction checks on stratified samples
- Picard iteration with even-subsequence convergence and residual certificates
- Gap and orbit bounds along iterate traces
- Coupled maps reduced to cyclic maps on the product space with the sum metric
- Corpus maps
"""

import json
import logging
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from errors import BudgetError, CatalogError, MapIntegrityError, PreconditionError
from geometry import (
    L2, LINF, Norm, Planar, Point, decode_point, encode_point, metric, pairwise_metrics, sum_metric,
)
from regions import (
    Box, DistanceEstimator, Region, corpus_region, product_region, product_set_distance, set_distance,
)

# -------------------- CONFIG --------------------
SCHEMA_VERSION = 1
MIN_STEPS = 4
GAP_SLACK = 1e-12
VIOLATION_TOL = 1e-9
MAP_DISTANCE_BUDGET = 64
NEAR_PAIR_SCALE = 0.25


class ContractionKind(Enum):
    BANACH = "banach"
    SUZUKI = "suzuki"
    NONE = "none"


@dataclass(frozen=True)
class ContractionClass:
    kind: ContractionKind
    k: Optional[float] = None

    def __str__(self) -> str:
        return self.kind.value if self.k is None else f"{self.kind.value}({self.k:g})"


class Side(Enum):
    A = 0
    B = 1

    @property
    def other(self) -> "Side":
        return Side.B if self is Side.A else Side.A


@dataclass(frozen=True)
class CyclicMapDef:
    """T on A ∪ B with T(A) ⊆ B and T(B) ⊆ A"""
    name: str
    apply: Callable[[Point], Point]
    domain: Tuple[Region, Region]
    norm: Norm
    dist_ab: float
    claimed_class: ContractionClass = ContractionClass(ContractionKind.NONE)
    proximal_pair: Optional[Tuple[Point, Point]] = None
    product: bool = False

    def __call__(self, p: Point) -> Point:
        return self.apply(p)

    def side_of(self, p) -> Side:
        """A first, so points of an overlap count as A-points"""
        if self.domain[0].contains(p):
            return Side.A
        if self.domain[1].contains(p):
            return Side.B
        raise MapIntegrityError(f"{self.name}: {p} lies outside A ∪ B")

    def region(self, side: Side) -> Region:
        return self.domain[side.value]

    def distance(self, p, q) -> float:
        """ρ on A ∪ B, or the sum metric for product maps"""
        if self.product:
            return sum_metric(self.norm, p, q)
        return metric(self.norm, p, q)

    def distances(self, ps: Sequence, qs: Sequence) -> np.ndarray:
        if self.product:
            return np.array([[sum_metric(self.norm, p, q) for q in qs] for p in ps]).reshape(len(ps), len(qs))
        return pairwise_metrics(self.norm, ps, qs)


class PointDistanceCache:
    """Per-point memo of distance evaluations, safe under concurrent access"""

    def __init__(self):
        self._values: Dict[Hashable, float] = {}
        self._lock = threading.Lock()

    def get_or_compute(self, key: Hashable, compute: Callable[[], float]) -> float:
        with self._lock:
            if key in self._values:
                return self._values[key]
        value = compute()
        with self._lock:
            self._values.setdefault(key, value)
        return value

    def __len__(self) -> int:
        return len(self._values)


# -------------------- TRACES --------------------

@dataclass
class Certificate:
    point: Point
    proximity: float
    dist_ab: float
    residual: float
    steps: int

    def as_dict(self) -> Dict:
        return {
            "point": encode_point(self.point),
            "proximity": self.proximity,
            "dist_ab": self.dist_ab,
            "residual": self.residual,
            "steps": self.steps,
        }


@dataclass
class IterationTrace:
    map_name: str
    iterates: List[Point]
    gaps: List[float]
    proximities: List[float]
    dist_ab: float
    converged: bool
    limit_even: Optional[Point] = None
    limit_odd: Optional[Point] = None
    tol: float = 0.0

    @property
    def steps(self) -> int:
        return len(self.iterates) - 1

    def to_records(self) -> List[Dict]:
        return [{"n": n, "point": encode_point(p), "gap": g, "proximity": r}
                for n, (p, g, r) in enumerate(zip(self.iterates, self.gaps, self.proximities))]

    def write_jsonl(self, path, certificate: Optional[Certificate] = None) -> None:
        header = {"schema": SCHEMA_VERSION, "kind": "trace", "map": self.map_name, "dist_ab": self.dist_ab,
                  "converged": self.converged, "tol": self.tol}
        with open(path, "w") as f:
            f.write(json.dumps(header, sort_keys=True) + "\n")
            for record in self.to_records():
                f.write(json.dumps(record, sort_keys=True) + "\n")
            if certificate is not None:
                f.write(json.dumps({"certificate": certificate.as_dict()}, sort_keys=True) + "\n")
        logging.info(f"Trace of {self.map_name} ({self.steps} steps) written to {path}")

    @classmethod
    def read_jsonl(cls, path) -> "IterationTrace":
        """Trace written by write_jsonl; a closing certificate line is skipped"""
        try:
            with open(path) as f:
                lines = [json.loads(line) for line in f if line.strip()]
            header = lines[0]
            if header.get("kind") != "trace" or header.get("schema") != SCHEMA_VERSION:
                raise PreconditionError(f"{path} is not a schema {SCHEMA_VERSION} trace")
            records = [line for line in lines[1:] if "certificate" not in line]
            iterates = [decode_point(record["point"]) for record in records]
            gaps = [record["gap"] for record in records]
            proximities = [record["proximity"] for record in records]
            trace = cls(header["map"], iterates, gaps, proximities, header["dist_ab"], header["converged"],
                        tol=header["tol"])
        except (AttributeError, IndexError, KeyError, TypeError, ValueError) as e:
            raise PreconditionError(f"unreadable trace {path}: {e}") from None
        if not iterates:
            raise PreconditionError(f"trace {path} holds no iterates")
        if trace.converged and len(iterates) >= 2:
            trace.limit_even, trace.limit_odd = iterates[-2], iterates[-1]
        return trace

    def last_even(self) -> Point:
        """Latest iterate on the side of the start"""
        return self.iterates[self.steps - self.steps % 2]


def _advance(cmap: CyclicMapDef, p, side: Side):
    """One application of T, checked to land on the other side"""
    image = cmap(p)
    target = side.other
    if not cmap.region(target).contains(image):
        raise MapIntegrityError(f"{cmap.name}: T({p}) = {image} is not in {cmap.region(target).name}")
    return image, target


def iterate(cmap: CyclicMapDef, x0, n_max: int, tol: float, stop_early: bool = True) -> IterationTrace:
    """
    Picard iteration x_{n+1} = T x_n.

    Convergence is judged on the even subsequence: at even n ≥ 2 the run stops
    once ρ(x_n, x_{n−2}) < tol and |ρ(x_n, T x_n) − dist(A, B)| < tol.
    """
    if n_max < MIN_STEPS:
        raise PreconditionError(f"n_max must be >= {MIN_STEPS}, got {n_max}")
    side = cmap.side_of(x0)
    iterates = [x0]
    nxt, nxt_side = _advance(cmap, x0, side)
    converged = False
    for n in range(1, n_max + 1):
        iterates.append(nxt)
        nxt, nxt_side = _advance(cmap, nxt, nxt_side)
        if not stop_early or n % 2 or n < 2:
            continue
        settled = cmap.distance(iterates[n], iterates[n - 2]) < tol
        if settled and abs(cmap.distance(iterates[n], nxt) - cmap.dist_ab) < tol:
            iterates.append(nxt)
            nxt, nxt_side = _advance(cmap, nxt, nxt_side)
            converged = True
            break

    gaps = [0.0] + [cmap.distance(p, q) for p, q in zip(iterates[1:], iterates[:-1])]
    proximities = gaps[1:] + [cmap.distance(iterates[-1], nxt)]
    trace = IterationTrace(cmap.name, iterates, gaps, proximities, cmap.dist_ab, converged, tol=tol)
    if converged:
        trace.limit_even, trace.limit_odd = iterates[-2], iterates[-1]
        logging.info(f"{cmap.name}: converged after {trace.steps} steps")
    elif stop_early:
        logging.warning(f"{cmap.name}: no convergence within {n_max} steps (tol={tol:g})")
    return trace


def certify(cmap: CyclicMapDef, trace: IterationTrace, tol: float) -> Tuple[Point, Certificate]:
    """Certificate for the even limit of a converged trace; BudgetError otherwise"""
    if not trace.converged:
        raise BudgetError(f"{cmap.name}: iteration did not converge in {trace.steps} steps", trace)
    point = trace.limit_even
    proximity = cmap.distance(point, cmap(point))
    residual = abs(proximity - cmap.dist_ab)
    if residual >= tol:
        raise BudgetError(f"{cmap.name}: residual {residual:.3g} exceeds tol {tol:g}", trace)
    return point, Certificate(point, proximity, cmap.dist_ab, residual, trace.steps)


def best_proximity_point(cmap: CyclicMapDef, x0, tol: float = 1e-8, n_max: int = 1000) -> Tuple[Point, Certificate]:
    """Limit of the even subsequence with residual |ρ(x, Tx) − dist(A, B)| < tol"""
    return certify(cmap, iterate(cmap, x0, n_max, tol), tol)


# -------------------- VERIFICATION --------------------

@dataclass
class CyclicCheck:
    ok: bool
    violator: Optional[Point] = None
    checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


def verify_cyclic(cmap: CyclicMapDef, samples: int = 1000, box: Optional[Box] = None, seed: int = 0) -> CyclicCheck:
    """T(A) ⊆ B and T(B) ⊆ A on seeded samples of each side; stops at the first escape"""
    checked = 0
    for side in (Side.A, Side.B):
        points = cmap.region(side).sample(samples, box, seed + side.value)
        target = cmap.region(side.other)
        for p in points:
            checked += 1
            if not target.contains(cmap(p)):
                logging.info(f"{cmap.name}: T({p}) escapes {target.name}")
                return CyclicCheck(False, p, checked)
    return CyclicCheck(True, None, checked)


@dataclass
class ContractionReport:
    k: float
    max_violation: float
    worst_pair: Optional[Tuple[Point, Point]]
    pairs_checked: int
    suzuki: bool = False

    @property
    def passed(self) -> bool:
        return self.max_violation <= VIOLATION_TOL


def _near(region: Region, center, count: int, rng: np.random.Generator) -> List:
    """Members of region jittered around a proximal point"""
    if isinstance(center, tuple):
        return _near_planar(region, center[0], count, rng, lambda q: (q, q))
    return _near_planar(region, center, count, rng, lambda q: q)


def _near_planar(region: Region, center: Planar, count: int, rng: np.random.Generator, wrap) -> List:
    found = []
    for _ in range(50):
        if len(found) >= count:
            break
        scale = NEAR_PAIR_SCALE * rng.uniform(0, 1, size=(4 * count, 1)) ** 2
        offsets = rng.normal(size=(4 * count, 2)) * scale
        for dx, dy in offsets:
            candidate = wrap(Planar(center.x + dx, center.y + dy))
            if region.contains(candidate):
                found.append(candidate)
                if len(found) >= count:
                    break
    return found


def verify_contraction(cmap: CyclicMapDef, k: float, pair_samples: int = 10000, suzuki: bool = False,
                       box: Optional[Box] = None, seed: int = 0) -> ContractionReport:
    """
    Largest violation of ρ(Tx, Ty) ≤ k·m(x, y) + (1 − k)·dist(A, B) over cross pairs,
    m = ρ(x, y) (Banach) or max{ρ(x, y), ρ(x, Tx), ρ(y, Ty)} (Suzuki).

    Half of each side's sample is uniform, half is concentrated near the proximal pair.
    """
    if not 0 < k < 1:
        raise PreconditionError(f"contraction constant must lie in (0, 1), got {k}")
    rng = np.random.default_rng(seed)
    n_side = int(math.ceil(math.sqrt(pair_samples)))
    sides = []
    for side in (Side.A, Side.B):
        region = cmap.region(side)
        uniform = region.sample(n_side - n_side // 2, box, seed + side.value)
        near = []
        if cmap.proximal_pair is not None:
            near = _near(region, cmap.proximal_pair[side.value], n_side // 2, rng)
        points = uniform + near
        sides.append(points)
    xs, ys = sides
    tx, ty = [cmap(x) for x in xs], [cmap(y) for y in ys]

    base = cmap.distances(xs, ys)
    images = cmap.distances(tx, ty)
    if suzuki:
        own_x = np.array([cmap.distance(x, t) for x, t in zip(xs, tx)])
        own_y = np.array([cmap.distance(y, t) for y, t in zip(ys, ty)])
        base = np.maximum(base, np.maximum(own_x[:, None], own_y[None, :]))
    violation = images - k * base - (1 - k) * cmap.dist_ab
    i, j = np.unravel_index(int(np.argmax(violation)), violation.shape)
    report = ContractionReport(k, float(violation[i, j]), (xs[i], ys[j]), violation.size, suzuki)
    logging.info(f"{cmap.name}: contraction k={k:g} max violation {report.max_violation:.3g} "
                 f"over {report.pairs_checked} pairs")
    return report


def iterate_bounds(lam: float, first_gap: float, dist_ab: float) -> Tuple[float, float]:
    """(even bound on ρ(x_{2n}, x_1), odd bound on ρ(x_{2n+1}, x_0))"""
    even = (2 * lam + 1) / (1 - lam) * first_gap + dist_ab
    return even, even + 2 * first_gap


def check_iterate_bounds(cmap: CyclicMapDef, x0, lam: float, n_max: int, pair_samples: int = 2000,
                         seed: int = 0, box: Optional[Box] = None) -> bool:
    """
    Along the full orbit: gaps never exceed the first gap, and the even and odd
    iterates stay within the closed-form orbit bounds.
    """
    report = verify_contraction(cmap, lam, pair_samples, suzuki=True, box=box, seed=seed)
    if not report.passed:
        raise PreconditionError(f"{cmap.name} violates the Suzuki-type contraction with constant {lam} "
                                f"(violation {report.max_violation:.3g} at {report.worst_pair})")
    # full orbit, no early stop
    trace = iterate(cmap, x0, n_max, tol=0.0, stop_early=False)
    first_gap = trace.gaps[1]
    even_bound, odd_bound = iterate_bounds(lam, first_gap, cmap.dist_ab)
    x0_, x1 = trace.iterates[0], trace.iterates[1]
    ok = max(trace.gaps[1:]) <= first_gap + GAP_SLACK * (1 + first_gap)
    for n, p in enumerate(trace.iterates[2:], start=2):
        if n % 2 == 0:
            ok &= cmap.distance(p, x1) <= even_bound + GAP_SLACK
        else:
            ok &= cmap.distance(p, x0_) <= odd_bound + GAP_SLACK
    if not ok:
        logging.error(f"{cmap.name}: orbit bounds fail from {x0}")
    return bool(ok)


# -------------------- COUPLED MAPS --------------------

@dataclass(frozen=True)
class CoupledMapDef:
    """F: A × A → B and G: B × B → A with constants α, β ≥ 0, α + β < 1"""
    name: str
    f: Callable[[Point, Point], Point]
    g: Callable[[Point, Point], Point]
    domain: Tuple[Region, Region]
    norm: Norm
    alpha: float
    beta: float
    dist_ab: float
    proximal_pair: Optional[Tuple[Point, Point]] = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.alpha < 0 or self.beta < 0 or not self.alpha + self.beta < 1:
            raise PreconditionError(f"coupled constants need alpha, beta >= 0 and alpha + beta < 1, "
                                    f"got {self.alpha}, {self.beta}")


@dataclass
class CoupledSolution:
    xy: Tuple[Point, Point]
    uv: Tuple[Point, Point]
    residual: float
    trace: IterationTrace = field(repr=False, default=None)


def coupled_to_cyclic(c: CoupledMapDef) -> CyclicMapDef:
    """T(x, y) = (F(x, y), F(y, x)) on A × A and (G(u, v), G(v, u)) on B × B"""
    c.validate()
    a, b = c.domain
    a2, b2 = product_region(a, a), product_region(b, b)

    def apply(pair):
        x, y = pair
        if a2.contains(pair):
            return (c.f(x, y), c.f(y, x))
        if b2.contains(pair):
            return (c.g(x, y), c.g(y, x))
        raise MapIntegrityError(f"{c.name}: {pair} lies outside A×A ∪ B×B")

    proximal = None
    if c.proximal_pair is not None:
        p, q = c.proximal_pair
        proximal = ((p, p), (q, q))
    return CyclicMapDef(f"{c.name}_product", apply, (a2, b2), c.norm, 2.0 * c.dist_ab,
                        ContractionClass(ContractionKind.BANACH, c.alpha + c.beta), proximal, product=True)


def coupled_solve(c: CoupledMapDef, x0: Point, y0: Point, tol: float = 1e-8, n_max: int = 1000) -> CoupledSolution:
    """Coupled best proximity points from the product-space iteration"""
    cmap = coupled_to_cyclic(c)
    trace = iterate(cmap, (x0, y0), n_max, tol)
    if not trace.converged:
        raise BudgetError(f"{c.name}: coupled iteration did not converge in {n_max} steps", trace)
    xy, uv = trace.limit_even, trace.limit_odd
    residual = abs(sum_metric(c.norm, xy, uv) - 2.0 * c.dist_ab)
    if residual >= tol:
        raise BudgetError(f"{c.name}: coupled residual {residual:.3g} exceeds tol {tol:g}", trace)
    return CoupledSolution(xy, uv, residual, trace)


# -------------------- CORPUS --------------------

def example49_map(budget: int = MAP_DISTANCE_BUDGET) -> CyclicMapDef:
    """
    T(z) = (−d/2, −d/2) with d = dist∞(z, Ā) on A,
    T(z) = (1 + e/2, 1 + e/2) with e = dist∞(z, B̄) on B.
    """
    a, b = corpus_region("ex49_A"), corpus_region("ex49_B")
    a_bar, b_bar = corpus_region("ex49_A_bar"), corpus_region("ex49_B_bar")
    estimator = DistanceEstimator(n_starts=3, nested=False)
    cache = PointDistanceCache()

    def apply(z: Planar) -> Planar:
        if a.contains(z):
            d = cache.get_or_compute((z, "A"), lambda: estimator.point_to_set(LINF, z, a_bar, budget).value)
            return Planar(-d / 2 + 0.0, -d / 2 + 0.0)
        if b.contains(z):
            e = cache.get_or_compute((z, "B"), lambda: estimator.point_to_set(LINF, z, b_bar, budget).value)
            return Planar(1.0 + e / 2, 1.0 + e / 2)
        raise MapIntegrityError(f"example49: {z} lies outside A ∪ B")

    dist_ab = set_distance(LINF, a, b).value
    return CyclicMapDef("example49", apply, (a, b), LINF, dist_ab,
                        ContractionClass(ContractionKind.BANACH, 0.5), (Planar(1, 1), Planar(0, 0)))


def overlap_contraction_map() -> CyclicMapDef:
    """A = {x ≥ 0}, B = {x ≤ 1}, T(x, y) = (3/4 − x/2, y/2); fixed point (1/2, 0)"""
    a, b = corpus_region("half_plane_right"), corpus_region("half_plane_left_of_one")
    fixed = Planar(0.5, 0.0)
    return CyclicMapDef("overlap_contraction", lambda p: Planar(0.75 - p.x / 2, p.y / 2), (a, b), L2, 0.0,
                        ContractionClass(ContractionKind.BANACH, 0.5), (fixed, fixed))


def reflection_quarter_map() -> CoupledMapDef:
    """F(x, y) = R(αx + βy + (1−α−β)a*), G(u, v) = R(αu + βv + (1−α−β)b*), R(p) = (−p_x, p_y)"""
    alpha = beta = 0.25
    a_star, b_star = Planar(0.5, 0.0), Planar(-0.5, 0.0)

    def reflect(p: Planar) -> Planar:
        return Planar(-p.x, p.y)

    def toward(anchor: Planar):
        rest = 1.0 - alpha - beta
        return lambda x, y: reflect(x * alpha + y * beta + anchor * rest)

    a, b = corpus_region("coupled_A"), corpus_region("coupled_B")
    return CoupledMapDef("reflection_quarter", toward(a_star), toward(b_star), (a, b), L2, alpha, beta,
                         metric(L2, a_star, b_star), (a_star, b_star))


MAP_CATALOG: Dict[str, Callable[[], CyclicMapDef]] = {
    "example49": example49_map,
    "overlap_contraction": overlap_contraction_map,
}

COUPLED_CATALOG: Dict[str, Callable[[], CoupledMapDef]] = {
    "reflection_quarter": reflection_quarter_map,
}


@lru_cache(maxsize=None)
def corpus_map(name: str) -> CyclicMapDef:
    """Catalog map by name, built once (example49 estimates dist(A, B) on construction)"""
    try:
        factory = MAP_CATALOG[name]
    except KeyError:
        raise CatalogError("map", name, MAP_CATALOG) from None
    return factory()


@lru_cache(maxsize=None)
def corpus_coupled(name: str) -> CoupledMapDef:
    try:
        factory = COUPLED_CATALOG[name]
    except KeyError:
        raise CatalogError("coupled map", name, COUPLED_CATALOG) from None
    return factory()


def product_distance_check(c: CoupledMapDef, budget: int = 128) -> Tuple[float, float]:
    """(estimated dist(A×A, B×B), 2·estimated dist(A, B))"""
    a, b = c.domain
    return product_set_distance(c.norm, a, b, budget).value, 2.0 * set_distance(c.norm, a, b, budget).value

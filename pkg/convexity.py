"""
Convexity moduli and uniformly convex set checks

Features:
- Modulus of convexity δ(ε) of planar norms (sphere parametrization, first-crossing
  bisection, golden-section refinement)
- Directional modulus δ(z, ε) from chord endpoints on the unit sphere
- Modulus curves exported through pandas
- Uniformly convex set checks, positive property of φ, uniform convexity about φ
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from errors import DomainError, NormMismatchError, PreconditionError, RegionError
from geometry import LINF, Norm, Planar, Point, as_xy, metric, midpoint, norm_eval, planar_norms, sphere_points
from regions import (
    DEFAULT_BOX, DEFAULT_BUDGET, Box, DistanceEstimator, Region, golden_section_search,
    midpoint_ball_inclusion,
)

# -------------------- CONFIG --------------------
MIN_MODULUS_BUDGET = 64
FEASIBILITY_SLACK = 1e-14
BISECTION_STEPS = 64
MODULUS_STARTS = 4
ZERO_TOL = 1e-9
ESCAPE_RADIUS = 1e-9
CLOUD_POINTS = 4096
CLOUD_CHUNK = 256
REFINE_CANDIDATES = 8


@dataclass
class ModulusEstimate:
    """Upper estimate of a modulus; `bound` is the angular grid slack"""
    value: float
    bound: float
    witness: Optional[Tuple[Planar, Planar]] = None


@dataclass
class ModulusCurve:
    norm: Norm
    samples: List[Tuple[float, float]]
    budget: int
    direction: Optional[Planar] = None
    bounds: List[float] = field(default_factory=list)

    def __post_init__(self):
        eps = [e for e, _ in self.samples]
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise DomainError("modulus curve epsilons must be strictly increasing")
        if any(not 0.0 <= d <= 1.0 for _, d in self.samples):
            raise DomainError("modulus values must lie in [0, 1]")

    def to_frame(self) -> pd.DataFrame:
        bounds = self.bounds or [math.nan] * len(self.samples)
        return pd.DataFrame({
            "epsilon": [e for e, _ in self.samples],
            "delta": [d for _, d in self.samples],
            "bound": bounds,
        })

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False)
        logging.info(f"Modulus curve ({self.norm}) saved to {path}")


class ModulusEstimator:
    """
    Estimates δ(ε) = inf{1 − ‖(x+y)/2‖ : ‖x‖, ‖y‖ ≤ 1, ‖x − y‖ ≥ ε}.

    Global modulus: x = S(θ), y = S(θ + φ) with φ the first angle at which the
    chord length reaches ε, scanned over `budget` angles θ and refined by
    golden-section search around the best starts.

    Directional modulus: with ẑ = z/‖z‖ the extremal chords have one endpoint
    x = S(θ) on the sphere and y = x ∓ εẑ in the ball; candidates are the feasible
    grid angles and the roots of ‖S(θ) ∓ εẑ‖ = 1.
    """

    def __init__(self, n_starts: int = MODULUS_STARTS):
        self.n_starts = n_starts
        self.bisection_steps = BISECTION_STEPS
        self.slack = FEASIBILITY_SLACK

    def _validate(self, norm: Norm, epsilon: float, budget: int):
        if not norm.is_planar:
            raise NormMismatchError(norm, "planar unit ball")
        if not 0.0 < epsilon <= 2.0:
            raise DomainError(f"epsilon must lie in (0, 2], got {epsilon}")
        if budget < MIN_MODULUS_BUDGET:
            raise PreconditionError(f"modulus budget must be >= {MIN_MODULUS_BUDGET}, got {budget}")

    @staticmethod
    def _theta_grid(budget: int, closed: bool = False) -> np.ndarray:
        base = np.linspace(0.0, 2 * math.pi, budget + 1)
        if not closed:
            base = base[:-1]
        knots = np.arange(8) * math.pi / 4
        return np.unique(np.concatenate([base, knots]))

    # ---- global ----

    def _crossing(self, norm: Norm, theta: np.ndarray, epsilon: float, steps: int) -> np.ndarray:
        """Smallest φ ∈ (0, π] with ‖S(θ) − S(θ + φ)‖ ≥ ε, per θ"""
        phis = np.linspace(0.0, math.pi, steps + 1)
        x = sphere_points(norm, theta)
        y = sphere_points(norm, theta[:, None] + phis[None, :])
        feasible = planar_norms(norm, x[:, None, :] - y) >= epsilon - self.slack
        first = np.where(feasible.any(axis=1), np.argmax(feasible, axis=1), steps)
        first = np.maximum(first, 1)
        lo, hi = phis[first - 1], phis[first]
        for _ in range(self.bisection_steps):
            mid = 0.5 * (lo + hi)
            ok = planar_norms(norm, x - sphere_points(norm, theta + mid)) >= epsilon - self.slack
            hi = np.where(ok, mid, hi)
            lo = np.where(ok, lo, mid)
        return hi

    def _depths(self, norm: Norm, theta: np.ndarray, epsilon: float, steps: int):
        phi = self._crossing(norm, theta, epsilon, steps)
        x = sphere_points(norm, theta)
        y = sphere_points(norm, theta + phi)
        return 1.0 - planar_norms(norm, 0.5 * (x + y)), x, y

    def estimate_modulus(self, norm: Norm, epsilon: float, budget: int = 256) -> ModulusEstimate:
        self._validate(norm, epsilon, budget)
        steps = budget + budget % 2
        thetas = self._theta_grid(budget)
        depths, xs, ys = self._depths(norm, thetas, epsilon, steps)
        best = int(np.argmin(depths))
        value, witness = float(depths[best]), (Planar.from_array(xs[best]), Planar.from_array(ys[best]))
        spacing = 2 * math.pi / budget

        def objective(t: float) -> float:
            return float(self._depths(norm, np.array([t]), epsilon, steps)[0][0])

        for i in np.argsort(depths, kind="stable")[: self.n_starts]:
            t, refined = golden_section_search(objective, thetas[i] - spacing, thetas[i] + spacing)
            if refined < value:
                _, x, y = self._depths(norm, np.array([t]), epsilon, steps)
                value, witness = refined, (Planar.from_array(x[0]), Planar.from_array(y[0]))
        value = min(max(value, 0.0), 1.0)
        logging.debug(f"modulus {norm} eps={epsilon}: {value}")
        return ModulusEstimate(value, spacing, witness)

    # ---- directional ----

    def estimate_directional_modulus(self, norm: Norm, z: Planar, epsilon: float,
                                     budget: int = 256) -> ModulusEstimate:
        self._validate(norm, epsilon, budget)
        if not isinstance(z, Planar):
            raise NormMismatchError(norm, z)
        size = norm_eval(norm, z)
        if size == 0.0:
            raise DomainError("direction z must be nonzero")
        z_hat = z.as_array() / size
        thetas = self._theta_grid(budget, closed=True)
        value, witness = math.inf, None
        for sign in (1.0, -1.0):
            shift = sign * epsilon * z_hat

            def excess(t):
                return planar_norms(norm, sphere_points(norm, t) - shift) - 1.0

            k = excess(thetas)
            candidates = [thetas[k <= self.slack]]
            roots = [optimize.brentq(lambda t: float(excess(t)), thetas[i], thetas[i + 1], xtol=1e-15)
                     for i in np.flatnonzero(np.sign(k[:-1]) * np.sign(k[1:]) < 0)]
            candidates.append(np.array(roots, dtype=float))
            angles = np.concatenate(candidates)
            if angles.size == 0:
                continue
            x = sphere_points(norm, angles)
            depths = 1.0 - planar_norms(norm, x - 0.5 * shift)
            best = int(np.argmin(depths))
            if depths[best] < value:
                value = float(depths[best])
                witness = (Planar.from_array(x[best]), Planar.from_array(x[best] - shift))
        if witness is None:
            raise DomainError(f"no chord of length {epsilon} parallel to {z} in the unit ball")
        return ModulusEstimate(min(max(value, 0.0), 1.0), 2 * math.pi / budget, witness)


_DEFAULT_MODULUS = ModulusEstimator()


def estimate_modulus(norm: Norm, epsilon: float, budget: int = 256) -> ModulusEstimate:
    return _DEFAULT_MODULUS.estimate_modulus(norm, epsilon, budget)


def estimate_directional_modulus(norm: Norm, z: Planar, epsilon: float, budget: int = 256) -> ModulusEstimate:
    return _DEFAULT_MODULUS.estimate_directional_modulus(norm, z, epsilon, budget)


def modulus_of_convexity(norm: Norm, epsilon: float, budget: int = 256) -> float:
    return estimate_modulus(norm, epsilon, budget).value


def directional_modulus(norm: Norm, z: Planar, epsilon: float, budget: int = 256) -> float:
    return estimate_directional_modulus(norm, z, epsilon, budget).value


def modulus_curve(norm: Norm, epsilons: Sequence[float], budget: int = 256,
                  direction: Optional[Planar] = None) -> ModulusCurve:
    """
    Modulus samples over increasing ε.

    Each raw value is an upper estimate of a nondecreasing function, so the
    running minimum from the right is still an upper estimate and is monotone.
    """
    epsilons = [float(e) for e in epsilons]
    if direction is None:
        estimates = [estimate_modulus(norm, e, budget) for e in epsilons]
    else:
        estimates = [estimate_directional_modulus(norm, direction, e, budget) for e in epsilons]
    raw = np.array([est.value for est in estimates])
    envelope = np.minimum.accumulate(raw[::-1])[::-1] if len(raw) else raw
    return ModulusCurve(norm, list(zip(epsilons, envelope.tolist())), budget, direction,
                        [est.bound for est in estimates])


def is_uniformly_convex_in_direction(norm: Norm, z: Planar, epsilons: Sequence[float],
                                     budget: int = 256) -> bool:
    """Every sampled ε has a directional modulus above ZERO_TOL"""
    return all(directional_modulus(norm, z, e, budget) > ZERO_TOL for e in epsilons)


# -------------------- UNIFORMLY CONVEX SETS --------------------

@dataclass
class UniformConvexityResult:
    epsilon: float
    eta_estimate: Optional[float]
    counterexample: Optional[Tuple[Planar, Planar]]
    pairs_checked: int
    box: Box

    @property
    def passed(self) -> bool:
        return self.counterexample is None


def _frontier_cloud(r: Region) -> np.ndarray:
    return np.concatenate([curve.evaluate(curve.grid(CLOUD_POINTS)) for curve in r.boundary])


def _coarse_frontier_distances(norm: Norm, points: np.ndarray, cloud: np.ndarray) -> np.ndarray:
    result = np.empty(len(points))
    for start in range(0, len(points), CLOUD_CHUNK):
        chunk = points[start:start + CLOUD_CHUNK]
        result[start:start + CLOUD_CHUNK] = planar_norms(norm, chunk[:, None, :] - cloud[None, :, :]).min(axis=1)
    return result


def check_uniformly_convex_set(norm: Norm, r: Region, epsilons: Sequence[float], pair_budget: int,
                               box: Optional[Box] = None, seed: int = 0) -> Dict[float, UniformConvexityResult]:
    """
    Midpoint depth of ε-separated sampled pairs, restricted to a box.

    A midpoint outside r, or one whose ESCAPE_RADIUS probes leave r, is reported
    as a counterexample (first pair in sample order). Otherwise eta_estimate is the
    smallest frontier distance over the midpoints.
    """
    if not r.boundary:
        raise RegionError(f"unestimable region: '{r.name}' has no boundary curves")
    if any(e <= 0 for e in epsilons):
        raise DomainError("epsilons must be positive")
    box = box or r.bounding_box or DEFAULT_BOX
    size = int(math.ceil((1 + math.sqrt(1 + 8 * pair_budget)) / 2))
    xy = as_xy(r.sample(size, box, seed))
    rows, cols = np.triu_indices(len(xy), 1)
    rows, cols = rows[:pair_budget], cols[:pair_budget]
    gaps = planar_norms(norm, xy[rows] - xy[cols])
    directions = sphere_points(norm, np.arange(8) * math.pi / 4)
    cloud = _frontier_cloud(r)
    estimator = DistanceEstimator(n_starts=3)

    results = {}
    for eps in epsilons:
        keep = np.flatnonzero(gaps >= eps)
        if keep.size == 0:
            logging.warning(f"no sampled pair of {r.name} is {eps}-separated inside {box.as_list()}")
            results[eps] = UniformConvexityResult(eps, None, None, 0, box)
            continue
        mids = 0.5 * (xy[rows[keep]] + xy[cols[keep]])
        probes = mids[:, None, :] + ESCAPE_RADIUS * directions[None, :, :]
        bad = ~r.contains_array(mids) | ~r.contains_array(probes).all(axis=1)
        if bad.any():
            i = keep[np.flatnonzero(bad)[0]]
            pair = (Planar.from_array(xy[rows[i]]), Planar.from_array(xy[cols[i]]))
            logging.info(f"{r.name}: midpoint of {pair} admits no interior ball (eps={eps})")
            results[eps] = UniformConvexityResult(eps, None, pair, len(keep), box)
            continue
        coarse = _coarse_frontier_distances(norm, mids, cloud)
        eta = float(coarse.min())
        for j in np.argsort(coarse, kind="stable")[:REFINE_CANDIDATES]:
            refined = estimator.frontier_distance(norm, Planar.from_array(mids[j]), r, DEFAULT_BUDGET).value
            eta = min(eta, refined)
        results[eps] = UniformConvexityResult(eps, eta, None, len(keep), box)
    return results


# -------------------- φ MACHINERY --------------------

@dataclass(frozen=True)
class PhiFunction:
    """
    φ: A × R⁺ → R⁺ with optional tail metadata.

    tail_limit: analytic value of inf over x of φ as ε → ∞.
    monotone_after: ε beyond which φ is nondecreasing in ε.
    """
    name: str
    evaluator: Callable
    tail_limit: Optional[float] = None
    monotone_after: Optional[float] = None
    description: str = ""

    def __call__(self, x: Point, epsilon):
        if np.any(np.asarray(epsilon) <= 0):
            raise DomainError(f"{self.name} is defined for positive epsilon only")
        return self.evaluator(x, epsilon)


def example39_phi() -> PhiFunction:
    """φ(x, ε) = ε² / (320 + 5ε² + 5‖x‖∞³)"""

    def evaluator(x: Planar, eps):
        size = norm_eval(LINF, x)
        return eps ** 2 / (320.0 + 5.0 * eps ** 2 + 5.0 * size ** 3)

    return PhiFunction("example39", evaluator, tail_limit=0.2, monotone_after=0.0,
                       description="eps^2 / (320 + 5 eps^2 + 5 ||x||^3)")


@dataclass
class PositivePropertyReport:
    inf_estimate: float
    attained_at: Tuple[Planar, float]
    eps_cap: float
    conclusive: bool
    positive: bool
    note: str = ""


def check_positive_property(phi: PhiFunction, r: Region, box: Box, eps0: float,
                            budget: int = DEFAULT_BUDGET, seed: int = 0) -> PositivePropertyReport:
    """Grid estimate of inf{φ(x, ε) : x ∈ r ∩ box, ε ≥ eps0}"""
    if eps0 <= 0:
        raise DomainError(f"eps0 must be positive, got {eps0}")
    try:
        points = r.sample(budget, box, seed)
    except RegionError:
        points = []
    points += [c for c in box.corners() if r.contains(c)]
    if not points:
        raise PreconditionError(f"box {box.as_list()} does not meet {r.name}")

    eps_cap = max(2.0 * box.diameter(), eps0, phi.monotone_after or 0.0)
    grid = np.unique(np.append(np.linspace(eps0, eps_cap, budget), eps0))
    best, attained = math.inf, None
    for p in points:
        values = np.asarray(phi(p, grid), dtype=float) * np.ones_like(grid)
        i = int(np.argmin(values))
        if values[i] < best:
            best, attained = float(values[i]), (p, float(grid[i]))

    conclusive = phi.tail_limit is not None or phi.monotone_after is not None
    note = "" if conclusive else f"inconclusive beyond eps_cap={eps_cap:g}"
    if phi.tail_limit is not None:
        best = min(best, phi.tail_limit)
    if note:
        logging.warning(f"{phi.name}: {note}")
    return PositivePropertyReport(best, attained, eps_cap, conclusive, conclusive and best > 0, note)


@dataclass
class UCAboutPhiResult:
    passed: bool
    counterexample: Optional[Tuple[Planar, Planar]] = None
    violation: Optional[Planar] = None
    pairs_checked: int = 0
    skipped: int = 0


def check_uc_about_phi(norm: Norm, r: Region, phi: PhiFunction, pair_budget: int, probes: int = 16,
                       box: Optional[Box] = None, seed: int = 0) -> UCAboutPhiResult:
    """Checks B((x+y)/2, φ((x+y)/2, ‖x − y‖)) ⊂ r on consecutive sample pairs"""
    points = r.sample(2 * pair_budget, box, seed)
    checked = skipped = 0
    for x, y in zip(points[0::2], points[1::2]):
        if x == y:
            skipped += 1
            continue
        radius = float(phi(midpoint(x, y), metric(norm, x, y)))
        inclusion = midpoint_ball_inclusion(norm, r, x, y, radius, probes)
        checked += 1
        if not inclusion:
            logging.info(f"{r.name} not uniformly convex about {phi.name}: pair {x}, {y}")
            return UCAboutPhiResult(False, (x, y), inclusion.violation, checked, skipped)
    return UCAboutPhiResult(True, None, None, checked, skipped)


def midpoint_in_covering_sets(p1: Planar, p2: Planar, slack: float = 1e-9) -> bool:
    """
    Midpoint of an ℓ∞-separated pair of the hyperbola epigraph lies in C(ε) ∪ D(ε),
    C(ε) = {x ≥ y/(y² − ε²/4), 0 < ε < 2y}, D(ε) = {y ≥ x/(x² − ε²/4), 0 < ε < 2x}.
    """
    eps = metric(LINF, p1, p2)
    m = midpoint(p1, p2)
    in_c = 0 < eps < 2 * m.y and m.x >= m.y / (m.y ** 2 - eps ** 2 / 4) - slack * (1 + abs(m.x))
    in_d = 0 < eps < 2 * m.x and m.y >= m.x / (m.x ** 2 - eps ** 2 / 4) - slack * (1 + abs(m.y))
    return bool(in_c or in_d)

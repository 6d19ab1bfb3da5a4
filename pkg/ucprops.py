"""
UC, UC* and BUC falsification

Features:
- Sequence families (three generators x_n, z_n ∈ A and y_n ∈ B) with a catalog
- Budgeted falsifiers: a verdict is either a witness family with measured limits
  or "no counterexample found within budget", never a proof of the property
- Cauchy-criterion, boundedness and limit-norm harnesses
- Corpus pair catalog with expected verdicts
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy import optimize

from errors import (
    CatalogError, DomainError, HarnessViolation, NormMismatchError, PreconditionError, ProximityError,
)
from geometry import (
    L1, L2, LINF, PRODUCT, Blocks, Norm, Planar, Point, as_xy, metrics, norm_eval, pairwise_metrics,
)
from regions import Ambient, Region, corpus_region, set_distance

# -------------------- CONFIG --------------------
TAIL_FRACTION = 0.25
SEPARATION_FACTOR = 10.0
TRIANGLE_CAP = 400
MIN_N_MAX = 16
RADIUS_SLACK = 1e-12
SCHEMA_VERSION = 1

Generator = Callable[[int], Point]


class PropertyKind(Enum):
    UC = "UC"
    UC_STAR = "UC*"
    BUC = "BUC"

    @classmethod
    def parse(cls, text: str) -> "PropertyKind":
        key = text.strip().upper().replace("STAR", "*")
        for kind in cls:
            if kind.value == key:
                return kind
        raise CatalogError("property", text, [k.value for k in cls])


class Outcome(Enum):
    FALSIFIED = "falsified"
    NO_COUNTEREXAMPLE = "no_counterexample_within_budget"


@dataclass(frozen=True)
class SequenceFamily:
    name: str
    gen_x: Generator
    gen_z: Generator
    gen_y: Generator
    bounded: bool = False
    bound_radius: Optional[float] = None
    description: str = ""


@dataclass
class MeasuredLimits:
    proximity_x: float
    proximity_z: float
    separation_liminf: float
    two_index_separation: Optional[float] = None

    def as_dict(self) -> Dict:
        return {
            "lim_rho_x_y": self.proximity_x,
            "lim_rho_z_y": self.proximity_z,
            "liminf_rho_x_z": self.separation_liminf,
            "sup_rho_xm_zn": self.two_index_separation,
        }


@dataclass
class FalsificationVerdict:
    property: PropertyKind
    outcome: Outcome
    budget_used: int
    pair: Optional[str] = None
    witness: Optional[SequenceFamily] = None
    measured: Optional[MeasuredLimits] = None
    clause: Optional[str] = None
    rejected: List[Tuple[str, str]] = field(default_factory=list)
    families_tried: int = 0

    @property
    def falsified(self) -> bool:
        return self.outcome == Outcome.FALSIFIED

    def describe(self) -> str:
        """One-line summary; a missing counterexample is never reported as the property holding"""
        target = f" on {self.pair}" if self.pair else ""
        if self.falsified:
            m = self.measured
            return (f"{self.property.value}{target}: falsified by family '{self.witness.name}' "
                    f"[{self.clause}] lim rho(x_n,y_n)={m.proximity_x:.6g}, "
                    f"lim rho(z_n,y_n)={m.proximity_z:.6g}, liminf rho(x_n,z_n)={m.separation_liminf:.6g}")
        return (f"{self.property.value}{target}: no counterexample found within budget "
                f"({self.budget_used} index evaluations, {self.families_tried} families, "
                f"{len(self.rejected)} rejected)")

    def to_record(self) -> Dict:
        return {
            "schema": SCHEMA_VERSION,
            "property": self.property.value,
            "pair": self.pair,
            "outcome": self.outcome.value,
            "witness_name": self.witness.name if self.witness else None,
            "measured_limits": self.measured.as_dict() if self.measured else None,
            "budget": self.budget_used,
            "clause": self.clause,
            "rejected": [[name, reason] for name, reason in self.rejected],
        }


# -------------------- TAIL TESTS --------------------

def tail_length(n: int, fraction: float = TAIL_FRACTION) -> int:
    """⌈n·fraction⌉, at least one"""
    return max(int(math.ceil(n * fraction)), 1)


def converges_to(values: np.ndarray, target: float, tol: float, fraction: float = TAIL_FRACTION) -> bool:
    """Last ⌈n·fraction⌉ values within tol of target, oscillating less than tol/2"""
    tail = np.asarray(values, dtype=float)[-tail_length(len(values), fraction):]
    if not np.all(np.isfinite(tail)):
        return False
    return bool(np.max(np.abs(tail - target)) < tol and np.ptp(tail) < tol / 2)


def tail_indices(n_max: int, cap: int = TRIANGLE_CAP, fraction: float = TAIL_FRACTION) -> np.ndarray:
    """Evenly spaced 1-based indices of the tail, at most `cap` of them"""
    start = n_max - tail_length(n_max, fraction) + 1
    return np.unique(np.linspace(start, n_max, min(cap, n_max - start + 1)).round().astype(int))


def suffix_square_sup(matrix: np.ndarray) -> np.ndarray:
    """out[i] = max of matrix[i:, i:]"""
    n = len(matrix)
    out = np.empty(n)
    running = -np.inf
    for i in range(n - 1, -1, -1):
        running = max(running, matrix[i, i:].max(), matrix[i:, i].max())
        out[i] = running
    return out


def _members(region: Region, points: Sequence[Point]) -> np.ndarray:
    """Membership mask, vectorized when every point is planar"""
    if region.ambient == Ambient.PLANAR and all(isinstance(p, Planar) for p in points):
        return region.contains_array(as_xy(points))
    return np.array([region.contains(p) for p in points], dtype=bool)


# -------------------- FALSIFIER --------------------

@dataclass
class _FamilyRun:
    family: SequenceFamily
    evaluated: int
    rejection: Optional[str] = None
    measured: Optional[MeasuredLimits] = None
    clause: Optional[str] = None


class Falsifier:
    """
    Semi-decision search for UC, UC* and BUC counterexamples.

    Every family is generated over n = 1..n_max. A family falsifies UC (or BUC,
    bounded families only) when ρ(x_n, y_n) and ρ(z_n, y_n) both converge to
    dist(A, B) over the tail while ρ(x_n, z_n) stays above separation_factor·tol.
    UC* includes UC, so a UC witness falsifies UC* as well; otherwise UC* is
    tested on the tail index triangle m > n.
    """

    def __init__(self, n_jobs: int = 1):
        self.tail_fraction = TAIL_FRACTION
        self.separation_factor = SEPARATION_FACTOR
        self.triangle_cap = TRIANGLE_CAP
        self.n_jobs = n_jobs

    def falsify(self, prop: PropertyKind, norm: Norm, a: Region, b: Region,
                families: Sequence[SequenceFamily], n_max: int, tol: float,
                dist_ab: Optional[float] = None, pair: Optional[str] = None) -> FalsificationVerdict:
        """First family in catalog order that meets a clause wins; the others only add to the budget"""
        if n_max < MIN_N_MAX:
            raise PreconditionError(f"n_max must be >= {MIN_N_MAX}, got {n_max}")
        if not tol > 0:
            raise PreconditionError(f"tol must be positive, got {tol}")
        if dist_ab is None:
            dist_ab = set_distance(norm, a, b).value
        runs = Parallel(n_jobs=self.n_jobs, prefer="threads")(
            delayed(self._run_family)(prop, norm, a, b, family, n_max, tol, dist_ab) for family in families)

        rejected = [(run.family.name, run.rejection) for run in runs if run.rejection]
        budget = sum(run.evaluated for run in runs)
        for run in runs:
            if run.clause is not None:
                logging.info(f"{prop.value} falsified on {pair or a.name + '/' + b.name} by '{run.family.name}'")
                return FalsificationVerdict(prop, Outcome.FALSIFIED, budget, pair, run.family, run.measured,
                                            run.clause, rejected, len(families))
        return FalsificationVerdict(prop, Outcome.NO_COUNTEREXAMPLE, budget, pair, None, None, None,
                                    rejected, len(families))

    def _run_family(self, prop, norm, a, b, family, n_max, tol, dist_ab) -> _FamilyRun:
        """Generate, validate and measure one family; sets run.clause when it is a witness"""
        if prop == PropertyKind.BUC and not family.bounded:
            logging.info(f"family '{family.name}' rejected for BUC: unbounded")
            return _FamilyRun(family, 0, rejection="unbounded family")
        indices = range(1, n_max + 1)
        # generate and validate
        try:
            xs = [family.gen_x(n) for n in indices]
            zs = [family.gen_z(n) for n in indices]
            ys = [family.gen_y(n) for n in indices]
            if not (_members(a, xs).all() and _members(a, zs).all()):
                return self._reject(family, n_max, "x_n or z_n outside A")
            if not _members(b, ys).all():
                return self._reject(family, n_max, "y_n outside B")
            if family.bounded and family.bound_radius is not None:
                limit = family.bound_radius * (1 + RADIUS_SLACK)
                if max(norm_eval(norm, p) for p in xs + zs) > limit:
                    return self._reject(family, n_max, f"exceeds declared radius {family.bound_radius}")
            prox_x = metrics(norm, xs, ys)
            prox_z = metrics(norm, zs, ys)
            separation = metrics(norm, xs, zs)
        except NormMismatchError as e:
            return self._reject(family, n_max, f"variant mismatch: {e}")
        except ProximityError as e:
            return self._reject(family, n_max, f"generation failed: {e}")

        # uc clause: both proximities converge, separation stays above the floor
        floor = self.separation_factor * tol
        tail = separation[-tail_length(n_max, self.tail_fraction):]
        measured = MeasuredLimits(float(prox_x[-1]), float(prox_z[-1]), float(tail.min()))
        run = _FamilyRun(family, n_max, measured=measured)
        proximal_z = converges_to(prox_z, dist_ab, tol, self.tail_fraction)
        if proximal_z and converges_to(prox_x, dist_ab, tol, self.tail_fraction) and tail.min() >= floor:
            run.clause = "uc"
            return run
        # two-index clause on the tail triangle
        if prop == PropertyKind.UC_STAR and proximal_z:
            idx = tail_indices(n_max, self.triangle_cap, self.tail_fraction) - 1
            lower = np.tril(np.ones((len(idx), len(idx)), dtype=bool), k=-1)  # row m > column n
            near = pairwise_metrics(norm, [xs[i] for i in idx], [ys[i] for i in idx])[lower]
            apart = pairwise_metrics(norm, [xs[i] for i in idx], [zs[i] for i in idx])
            half = len(idx) // 2
            late = apart[half:, half:][lower[half:, half:]]
            measured.two_index_separation = float(apart[lower].max()) if lower.any() else 0.0
            if near.size and near.max() <= dist_ab + tol and late.size and late.max() >= floor:
                run.clause = "two_index"
        return run

    @staticmethod
    def _reject(family: SequenceFamily, evaluated: int, reason: str) -> _FamilyRun:
        logging.info(f"family '{family.name}' rejected: {reason}")
        return _FamilyRun(family, evaluated, rejection=reason)


_DEFAULT_FALSIFIER = Falsifier()


def uc_falsify(norm: Norm, a: Region, b: Region, families: Sequence[SequenceFamily], n_max: int, tol: float,
               dist_ab: Optional[float] = None, pair: Optional[str] = None) -> FalsificationVerdict:
    return _DEFAULT_FALSIFIER.falsify(PropertyKind.UC, norm, a, b, families, n_max, tol, dist_ab, pair)


def buc_falsify(norm: Norm, a: Region, b: Region, families: Sequence[SequenceFamily], n_max: int, tol: float,
                dist_ab: Optional[float] = None, pair: Optional[str] = None) -> FalsificationVerdict:
    return _DEFAULT_FALSIFIER.falsify(PropertyKind.BUC, norm, a, b, families, n_max, tol, dist_ab, pair)


def ucstar_falsify(norm: Norm, a: Region, b: Region, families: Sequence[SequenceFamily], n_max: int, tol: float,
                   dist_ab: Optional[float] = None, pair: Optional[str] = None) -> FalsificationVerdict:
    return _DEFAULT_FALSIFIER.falsify(PropertyKind.UC_STAR, norm, a, b, families, n_max, tol, dist_ab, pair)


def falsify(prop: PropertyKind, *args, **kwargs) -> FalsificationVerdict:
    return _DEFAULT_FALSIFIER.falsify(prop, *args, **kwargs)


# -------------------- HARNESSES --------------------

class CauchyReport(NamedTuple):
    premise_holds: bool
    is_cauchy: bool


def cauchy_criterion_check(norm: Norm, a: Region, b: Region, gen_x: Generator, gen_y: Generator,
                           n_max: int, tol: float, dist_ab: Optional[float] = None,
                           uc_outcome: Optional[Outcome] = None) -> CauchyReport:
    """
    Premise: lim_m sup_{n ≥ m} ρ(x_m, y_n) = dist(A, B) on the tail triangle.
    Conclusion: the tail of {x_n} oscillates less than tol.
    For a pair without a UC counterexample the premise must imply the conclusion.
    """
    idx = tail_indices(n_max)
    xs = [gen_x(int(n)) for n in idx]
    ys = [gen_y(int(n)) for n in idx]
    if not (_members(a, xs).all() and _members(b, ys).all()):
        raise PreconditionError("cauchy check: generated points leave their regions")
    if dist_ab is None:
        dist_ab = set_distance(norm, a, b).value
    upper = np.triu(np.ones((len(idx), len(idx)), dtype=bool))
    cross = np.where(upper, pairwise_metrics(norm, xs, ys), -np.inf)
    premise = bool(np.max(np.abs(cross.max(axis=1) - dist_ab)) < tol)
    is_cauchy = bool(pairwise_metrics(norm, xs, xs).max() < tol)
    if uc_outcome == Outcome.NO_COUNTEREXAMPLE and premise and not is_cauchy:
        raise HarnessViolation("premise of the Cauchy criterion holds but {x_n} is not Cauchy")
    if premise and not is_cauchy:
        logging.info("Cauchy premise holds without Cauchy tail (pair carries no UC verdict)")
    return CauchyReport(premise, is_cauchy)


@dataclass
class BoundednessReport:
    a_finite: bool
    b_finite: bool
    all_bounded: bool


def boundedness_harness(norm: Norm, gen_x: Generator, gen_z: Generator, gen_y: Generator,
                        n_max: int, tol: float = 1e-3) -> BoundednessReport:
    """
    Condition (3): ρ(x_n, y_n) has a finite limit a.
    Condition (4): sup over k, m > n of ρ(z_m, y_k) has a finite limit b.
    Both together force all three sequences to be bounded.
    """
    if n_max < 1:
        raise DomainError(f"n_max must be positive, got {n_max}")
    indices = range(1, n_max + 1)
    xs = [gen_x(n) for n in indices]
    zs = [gen_z(n) for n in indices]
    ys = [gen_y(n) for n in indices]

    prox = metrics(norm, xs, ys)
    tail = prox[-tail_length(n_max):]
    a_finite = bool(np.all(np.isfinite(tail)) and np.ptp(tail) < tol)

    idx = tail_indices(n_max) - 1
    sups = suffix_square_sup(pairwise_metrics(norm, [zs[i] for i in idx], [ys[i] for i in idx]))
    # sup over k, m > n: drop the first row and the lone corner once there are enough
    if sups.size > 2:
        sups = sups[1:-1]
    b_finite = bool(np.all(np.isfinite(sups)) and np.ptp(sups) < tol)

    sizes = np.array([max(norm_eval(norm, x), norm_eval(norm, z), norm_eval(norm, y))
                      for x, z, y in zip(xs, zs, ys)])
    early = sizes[: max(1, n_max // 2)].max()
    all_bounded = bool(np.all(np.isfinite(sizes)) and sizes.max() <= early + tol * (1 + early))
    if a_finite and b_finite and not all_bounded:
        raise HarnessViolation("limits (3) and (4) are finite but the sequences grow")
    return BoundednessReport(a_finite, b_finite, all_bounded)


def limit_norm_harness(norm: Norm, gen_x: Generator, gen_y: Generator, a: float, b: float,
                       n_max: int, tol: float = 1e-2) -> bool:
    """‖x_n‖ ≤ a, ‖y_n‖ ≤ b and ‖x_n + y_n‖ → a + b imply ‖x_n‖ → a and ‖y_n‖ → b"""
    indices = range(1, n_max + 1)
    xs = [gen_x(n) for n in indices]
    ys = [gen_y(n) for n in indices]
    size_x = np.array([norm_eval(norm, p) for p in xs])
    size_y = np.array([norm_eval(norm, p) for p in ys])
    size_sum = np.array([norm_eval(norm, p + q) for p, q in zip(xs, ys)])
    slack = RADIUS_SLACK * (1 + max(a, b))
    if size_x.max() > a + slack or size_y.max() > b + slack or not converges_to(size_sum, a + b, tol):
        logging.info("limit-norm harness: premise fails, no assertion")
        return False
    if not (converges_to(size_x, a, tol) and converges_to(size_y, b, tol)):
        raise HarnessViolation(f"norms do not converge to {a} and {b} although the sum norm does")
    return True


# -------------------- FAMILIES --------------------

def lemma_witness_family(norm: Norm, gen_x: Generator, gen_z: Generator, name: str,
                         bound_radius: float = 1.0) -> SequenceFamily:
    """y_n = 2(x_n + z_n)/‖x_n + z_n‖ for x_n, z_n in the unit ball"""

    def gen_y(n: int) -> Point:
        s = gen_x(n) + gen_z(n)
        return s * (2.0 / norm_eval(norm, s))

    return SequenceFamily(name, gen_x, gen_z, gen_y, True, bound_radius,
                          "y_n = 2 (x_n + z_n) / ||x_n + z_n||")


def center_ray_family(norm: Norm, p: Planar, gen_w: Generator, name: str = "center_ray") -> SequenceFamily:
    """
    x_n = s_n p̂ + w_n, z_n = s_n p̂ − w_n, y_n = p, with s_n the largest scale
    keeping both in the unit ball, so x_n + z_n = |λ_n| p.
    """
    p_hat = p * (1.0 / norm_eval(norm, p))

    @lru_cache(maxsize=None)
    def scale(n: int) -> float:
        w = gen_w(n)

        def excess(s: float) -> float:
            return max(norm_eval(norm, p_hat * s + w), norm_eval(norm, p_hat * s - w)) - 1.0

        if excess(0.0) > 0:
            raise PreconditionError(f"offset w_{n} leaves the unit ball")
        return optimize.brentq(excess, 0.0, 2.0 + norm_eval(norm, w), xtol=1e-15)

    return SequenceFamily(
        name,
        lambda n: p_hat * scale(n) + gen_w(n),
        lambda n: p_hat * scale(n) - gen_w(n),
        lambda n: p,
        True, 1.0, "x_n + z_n on the ray through p, y_n = p")


def _example50_block(n: int, sign: float) -> Blocks:
    """Block n+1 holding (r, sign·r) with r = 2^(−1/(n+1)), a unit vector of ℓ_(n+1)"""
    r = 2.0 ** (-1.0 / (n + 1))
    return Blocks.single(n + 1, (r, sign * r))


FAMILY_CATALOG: Dict[str, Callable[[], SequenceFamily]] = {
    "example43": lambda: SequenceFamily(
        "example43",
        lambda n: Planar(n, 1.0 / n),
        lambda n: Planar(n + 1, 1.0 / (n + 1)),
        lambda n: Planar(n, 1.0 / (n + 1) - 1.0),
        False, None, "a_n = (n, 1/n), b_n = (n+1, 1/(n+1)), c_n = (n, 1/(n+1) - 1)"),
    "example50": lambda: SequenceFamily(
        "example50",
        lambda n: _example50_block(n, 1.0),
        lambda n: _example50_block(n, -1.0),
        lambda n: Blocks.single(n + 1, (2.0, 0.0)),
        True, 1.0, "single block n+1: (r, r), (r, -r), (2, 0) with r = 2^(-1/(n+1))"),
    "ex15_ab": lambda: SequenceFamily(
        "ex15_ab",
        lambda n: Planar(1.0 - 1.0 / (n + 1), 0.0),
        lambda n: Planar(1.0, 0.0),
        lambda n: Planar(2.0, 0.0),
        True, 2.0, "x_n -> (1,0) along the axis, z_n = (1,0), y_n = (2,0)"),
    "ex15_bc": lambda: SequenceFamily(
        "ex15_bc",
        lambda n: Planar(4.0, 0.5),
        lambda n: Planar(4.0, -0.5),
        lambda n: Planar(5.0 + 1.0 / n, 0.0),
        True, 5.0, "x_n = (4, 1/2), z_n = (4, -1/2), y_n -> (5, 0)"),
    "ex16_ab": lambda: SequenceFamily(
        "ex16_ab",
        lambda n: Planar(1.0 - 1.0 / (n + 1), 0.0),
        lambda n: Planar(1.0, 0.0),
        lambda n: Planar(2.0, 0.0),
        True, 1.0, "tips of A and B"),
    "ex16_bc": lambda: SequenceFamily(
        "ex16_bc",
        lambda n: Planar(3.0 - 1.0 / (n + 1), 0.0),
        lambda n: Planar(3.0, 0.0),
        lambda n: Planar(4.0, 0.0),
        True, 3.0, "tips of B and C"),
    "example28": lambda: SequenceFamily(
        "example28",
        lambda n: Planar(1.0 / n, n),
        lambda n: Planar(1.0 / (n + 1), n + 1),
        lambda n: Planar(-1.0 / n, n),
        False, None, "mirror points on the two hyperbola branches"),
    "lem5_l2": lambda: lemma_witness_family(
        L2, lambda n: Planar(math.cos(1.0 / n), math.sin(1.0 / n)),
        lambda n: Planar(math.cos(1.0 / n), -math.sin(1.0 / n)), "lem5_l2"),
    "lem5_linf": lambda: lemma_witness_family(
        LINF, lambda n: Planar(1.0, 0.5), lambda n: Planar(1.0, -0.5), "lem5_linf"),
    "center_ray_l2": lambda: center_ray_family(L2, Planar(2.0, 0.0), lambda n: Planar(0.0, 0.5 / n), "center_ray_l2"),
    "constant_ex43": lambda: SequenceFamily(
        "constant_ex43",
        lambda n: Planar(1.0, 1.0),
        lambda n: Planar(1.0, 1.0),
        lambda n: Planar(0.0, 0.0),
        True, 2.0, "proximal pair (1,1), (0,0)"),
}


@lru_cache(maxsize=None)
def corpus_family(name: str) -> SequenceFamily:
    """Catalog family by name, built once"""
    try:
        return FAMILY_CATALOG[name]()
    except KeyError:
        raise CatalogError("family", name, FAMILY_CATALOG) from None


# -------------------- PAIR CATALOG --------------------

NC = Outcome.NO_COUNTEREXAMPLE
F = Outcome.FALSIFIED


@dataclass(frozen=True)
class CorpusPair:
    """Region pair under a norm with its families, budgets and expected verdict per property"""
    name: str
    norm: Norm
    a_name: str
    b_name: str
    dist_ab: float
    families: Tuple[str, ...]
    expected: Dict[PropertyKind, Outcome]
    n_max: int = 2000
    tol: float = 1e-3
    note: str = ""
    source_claim: Optional[str] = None

    @property
    def a(self) -> Region:
        return corpus_region(self.a_name)

    @property
    def b(self) -> Region:
        return corpus_region(self.b_name)

    def family_list(self) -> List[SequenceFamily]:
        return [corpus_family(name) for name in self.families]

    def falsify(self, prop: PropertyKind, n_max: Optional[int] = None, tol: Optional[float] = None,
                falsifier: Optional[Falsifier] = None) -> FalsificationVerdict:
        """Run the falsifier on this pair's families; unset budgets fall back to the pair's own"""
        n_max = self.n_max if n_max is None else n_max
        tol = self.tol if tol is None else tol
        if n_max <= 0:
            raise DomainError(f"{self.name}: n_max must be positive, got {n_max}")
        if not tol > 0:
            raise DomainError(f"{self.name}: tol must be positive, got {tol}")
        falsifier = falsifier or _DEFAULT_FALSIFIER
        return falsifier.falsify(prop, self.norm, self.a, self.b, self.family_list(),
                                 n_max, tol, self.dist_ab, self.name)


def _expect(uc: Outcome, buc: Outcome, ucstar: Outcome) -> Dict[PropertyKind, Outcome]:
    return {PropertyKind.UC: uc, PropertyKind.BUC: buc, PropertyKind.UC_STAR: ucstar}


PAIR_CATALOG: Dict[str, CorpusPair] = {pair.name: pair for pair in [
    CorpusPair("ex15_ab", L1, "ex15_A", "ex15_B", 1.0, ("ex15_ab",), _expect(NC, NC, NC),
               note="unique l1-proximal points (1,0) and (2,0)"),
    CorpusPair("ex15_bc", LINF, "ex15_B", "ex15_C", 1.0, ("ex15_bc",), _expect(F, F, F),
               note="l-infinity proximal points are free in y"),
    CorpusPair("ex15_bc_l2", L2, "ex15_B", "ex15_C", 1.0, ("ex15_bc",), _expect(NC, NC, NC),
               note="the l-infinity witness is not proximal under l2"),
    CorpusPair("ex16_ab", LINF, "ex16_A", "ex16_B", 1.0, ("ex16_ab",), _expect(NC, NC, NC)),
    CorpusPair("ex16_bc", LINF, "ex16_B", "ex16_C", 1.0, ("ex16_bc",), _expect(NC, NC, NC)),
    CorpusPair("ex28_l2", L2, "ex28_A", "ex28_B", 0.0, ("example28",), _expect(NC, NC, NC),
               note="both branches accumulate at the y-axis, dist = 0"),
    CorpusPair("ex28_linf", LINF, "ex28_A", "ex28_B", 0.0, ("example28",), _expect(NC, NC, NC),
               note="dist = 0, so no UC counterexample can exist", source_claim="not UC"),
    CorpusPair("ex43", LINF, "ex43_A", "ex43_B", 1.0, ("example43", "constant_ex43"), _expect(F, NC, F),
               n_max=10000, note="BUC but not UC"),
    CorpusPair("ex49", LINF, "ex49_A", "ex49_B", 1.0, ("example43", "constant_ex43"), _expect(F, NC, F),
               n_max=10000, note="BUC but not UC"),
    CorpusPair("unit_ball_l2", L2, "unit_ball_l2", "shell_l2", 1.0, ("lem5_l2", "center_ray_l2"), _expect(NC, NC, NC),
               note="offsets around the ray through (2,0) shrink, so no separation survives"),
    CorpusPair("unit_ball_linf", LINF, "unit_ball_linf", "shell_linf", 1.0, ("lem5_linf",), _expect(F, F, F)),
    CorpusPair("unit_ball_product", PRODUCT, "unit_ball_product", "shell_product", 1.0, ("example50",),
               _expect(F, F, F), n_max=200, tol=1e-2, note="not BUC, not UC"),
]}


def corpus_pair(name: str) -> CorpusPair:
    """Catalog pair by name"""
    try:
        return PAIR_CATALOG[name]
    except KeyError:
        raise CatalogError("pair", name, PAIR_CATALOG) from None

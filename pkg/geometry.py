"""
Points, norms and metrics for the proximity toolkit

Features:
- Planar points and sparse block sequences (the ℓ2-sum of the planes (R², ℓn), n ≥ 2)
- ℓ1, ℓ2, ℓ∞, integer ℓp and the product norm
- Vectorized planar norm kernels shared by the estimators
- JSON encoding of points for traces and verdicts
"""

import math
import operator
from dataclasses import dataclass
from enum import Enum
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from errors import DomainError, NormMismatchError

# -------------------- CONFIG --------------------
LOG_POWER_THRESHOLD = 16  # ℓp powers above this exponent go through logsumexp


class NormKind(Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"
    LP = "lp"
    PRODUCT = "product"


@dataclass(frozen=True)
class Norm:
    """Evaluatable norm tag"""
    kind: NormKind
    p: Optional[int] = None

    def __post_init__(self):
        if self.kind == NormKind.LP:
            if self.p is None or int(self.p) != self.p or self.p < 2:
                raise DomainError(f"lp norm needs an integer p >= 2, got {self.p}")
            object.__setattr__(self, "p", int(self.p))
        elif self.p is not None:
            raise DomainError(f"{self.kind.value} norm takes no exponent")

    @property
    def label(self) -> str:
        """Short name used on the command line and in file names"""
        if self.kind == NormKind.LP:
            return f"l{self.p}"
        return self.kind.value

    @property
    def is_planar(self) -> bool:
        return self.kind != NormKind.PRODUCT

    @classmethod
    def parse(cls, text: str) -> "Norm":
        """l1, l2, linf, product, l<p> or lp<p>; l1 and l2 keep their fast paths"""
        key = text.strip().lower()
        for known in (L1, L2, LINF, PRODUCT):
            if key == known.label:
                return known
        digits = key[2:] if key.startswith("lp") else key[1:] if key.startswith("l") else ""
        if digits.isdigit():
            p = int(digits)
            if p == 1:
                return L1
            if p == 2:
                return L2
            return cls(NormKind.LP, p)
        raise DomainError(f"unknown norm '{text}' (expected l1, l2, linf, l<p> or product)")

    def __str__(self) -> str:
        return self.label


L1 = Norm(NormKind.L1)
L2 = Norm(NormKind.L2)
LINF = Norm(NormKind.LINF)
PRODUCT = Norm(NormKind.PRODUCT)


def lp(p: int) -> Norm:
    """Integer ℓp norm, p ≥ 2"""
    return Norm(NormKind.LP, p)


@dataclass(frozen=True)
class Planar:
    """Point of the plane; hashable so maps can memoize on it"""
    x: float
    y: float

    __array_ufunc__ = None  # numpy scalars defer to __rmul__

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))

    def __add__(self, other):
        if not isinstance(other, Planar):
            return NotImplemented
        return Planar(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        if not isinstance(other, Planar):
            return NotImplemented
        return Planar(self.x - other.x, self.y - other.y)

    def __mul__(self, scalar):
        if isinstance(scalar, (Planar, Blocks)):
            return NotImplemented
        return Planar(scalar * self.x, scalar * self.y)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Planar(self.x / scalar, self.y / scalar)

    def __neg__(self):
        return Planar(-self.x, -self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @classmethod
    def from_array(cls, values) -> "Planar":
        return cls(values[0], values[1])

    def __repr__(self) -> str:
        return f"Planar({self.x!r}, {self.y!r})"


BlockEntry = Tuple[int, Tuple[float, float]]


@dataclass(frozen=True)
class Blocks:
    """Sparse element of the block product space; the empty tuple is zero"""
    entries: Tuple[BlockEntry, ...] = ()

    __array_ufunc__ = None

    def __post_init__(self):
        cleaned = tuple((int(k), (float(pair[0]), float(pair[1]))) for k, pair in self.entries)
        indices = [k for k, _ in cleaned]
        if any(k < 2 for k in indices):
            raise DomainError(f"block indices start at 2, got {indices}")
        if any(right <= left for left, right in zip(indices, indices[1:])):
            raise DomainError(f"block indices must be strictly increasing, got {indices}")
        object.__setattr__(self, "entries", cleaned)

    @classmethod
    def single(cls, index: int, pair: Tuple[float, float]) -> "Blocks":
        """Sequence with one nonzero block at `index`"""
        return cls(((index, pair),))

    def as_dict(self):
        return dict(self.entries)

    def _combine(self, other, op) -> "Blocks":
        """Blockwise op over the union of indices; blocks that cancel are dropped"""
        left, right = self.as_dict(), other.as_dict()
        merged = []
        for k in sorted(set(left) | set(right)):
            a = left.get(k, (0.0, 0.0))
            b = right.get(k, (0.0, 0.0))
            pair = (op(a[0], b[0]), op(a[1], b[1]))
            if pair != (0.0, 0.0):
                merged.append((k, pair))
        return Blocks(tuple(merged))

    def __add__(self, other):
        if not isinstance(other, Blocks):
            return NotImplemented
        return self._combine(other, operator.add)

    def __sub__(self, other):
        if not isinstance(other, Blocks):
            return NotImplemented
        return self._combine(other, operator.sub)

    def __mul__(self, scalar):
        if isinstance(scalar, (Planar, Blocks)):
            return NotImplemented
        scaled = ((k, (scalar * a, scalar * b)) for k, (a, b) in self.entries)
        return Blocks(tuple(e for e in scaled if e[1] != (0.0, 0.0)))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __neg__(self):
        return self * -1.0


Point = Union[Planar, Blocks]
PairPoint = Tuple[Point, Point]


def midpoint(p: Point, q: Point) -> Point:
    return (p + q) * 0.5


# -------------------- NORM KERNELS --------------------

def lp_norms(values: np.ndarray, p: int) -> np.ndarray:
    """ℓp norm along the last axis"""
    magnitudes = np.abs(np.asarray(values, dtype=float))
    if p <= LOG_POWER_THRESHOLD:
        return np.sum(magnitudes ** p, axis=-1) ** (1.0 / p)
    with np.errstate(divide="ignore"):
        logs = special.logsumexp(p * np.log(magnitudes), axis=-1)
    return np.exp(logs / p)


def planar_norms(norm: Norm, xy) -> np.ndarray:
    """Norm of every planar vector stored along the last axis of xy"""
    xy = np.asarray(xy, dtype=float)
    if norm.kind == NormKind.L1:
        return np.abs(xy).sum(axis=-1)
    if norm.kind == NormKind.L2:
        return np.hypot(xy[..., 0], xy[..., 1])
    if norm.kind == NormKind.LINF:
        return np.abs(xy).max(axis=-1)
    if norm.kind == NormKind.LP:
        return lp_norms(xy, norm.p)
    raise NormMismatchError(norm, xy)


def planar_norm_xy(norm: Norm, dx: float, dy: float) -> float:
    """Scalar fast path of planar_norms"""
    if norm.kind == NormKind.L1:
        return abs(dx) + abs(dy)
    if norm.kind == NormKind.L2:
        return math.hypot(dx, dy)
    if norm.kind == NormKind.LINF:
        return max(abs(dx), abs(dy))
    if norm.kind == NormKind.LP:
        return float(lp_norms(np.array([dx, dy]), norm.p))
    raise NormMismatchError(norm, (dx, dy))


def sphere_points(norm: Norm, theta) -> np.ndarray:
    """Unit-sphere points u/‖u‖ with u = (cos θ, sin θ)"""
    theta = np.asarray(theta, dtype=float)
    u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return u / planar_norms(norm, u)[..., None]


def norm_eval(norm: Norm, p: Point) -> float:
    """‖p‖ for one point; the product norm is the ℓ2 sum of the block ℓk norms"""
    if isinstance(p, Planar):
        if not norm.is_planar:
            raise NormMismatchError(norm, p)
        return planar_norm_xy(norm, p.x, p.y)
    if isinstance(p, Blocks):
        if norm.kind != NormKind.PRODUCT:
            raise NormMismatchError(norm, p)
        total = 0.0
        for k, pair in p.entries:
            # block k carries the ℓk norm
            total += float(lp_norms(np.array(pair), k)) ** 2
        return math.sqrt(total)
    raise NormMismatchError(norm, p)


def metric(norm: Norm, p: Point, q: Point) -> float:
    """ρ(p, q) = ‖p − q‖"""
    if type(p) is not type(q):
        raise NormMismatchError(norm, q)
    if isinstance(p, Planar):
        if not norm.is_planar:
            raise NormMismatchError(norm, p)
        return planar_norm_xy(norm, p.x - q.x, p.y - q.y)
    return norm_eval(norm, p - q)


def sum_metric(norm: Norm, pair1: PairPoint, pair2: PairPoint) -> float:
    """d((x, y), (u, v)) = ρ(x, u) + ρ(y, v) on the product A × A ∪ B × B"""
    (x, y), (u, v) = pair1, pair2
    return metric(norm, x, u) + metric(norm, y, v)


def metrics(norm: Norm, ps: Sequence[Point], qs: Sequence[Point]) -> np.ndarray:
    """Elementwise ρ(ps[i], qs[i]); vectorized for planar points"""
    if len(ps) != len(qs):
        raise ValueError("metrics needs sequences of equal length")
    if not ps:
        return np.zeros(0)
    if norm.is_planar and all(isinstance(p, Planar) for p in ps) and all(isinstance(q, Planar) for q in qs):
        return planar_norms(norm, as_xy(ps) - as_xy(qs))
    return np.array([metric(norm, p, q) for p, q in zip(ps, qs)])


def pairwise_metrics(norm: Norm, ps: Sequence[Point], qs: Sequence[Point]) -> np.ndarray:
    """Matrix ρ(ps[i], qs[j]); vectorized for planar points"""
    if norm.is_planar and all(isinstance(p, Planar) for p in ps) and all(isinstance(q, Planar) for q in qs):
        return planar_norms(norm, as_xy(ps)[:, None, :] - as_xy(qs)[None, :, :])
    return np.array([[metric(norm, p, q) for q in qs] for p in ps]).reshape(len(ps), len(qs))


def open_ball_contains(norm: Norm, center: Point, radius: float, p: Point) -> bool:
    """Membership in the open ball B(center, radius)"""
    return metric(norm, center, p) < radius


def as_xy(points: Sequence[Planar]) -> np.ndarray:
    """(n, 2) coordinate array"""
    return np.array([[p.x, p.y] for p in points], dtype=float).reshape(-1, 2)


def from_xy(xy: np.ndarray) -> List[Planar]:
    return [Planar(row[0], row[1]) for row in np.asarray(xy).reshape(-1, 2)]


# -------------------- SERIALIZATION --------------------

def encode_point(p: Any):
    """JSON form: [x, y], {"blocks": [[k, [a, b]], ...]} or a two-element list for pairs"""
    if isinstance(p, Planar):
        return [p.x, p.y]
    if isinstance(p, Blocks):
        return {"blocks": [[k, [a, b]] for k, (a, b) in p.entries]}
    if isinstance(p, tuple) and len(p) == 2:
        return [encode_point(p[0]), encode_point(p[1])]
    raise TypeError(f"cannot encode {p!r}")


def decode_point(obj: Any):
    """Inverse of encode_point"""
    if isinstance(obj, dict):
        return Blocks(tuple((k, (pair[0], pair[1])) for k, pair in obj["blocks"]))
    if isinstance(obj, list) and len(obj) == 2:
        if all(isinstance(v, (int, float)) for v in obj):
            return Planar(obj[0], obj[1])
        return (decode_point(obj[0]), decode_point(obj[1]))
    raise TypeError(f"cannot decode {obj!r}")

# SPDX-License-Identifier: BSD-3-Clause

"""Computable representations of a lower-level solution map x ↦ S(x).

Each descriptor knows how to project onto S(x), how far apart S(x1) and S(x2) are in
the Hausdorff sense, how to draw points that lie exactly in S(x), and how to lay S(x)
out along a parameter so the inner solver can search it.
"""

import logging
from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from hyperstat.errors import NoOracle


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Segment:
    """The points origin + t·direction for t in [lo, hi]; direction has unit length.

    `truncated` marks a segment cut out of an unbounded line at ±bound.
    """

    origin: np.ndarray
    direction: np.ndarray
    lo: float
    hi: float
    truncated: bool = False

    def point(self, t: float) -> np.ndarray:
        return self.origin + t * self.direction

    def parameter(self, y: np.ndarray) -> float:
        return float(np.dot(np.asarray(y, dtype=float) - self.origin, self.direction))


@dataclass(frozen=True, eq=False)
class PointSet:
    points: np.ndarray


@dataclass(frozen=True)
class FixedInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"Empty interval [{self.lo}, {self.hi}]")


def nearest_point(points: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Nearest of `points` (k×n) to `y`; equidistant ties go to the lexicographically
    smallest candidate."""
    dists = np.linalg.norm(points - y, axis=1)
    tied = points[np.isclose(dists, dists.min(), rtol=1e-12, atol=0.0)]
    # np.lexsort sorts by the last key first
    order = np.lexsort(tied.T[::-1])
    return tied[order[0]].copy()


class SetMapDescriptor(ABC):
    """x ↦ S(x) with exact projection and exact Hausdorff distance."""

    n: int

    @abstractmethod
    def project(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def hausdorff(self, x1: np.ndarray, x2: np.ndarray) -> float:
        ...

    @abstractmethod
    def anchor(self, x: np.ndarray) -> np.ndarray:
        """A reference point of S(x) that samples are drawn around."""

    @abstractmethod
    def sample(self, x: np.ndarray, rng: np.random.Generator, radius: float) -> np.ndarray:
        ...

    @abstractmethod
    def parametrize(self, x: np.ndarray, bound: float) -> Segment | PointSet:
        """Lay S(x) out for a one-dimensional search; unbounded sets are cut at ±bound."""

    def distance(self, x: np.ndarray, y: np.ndarray) -> float:
        y = np.asarray(y, dtype=float)
        return float(np.linalg.norm(y - self.project(x, y)))

    def contains(self, x: np.ndarray, y: np.ndarray, tol: float = 1e-9) -> bool:
        return self.distance(x, y) <= tol


@dataclass(frozen=True, eq=False)
class AffineHyperplane(SetMapDescriptor):
    """{y : normal·y = offset_fn(x)}"""

    normal: np.ndarray
    offset_fn: Callable[[np.ndarray], float]

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(normal) - 1.0) > 1e-12:
            raise ValueError(f"Hyperplane normal {normal} does not have unit length")
        object.__setattr__(self, "normal", normal)

    @property
    def n(self) -> int:
        return self.normal.size

    def offset(self, x: np.ndarray) -> float:
        return float(self.offset_fn(np.asarray(x, dtype=float)))

    def project(self, x, y):
        y = np.asarray(y, dtype=float)
        return y - (np.dot(self.normal, y) - self.offset(x)) * self.normal

    def hausdorff(self, x1, x2):
        return abs(self.offset(x1) - self.offset(x2))

    def anchor(self, x):
        return self.offset(x) * self.normal

    def sample(self, x, rng, radius):
        base = self.anchor(x)
        if self.n == 1:
            return base
        g = rng.standard_normal(self.n)
        g -= np.dot(g, self.normal) * self.normal
        norm = np.linalg.norm(g)
        if norm == 0.0:
            return base
        return base + rng.uniform(-radius, radius) * g / norm

    def parametrize(self, x, bound):
        if self.n == 1:
            return PointSet(self.anchor(x)[None, :])
        if self.n != 2:
            raise NoOracle("Only lines (n = 2) can be searched along a single parameter")
        direction = np.array([-self.normal[1], self.normal[0]])
        return Segment(self.anchor(x), direction, -bound, bound, truncated=True)


@dataclass(frozen=True, eq=False)
class Interval(SetMapDescriptor):
    """[lo_fn(x), hi_fn(x)] in a one-dimensional y-space."""

    lo_fn: Callable[[np.ndarray], float]
    hi_fn: Callable[[np.ndarray], float]
    n: int = field(default=1, init=False)

    def ends(self, x) -> tuple[float, float]:
        x = np.asarray(x, dtype=float)
        return float(self.lo_fn(x)), float(self.hi_fn(x))

    def project(self, x, y):
        lo, hi = self.ends(x)
        return np.clip(np.asarray(y, dtype=float), lo, hi)

    def hausdorff(self, x1, x2):
        lo1, hi1 = self.ends(x1)
        lo2, hi2 = self.ends(x2)
        return max(abs(lo1 - lo2), abs(hi1 - hi2))

    def anchor(self, x):
        lo, hi = self.ends(x)
        return np.array([0.5 * (lo + hi)])

    def sample(self, x, rng, radius):
        lo, hi = self.ends(x)
        mid = 0.5 * (lo + hi)
        return np.array([rng.uniform(max(lo, mid - radius), min(hi, mid + radius))])

    def parametrize(self, x, bound):
        lo, hi = self.ends(x)
        return Segment(np.zeros(1), np.ones(1), lo, hi)


@dataclass(frozen=True, eq=False)
class TranslatedSet(SetMapDescriptor):
    """base − shift_fn(x), for a fixed interval or finite point list `base`."""

    base: FixedInterval | np.ndarray
    shift_fn: Callable[[np.ndarray], float | np.ndarray]

    def __post_init__(self):
        if not isinstance(self.base, FixedInterval):
            points = np.atleast_2d(np.asarray(self.base, dtype=float))
            object.__setattr__(self, "base", points)

    @property
    def n(self) -> int:
        return 1 if isinstance(self.base, FixedInterval) else self.base.shape[1]

    def shift(self, x) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.shift_fn(np.asarray(x, dtype=float)), dtype=float))

    def project(self, x, y):
        s = self.shift(x)
        y = np.asarray(y, dtype=float)
        if isinstance(self.base, FixedInterval):
            return np.clip(y + s, self.base.lo, self.base.hi) - s
        return nearest_point(self.base - s, y)

    def hausdorff(self, x1, x2):
        # Exact for translates of one compact set
        return float(np.linalg.norm(self.shift(x1) - self.shift(x2)))

    def anchor(self, x):
        s = self.shift(x)
        if isinstance(self.base, FixedInterval):
            return np.array([0.5 * (self.base.lo + self.base.hi)]) - s
        return self.base[0] - s

    def sample(self, x, rng, radius):
        s = self.shift(x)
        if isinstance(self.base, FixedInterval):
            mid = 0.5 * (self.base.lo + self.base.hi)
            v = rng.uniform(max(self.base.lo, mid - radius), min(self.base.hi, mid + radius))
            return np.array([v]) - s
        return self.base[rng.integers(len(self.base))] - s

    def parametrize(self, x, bound):
        s = self.shift(x)
        if isinstance(self.base, FixedInterval):
            return Segment(np.zeros(1), np.ones(1), self.base.lo - s[0], self.base.hi - s[0])
        return PointSet(self.base - s)


@dataclass(frozen=True, eq=False)
class Singleton(SetMapDescriptor):
    point_fn: Callable[[np.ndarray], np.ndarray]

    def point(self, x) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.point_fn(np.asarray(x, dtype=float)), dtype=float))

    @property
    def n(self) -> int:
        return self.point(np.zeros(1)).size

    def project(self, x, y):
        return self.point(x)

    def hausdorff(self, x1, x2):
        return float(np.linalg.norm(self.point(x1) - self.point(x2)))

    def anchor(self, x):
        return self.point(x)

    def sample(self, x, rng, radius):
        return self.point(x)

    def parametrize(self, x, bound):
        return PointSet(self.point(x)[None, :])


@dataclass(frozen=True, eq=False)
class GraphLine(SetMapDescriptor):
    """Y(x) = {(z, x) : z ∈ ℝ}, for scalar x."""

    n: int = field(default=2, init=False)

    def project(self, x, y):
        return np.array([float(np.asarray(y)[0]), float(np.asarray(x)[0])])

    def hausdorff(self, x1, x2):
        return abs(float(np.asarray(x1)[0]) - float(np.asarray(x2)[0]))

    def anchor(self, x):
        return np.array([0.0, float(np.asarray(x)[0])])

    def sample(self, x, rng, radius):
        return np.array([rng.uniform(-radius, radius), float(np.asarray(x)[0])])

    def parametrize(self, x, bound):
        return Segment(self.anchor(x), np.array([1.0, 0.0]), -bound, bound, truncated=True)

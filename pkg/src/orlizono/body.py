"""Convex bodies given by support-function oracles.

A body is bracketed by two polytopes built from the same direction set:
the convex hull of support points (inside) and the intersection of the
supporting halfspaces (outside). Volumes, centroids, polars and the
Santalo point are computed on that sandwich.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .zonotope import fd_support_points

INTERIOR_MARGIN = 1e-8
INCLUSION_TOL = 1e-9
MEMBERSHIP_RTOL = 1e-9
SANTALO_STEP_TOL = 1e-6
SANTALO_FTOL = 1e-8
SANTALO_MAX_EVALS = 20_000


class DegenerateBody(ValueError):
    pass


class CenterNotInterior(ValueError):
    pass


class VolumeBounds(NamedTuple):
    lower: float
    upper: float
    mid: float
    halfwidth: float

    @classmethod
    def from_pair(cls, lower: float, upper: float) -> "VolumeBounds":
        return cls(lower, upper, 0.5 * (lower + upper), 0.5 * (upper - lower))

    def scaled(self, c: float) -> "VolumeBounds":
        return VolumeBounds.from_pair(self.lower * c, self.upper * c)


@dataclass(frozen=True)
class SupportOracle:
    """A body through its support function.

    ``h`` maps a ``(k, n)`` array of directions to ``k`` support values;
    ``point`` (optional) maps directions to support points. ``critical``
    lists directions that should always be sampled (normals of flat faces).
    """

    dimension: int
    h: Callable
    point: Optional[Callable] = None
    critical: Optional[np.ndarray] = None
    label: str = "body"

    def support(self, U) -> np.ndarray:
        U = np.atleast_2d(np.asarray(U, dtype=float))
        return np.asarray(self.h(U), dtype=float)

    def points(self, U) -> np.ndarray:
        U = np.atleast_2d(np.asarray(U, dtype=float))
        if self.point is not None:
            return np.asarray(self.point(U), dtype=float)
        return fd_support_points(self.support, U)


def ball_oracle(n: int, radius: float = 1.0, center=None) -> SupportOracle:
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)

    def h(U):
        return radius * np.linalg.norm(U, axis=1) + U @ c

    def point(U):
        return c + radius * U / np.linalg.norm(U, axis=1, keepdims=True)

    return SupportOracle(n, h, point, None, f"ball(r={radius:g})")


def polytope_oracle(vertices) -> SupportOracle:
    """Support oracle of ``conv(vertices)``, exact support points included."""
    V = np.asarray(vertices, dtype=float)
    n = V.shape[1]

    def h(U):
        return (U @ V.T).max(axis=1)

    def point(U):
        return V[np.argmax(U @ V.T, axis=1)]

    try:
        eq = ConvexHull(V).equations
        critical = eq[:, :n] / np.linalg.norm(eq[:, :n], axis=1, keepdims=True)
    except QhullError:
        critical = None
    return SupportOracle(n, h, point, critical, "polytope")


def sphere_directions(n: int, count: int) -> np.ndarray:
    """Deterministic, well spread unit vectors.

    Uniform angles in the plane, a Fibonacci lattice on the 2-sphere.
    Every set is closed under negation (2D needs an even count).
    """
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        ang = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(ang), np.sin(ang)])
    # other dimensions: half a set plus its antipodes, so symmetric bodies
    # get symmetric sandwiches
    half = (count + 1) // 2
    if n == 3:
        # Fibonacci lattice on the upper hemisphere
        k = np.arange(half) + 0.5
        z = 1 - k / half
        r = np.sqrt(1 - z * z)
        theta = np.pi * (1 + 5**0.5) * k
        d = np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
    else:
        rng = np.random.default_rng(12345)
        d = rng.standard_normal((half, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
    return np.vstack([d, -d])


# --------------------------------------------------------------------------
# polytope primitives


def hull_volume_centroid(points) -> tuple[float, np.ndarray]:
    """Volume and centroid of ``conv(points)`` by a simplicial fan.

    Each boundary facet of the hull is coned to an interior reference
    point (the vertex mean); in the plane this is the shoelace formula.
    """
    P = np.asarray(points, dtype=float)
    n = P.shape[1]
    try:
        hull = ConvexHull(P)
    except (QhullError, ValueError):
        return 0.0, P.mean(axis=0) if len(P) else np.zeros(n)
    V = P[hull.vertices]
    o = V.mean(axis=0)
    S = P[hull.simplices] - o  # (f, n, n)
    vols = np.abs(np.linalg.det(S)) / math.factorial(n)
    total = float(vols.sum())
    if total <= 0:
        return 0.0, o
    cents = o + S.sum(axis=1) / (n + 1)
    return total, (vols[:, None] * cents).sum(axis=0) / total


def _chebyshev_center(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    n = A.shape[1]
    norms = np.linalg.norm(A, axis=1)
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(
        c,
        A_ub=np.column_stack([A, norms]),
        b_ub=b,
        bounds=[(None, None)] * n + [(0, None)],
        method="highs",
    )
    if res.status != 0:
        raise DegenerateBody(f"halfspace system has no bounded interior ({res.message})")
    return res.x[:n], float(res.x[-1])


def halfspace_vertices(A, b, interior=None) -> np.ndarray:
    """Vertices of ``{x : A x <= b}`` by duality around an interior point."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if interior is None:
        interior, radius = _chebyshev_center(A, b)
        if radius <= 1e-12:
            raise DegenerateBody("halfspace intersection has empty interior")
    c = np.asarray(interior, dtype=float)
    d = b - A @ c
    scale = max(1.0, float(np.abs(b).max()))
    if d.min() <= 1e-13 * scale:
        c, radius = _chebyshev_center(A, b)
        if radius <= 1e-12:
            raise DegenerateBody("halfspace intersection has empty interior")
        d = b - A @ c
    dual = A / d[:, None]
    try:
        hull = ConvexHull(dual)
    except (QhullError, ValueError) as exc:
        raise DegenerateBody(f"direction set does not bound the body: {exc}") from None
    eq = hull.equations
    if np.any(eq[:, -1] >= -1e-14):
        raise DegenerateBody("outer polytope is unbounded")
    return c - eq[:, :-1] / eq[:, -1:]


def halfspace_volume(A, b) -> float:
    """Volume of ``{x : A x <= b}``; zero when the interior is empty."""
    try:
        return hull_volume_centroid(halfspace_vertices(A, b))[0]
    except DegenerateBody:
        return 0.0


# --------------------------------------------------------------------------
# sandwiches


@dataclass(frozen=True, eq=False)
class PolytopeSandwich:
    """``conv(inner) <= body <= {x : normals x <= offsets}``."""

    inner: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    directions: np.ndarray = field(repr=False, default=None)

    @property
    def dimension(self) -> int:
        return self.inner.shape[1]

    @cached_property
    def _inner_hull(self) -> ConvexHull:
        try:
            hull = ConvexHull(self.inner)
        except (QhullError, ValueError) as exc:
            raise DegenerateBody(f"inner hull is rank deficient: {exc}") from None
        return hull

    @cached_property
    def inner_volume_centroid(self) -> tuple[float, np.ndarray]:
        return hull_volume_centroid(self.inner[self._inner_hull.vertices])

    @cached_property
    def outer_vertices(self) -> np.ndarray:
        return halfspace_vertices(self.normals, self.offsets, self.inner_volume_centroid[1])

    @cached_property
    def outer_volume(self) -> float:
        return hull_volume_centroid(self.outer_vertices)[0]

    @cached_property
    def mean_width(self) -> float:
        U = sphere_directions(self.dimension, 256)
        proj = self.inner @ U.T
        return float((proj.max(axis=0) - proj.min(axis=0)).mean())

    def inclusion_slack(self) -> float:
        """``min(offsets - normals @ x)`` over inner vertices, scaled by the mean width."""
        slack = self.offsets[None, :] - self.inner @ self.normals.T
        slack /= np.linalg.norm(self.normals, axis=1)[None, :]
        return float(slack.min()) / self.mean_width

    def interior_margin(self, point) -> float:
        """Distance from ``point`` to the inner hull boundary (negative outside)."""
        eq = self._inner_hull.equations
        return float(-(eq[:, :-1] @ np.asarray(point, dtype=float) + eq[:, -1]).max())


def build_sandwich(oracle: SupportOracle, budget: int = 1024, extra_directions=None) -> PolytopeSandwich:
    """Inner and outer polytopes from ``budget`` spread directions plus the
    oracle's critical directions."""
    n = oracle.dimension
    if budget < n + 1:
        raise ValueError(f"direction budget must be at least n + 1 = {n + 1}")
    dirs = [sphere_directions(n, budget)]
    if oracle.critical is not None and len(oracle.critical):
        dirs.append(np.asarray(oracle.critical, dtype=float))
    if extra_directions is not None:
        dirs.append(np.atleast_2d(np.asarray(extra_directions, dtype=float)))
    U = np.vstack(dirs)
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    U = np.unique(np.round(U, 15), axis=0)
    H = oracle.support(U)
    X = oracle.points(U)
    X = X[~np.any(np.isnan(X), axis=1)]
    X = np.unique(X, axis=0)
    if len(X) < n + 1:
        raise DegenerateBody("too few distinct support points for a full-dimensional hull")
    sw = PolytopeSandwich(X, U, H, U)
    if sw.inner_volume_centroid[0] <= 0:
        raise DegenerateBody("inner hull has zero volume")
    sw.outer_vertices  # raises DegenerateBody if unbounded
    if sw.inclusion_slack() < -INCLUSION_TOL:
        raise DegenerateBody("support points lie outside the supporting halfspaces; oracle is inconsistent")
    return sw


def volume_bounds(s: PolytopeSandwich) -> VolumeBounds:
    lower = s.inner_volume_centroid[0]
    upper = max(s.outer_volume, lower)
    return VolumeBounds.from_pair(lower, upper)


def centroid(s: PolytopeSandwich) -> np.ndarray:
    """Centroid of the inner hull."""
    return s.inner_volume_centroid[1]


def _check_center(s: PolytopeSandwich, center) -> np.ndarray:
    center = np.asarray(center, dtype=float)
    margin = s.interior_margin(center)
    if margin < INTERIOR_MARGIN * s.mean_width:
        raise CenterNotInterior(f"center is {margin:.3g} inside the inner hull; need a positive margin")
    return center


def polar(s: PolytopeSandwich, center) -> PolytopeSandwich:
    """Sandwich of the polar body about ``center`` (in coordinates centred there).

    Inclusion reversal swaps the roles: the polar of the outer polytope is
    ``conv(a_k / b_k)`` and sits inside, the polar of the inner hull is
    ``{y : <y, x_j> <= 1}`` and sits outside.
    """
    center = _check_center(s, center)
    X = s.inner[s._inner_hull.vertices] - center
    b = s.offsets - s.normals @ center
    inner = s.normals / b[:, None]
    normals = X
    offsets = np.ones(len(X))
    return PolytopeSandwich(inner, normals, offsets, X / np.linalg.norm(X, axis=1, keepdims=True))


def polar_volume_bounds(s: PolytopeSandwich, center) -> VolumeBounds:
    """Bounds on the volume of the polar body about ``center``."""
    center = np.asarray(center, dtype=float)
    b = s.offsets - s.normals @ center
    if np.any(b <= 0):
        raise CenterNotInterior("center lies outside the outer polytope")
    lower = hull_volume_centroid(s.normals / b[:, None])[0]
    eq = s._inner_hull.equations
    dist = -(eq[:, :-1] @ center + eq[:, -1])
    if np.any(dist <= 0):
        raise CenterNotInterior("center lies outside the inner hull")
    upper = hull_volume_centroid(eq[:, :-1] / dist[:, None])[0]
    return VolumeBounds.from_pair(lower, max(upper, lower))


@dataclass(frozen=True)
class SantaloResult:
    point: np.ndarray
    polar_volume: VolumeBounds
    evaluations: int
    sandwich: PolytopeSandwich = field(repr=False)

    @property
    def value(self) -> float:
        return self.polar_volume.mid


def santalo_point(body, budget: int = 1024) -> SantaloResult:
    """Minimize the (mid-estimate) polar volume over interior centers.

    ``body`` is a :class:`SupportOracle` or a prebuilt sandwich. Adaptive
    coordinate descent from the inner centroid with step halving. The upper
    bound of the returned volume is rigorous for the computed point; the
    lower bound is the outer polytope's polar at the same point, which is
    off from a true lower bound only to second order in the location error.
    """
    s = body if isinstance(body, PolytopeSandwich) else build_sandwich(body, budget)
    n = s.dimension
    scale = s.mean_width
    margin = INTERIOR_MARGIN * scale
    cache: dict[tuple, float] = {}

    def F(x: np.ndarray) -> float:
        key = tuple(x.tolist())
        if key not in cache:
            if s.interior_margin(x) < margin:
                cache[key] = math.inf
            else:
                cache[key] = polar_volume_bounds(s, x).mid
        return cache[key]

    x = centroid(s).copy()
    fx = F(x)
    if not math.isfinite(fx):
        raise DegenerateBody("inner centroid is not interior")
    step = 0.1 * scale
    min_step = SANTALO_STEP_TOL * scale
    last_rel = math.inf
    while len(cache) < SANTALO_MAX_EVALS:
        improved = False
        for i in range(n):
            for sign in (1.0, -1.0):
                moved = False
                while True:
                    trial = x.copy()
                    trial[i] += sign * step
                    ft = F(trial)
                    if ft < fx:
                        last_rel = (fx - ft) / fx
                        x, fx = trial, ft
                        moved = improved = True
                    else:
                        break
                if moved:
                    break
        if not improved:
            if step < min_step:
                break
            step *= 0.5
        elif step < min_step and last_rel < SANTALO_FTOL:
            break
    return SantaloResult(x, polar_volume_bounds(s, x), len(cache), s)


# --------------------------------------------------------------------------
# membership


def _membership_directions(oracle: SupportOracle, budget: int) -> np.ndarray:
    dirs = [sphere_directions(oracle.dimension, budget)]
    if oracle.critical is not None and len(oracle.critical):
        dirs.append(oracle.critical)
    U = np.vstack(dirs)
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def membership_slack(oracle: SupportOracle, X, budget: int = 1024, chunk: int = 20_000):
    """``max_u (<x, u> - h(u))`` over sampled unit directions, per point.

    Nonpositive values mean the point passes every sampled halfspace.
    Returns the slack and the index of the worst direction.
    """
    U = _membership_directions(oracle, budget)
    H = oracle.support(U)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    slack = np.empty(len(X))
    arg = np.empty(len(X), dtype=int)
    for start in range(0, len(X), chunk):
        D = X[start:start + chunk] @ U.T - H[None, :]
        arg[start:start + chunk] = np.argmax(D, axis=1)
        slack[start:start + chunk] = D.max(axis=1)
    return slack, U[arg]


def contains(oracle: SupportOracle, x, budget: int = 1024):
    """One-sided membership test; a ``False`` verdict carries a separating direction."""
    x = np.asarray(x, dtype=float)
    U = _membership_directions(oracle, budget)
    H = oracle.support(U)
    scale = float(np.abs(H).max())
    excess = U @ x - H * (1 + MEMBERSHIP_RTOL) - 1e-12 * scale
    k = int(np.argmax(excess))
    if excess[k] > 0:
        return False, U[k]
    return True, None


def bounding_box(oracle: SupportOracle) -> tuple[np.ndarray, np.ndarray]:
    n = oracle.dimension
    E = np.eye(n)
    return -oracle.support(-E), oracle.support(E)


def monte_carlo_volume(oracle: SupportOracle, samples: int = 1_000_000, seed: int = 0, budget: int = 1024):
    """Hit-or-miss volume in the bounding box; returns ``(estimate, stderr)``."""
    lo, hi = bounding_box(oracle)
    box = float(np.prod(hi - lo))
    rng = np.random.default_rng(seed)
    U = _membership_directions(oracle, budget)
    H = oracle.support(U)
    tol = 1e-12 * float(np.abs(H).max())
    hits = 0
    chunk = 50_000
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        X = lo + (hi - lo) * rng.random((k, oracle.dimension))
        hits += int(np.count_nonzero(((X @ U.T) - H[None, :]).max(axis=1) <= tol))
        done += k
    p = hits / samples
    return box * p, box * math.sqrt(p * (1 - p) / samples)

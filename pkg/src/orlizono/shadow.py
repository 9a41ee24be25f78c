"""Shadow systems of vector multisets and the checks that go with them.

The orthogonalization with respect to a pivot ``v_1`` moves

    w_1(t) = (1 + t a) v_1
    w_i(t) = v_i - t <v_1, v_i> / |v_1|^2 v_1        (i > 1)

for ``t`` in ``[-1/a, 1]``: at ``t = 1`` the pivot is orthogonal to the
rest, at ``t = -1/a`` it vanishes, and the L1 zonotope volume stays fixed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import multisets as ms
from .multisets import VectorMultiset
from .norm import orlicz_norm_many
from .phi import OrliczFunction, make_phi

GRAPH_BOX = 1e3
GRAPH_TOL = 1e-8


class ShadowError(ValueError):
    pass


class PivotRemovalNotSpanning(ShadowError):
    pass


class ZeroDenominator(ShadowError):
    pass


class OutOfInterval(ShadowError):
    pass


class XOutsideProjection(ShadowError):
    pass


class NonMonotoneGrid(ValueError):
    pass


def _as_list(m) -> np.ndarray:
    if isinstance(m, VectorMultiset):
        return m.normalize().expanded()
    return np.asarray(m, dtype=float)


def _abs_det_sum(rows: np.ndarray) -> float:
    if len(rows) == 0:
        return 0.0
    return float(np.abs(np.linalg.det(rows)).sum())


def speed_a(m, k: int = 0) -> float:
    """Pivot speed making the shadow system volume preserving.

    Numerator: ``|det|`` summed over n-subsets of the non-pivot vectors.
    Denominator: ``|det[v_k, ...]|`` summed over (n-1)-subsets of them.
    ``k`` indexes the expanded vector list.
    """
    V = _as_list(m)
    n = V.shape[1]
    others = np.delete(V, k, axis=0)
    if ms.rank(others) < n:
        raise PivotRemovalNotSpanning(f"removing vector {k} leaves a non-spanning set")
    num_idx = list(itertools.combinations(range(len(others)), n))
    den_idx = list(itertools.combinations(range(len(others)), n - 1))
    num = _abs_det_sum(others[np.array(num_idx)]) if num_idx else 0.0
    if den_idx and n > 1:
        rows = np.concatenate(
            [np.broadcast_to(V[k], (len(den_idx), 1, n)), others[np.array(den_idx)]], axis=1
        )
        den = _abs_det_sum(rows)
    else:
        den = float(abs(V[k, 0])) if n == 1 else 0.0
    if den <= 0.0:
        raise ZeroDenominator("pivot is parallel to every (n-1)-subset of the others")
    if num <= 0.0:
        raise ZeroDenominator("non-pivot vectors carry no volume")
    return num / den


@dataclass(frozen=True, eq=False)
class ShadowSystem:
    vectors: np.ndarray  # expanded base list, pivot first
    pivot: int
    direction: np.ndarray
    speeds: np.ndarray
    a: float
    t_lo: float
    t_hi: float
    source_order: tuple = field(repr=False, default=())

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    @property
    def base(self) -> VectorMultiset:
        return VectorMultiset.from_vectors(self.vectors, dimension=self.dimension)

    def vectors_at(self, t: float) -> np.ndarray:
        """All ``w_i(t)`` in base order; zero vectors are kept."""
        t = float(t)
        if not (self.t_lo - 1e-12 <= t <= self.t_hi + 1e-12):
            raise OutOfInterval(f"t = {t} outside [{self.t_lo}, {self.t_hi}]")
        if t == 0.0:
            return self.vectors.copy()
        W = self.vectors + t * self.speeds[:, None] * self.direction[None, :]
        if t == self.t_lo:
            W[self.pivot] = 0.0
        return W

    def at(self, t: float) -> VectorMultiset:
        """The multiset at time ``t`` with zero vectors dropped."""
        return VectorMultiset.from_vectors(self.vectors_at(t), dimension=self.dimension, drop_zero=True)

    def grid(self, size: int = 9) -> np.ndarray:
        g = np.linspace(self.t_lo, self.t_hi, size)
        g[0], g[-1] = self.t_lo, self.t_hi
        return g

    def support(self, phi: OrliczFunction, t: float, X) -> np.ndarray:
        """Support values of the Orlicz zonotope at time ``t`` for rows of ``X``."""
        W = self.vectors_at(t)
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return orlicz_norm_many(np.maximum(X @ W.T, 0.0), phi)

    def lipschitz_constant(self, phi: OrliczFunction, X) -> np.ndarray:
        """``|| (beta_i <v, x>)_i ||_phi`` with absolute values, per row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        F = np.abs(np.outer(X @ self.direction, self.speeds))
        return orlicz_norm_many(F, phi)


def default_pivot(m) -> int:
    """Lowest index whose removal keeps the set spanning."""
    V = _as_list(m)
    for k in range(len(V)):
        if ms.rank(np.delete(V, k, axis=0)) == V.shape[1]:
            return k
    raise PivotRemovalNotSpanning("no vector can be removed without losing the span")


def orthogonalize(m, k: int | None = None) -> ShadowSystem:
    """Volume-preserving shadow system moving everything along the pivot ``v_k``.

    ``k`` indexes the expanded vector list; it defaults to
    :func:`default_pivot`.
    """
    V = _as_list(m)
    if k is None:
        k = default_pivot(V)
    a = speed_a(V, k)
    order = [k] + [i for i in range(len(V)) if i != k]
    V = V[order]
    p = V[0]
    pn = float(np.linalg.norm(p))
    v = p / pn
    speeds = -(V @ v)
    speeds[0] = a * pn
    return ShadowSystem(V, 0, v, speeds, a, -1.0 / a, 1.0, tuple(order))


def shadow_at(s: ShadowSystem, t: float) -> VectorMultiset:
    return s.at(t)


# --------------------------------------------------------------------------
# graph functions


def _complement_basis(v: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to ``v`` (as columns)."""
    n = len(v)
    q, _ = np.linalg.qr(np.column_stack([v, np.eye(n)]))
    return q[:, 1:n]


def _inf_over_hyperplane(f, B: np.ndarray, starts) -> float:
    best_val, best_c = np.inf, None
    dim = B.shape[1]
    bounds = [(-GRAPH_BOX, GRAPH_BOX)] * dim
    for c0 in starts:
        c0 = np.clip(c0, -0.5 * GRAPH_BOX, 0.5 * GRAPH_BOX)
        res = minimize(
            f, c0, method="Nelder-Mead", bounds=bounds,
            options={"xatol": GRAPH_TOL, "fatol": GRAPH_TOL, "maxiter": 4000},
        )
        if res.fun < best_val:
            best_val, best_c = float(res.fun), res.x
    # a minimizer pinned to the box with the value still falling means the
    # infimum is -inf, i.e. x is off the projection
    if np.max(np.abs(best_c)) >= 0.999 * GRAPH_BOX:
        if f(best_c) < f(0.5 * best_c) - 1e-9:
            raise XOutsideProjection("infimum diverges: x is outside the projection")
    return best_val


def graph_functions(h, v, x) -> tuple[float, float]:
    """Upper and lower heights of a body over ``x`` along ``v``.

    ``h`` evaluates the support function at a single direction; ``x`` must
    be orthogonal to the unit vector ``v``. Both infima over ``w`` in the
    orthogonal complement use Nelder-Mead from ``0`` and ``+-2x``.
    """
    v = np.asarray(v, dtype=float)
    x = np.asarray(x, dtype=float)
    if abs(float(x @ v)) > 1e-10 * max(1.0, float(np.linalg.norm(x))):
        raise ValueError("x must be orthogonal to v")
    B = _complement_basis(v)
    cx = B.T @ x
    starts = [np.zeros(B.shape[1]), 2 * cx, -2 * cx]

    def up(c):
        w = B @ c
        return h(v + w) - float(x @ w)

    def down(c):
        w = B @ c
        return h(-v - w) + float(x @ w)

    return _inf_over_hyperplane(up, B, starts), -_inf_over_hyperplane(down, B, starts)


def system_graph_functions(s: ShadowSystem, phi: OrliczFunction, x, t: float) -> tuple[float, float]:
    from .norm import orlicz_norm

    W = s.vectors_at(t)
    return graph_functions(lambda u: orlicz_norm(np.maximum(W @ u, 0.0), phi), s.direction, x)


# --------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class CheckReport:
    name: str
    samples: int
    max_deviation: float
    violations: int
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.violations == 0


def check_projection_invariance(s: ShadowSystem, phi, samples: int = 1000, seed: int = 0,
                                tol: float = 1e-9) -> CheckReport:
    """Support values at directions orthogonal to the motion do not depend on t."""
    phi = make_phi(phi)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((samples, s.dimension))
    X -= np.outer(X @ s.direction, s.direction)
    ts = rng.uniform(s.t_lo, s.t_hi, size=(samples, 2))
    dev = np.empty(samples)
    for i in range(samples):
        h1 = s.support(phi, ts[i, 0], X[i])[0]
        h2 = s.support(phi, ts[i, 1], X[i])[0]
        dev[i] = abs(h1 - h2)
    return CheckReport("projection_invariance", samples, float(dev.max()), int((dev > tol).sum()), tol)


def check_lipschitz(s: ShadowSystem, phi, samples: int = 1000, seed: int = 0,
                    tol: float = 1e-9) -> CheckReport:
    """``|h_t1(x) - h_t2(x)| <= ||beta <v, x>||_phi |t1 - t2|`` on random samples.

    ``max_deviation`` reports the largest excess of the left side over the bound.
    """
    phi = make_phi(phi)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((samples, s.dimension))
    ts = rng.uniform(s.t_lo, s.t_hi, size=(samples, 2))
    L = s.lipschitz_constant(phi, X)
    excess = np.empty(samples)
    for i in range(samples):
        lhs = abs(s.support(phi, ts[i, 0], X[i])[0] - s.support(phi, ts[i, 1], X[i])[0])
        excess[i] = lhs - L[i] * abs(ts[i, 0] - ts[i, 1])
    return CheckReport("lipschitz", samples, float(excess.max()), int((excess > tol).sum()), tol)


@dataclass(frozen=True)
class ConvexityReport:
    mode: str
    ts: tuple
    values: tuple
    excess: tuple  # per interior point: value above the chord minus slack
    violations: tuple  # interior indices with positive excess

    @property
    def convex(self) -> bool:
        return not self.violations


def curve_convexity(ts, ys, mode: str = "direct", halfwidths=None, floor: float = 1e-12) -> ConvexityReport:
    """Discrete convexity of ``t -> y`` (or ``t -> 1/y``) on consecutive triples.

    The middle value may exceed the chord by the propagated halfwidths: its
    own plus the chord-weighted halfwidths of the neighbours.
    """
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(ts) < 3 or len(ts) != len(ys):
        raise NonMonotoneGrid("need at least three (t, y) points")
    if np.any(np.diff(ts) <= 0):
        raise NonMonotoneGrid("t values must be strictly increasing")
    hw = np.zeros_like(ys) if halfwidths is None else np.asarray(halfwidths, dtype=float)
    if mode == "reciprocal":
        if np.any(ys - hw <= 0):
            raise ValueError("reciprocal mode needs values bounded away from zero")
        hw = hw / (ys - hw) ** 2
        ys = 1.0 / ys
    elif mode != "direct":
        raise ValueError(f"unknown mode {mode!r}")
    excess = []
    viol = []
    for i in range(1, len(ts) - 1):
        t0, t1, t2 = ts[i - 1], ts[i], ts[i + 1]
        lam = (t2 - t1) / (t2 - t0)
        chord = lam * ys[i - 1] + (1 - lam) * ys[i + 1]
        slack = hw[i] + lam * hw[i - 1] + (1 - lam) * hw[i + 1] + floor * max(1.0, abs(chord))
        e = ys[i] - chord - slack
        excess.append(float(e))
        if e > 0:
            viol.append(i)
    return ConvexityReport(mode, tuple(ts.tolist()), tuple(ys.tolist()), tuple(excess), tuple(viol))


def _projection_samples(s: ShadowSystem, phi, count: int, rng) -> np.ndarray:
    """Points of the common projection onto the motion hyperplane.

    Convex combinations of support points of the t = 0 body, pulled 5%
    toward their mean so that no sample sits on the relative boundary.
    """
    from .zonotope import OrliczZonotope

    z = OrliczZonotope(s.at(0.0), phi)
    U = rng.standard_normal((4 * count, s.dimension))
    P = z.oracle().points(U).reshape(count, 4, s.dimension)
    w = rng.dirichlet(np.ones(4), size=count)
    X = np.einsum("kj,kjn->kn", w, P)
    X = 0.95 * X + 0.05 * X.mean(axis=0)
    return X - np.outer(X @ s.direction, s.direction)


def check_graph_inequalities(s: ShadowSystem, phi, samples: int = 200, seed: int = 0,
                             tol: float = 1e-6) -> CheckReport:
    """Sandwich ``low(ls + mt) <= l up(s) + m low(t) <= up(ls + mt)`` on random tuples.

    ``max_deviation`` is the largest violation of either side.
    """
    phi = make_phi(phi)
    rng = np.random.default_rng(seed)
    X = _projection_samples(s, phi, samples, rng)
    worst = -np.inf
    bad = 0
    for x in X:
        t1, t2 = rng.uniform(s.t_lo, s.t_hi, size=2)
        lam = rng.uniform(0.0, 1.0)
        tm = lam * t1 + (1 - lam) * t2
        up1, _ = system_graph_functions(s, phi, x, t1)
        _, low2 = system_graph_functions(s, phi, x, t2)
        upm, lowm = system_graph_functions(s, phi, x, tm)
        mid = lam * up1 + (1 - lam) * low2
        dev = max(lowm - mid, mid - upm)
        worst = max(worst, dev)
        bad += dev > tol
    return CheckReport("graph_inequalities", samples, float(worst), int(bad), tol)


def check_upper_convexity(s: ShadowSystem, phi, samples: int = 50, seed: int = 0,
                          tol: float = 1e-6) -> CheckReport:
    """Midpoint convexity of ``t -> up(t)`` at fixed ``x`` on random pairs."""
    phi = make_phi(phi)
    rng = np.random.default_rng(seed)
    X = _projection_samples(s, phi, samples, rng)
    worst = -np.inf
    bad = 0
    for x in X:
        t1, t2 = rng.uniform(s.t_lo, s.t_hi, size=2)
        u1 = system_graph_functions(s, phi, x, t1)[0]
        u2 = system_graph_functions(s, phi, x, t2)[0]
        um = system_graph_functions(s, phi, x, 0.5 * (t1 + t2))[0]
        dev = um - 0.5 * (u1 + u2)
        worst = max(worst, dev)
        bad += dev > tol
    return CheckReport("upper_convexity", samples, float(worst), int(bad), tol)

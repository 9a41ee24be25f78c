"""Normalized convex gauges (Orlicz functions).

An Orlicz function here is a convex, strictly increasing map
``phi: [0, inf) -> [0, inf)`` with ``phi(0) = 0`` and ``phi(1) = 1``.
Three families are supported::

    {"type": "power", "p": 2}
    {"type": "mix", "terms": [{"w": 0.5, "p": 1}, {"w": 0.5, "p": 2}]}
    {"type": "pwl", "points": [[0, 0], [1, 1], [2, 3]]}

Every instance is validated on a fixed grid when it is built and is
immutable afterwards.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

CONVEXITY_SLACK = 1e-12
INVERSE_RTOL = 1e-12
# relative slope increase that counts as "strict"
STRICT_RTOL = 1e-10


class PhiError(ValueError):
    """Base class for invalid Orlicz function descriptions."""

    def __init__(self, message: str, point: float | None = None):
        super().__init__(message)
        self.point = point


class NotConvex(PhiError):
    pass


class NotIncreasing(PhiError):
    pass


class NotNormalized(PhiError):
    pass


class NegativeArgument(ValueError):
    pass


def validation_grid() -> np.ndarray:
    """1024 points: geometric on [1e-6, 1], then linear on (1, 16]."""
    geo = np.geomspace(1e-6, 1.0, 512)
    lin = np.linspace(1.0, 16.0, 513)[1:]
    return np.concatenate([geo, lin])


@dataclass(frozen=True)
class ValidationReport:
    grid: tuple[float, ...]
    min_forward_difference: float
    min_slope_increment: float
    strictly_convex: bool


@dataclass(frozen=True, eq=False)
class OrliczFunction:
    kind: str
    params: tuple
    label: str
    validation: ValidationReport = field(repr=False, compare=False, default=None)

    # -- evaluation -------------------------------------------------------

    def __call__(self, t):
        return self.eval(t)

    def eval(self, t):
        """phi(t) for a scalar or array argument ``t >= 0``."""
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0):
            raise NegativeArgument(f"phi is defined on [0, inf), got {t!r}")
        out = self._eval_array(arr)
        return float(out) if out.ndim == 0 else out

    def _eval_array(self, t: np.ndarray) -> np.ndarray:
        if self.kind == "power":
            return np.power(t, self.params[0])
        if self.kind == "mix":
            out = np.zeros_like(t)
            for w, p in self.params:
                out = out + w * np.power(t, p)
            return out
        ts, ys = self.params
        return _pwl_eval(np.asarray(ts), np.asarray(ys), t)

    def scalar(self, t: float) -> float:
        """Unchecked float evaluation for hot loops."""
        if self.kind == "power":
            return t ** self.params[0]
        if self.kind == "mix":
            return sum(w * t**p for w, p in self.params)
        ts, ys = self.params
        k = len(ts) - 1
        for i in range(1, len(ts)):
            if t <= ts[i]:
                k = i
                break
        t0, t1, y0, y1 = ts[k - 1], ts[k], ys[k - 1], ys[k]
        return y0 + (y1 - y0) * (t - t0) / (t1 - t0)

    def derivative(self, t):
        """A subgradient of phi (left derivative at pwl breakpoints)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            p = self.params[0]
            if p == 1:
                return np.ones_like(t)
            return p * np.power(t, p - 1)
        if self.kind == "mix":
            out = np.zeros_like(t)
            for w, p in self.params:
                out = out + (w if p == 1 else w * p * np.power(t, p - 1))
            return out
        ts, ys = (np.asarray(a) for a in self.params)
        slopes = np.diff(ys) / np.diff(ts)
        idx = np.clip(np.searchsorted(ts, t, side="left") - 1, 0, len(slopes) - 1)
        return slopes[idx]

    def inverse(self, y: float) -> float:
        """The unique ``t`` with ``phi(t) = y``."""
        y = float(y)
        if y < 0:
            raise NegativeArgument(f"phi^-1 is defined on [0, inf), got {y!r}")
        if y == 0.0:
            return 0.0
        if y == 1.0:
            return 1.0
        if self.kind == "power":
            return y ** (1.0 / self.params[0])
        if self.kind == "pwl":
            ts, ys = self.params
            for i in range(1, len(ts)):
                if y <= ys[i] or i == len(ts) - 1:
                    t0, t1, y0, y1 = ts[i - 1], ts[i], ys[i - 1], ys[i]
                    return t0 + (y - y0) * (t1 - t0) / (y1 - y0)
        # phi(t) <= t on [0, 1] and phi(t) >= t beyond 1
        lo, hi = (y, 1.0) if y < 1.0 else (1.0, y)
        for _ in range(400):
            mid = 0.5 * (lo + hi)
            if self.scalar(mid) < y:
                lo = mid
            else:
                hi = mid
            if hi - lo <= INVERSE_RTOL * hi:
                break
        return 0.5 * (lo + hi)

    # -- metadata -----------------------------------------------------------

    @property
    def strictly_convex(self) -> bool:
        return self.validation.strictly_convex

    @property
    def is_identity(self) -> bool:
        if self.kind == "power":
            return self.params[0] == 1
        if self.kind == "mix":
            return all(p == 1 for _, p in self.params)
        # the norm only evaluates phi on [0, 1], so agreeing there is enough
        ts, ys = self.params
        return all(abs(y - t) <= 1e-15 for t, y in zip(ts, ys) if t <= 1.0)

    def to_dict(self) -> dict:
        if self.kind == "power":
            return {"type": "power", "p": self.params[0]}
        if self.kind == "mix":
            return {"type": "mix", "terms": [{"w": w, "p": p} for w, p in self.params]}
        ts, ys = self.params
        return {"type": "pwl", "points": [[t, y] for t, y in zip(ts, ys)]}

    def __eq__(self, other):
        if not isinstance(other, OrliczFunction):
            return NotImplemented
        return self.kind == other.kind and self.params == other.params

    def __hash__(self):
        return hash((self.kind, self.params))


def _pwl_eval(ts: np.ndarray, ys: np.ndarray, t: np.ndarray) -> np.ndarray:
    # np.interp clamps; extend the last segment linearly instead
    out = np.interp(t, ts, ys)
    beyond = t > ts[-1]
    if np.any(beyond):
        slope = (ys[-1] - ys[-2]) / (ts[-1] - ts[-2])
        out = np.where(beyond, ys[-1] + slope * (t - ts[-1]), out)
    return out


def _validate(phi: OrliczFunction) -> ValidationReport:
    at0 = float(phi._eval_array(np.array(0.0)))
    at1 = float(phi._eval_array(np.array(1.0)))
    if at0 != 0.0:
        raise NotNormalized(f"{phi.label}: phi(0) = {at0!r}, expected 0", 0.0)
    if abs(at1 - 1.0) > 1e-15:
        raise NotNormalized(f"{phi.label}: phi(1) = {at1!r}, expected 1", 1.0)

    grid = np.concatenate([[0.0], validation_grid()])
    vals = phi._eval_array(grid)
    if not np.all(np.isfinite(vals)):
        bad = grid[~np.isfinite(vals)][0]
        raise NotIncreasing(f"{phi.label}: non-finite value at t = {bad:g}", float(bad))
    diffs = np.diff(vals)
    if np.any(diffs <= 0):
        k = int(np.argmax(diffs <= 0))
        raise NotIncreasing(
            f"{phi.label}: phi({grid[k + 1]:g}) <= phi({grid[k]:g})", float(grid[k + 1])
        )
    slopes = diffs / np.diff(grid)
    inc = np.diff(slopes)
    scale = np.maximum(1.0, np.abs(slopes[1:]))
    bad = inc < -CONVEXITY_SLACK * scale
    if np.any(bad):
        k = int(np.argmax(bad))
        raise NotConvex(
            f"{phi.label}: slope decreases at t = {grid[k + 1]:g}", float(grid[k + 1])
        )
    strict = bool(np.all(inc > STRICT_RTOL * np.abs(slopes[1:])))
    return ValidationReport(
        grid=tuple(grid[1:].tolist()),
        min_forward_difference=float(diffs.min()),
        min_slope_increment=float(inc.min()),
        strictly_convex=strict,
    )


def _build(kind: str, params: tuple, label: str) -> OrliczFunction:
    phi = OrliczFunction(kind, params, label)
    object.__setattr__(phi, "validation", _validate(phi))
    return phi


def power(p: float) -> OrliczFunction:
    p = float(p)
    if not p > 0:
        raise NotIncreasing(f"power exponent must be positive, got {p}")
    label = "id" if p == 1 else f"t^{p:g}"
    return _build("power", (p,), label)


def identity() -> OrliczFunction:
    return power(1.0)


def mix(terms) -> OrliczFunction:
    """Weighted power mix ``sum w_i t**p_i`` with ``sum w_i = 1``."""
    pairs = []
    for term in terms:
        w, p = (term["w"], term["p"]) if isinstance(term, Mapping) else term
        pairs.append((float(w), float(p)))
    if not pairs:
        raise PhiError("mix needs at least one term")
    if any(w <= 0 for w, _ in pairs):
        raise PhiError("mix weights must be positive")
    if any(p <= 0 for _, p in pairs):
        raise NotIncreasing("mix exponents must be positive")
    total = math.fsum(w for w, _ in pairs)
    if abs(total - 1.0) > 1e-12:
        raise NotNormalized(f"mix weights sum to {total!r}, expected 1", 1.0)
    label = "+".join(f"{w:g}t^{p:g}" for w, p in pairs)
    return _build("mix", tuple(pairs), label)


def pwl(points) -> OrliczFunction:
    """Piecewise-linear convex function through the given (t, y) points."""
    pts = [(float(t), float(y)) for t, y in points]
    if len(pts) < 2:
        raise PhiError("pwl needs at least two points")
    ts = tuple(t for t, _ in pts)
    ys = tuple(y for _, y in pts)
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise PhiError("pwl breakpoints must be strictly increasing in t")
    if ts[0] != 0.0 or ys[0] != 0.0:
        raise NotNormalized("pwl must start at (0, 0)", ts[0])
    if 1.0 not in ts or ys[ts.index(1.0)] != 1.0:
        raise NotNormalized("pwl must pass through (1, 1)", 1.0)
    if ts[-1] == 1.0:
        raise PhiError("pwl needs a breakpoint beyond t = 1 to define the tail slope")
    label = "pwl(" + ",".join(f"{t:g}:{y:g}" for t, y in pts) + ")"
    return _build("pwl", (ts, ys), label)


def make_phi(spec: Any) -> OrliczFunction:
    """Build a validated Orlicz function.

    ``spec`` may be an :class:`OrliczFunction`, a dict in the instance-file
    syntax, a JSON string, a path to a JSON file, or one of the shorthands
    ``id``, ``power:P``, ``mix:W:P,W:P``, ``pwl:T:Y,T:Y``.
    """
    if isinstance(spec, OrliczFunction):
        return spec
    if isinstance(spec, str):
        return make_phi(_parse_text(spec))
    if not isinstance(spec, Mapping) or "type" not in spec:
        raise PhiError(f"unrecognised phi specification: {spec!r}")
    kind = spec["type"]
    if kind in ("power", "Power"):
        return power(spec["p"])
    if kind in ("id", "identity"):
        return identity()
    if kind in ("mix", "WeightedPowerMix"):
        return mix(spec["terms"])
    if kind in ("pwl", "PiecewiseLinearConvex"):
        return pwl(spec["points"])
    raise PhiError(f"unknown phi type {kind!r}")


def _parse_text(text: str) -> dict:
    s = text.strip()
    if s.startswith("{"):
        return json.loads(s)
    if s in ("id", "identity"):
        return {"type": "power", "p": 1}
    head, _, rest = s.partition(":")
    if head == "power":
        return {"type": "power", "p": float(rest)}
    if head == "mix":
        terms = []
        for chunk in rest.split(","):
            w, p = chunk.split(":")
            terms.append({"w": float(w), "p": float(p)})
        return {"type": "mix", "terms": terms}
    if head == "pwl":
        return {"type": "pwl", "points": [[float(a) for a in c.split(":")] for c in rest.split(",")]}
    path = Path(s)
    if path.suffix == ".json" and path.exists():
        return json.loads(path.read_text(encoding="utf-8"))
    raise PhiError(f"cannot parse phi specification {text!r}")

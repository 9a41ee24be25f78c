"""Volume product and volume ratio functionals plus the verification suites.

Every check produces :class:`Verdict` rows. A verdict is FAIL only when the
claimed relation is violated by more than the combined error bars of both
sides; strict claims inside the bars are INCONCLUSIVE.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import body as bd
from . import multisets as ms
from . import report as rp
from . import shadow as sh
from .body import VolumeBounds
from .multisets import VectorMultiset
from .phi import OrliczFunction, make_phi, power
from .zonotope import OrliczZonotope, l1_volume

# relative slack added to every comparison: Santalo-point location and
# bisection tolerances are not reflected in the sandwich halfwidths
REL_FLOOR = 1e-7
DISSECTION_SAMPLES = 10_000

PASS, FAIL, INCONCLUSIVE = "PASS", "FAIL", "INCONCLUSIVE"
COMMANDS = ("verify-vp", "verify-vr", "verify-dissection", "verify-merge", "verify-shadow")
CSV_HEADER = ("suite", "instance", "label", "claim", "status", "value", "lower", "upper",
              "reference", "margin", "bars", "note")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RandomSpec:
    n: int = 2
    m: tuple = (3, 4, 5)  # cycled over the seeds
    count: int = 20
    seed: int = 1

    @classmethod
    def parse(cls, text: str) -> "RandomSpec":
        """``n,m,count,seed``; ``m`` may be ``3-5`` or ``3/4/5``."""
        try:
            n, m, count, seed = text.split(",")
            if "-" in m:
                lo, hi = m.split("-")
                mv = tuple(range(int(lo), int(hi) + 1))
            else:
                mv = tuple(int(x) for x in m.split("/"))
            return cls(int(n), mv, int(count), int(seed))
        except ValueError as exc:
            raise ConfigError(f"bad random spec {text!r}; expected n,m,count,seed") from exc

    def instances(self) -> list[tuple[str, VectorMultiset]]:
        out = []
        for i in range(self.count):
            seed = self.seed + i
            m = self.m[i % len(self.m)]
            out.append((f"random:n={self.n},m={m},seed={seed}", ms.random_multiset(self.n, m, seed)))
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    dimension: int = 2
    phi: OrliczFunction = field(default_factory=lambda: power(2))
    budget: int = 1024
    grid: int = 9
    random: RandomSpec | None = None
    instance_paths: tuple = ()
    threads: int = 1
    out: Path | None = None
    include_constructed: bool = True
    samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "phi", make_phi(self.phi))
        if self.dimension not in (2, 3):
            raise ConfigError("dimension must be 2 or 3")
        if self.budget < 64:
            raise ConfigError("budget must be at least 64")
        if self.grid < 3:
            raise ConfigError("grid needs at least 3 points")
        if self.random is not None and self.random.n != self.dimension:
            object.__setattr__(self, "dimension", self.random.n)

    def batch(self) -> list[tuple[str, VectorMultiset]]:
        """User-supplied instances; the seeded default batch if there are none."""
        out = []
        for p in self.instance_paths:
            m = ms.load_instance(p)
            if m.dimension != self.dimension:
                raise ConfigError(f"{p}: dimension {m.dimension} != {self.dimension}")
            out.append((f"file:{Path(p).name}", m))
        if self.random is not None:
            out += self.random.instances()
        if not out:
            count = 20 if self.dimension == 2 else 5
            out = RandomSpec(self.dimension, (3, 4, 5) if self.dimension == 2 else (4, 5), count, 1).instances()
        return out

    @property
    def user_supplied(self) -> bool:
        return bool(self.instance_paths) or self.random is not None


@dataclass(frozen=True)
class Verdict:
    suite: str
    instance: str  # short content hash
    label: str
    claim: str
    status: str
    value: float
    lower: float
    upper: float
    reference: float = math.nan
    margin: float = math.nan
    bars: float = math.nan
    note: str = ""
    artifacts: tuple = ()

    def row(self) -> tuple:
        return (self.suite, self.instance, self.label, self.claim, self.status, self.value, self.lower,
                self.upper, self.reference, self.margin, self.bars, self.note)


@dataclass
class ReportBundle:
    verdicts: list
    files: list

    @property
    def failures(self) -> int:
        return sum(v.status == FAIL for v in self.verdicts)

    @property
    def exit_code(self) -> int:
        return min(self.failures, 125)

    def csv(self) -> str:
        return rp.csv_text(CSV_HEADER, (v.row() for v in self.verdicts))


def instance_hash(m: VectorMultiset) -> str:
    items = sorted((tuple(float(x).hex() for x in v), int(k)) for v, k in zip(m.vectors, m.multiplicities))
    return hashlib.sha256(json.dumps(items).encode()).hexdigest()[:12]


# --------------------------------------------------------------------------
# functionals


def _budget(cfg) -> int:
    if cfg is None:
        return 1024
    return cfg if isinstance(cfg, int) else cfg.budget


def volume_product(m: VectorMultiset, phi, cfg=None) -> VolumeBounds:
    """``P = V(polar about the Santalo point) * V(L1 zonotope)``."""
    z = OrliczZonotope(m, make_phi(phi))
    res = bd.santalo_point(z.oracle(), _budget(cfg))
    return res.polar_volume.scaled(l1_volume(m))


def volume_ratio(m: VectorMultiset, phi, cfg=None) -> VolumeBounds:
    """``R = V(Z_phi) / V(Z_1)``; exactly 1 when phi is the identity on [0, 1]."""
    phi = make_phi(phi)
    z = OrliczZonotope(m, phi)
    if phi.is_identity:
        return VolumeBounds.from_pair(1.0, 1.0)
    vb = bd.volume_bounds(bd.build_sandwich(z.oracle(), _budget(cfg)))
    return vb.scaled(1.0 / l1_volume(m))


def body_volume(m: VectorMultiset, phi, cfg=None) -> VolumeBounds:
    z = OrliczZonotope(m, make_phi(phi))
    return bd.volume_bounds(bd.build_sandwich(z.oracle(), _budget(cfg)))


@lru_cache(maxsize=32)
def _reference(kind: str, n: int, phi: OrliczFunction, budget: int) -> VolumeBounds:
    f = volume_product if kind == "P" else volume_ratio
    return f(ms.canonical_basis(n), phi, budget)


# --------------------------------------------------------------------------
# verdict logic


def judge(claim: str, relation: str, lhs: VolumeBounds, rhs: VolumeBounds, *, suite: str,
          m: VectorMultiset, label: str, note: str = "") -> Verdict:
    """Compare ``lhs <relation> rhs``; relation is one of ge, gt, le, lt, eq."""
    bars = lhs.halfwidth + rhs.halfwidth + REL_FLOOR * max(abs(lhs.mid), abs(rhs.mid))
    diff = lhs.mid - rhs.mid
    if relation == "eq":
        margin = abs(diff)
        status = PASS if margin <= bars else FAIL
    else:
        margin = diff if relation in ("ge", "gt") else -diff
        if margin < -bars:
            status = FAIL
        elif relation in ("ge", "le") or margin > bars:
            status = PASS
        else:
            status = INCONCLUSIVE
    return Verdict(suite, instance_hash(m), label, claim, status, lhs.mid, lhs.lower, lhs.upper,
                   rhs.mid, margin, bars, note)


def _exact(x: float) -> VolumeBounds:
    return VolumeBounds.from_pair(x, x)


# --------------------------------------------------------------------------
# instance sets


def _constructed_vp(n: int, phi: OrliczFunction) -> list[tuple[str, VectorMultiset]]:
    rng = np.random.default_rng(101)
    out = [(f"gl-canonical:{j}", ms.gl_apply(ms.random_matrix(n, rng), ms.canonical_basis(n))) for j in range(3)]
    e = np.eye(n)
    out.append(("canonical+(-0.7e1)", VectorMultiset.from_vectors(np.vstack([e, -0.7 * e[:1]]))))
    par = VectorMultiset.from_vectors(np.vstack([e, 2.0 * e[:1], -0.5 * e[1:2]]))
    out.append(("gl-parallelepiped", ms.gl_apply(ms.random_matrix(n, rng), par)))
    return out


def _constructed_vr(n: int) -> list[tuple[str, VectorMultiset]]:
    rng = np.random.default_rng(202)
    e = np.eye(n)
    obt = VectorMultiset.from_vectors(np.vstack([e, -e[:1]]))
    out = [(f"gl-obtuse:{j}", ms.gl_apply(ms.random_matrix(n, rng), obt)) for j in range(3)]
    out.append(("gl-obtuse:random", ms.gl_apply(ms.random_matrix(n, rng), ms.random_obtuse(n, rng))))
    out.append(("e1,e2,e1+e2", VectorMultiset.from_vectors(np.vstack([e, e[:1] + e[1:2]]))))
    return out


def vp_relation(m: VectorMultiset, phi: OrliczFunction) -> str:
    if ms.is_gl_canonical(m):
        return "eq"
    if phi.is_identity and ms.is_parallelepiped_generating(m):
        return "eq"
    return "gt"


def vr_relation(m: VectorMultiset, phi: OrliczFunction) -> str:
    if phi.is_identity or ms.is_gl_obtuse(m):
        return "eq"
    return "lt"


# --------------------------------------------------------------------------
# per-instance tasks (module level so they pickle)


def _task_vp(args) -> list[Verdict]:
    label, m, phi, budget = args
    lhs = volume_product(m, phi, budget)
    ref = _reference("P", m.dimension, phi, budget)
    return [judge("P>=P(canonical)", vp_relation(m, phi), lhs, ref, suite="verify-vp", m=m, label=label)]


def _task_vr(args) -> list[Verdict]:
    label, m, phi, budget = args
    lhs = volume_ratio(m, phi, budget)
    ref = _reference("R", m.dimension, phi, budget)
    return [judge("R<=R(canonical)", vr_relation(m, phi), lhs, ref, suite="verify-vr", m=m, label=label)]


def _task_dissection(args) -> list[Verdict]:
    label, m, phi, budget, samples, seed = args
    return verify_dissection(m, phi, budget, samples=samples, seed=seed, label=label)


def _task_merge(args) -> list[Verdict]:
    label, m, phi, budget = args
    return verify_merge(m, phi, budget, label=label)


def _task_shadow(args) -> list[Verdict]:
    label, m, phi, budget, grid, out, samples, seed = args
    return verify_shadow(m, phi, budget, grid=grid, out=out, label=label, samples=samples, seed=seed)


def _threads(cfg: ExperimentConfig) -> int:
    n = max(1, cfg.threads)
    env = os.environ.get("ORLIZONO_THREADS")
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError as exc:
            raise ConfigError(f"ORLIZONO_THREADS={env!r} is not an integer") from exc
    return n


def _map(fn: Callable, tasks: Sequence, cfg: ExperimentConfig) -> list[Verdict]:
    workers = min(_threads(cfg), len(tasks))
    if workers <= 1:
        results = [fn(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, tasks))
    return [v for r in results for v in r]


# --------------------------------------------------------------------------
# suites


def verify_volume_product(cfg: ExperimentConfig) -> list[Verdict]:
    insts = cfg.batch()
    if cfg.include_constructed:
        insts += _constructed_vp(cfg.dimension, cfg.phi)
    return _map(_task_vp, [(lab, m, cfg.phi, cfg.budget) for lab, m in insts], cfg)


def verify_volume_ratio(cfg: ExperimentConfig) -> list[Verdict]:
    insts = cfg.batch()
    if cfg.include_constructed:
        insts += _constructed_vr(cfg.dimension)
    return _map(_task_vr, [(lab, m, cfg.phi, cfg.budget) for lab, m in insts], cfg)


def verify_dissection(m: VectorMultiset, phi, cfg=None, samples: int = DISSECTION_SAMPLES, seed: int = 0,
                      label: str = "") -> list[Verdict]:
    """Additivity over n-subsets, pointwise membership, and zero-volume overlaps.

    Returns three verdicts: ``dissection.volume``, ``dissection.membership``
    and ``dissection.overlap``.
    """
    phi = make_phi(phi)
    budget = _budget(cfg)
    if not ms.is_spanning(m):
        raise ms.MultisetError("dissection needs a spanning set")
    if not ms.is_obtuse(m):
        raise ms.NotObtuse("dissection needs an obtuse set")
    n = m.dimension
    full = OrliczZonotope(m, phi)
    full_oracle = full.oracle()
    full_vb = bd.volume_bounds(bd.build_sandwich(full_oracle, budget))

    pieces = []
    for _, sub in ms.subsets(m, n):
        if ms.is_spanning(sub):
            o = OrliczZonotope(sub, phi).oracle()
            pieces.append((o, bd.build_sandwich(o, budget)))
    vbs = [bd.volume_bounds(s) for _, s in pieces]
    total = VolumeBounds.from_pair(sum(v.lower for v in vbs), sum(v.upper for v in vbs))
    out = [judge("dissection.volume", "eq", full_vb, total, suite="verify-dissection", m=m, label=label,
                 note=f"pieces={len(pieces)}")]

    # membership: disagreements farther than tol from every boundary are contradictions
    lo, hi = bd.bounding_box(full_oracle)
    rng = np.random.default_rng(seed)
    X = lo + (hi - lo) * rng.random((samples, n))
    d_full, _ = bd.membership_slack(full_oracle, X, budget)
    d_union = np.min([bd.membership_slack(o, X, budget)[0] for o, _ in pieces], axis=0)
    tol = 1e-4 * float(np.max(hi - lo))
    disagree = (d_full <= 0) != (d_union <= 0)
    contradictions = int(np.sum(disagree & (np.minimum(np.abs(d_full), np.abs(d_union)) > tol)))
    out.append(Verdict("verify-dissection", instance_hash(m), label, "dissection.membership",
                       PASS if contradictions == 0 else FAIL, float(contradictions), 0.0, 0.0, 0.0,
                       float(contradictions), tol, f"samples={samples} near_boundary={int(disagree.sum())}"))

    # overlaps: intersection of outer polytopes of two pieces
    worst = 0.0
    slack = 0.0
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            si, sj = pieces[i][1], pieces[j][1]
            A = np.vstack([si.normals, sj.normals])
            b = np.concatenate([si.offsets, sj.offsets])
            worst = max(worst, bd.halfspace_volume(A, b))
            slack = max(slack, vbs[i].upper - vbs[i].lower + vbs[j].upper - vbs[j].lower)
    slack += REL_FLOOR * full_vb.mid
    out.append(Verdict("verify-dissection", instance_hash(m), label, "dissection.overlap",
                       PASS if worst <= slack else FAIL, worst, 0.0, worst, 0.0, slack - worst, slack))
    return out


def verify_merge(m: VectorMultiset, phi, cfg=None, label: str = "") -> list[Verdict]:
    """``R(m) <= R(merged)`` and ``P(m) >= P(merged)``; equal when nothing merges or phi = Id."""
    phi = make_phi(phi)
    budget = _budget(cfg)
    merged = ms.merge_parallel(m)
    same = merged.cardinality == m.cardinality
    r_rel = "eq" if same or phi.is_identity else "lt"
    p_rel = "eq" if same else "gt"
    if phi.is_identity and not same:
        # L1 zonotope and hence its polar are unchanged by merging
        p_rel = "eq"
    return [
        judge("merge.R<=R(merged)", r_rel, volume_ratio(m, phi, budget), volume_ratio(merged, phi, budget),
              suite="verify-merge", m=m, label=label),
        judge("merge.P>=P(merged)", p_rel, volume_product(m, phi, budget), volume_product(merged, phi, budget),
              suite="verify-merge", m=m, label=label),
    ]


@dataclass(frozen=True)
class ShadowCurve:
    ts: np.ndarray
    l1: np.ndarray
    volume: list  # VolumeBounds per t
    polar: list  # VolumeBounds per t (about the Santalo point)


def shadow_curve(system: sh.ShadowSystem, phi, ts, budget: int = 1024) -> ShadowCurve:
    phi = make_phi(phi)
    l1, vol, pol = [], [], []
    for t in ts:
        mt = system.at(t)
        l1.append(l1_volume(mt))
        z = OrliczZonotope(mt, phi)
        s = bd.build_sandwich(z.oracle(), budget)
        vol.append(bd.volume_bounds(s))
        pol.append(bd.santalo_point(s).polar_volume)
    return ShadowCurve(np.asarray(ts, dtype=float), np.asarray(l1), vol, pol)


def verify_shadow(m: VectorMultiset, phi, cfg=None, grid: int = 9, pivot: int | None = None,
                  out: Path | None = None, label: str = "", samples: int = 1000,
                  seed: int = 0) -> list[Verdict]:
    """Convexity along the orthogonalizing shadow system, plus the exactness checks."""
    phi = make_phi(phi)
    budget = _budget(cfg)
    system = sh.orthogonalize(m, pivot)
    ts = system.grid(grid)
    curve = shadow_curve(system, phi, ts, budget)
    key = instance_hash(m)
    suite = "verify-shadow"
    res: list[Verdict] = []

    dev = float(np.max(np.abs(curve.l1 - curve.l1[0])))
    tol = 1e-9 * curve.l1[0]
    res.append(Verdict(suite, key, label, "shadow.l1_constant", PASS if dev <= tol else FAIL,
                       float(curve.l1[0]), float(curve.l1.min()), float(curve.l1.max()), float(curve.l1[0]),
                       dev, tol))

    def convexity(claim, values, mode, asserted=True, note=""):
        mids = [v.mid for v in values]
        hws = [v.halfwidth + REL_FLOOR * abs(v.mid) for v in values]
        rep = sh.curve_convexity(ts, mids, mode=mode, halfwidths=hws)
        worst = float(max(rep.excess)) if rep.excess else 0.0
        if rep.convex:
            status = PASS
        else:
            status = FAIL if asserted else INCONCLUSIVE
        return rep, Verdict(suite, key, label, claim, status, float(np.min(mids)), float(np.min(mids)),
                            float(np.max(mids)), math.nan, -worst, math.nan,
                            note or f"violations={len(rep.violations)}")

    rep_v, v1 = convexity("shadow.volume_convex", curve.volume, "direct")
    rep_p, v2 = convexity("shadow.inverse_polar_convex", curve.polar, "reciprocal")
    rep_r, v3 = convexity("shadow.inverse_volume_convex", curve.volume, "reciprocal", asserted=False)
    v3 = replace(v3, note=f"informational; violations={len(rep_r.violations)}")
    res += [v1, v2, v3]

    pi = sh.check_projection_invariance(system, phi, samples, seed)
    lp = sh.check_lipschitz(system, phi, samples, seed)
    for rep in (pi, lp):
        res.append(Verdict(suite, key, label, f"shadow.{rep.name}", PASS if rep.ok else FAIL, rep.max_deviation,
                           math.nan, math.nan, 0.0, rep.tolerance - rep.max_deviation, rep.tolerance,
                           f"samples={rep.samples} violations={rep.violations}"))

    if out is not None:
        out = Path(out)
        stem = f"shadow_{key}"
        rows = [(t, l, v.lower, v.upper, p.lower, p.upper)
                for t, l, v, p in zip(curve.ts, curve.l1, curve.volume, curve.polar)]
        files = [rp.write_csv(out / f"{stem}.csv",
                              ("t", "l1_volume", "volume_lower", "volume_upper", "polar_lower", "polar_upper"),
                              rows)]
        vol_mid = [v.mid for v in curve.volume]
        inv_pol = [1.0 / p.mid for p in curve.polar]
        files.append(rp.svg_line_plot(out / f"{stem}_volume.svg", f"volume along shadow system {key}", ts,
                                      {"V(Z_t)": vol_mid},
                                      [(ts[i + 1], vol_mid[i + 1]) for i in rep_v.violations]))
        files.append(rp.svg_line_plot(out / f"{stem}_inverse_polar.svg",
                                      f"1 / polar volume along shadow system {key}", ts,
                                      {"1/V(Z_t*)": inv_pol},
                                      [(ts[i + 1], inv_pol[i + 1]) for i in rep_p.violations]))
        arts = tuple(str(f) for f in files)
        res = [replace(v, artifacts=arts) for v in res]
    return res


# --------------------------------------------------------------------------
# driver


def _default_dissection(n: int) -> list[tuple[str, VectorMultiset]]:
    e = np.eye(n)
    rng = np.random.default_rng(303)
    return [
        ("e1,e2,-e1", VectorMultiset.from_vectors(np.vstack([e, -e[:1]]))),
        ("canonical", ms.canonical_basis(n)),
        ("+-e", VectorMultiset.from_vectors(np.vstack([e, -e]))),
        ("random-obtuse", ms.random_obtuse(n, rng, extra=n)),
    ]


def _default_merge(n: int) -> list[tuple[str, VectorMultiset]]:
    e = np.eye(n)
    return [
        ("e1,e1,e2", VectorMultiset.from_vectors(np.vstack([e[:1], e]))),
        ("e1,0.5e1,e2,e1+e2", VectorMultiset.from_vectors(np.vstack([e, 0.5 * e[:1], e[:1] + e[1:2]]))),
        ("canonical", ms.canonical_basis(n)),
    ]


def _default_shadow(n: int) -> list[tuple[str, VectorMultiset]]:
    e = np.eye(n)
    return [("e1,e2,e1+e2", VectorMultiset.from_vectors(np.vstack([e, e[:1] + e[1:2]])))]


def run(cfg: ExperimentConfig, commands: Sequence[str]) -> ReportBundle:
    """Run the requested suites and write ``<out>/<suite>.csv`` (and shadow plots)."""
    unknown = [c for c in commands if c not in COMMANDS]
    if unknown:
        raise ConfigError(f"unknown command(s): {', '.join(unknown)}")
    verdicts: list[Verdict] = []
    files: list = []
    n = cfg.dimension
    for cmd in commands:
        if cmd == "verify-vp":
            vs = verify_volume_product(cfg)
        elif cmd == "verify-vr":
            vs = verify_volume_ratio(cfg)
        elif cmd == "verify-dissection":
            insts = cfg.batch() if cfg.user_supplied else _default_dissection(n)
            insts = [(lab, m) for lab, m in insts if ms.is_obtuse(m) and ms.is_spanning(m)]
            vs = _map(_task_dissection,
                      [(lab, m, cfg.phi, cfg.budget, DISSECTION_SAMPLES, cfg.seed) for lab, m in insts], cfg)
        elif cmd == "verify-merge":
            insts = cfg.batch() if cfg.user_supplied else _default_merge(n)
            vs = _map(_task_merge, [(lab, m, cfg.phi, cfg.budget) for lab, m in insts], cfg)
        else:
            insts = cfg.batch() if cfg.user_supplied else _default_shadow(n)
            out = None if cfg.out is None else Path(cfg.out) / "plots"
            vs = _map(_task_shadow,
                      [(lab, m, cfg.phi, cfg.budget, cfg.grid, out, cfg.samples, cfg.seed) for lab, m in insts],
                      cfg)
            files += sorted({a for v in vs for a in v.artifacts})
        vs = sorted(vs, key=lambda v: (v.instance, v.label, v.claim))
        verdicts += vs
        if cfg.out is not None:
            files.append(str(rp.write_csv(Path(cfg.out) / f"{cmd}.csv", CSV_HEADER, (v.row() for v in vs))))
    return ReportBundle(verdicts, files)

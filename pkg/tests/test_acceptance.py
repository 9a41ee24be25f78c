"""Acceptance criteria, one test each, at the stated tolerances and time limits.

Each test prints ``ACCEPTANCE <k> PASS|FAIL <detail>``; the lines are also
collected and repeated in the pytest terminal summary. Run this file as a
script to get just the lines.
"""

import math
import time

import numpy as np
import pytest

from orlizono import body as bd
from orlizono import harness as hz
from orlizono import multisets as ms
from orlizono import shadow as sh
from orlizono.multisets import VectorMultiset
from orlizono.norm import orlicz_norm
from orlizono.phi import identity, mix, power
from orlizono.zonotope import OrliczZonotope, l1_volume

RESULTS: dict[int, str] = {}


def record(k: int, ok: bool, detail: str, elapsed: float, limit: float):
    ok = ok and elapsed < limit
    line = f"ACCEPTANCE {k:2d} {'PASS' if ok else 'FAIL'} {detail} [{elapsed:.1f}s < {limit:g}s]"
    RESULTS[k] = line
    print(line)
    assert ok, line


def tri():
    return VectorMultiset.from_vectors([[1, 0], [0, 1], [1, 1]])


def test_01_norm_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for p in (1, 1.5, 2, 3, 10):
        phi = power(p)
        for _ in range(1000):
            f = rng.random(int(rng.integers(1, 8))) * rng.lognormal(0, 2)
            ref = float((f ** p).sum() ** (1 / p))
            worst = max(worst, abs(orlicz_norm(f, phi) - ref) / ref)
    record(1, worst <= 1e-10, f"max rel err {worst:.2e} <= 1e-10", time.perf_counter() - t0, 5)


def test_02_exact_zonotope_volume():
    t0 = time.perf_counter()
    v = l1_volume(tri())
    est, err = bd.monte_carlo_volume(OrliczZonotope(tri(), identity()).oracle(), samples=1_000_000, seed=7)
    rel = abs(est - 3) / 3
    record(2, v == 3.0 and rel < 0.01, f"l1_volume={v!r}, Monte Carlo {est:.5f} (rel {rel:.2e} < 1e-2)",
           time.perf_counter() - t0, 30)


def test_03_mahler_product_pipeline():
    t0 = time.perf_counter()
    p2 = hz.volume_product(ms.canonical_basis(2), identity())
    p3 = hz.volume_product(ms.canonical_basis(3), identity())
    ok = 7.92 <= p2.mid <= 8.08 and 10.45 <= p3.mid <= 10.88
    record(3, ok, f"square {p2.mid:.6f} in [7.92, 8.08], cube {p3.mid:.6f} in [10.45, 10.88]",
           time.perf_counter() - t0, 60)


def test_04_quarter_disk():
    t0 = time.perf_counter()
    r = hz.volume_ratio(ms.canonical_basis(2), power(2))
    record(4, 0.777 <= r.mid <= 0.793, f"R = {r.mid:.6f} in [0.777, 0.793] (pi/4 = {math.pi / 4:.6f})",
           time.perf_counter() - t0, 30)


def test_05_shadow_exactness():
    t0 = time.perf_counter()
    s = sh.orthogonalize(tri(), 0)
    vols = np.array([l1_volume(s.at(t)) for t in s.grid(9)])
    W1 = s.vectors_at(1.0)
    orth = float(np.max(np.abs(W1[1:] @ W1[0])))
    Wlo = s.vectors_at(-1.0 / s.a)
    ok = s.a == 0.5 and np.max(np.abs(vols - 3)) <= 1e-9 and orth <= 1e-12 and np.all(Wlo[0] == 0)
    record(5, ok, f"a={s.a!r}, l1 dev {np.max(np.abs(vols - 3)):.1e}, pivot dot {orth:.1e}, "
                  f"pivot at -1/a = {Wlo[0].tolist()}", time.perf_counter() - t0, 1)


def test_06_projection_and_lipschitz():
    t0 = time.perf_counter()
    worst_pi, lip_bad = 0.0, 0
    for seed in range(5):
        m = ms.random_multiset(2, 3 + seed % 3, 100 + seed)
        s = sh.orthogonalize(m)
        phi = power(2) if seed % 2 == 0 else mix([(0.5, 1), (0.5, 2)])
        pi = sh.check_projection_invariance(s, phi, 1000, seed)
        lp = sh.check_lipschitz(s, phi, 1000, seed)
        worst_pi = max(worst_pi, pi.max_deviation)
        lip_bad += lp.violations
    record(6, worst_pi <= 1e-9 and lip_bad == 0,
           f"projection deviation {worst_pi:.1e} <= 1e-9, Lipschitz violations {lip_bad}",
           time.perf_counter() - t0, 30)


def test_07_convexity_suites():
    t0 = time.perf_counter()
    bad = []
    for i in range(10):
        m = ms.random_multiset(2, 3 + i % 3, 200 + i)
        phi = power(2) if i < 5 else mix([(0.5, 1), (0.5, 2)])
        s = sh.orthogonalize(m)
        ts = s.grid(9)
        c = hz.shadow_curve(s, phi, ts, 1024)
        slack = lambda vs: [v.halfwidth + hz.REL_FLOOR * v.mid for v in vs]  # noqa: E731
        direct = sh.curve_convexity(ts, [v.mid for v in c.volume], "direct", slack(c.volume))
        recip = sh.curve_convexity(ts, [v.mid for v in c.polar], "reciprocal", slack(c.polar))
        if not (direct.convex and recip.convex):
            bad.append(i)
    record(7, not bad, f"10 instances, non-convex: {bad}", time.perf_counter() - t0, 300)


def test_08_inequality_batches():
    t0 = time.perf_counter()
    cfg = hz.ExperimentConfig(phi=power(2))
    vp = hz.verify_volume_product(cfg)
    vr = hz.verify_volume_ratio(cfg)
    fails = [v.label for v in vp + vr if v.status == hz.FAIL]
    eq = [v for v in vp + vr if v.label.startswith(("gl-canonical", "gl-obtuse"))]
    eq_ok = all(v.status == hz.PASS for v in eq) and len(eq) == 7
    strict = next(v for v in vp if v.label == "canonical+(-0.7e1)")
    strict_ok = strict.status == hz.PASS and strict.margin > strict.bars
    random_ok = sum(v.label.startswith("random") for v in vp) == 20 and sum(
        v.label.startswith("random") for v in vr) == 20
    record(8, not fails and eq_ok and strict_ok and random_ok,
           f"FAILs {fails}, equality cases PASS={eq_ok}, strict margin {strict.margin:.4g} > bars {strict.bars:.2g}",
           time.perf_counter() - t0, 600)


def test_09_dissection():
    t0 = time.perf_counter()
    m = VectorMultiset.from_vectors([[1, 0], [0, 1], [-1, 0]])
    vol, mem, ovl = hz.verify_dissection(m, power(2), samples=10_000)
    ratio = vol.value / (math.pi / 2)
    ok = all(v.status == hz.PASS for v in (vol, mem, ovl)) and 0.98 <= ratio <= 1.02 and mem.value == 0
    record(9, ok, f"V/(pi/2) = {ratio:.6f}, contradictions {int(mem.value)}, overlap {ovl.value:.1e}",
           time.perf_counter() - t0, 120)


def test_10_graph_inequalities():
    t0 = time.perf_counter()
    s = sh.orthogonalize(ms.random_multiset(2, 4, 7))
    r = sh.check_graph_inequalities(s, power(2), samples=200, seed=3, tol=1e-6)
    record(10, r.ok, f"200 tuples, worst {r.max_deviation:.2e}, violations {r.violations}",
           time.perf_counter() - t0, 120)


def test_11_determinism(tmp_path, monkeypatch):
    t0 = time.perf_counter()
    monkeypatch.delenv("ORLIZONO_THREADS", raising=False)
    rnd = hz.RandomSpec(2, (3, 4, 5), 6, 1)
    outs = []
    for threads, name in ((1, "a"), (2, "b"), (1, "c")):
        cfg = hz.ExperimentConfig(random=rnd, threads=threads, out=tmp_path / name, budget=256, samples=100)
        hz.run(cfg, ["verify-vp", "verify-vr", "verify-merge"])
        outs.append({p.name: p.read_bytes() for p in sorted((tmp_path / name).glob("*.csv"))})
    ok = outs[0] == outs[1] == outs[2] and len(outs[0]) == 3
    record(11, ok, f"{len(outs[0])} CSV files byte-identical across threads 1/2/1", time.perf_counter() - t0, 600)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))

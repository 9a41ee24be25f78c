import math

import numpy as np
import pytest

from orlizono import body as bd
from orlizono import multisets as ms
from orlizono.phi import identity, power
from orlizono.zonotope import OrliczZonotope

SQUARE = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
TRIANGLE = np.array([[0, 0], [1, 0], [0, 1]], dtype=float)


def polygon_polar_area(vertices, s):
    """Independent oracle: edges of a CCW polygon map to vertices of its polar."""
    V = np.asarray(vertices, dtype=float) - s
    c = V.mean(axis=0)
    V = V[np.argsort(np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0]))]
    P = []
    for a, b in zip(V, np.roll(V, -1, axis=0)):
        nrm = np.array([b[1] - a[1], a[0] - b[0]])
        off = float(nrm @ a)
        if off <= 0:
            return math.inf  # s is not interior
        P.append(nrm / off)
    P = np.array(P)
    x, y = P[:, 0], P[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def grid_santalo(vertices, lo, hi, steps=4):
    best = None
    for _ in range(steps):
        xs = np.linspace(lo[0], hi[0], 41)
        ys = np.linspace(lo[1], hi[1], 41)
        for x in xs:
            for y in ys:
                s = np.array([x, y])
                v = polygon_polar_area(vertices, s)
                if best is None or v < best[0]:
                    best = (v, s)
        w = (hi - lo) / 10
        lo, hi = best[1] - w, best[1] + w
    return best


def test_square_sandwich():
    s = bd.build_sandwich(bd.polytope_oracle(SQUARE), 256)
    vb = bd.volume_bounds(s)
    assert vb.lower == pytest.approx(1.0, abs=1e-9) and vb.upper == pytest.approx(1.0, abs=1e-9)


def test_disk_sandwich():
    vb = bd.volume_bounds(bd.build_sandwich(bd.ball_oracle(2), 512))
    assert vb.lower <= math.pi <= vb.upper
    assert vb.upper / vb.lower - 1 < 0.01


def test_cube_vertices_recovered():
    z = OrliczZonotope(ms.canonical_basis(3), identity())
    s = bd.build_sandwich(z.oracle(), 256)
    cube = np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)], dtype=float)
    V = s.inner[s._inner_hull.vertices]
    assert len(V) == 8
    for c in cube:
        assert np.min(np.linalg.norm(V - c, axis=1)) < 1e-6
    vb = bd.volume_bounds(s)
    assert vb.lower == pytest.approx(1.0, abs=1e-9) and vb.upper == pytest.approx(1.0, abs=1e-9)


def test_quarter_disk_volume():
    z = OrliczZonotope(ms.canonical_basis(2), power(2))
    vb = bd.volume_bounds(bd.build_sandwich(z.oracle(), 1024))
    assert vb.lower <= math.pi / 4 <= vb.upper
    assert vb.halfwidth / vb.mid < 0.01


def test_gap_shrinks():
    gaps = []
    for n in (64, 256, 1024):
        vb = bd.volume_bounds(bd.build_sandwich(bd.ball_oracle(2), n))
        gaps.append((vb.upper - vb.lower) / vb.lower)
    assert gaps[1] < 0.5 * gaps[0] and gaps[2] < 0.5 * gaps[1]


def test_polar_of_symmetric_square():
    s = bd.build_sandwich(bd.polytope_oracle(2 * SQUARE - 1), 256)
    p = bd.polar(s, np.zeros(2))
    assert bd.volume_bounds(p).mid == pytest.approx(2.0, abs=1e-9)
    assert bd.polar_volume_bounds(s, np.zeros(2)).mid == pytest.approx(2.0, abs=1e-9)


def test_polar_of_ball():
    vb = bd.polar_volume_bounds(bd.build_sandwich(bd.ball_oracle(2), 512), np.zeros(2))
    assert vb.lower <= math.pi <= vb.upper


def test_polar_center_not_interior():
    s = bd.build_sandwich(bd.polytope_oracle(SQUARE), 64)
    with pytest.raises(bd.CenterNotInterior):
        bd.polar(s, np.array([2.0, 2.0]))
    with pytest.raises(bd.CenterNotInterior):
        bd.polar_volume_bounds(s, np.array([0.0, 0.5]))


def test_polar_matches_polygon_oracle():
    s = bd.build_sandwich(bd.polytope_oracle(TRIANGLE), 128)
    for c in ([0.2, 0.3], [0.1, 0.1], [0.45, 0.3]):
        c = np.array(c)
        assert bd.polar_volume_bounds(s, c).mid == pytest.approx(polygon_polar_area(TRIANGLE, c), rel=1e-9)


def test_centroids():
    assert np.allclose(bd.centroid(bd.build_sandwich(bd.polytope_oracle(SQUARE), 64)), [0.5, 0.5])
    assert np.allclose(bd.centroid(bd.build_sandwich(bd.polytope_oracle(TRIANGLE), 64)), [1 / 3, 1 / 3])
    assert np.linalg.norm(bd.centroid(bd.build_sandwich(bd.ball_oracle(3), 512))) < 1e-8


def test_santalo_examples():
    r = bd.santalo_point(bd.polytope_oracle(2 * SQUARE - 1), 256)
    assert np.allclose(r.point, 0, atol=1e-5)
    r = bd.santalo_point(bd.polytope_oracle(SQUARE), 256)
    assert np.allclose(r.point, 0.5, atol=1e-5)
    assert r.value == pytest.approx(8.0, rel=1e-9)


def test_santalo_triangle_against_grid_search():
    r = bd.santalo_point(bd.polytope_oracle(TRIANGLE), 256)
    v, s = grid_santalo(TRIANGLE, np.array([0.01, 0.01]), np.array([0.9, 0.9]))
    assert np.allclose(r.point, s, atol=1e-3)
    assert np.allclose(r.point, 1 / 3, atol=1e-4)
    assert r.value == pytest.approx(v, rel=1e-5)
    assert r.value == pytest.approx(13.5, rel=1e-6)


def test_santalo_first_order_condition():
    z = OrliczZonotope(ms.random_multiset(2, 4, 3), power(2))
    r = bd.santalo_point(z.oracle(), 1024)
    pol = bd.polar(r.sandwich, r.point)
    assert np.linalg.norm(bd.centroid(pol)) < 1e-3


def test_translation_invariance():
    z = OrliczZonotope(ms.random_multiset(2, 3, 5), power(2))
    o = z.oracle()
    y = np.array([0.7, -1.3])
    shifted = bd.SupportOracle(2, lambda U: o.support(U) + np.atleast_2d(U) @ y,
                               lambda U: o.points(U) + y, o.critical)
    a = bd.santalo_point(o, 512).polar_volume
    b = bd.santalo_point(shifted, 512).polar_volume
    assert abs(a.mid - b.mid) <= 2 * (a.halfwidth + b.halfwidth) + 1e-7 * a.mid


def test_gl_contravariance():
    rng = np.random.default_rng(4)
    m = ms.random_multiset(2, 4, 4)
    M = ms.random_matrix(2, rng)
    a = bd.santalo_point(OrliczZonotope(m, power(2)).oracle(), 1024).polar_volume
    b = bd.santalo_point(OrliczZonotope(ms.gl_apply(M, m), power(2)).oracle(), 1024).polar_volume
    scaled = a.mid / abs(np.linalg.det(M))
    assert b.mid == pytest.approx(scaled, rel=1e-3)


def test_parallelepiped_products_are_eight():
    rng = np.random.default_rng(8)
    for _ in range(3):
        M = ms.random_matrix(2, rng)
        P = SQUARE @ M.T
        o = bd.polytope_oracle(P)
        vol = bd.volume_bounds(bd.build_sandwich(o, 256)).mid
        assert vol * bd.santalo_point(o, 256).value == pytest.approx(8.0, rel=0.01)


def test_contains_examples():
    o = OrliczZonotope(ms.canonical_basis(2), power(2)).oracle()
    assert bd.contains(o, np.array([0.0, 1.0]))[0]
    ok, cert = bd.contains(o, np.array([0.0, 1.01]))
    assert not ok and cert @ np.array([0.0, 1.0]) > 0.99
    assert bd.contains(o, np.array([0.1, 0.1]))[0]


def test_degenerate_body():
    flat = np.array([[0, 0], [1, 0], [2, 0]], dtype=float)
    o = bd.SupportOracle(2, lambda U: np.max(np.atleast_2d(U) @ flat.T, axis=1),
                         lambda U: flat[np.argmax(np.atleast_2d(U) @ flat.T, axis=1)])
    with pytest.raises(bd.DegenerateBody):
        bd.build_sandwich(o, 64)


def test_halfspace_volume_empty():
    A = np.array([[1.0, 0], [-1.0, 0], [0, 1.0], [0, -1.0]])
    assert bd.halfspace_volume(A, np.array([1.0, -2.0, 1.0, 1.0])) == 0.0
    assert bd.halfspace_volume(A, np.array([1.0, 1.0, 1.0, 1.0])) == pytest.approx(4.0)


def test_three_dimensional_ball():
    vb = bd.volume_bounds(bd.build_sandwich(bd.ball_oracle(3), 2048))
    assert vb.lower <= 4 * math.pi / 3 <= vb.upper

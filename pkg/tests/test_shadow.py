import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orlizono import multisets as ms
from orlizono import shadow as sh
from orlizono.phi import identity, mix, power
from orlizono.zonotope import OrliczZonotope, l1_volume

from conftest import vm

TRI = vm([1, 0], [0, 1], [1, 1])


def test_speed_a_example():
    assert sh.speed_a(TRI, 0) == 0.5


def test_speed_a_errors():
    # removing either vector of a basis loses the span
    with pytest.raises(sh.PivotRemovalNotSpanning):
        sh.speed_a(ms.canonical_basis(2), 0)


def test_speed_a_with_extra_opposite():
    mu = 0.7
    m = vm([1, 0], [0, 1], [-mu, 0])
    s = sh.orthogonalize(m, 0)
    vols = [l1_volume(s.at(t)) for t in s.grid(9)]
    assert np.allclose(vols, vols[0], rtol=1e-12)


def test_orthogonalize_examples():
    s = sh.orthogonalize(TRI, 0)
    assert s.a == 0.5 and s.t_lo == -2.0 and s.t_hi == 1.0
    assert s.at(1.0).allclose(ms.VectorMultiset.from_vectors([[1.5, 0], [0, 1]], [1, 2]))
    W = s.vectors_at(-2.0)
    assert np.all(W[0] == 0)
    assert s.at(-2.0).allclose(vm([0, 1], [3, 1]))
    assert s.at(0.0) == TRI


def test_pivot_orthogonal_at_one():
    for seed in range(5):
        s = sh.orthogonalize(ms.random_multiset(3, 5, seed))
        W = s.vectors_at(1.0)
        assert np.all(np.abs(W[1:] @ W[0]) <= 1e-12 * np.linalg.norm(W[0]) * np.linalg.norm(W[1:], axis=1))


def test_shadow_at_out_of_interval():
    s = sh.orthogonalize(TRI, 0)
    with pytest.raises(sh.OutOfInterval):
        sh.shadow_at(s, 1.5)
    assert sh.shadow_at(s, 0.0) == TRI


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.sampled_from([2, 3]), extra=st.integers(1, 3))
def test_volume_preservation(seed, n, extra):
    m = ms.random_multiset(n, n + extra, seed)
    s = sh.orthogonalize(m)
    vols = [l1_volume(s.at(t)) for t in s.grid(9)]
    assert np.allclose(vols, l1_volume(m), rtol=1e-9)


def brute_a(vectors):
    """Independent evaluation of the speed by enumerating index sets directly."""
    V = np.asarray(vectors, dtype=float)
    n = V.shape[1]
    rest = range(1, len(V))
    num = sum(abs(np.linalg.det(V[list(c)])) for c in itertools.combinations(rest, n))
    den = sum(abs(np.linalg.det(V[[0, *c]])) for c in itertools.combinations(rest, n - 1))
    return num / den


def test_speed_a_brute_force():
    for seed in range(8):
        m = ms.random_multiset(3, 5, seed)
        assert sh.speed_a(m, 0) == pytest.approx(brute_a(m.expanded()), rel=1e-12)


def test_graph_functions_square():
    h = OrliczZonotope(ms.canonical_basis(2), identity()).support
    v = np.array([0.0, 1.0])
    assert sh.graph_functions(h, v, np.array([0.5, 0])) == pytest.approx((1.0, 0.0), abs=1e-6)
    assert sh.graph_functions(h, v, np.array([1.0, 0])) == pytest.approx((1.0, 0.0), abs=1e-6)
    with pytest.raises(sh.XOutsideProjection):
        sh.graph_functions(h, v, np.array([1.5, 0]))


def test_graph_functions_symmetric():
    z = OrliczZonotope(vm([1, 0], [0, 1], [-1, 0], [0, -1]), power(2))
    up, low = sh.graph_functions(z.support, np.array([0.0, 1.0]), np.zeros(2))
    assert up == pytest.approx(-low, abs=1e-6)
    assert up == pytest.approx(1.0, abs=1e-6)


def test_projection_invariance():
    for seed in range(3):
        s = sh.orthogonalize(ms.random_multiset(2, 4, seed))
        r = sh.check_projection_invariance(s, power(2), 200, seed)
        assert r.ok and r.max_deviation <= 1e-9


def test_lipschitz():
    s = sh.orthogonalize(ms.random_multiset(3, 5, 2))
    r = sh.check_lipschitz(s, mix([(0.5, 1), (0.5, 3)]), 200, 1)
    assert r.ok
    x = np.zeros((1, 3))
    assert s.lipschitz_constant(power(2), x)[0] == 0.0


def test_upper_graph_convexity():
    s = sh.orthogonalize(ms.random_multiset(2, 3, 4))
    r = sh.check_upper_convexity(s, power(2), 20, 0)
    assert r.ok, r


def test_curve_convexity_examples():
    t = np.linspace(-1, 1, 9)
    assert sh.curve_convexity(t, t ** 2).convex
    assert sh.curve_convexity(t, np.ones(9)).convex
    r = sh.curve_convexity(t, -(t ** 2) + 5)
    assert r.violations == tuple(range(1, 8))
    assert sh.curve_convexity(t, 1 / (t + 2), mode="reciprocal").convex
    with pytest.raises(sh.NonMonotoneGrid):
        sh.curve_convexity(t[::-1], t ** 2)


def test_curve_convexity_uses_halfwidths():
    t = np.linspace(0, 1, 3)
    y = np.array([1.0, 1.01, 1.0])
    assert not sh.curve_convexity(t, y).convex
    assert sh.curve_convexity(t, y, halfwidths=[0.0, 0.02, 0.0]).convex

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orlizono.norm import NegativeInput, luxemburg_sum, orlicz_norm, orlicz_norm_many
from orlizono.phi import identity, mix, power, pwl


def test_examples():
    assert orlicz_norm([2, 3], identity()) == pytest.approx(5.0, rel=1e-12)
    assert orlicz_norm([3, 4], power(2)) == pytest.approx(5.0, rel=1e-12)
    assert orlicz_norm([0, 0, 0], power(2)) == 0.0


def test_negative_input():
    with pytest.raises(NegativeInput):
        orlicz_norm([1, -1], power(2))
    with pytest.raises(NegativeInput):
        orlicz_norm_many([[1, -1]], power(2))


def test_single_entry_is_exact():
    assert orlicz_norm([0, 2.5, 0], mix([(0.5, 1), (0.5, 4)])) == 2.5


@pytest.mark.parametrize("phi", [power(1.5), mix([(0.4, 1), (0.6, 3)]), pwl([(0, 0), (0.5, 0.2), (1, 1), (3, 6)])])
def test_defining_equation(phi):
    rng = np.random.default_rng(3)
    F = rng.random((50, 4))
    lam = orlicz_norm_many(F, phi)
    for f, l in zip(F, lam):
        assert luxemburg_sum(f, phi, l) == pytest.approx(1.0, abs=1e-9)


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(0)
    F = rng.random((40, 5)) * (rng.random((40, 5)) > 0.3)
    phi = mix([(0.5, 1), (0.5, 2)])
    many = orlicz_norm_many(F, phi)
    single = np.array([orlicz_norm(f, phi) for f in F])
    assert np.allclose(many, single, rtol=1e-11)


@settings(max_examples=80, deadline=None)
@given(
    f=st.lists(st.floats(0, 100), min_size=1, max_size=6),
    c=st.floats(0.01, 100),
    p=st.sampled_from([1.0, 1.5, 2.0, 3.0]),
)
def test_homogeneity(f, c, p):
    phi = power(p)
    a = orlicz_norm([c * x for x in f], phi)
    b = c * orlicz_norm(f, phi)
    assert a == pytest.approx(b, rel=1e-10, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(f=st.lists(st.floats(0, 10), min_size=2, max_size=6), g=st.lists(st.floats(0, 10), min_size=2, max_size=6))
def test_triangle_and_bracket(f, g):
    k = min(len(f), len(g))
    f, g = np.array(f[:k]), np.array(g[:k])
    phi = mix([(0.5, 1), (0.5, 2.5)])
    nf, ng, ns = orlicz_norm(f, phi), orlicz_norm(g, phi), orlicz_norm(f + g, phi)
    assert ns <= nf + ng + 1e-9 * (1 + nf + ng)
    assert f.max() - 1e-12 <= nf <= f.sum() + 1e-12

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from g2assoc import g2core as g
from g2assoc.errors import DegeneratePlane, NotInComplement, ZeroVector

vec = arrays(np.float64, 7, elements=st.floats(-10, 10, allow_nan=False, allow_subnormal=False))
E = [g.basis(i) for i in range(1, 8)]


def _perm_sign(p):
    s = 1
    p = list(p)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


def test_phi_on_basis_terms():
    for (i, j, k), s in g.PHI_TERMS:
        assert g.phi3(E[i], E[j], E[k]) == s
    assert g.phi3(E[1], E[4], E[6]) == -1.0


def test_star_phi_on_basis_terms():
    for idx, s in g.STAR_PHI_TERMS:
        assert g.star_phi4(*(E[i] for i in idx)) == s
    assert g.star_phi4(E[0], E[1], E[3], E[6]) == -1.0


def test_phi_vanishes_off_terms():
    terms = {t for t, _ in g.PHI_TERMS}
    for t in itertools.combinations(range(7), 3):
        if t not in terms:
            assert g.phi3(E[t[0]], E[t[1]], E[t[2]]) == 0.0


@given(vec, vec, vec)
@settings(max_examples=200, deadline=None)
def test_phi_alternating(x, y, z):
    v = g.phi3(x, y, z)
    scale = 1 + np.linalg.norm(x) * np.linalg.norm(y) * np.linalg.norm(z)
    for p in itertools.permutations(range(3)):
        args = [(x, y, z)[i] for i in p]
        assert abs(g.phi3(*args) - _perm_sign(p) * v) <= 1e-12 * scale


def test_cross_examples():
    assert np.array_equal(g.cross(E[3], E[5]), E[1])
    assert np.array_equal(g.cross(E[1], E[5]), -E[3])
    assert np.array_equal(g.cross(E[1], E[2]), E[0])


@given(vec, vec)
@settings(max_examples=200, deadline=None)
def test_cross_properties(x, y):
    c = g.cross(x, y)
    scale = 1 + np.linalg.norm(x) * np.linalg.norm(y)
    assert np.allclose(c, -g.cross(y, x), atol=1e-12 * scale)
    assert abs(c @ x) <= 1e-10 * scale * (1 + np.linalg.norm(x))
    assert abs(c @ y) <= 1e-10 * scale * (1 + np.linalg.norm(y))
    # |x × y|^2 = |x|^2|y|^2 - g(x,y)^2
    lhs = c @ c
    rhs = (x @ x) * (y @ y) - (x @ y) ** 2
    assert abs(lhs - rhs) <= 1e-9 * scale**2


def test_associator_example():
    assert np.array_equal(g.associator(E[0], E[1], E[3]), -2 * E[6])
    assert np.array_equal(g.associator(E[0], E[1], E[2]), np.zeros(7))


def test_octonion_unit_and_norm():
    rng = np.random.default_rng(4)
    a = g.Octonion(rng.normal(), rng.normal(size=7))
    b = g.Octonion(rng.normal(), rng.normal(size=7))
    one = g.Octonion.real(1.0)
    assert np.allclose((one * a).im, a.im) and (one * a).re == pytest.approx(a.re)
    assert (a * b).norm() == pytest.approx(a.norm() * b.norm(), rel=1e-12)


def test_octonion_commutator_is_twice_cross():
    rng = np.random.default_rng(5)
    x, y = rng.normal(size=(2, 7))
    X, Y = g.Octonion.imaginary(x), g.Octonion.imaginary(y)
    c = X * Y - Y * X
    assert abs(c.re) < 1e-13
    assert np.allclose(0.5 * c.im, g.cross(x, y), atol=1e-13)


def test_associative_plane_detection():
    ok, res = g.is_associative_plane(E[0], E[1], E[2])
    assert ok and res == 0.0
    ok, res = g.is_associative_plane(E[0], E[1], E[3])
    assert not ok and res == pytest.approx(2.0)
    rng = np.random.default_rng(6)
    x, y = rng.normal(size=(2, 7))
    ok, _ = g.is_associative_plane(x, y, g.cross(x, y))
    assert ok
    with pytest.raises(DegeneratePlane):
        g.is_associative_plane(E[0], 2 * E[0], E[1])


def test_split_frame():
    with pytest.raises(ZeroVector):
        g.split_along(np.zeros(7))
    f = g.split_along(3 * E[0])
    assert np.array_equal(f.axis, E[0])
    # J is a complex structure on the complement
    rng = np.random.default_rng(7)
    x = f.project(rng.normal(size=7))
    assert np.allclose(f.J(f.J(x)), -x, atol=1e-13)
    assert f.omega(E[1], E[2]) == 1.0
    assert np.array_equal(f.J(E[1]), E[2])
    u, v = f.project(rng.normal(size=(2, 7)))
    w = g.complex_cross(u, v, f)
    assert abs(w @ f.axis) < 1e-13
    with pytest.raises(NotInComplement):
        g.complex_cross(E[0] + E[1], E[2], f)

import numpy as np
import pytest

from g2assoc import closedform as cf
from g2assoc.affine import affine_rhs
from g2assoc.errors import (
    AlphaConstraintViolated, DriftPresent, InvalidFraction, NoCommonPeriod, ResonantFrequency,
)
from g2assoc.verify import sl_detect

S2 = np.sqrt(2)
CONSTS = dict(B=0.1 + 0.05j, Bp=0.02 - 0.03j, C=-0.07j, Cp=0.04, D=0.03 + 0.01j, Dp=-0.02j)


@pytest.fixture(scope="module")
def p_iv():
    return cf.derive_constants(1.0, S2, S2)


@pytest.fixture(scope="module")
def p13():
    return cf.params_from_fraction(1, 3)


@pytest.fixture(scope="module")
def generic(p_iv):
    return cf.build_solution(p_iv, **CONSTS, z0=0.1, r0=(0.1, 0.2j, -0.1))


def test_derive_constants(p_iv):
    assert p_iv.a == pytest.approx((-2, 1, 1), abs=1e-14)
    assert p_iv.lam == pytest.approx(np.sqrt(3), abs=1e-14)
    s = 1.7
    q = cf.derive_constants(s, s * S2, s * S2)
    # a_j = alpha_k alpha_l / alpha_m is homogeneous of degree one
    assert np.allclose(q.a, np.array(p_iv.a) * s)
    assert q.lam == pytest.approx(p_iv.lam * s)
    with pytest.raises(AlphaConstraintViolated):
        cf.derive_constants(1, 1, 1)
    with pytest.raises(AlphaConstraintViolated):
        cf.derive_constants(-1, S2, S2)


def test_T_structure(p_iv):
    T = cf.build_T(p_iv)
    x1, x2, x3 = p_iv.alpha
    assert np.array_equal(T[0], [0, -x1 / 2, x2 / 2, x3 / 2, x1 / 2, -x2 / 2, -x3 / 2])
    assert np.abs(T @ p_iv.alpha_vector).max() < 1e-14
    lam = np.sqrt(3)
    ev = np.sort(np.linalg.eigvals(T).real)
    assert np.allclose(ev, [-3 * lam, -lam, -lam, 0, lam, lam, 3 * lam], atol=1e-10)


def test_T_is_the_linear_system(generic, p_iv):
    # d/dt (x, beta, conj beta) = (i/2) T (x, beta, conj beta), checked coefficient-wise
    c = generic.components
    a1, a2, a3 = p_iv.a
    from g2assoc.expsum import ExpSum
    beta = [c["p1"] * ExpSum.exp(-a1, -1j), c["p2"] * ExpSum.exp(-a2), c["p3"] * ExpSum.exp(-a3)]
    X = [c["x"]] + beta + [b.conj() for b in beta]
    T = cf.build_T(p_iv)
    for i in range(7):
        rhs = sum((X[j] * (0.5j * T[i, j]) for j in range(7)), ExpSum.zero())
        assert X[i].derivative().coefficient_distance(rhs) < 1e-12


@pytest.mark.parametrize("alpha", [(1.0, S2, S2), (1.0, 1.2, 1 / np.sqrt(1 - 1 / 1.44))])
def test_eigensystem(alpha):
    p = cf.derive_constants(*alpha)
    T = cf.build_T(p)
    e = cf.eigensystem(T, p.lam)
    assert max(e.residuals.values()) < 1e-10 * np.linalg.norm(T, 2)
    assert e.b_plus[2] == e.b_plus[5] == 0
    assert e.c_plus[1] == e.c_plus[4] == 0
    assert e.d_plus[0] == 0
    assert np.array_equal(cf.swap(e.b_plus), e.b_minus)
    for v in (e.b_plus, e.c_plus, e.d_plus):
        assert np.linalg.norm(v) == pytest.approx(1.0)
        assert v[np.flatnonzero(np.abs(v) > 1e-12)[0]] > 0


def test_components_solve_affine_system(generic):
    t = np.linspace(-3, 5, 17)
    d = affine_rhs(cf.w_states(generic, t)) - cf.w_states(generic, t, derivative=True)
    assert np.abs(d).max() < 1e-12


def test_p1_equation_coefficientwise(generic):
    c = generic.components
    rhs = c["x"] * c["w1"] * 1j + (c["w2"] * c["p3"]).conj() + (c["w3"] * c["p2"]).conj()
    assert c["p1"].derivative().coefficient_distance(rhs) < 1e-12


def test_conjugate_rows(generic, p_iv):
    # x is real: its sum is conjugation symmetric
    x = generic.components["x"]
    assert x.coefficient_distance(x.conj()) < 1e-15


def test_zero_constants(p_iv):
    sol = cf.build_solution(p_iv, z0=0.3, r0=(1, 2j, 3))
    for k in ("x", "y", "p1", "q3"):
        assert sol.components[k].max_coef() == 0
    assert sol.components["z"].is_constant() and sol.components["z"].offset == 0.3
    init = cf.embed_w(sol)
    assert not init.w[3:5].any()
    assert np.allclose(init.w[5], [0.3, 1, 0, 0, 2, 3, 0])
    assert np.allclose(init.w[0], [0, 0, 0.5, 0, 0, 0, 0])


def test_time_translation(p_iv):
    t0 = 0.37
    a = cf.build_solution(p_iv, **CONSTS)
    h = np.exp(0.5j * p_iv.lam * t0)
    shifted = {k: v * (h**3 if k.startswith("D") else h) for k, v in CONSTS.items()}
    b = cf.build_solution(p_iv, **shifted)
    for k in ("x", "y"):
        assert a.components[k].shift(t0).coefficient_distance(b.components[k]) < 1e-14
    # p_j, q_j also carry exp(i a_j t); the phase-free parts beta_j shift like x
    from g2assoc.expsum import ExpSum
    for j, aj in enumerate(p_iv.a, 1):
        for k in (f"p{j}", f"q{j}"):
            ba = a.components[k] * ExpSum.exp(-aj)
            bb = b.components[k] * ExpSum.exp(-aj)
            assert ba.shift(t0).coefficient_distance(bb) < 1e-14


def test_rhs_at_embedded_state(generic):
    w = cf.embed_w(generic).w
    assert np.abs(affine_rhs(w) - cf.w_states(generic, 0.0, derivative=True)).max() < 1e-10


def test_evaluate_and_frames(generic):
    from g2assoc.g2core import associator, cross, norm
    assert np.allclose(cf.evaluate(generic, 0, 0, 0.4), cf.w_states(generic, 0.4)[5])
    rng = np.random.default_rng(0)
    y1, y2, t = rng.uniform(-2, 2, (3, 1000))
    fy1, fy2, ft = cf.frame(generic, y1, y2, t)
    res = norm(associator(fy1, fy2, ft)) / (norm(fy1) * norm(fy2) * norm(ft))
    assert res.max() < 1e-9
    assert (norm(cross(fy1, fy2) - ft) / norm(ft)).max() < 1e-12
    h = 1e-6
    fd = (cf.evaluate(generic, y1 + h, y2, t) - cf.evaluate(generic, y1 - h, y2, t)) / (2 * h)
    assert np.abs(fd - fy1).max() < 1e-7


def test_periodic_params():
    assert cf.periodic_params(1, 3) == (-8, 3, 5, 7)
    assert cf.periodic_params(2, 7) == (-15, 7, 8, 13)
    for bad in ((2, 4), (1, 2), (3, 5), (0, 3)):
        with pytest.raises(InvalidFraction):
            cf.periodic_params(*bad)
    p = cf.params_from_fraction(2, 7)
    q = cf.derive_constants(*p.alpha)
    assert np.allclose(q.a, p.a, atol=1e-12) and q.lam == pytest.approx(p.lam, abs=1e-12)


def test_resonance_rejected():
    # a2 = lam is impossible for the constrained family, so force it directly
    p = cf.AlphaParams((1.0, 1.0, 1.0), (-2.0, 1.0, 1.0), 1.0)
    with pytest.raises(ResonantFrequency):
        cf.build_solution(p)


def test_periodicity(p13):
    k = 0.4
    c = dict(B=0.1 + 0.05j, C=-0.07j, D=0.03 + 0.01j)
    sol = cf.build_solution(p13, **c, **{n + "p": k * v for n, v in c.items()})
    assert sol.max_drift < 1e-15
    rep = cf.check_periodicity(sol)
    assert rep.passed()
    zero = cf.check_periodicity(cf.build_solution(p13))
    assert zero.half_period_residual < 1e-12
    with pytest.raises(DriftPresent):
        cf.check_periodicity(cf.build_solution(p13, **CONSTS))
    irr = cf.derive_constants(1.0, 1.2, 1 / np.sqrt(1 - 1 / 1.44))
    with pytest.raises((DriftPresent, NoCommonPeriod)):
        cf.check_periodicity(cf.build_solution(irr, B=0.1, Bp=0.05))


def test_cone(p13):
    t, x2, x3 = 0.3, 0.7, -0.4
    P = cf.cone_point(p13, t, x2, x3)
    d, _ = cf.distance_to_cone(p13, P, (t + 0.01, x2 + 0.01, x3))
    assert d < 1e-10
    zero = cf.asymptotic_cone(cf.build_solution(p13))
    assert np.all(zero.distances < 1e-12 * zero.radii)
    c = dict(B=0.1 + 0.05j, C=-0.07j, D=0.03 + 0.01j)
    fit = cf.asymptotic_cone(cf.build_solution(p13, **c, **{n + "p": 0.4 * v for n, v in c.items()}))
    assert 0.4 <= fit.slope <= 0.6


def test_sl_detection(p13, generic):
    assert sl_detect(cf.build_solution(p13)).is_sl
    assert not sl_detect(generic).is_sl

"""Jacobi elliptic functions and reference solutions of the SL 3-fold system

    dz1/dt = 2 conj(z2 z3),  dz2/dt = -2 conj(z3 z1),  dz3/dt = -2 conj(z1 z2),

which is the w1, w2, w3 part of the affine evolution when each z_j sits in
its own complex plane of C^3 (see ``sl_embed``).
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import InvalidCaseParams, ModulusOutOfRange

_LANDEN_TOL = 1e-16


@dataclass(frozen=True)
class JacobiTriple:
    sn: float
    cn: float
    dn: float
    u: float
    k: float


def _agm_chain(k):
    a, b, c = [1.0], [np.sqrt((1.0 - k) * (1.0 + k))], [k]
    while abs(c[-1]) > _LANDEN_TOL * a[-1] and len(a) < 64:
        a.append(0.5 * (a[-1] + b[-1]))
        b.append(np.sqrt(a[-2] * b[-1]))
        c.append(0.5 * (a[-2] - b[-2]))
    return a, c


def _check_k(k):
    k = float(k)
    if not (0.0 <= k <= 1.0) or np.isnan(k):
        raise ModulusOutOfRange(f"modulus must lie in [0, 1], got {k}")
    return k


def quarter_period(k: float) -> float:
    """Complete elliptic integral K(k) = pi / (2 AGM(1, sqrt(1-k^2)))."""
    k = _check_k(k)
    if k == 1.0:
        return float("inf")
    a, _ = _agm_chain(k)
    return float(np.pi / (2.0 * a[-1]))


def sncndn(u, k):
    """Vectorised (sn, cn, dn) by the descending Landen (AGM) scheme."""
    k = _check_k(k)
    u = np.asarray(u, dtype=float)
    if k == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    if k == 1.0:
        s = 1.0 / np.cosh(u)
        return np.tanh(u), s, s.copy()
    a, c = _agm_chain(k)
    n = len(a) - 1
    phi = (2.0**n) * a[n] * u
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(np.clip(c[j] / a[j] * np.sin(phi), -1.0, 1.0)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = np.sqrt(np.maximum(0.0, 1.0 - k * k * sn * sn))
    return sn, cn, dn


def jacobi(u: float, k: float) -> JacobiTriple:
    sn, cn, dn = sncndn(u, k)
    return JacobiTriple(float(sn), float(cn), float(dn), float(u), float(k))


# -- reference solutions -----------------------------------------------------

CASES = ("i", "ii", "iii", "iv")


@dataclass(frozen=True)
class SLRefParams:
    """Parameters of one reference solution family.

    Case (i) uses ``alpha[0]`` only. Cases (ii)-(iv) need
    ``alpha1^-2 = alpha2^-2 + alpha3^-2``; case (iii) additionally needs
    ``0 <= A <= alpha1 alpha2 alpha3`` and uses ``theta1_0``. The equations
    force ``sin(theta1(0)) = 1``, hence the default. At ``A = 0`` the polar
    form only holds until z1 first vanishes.
    """

    case: str
    alpha: tuple
    A: float = 0.0
    theta1_0: float = np.pi / 2

    def __post_init__(self):
        if self.case not in CASES:
            raise InvalidCaseParams(f"unknown case {self.case!r}")
        al = tuple(float(x) for x in self.alpha)
        if self.case == "i":
            if len(al) < 1 or al[0] <= 0:
                raise InvalidCaseParams("case (i) needs alpha1 > 0")
        else:
            if len(al) != 3 or min(al) <= 0:
                raise InvalidCaseParams("need three positive alphas")
            a1, a2, a3 = al
            lhs, rhs = a1**-2, a2**-2 + a3**-2
            if abs(lhs - rhs) > 1e-12 * lhs:
                raise InvalidCaseParams("alpha1^-2 must equal alpha2^-2 + alpha3^-2")
            if self.case == "ii" and not a2 <= a3:
                raise InvalidCaseParams("case (ii) expects alpha2 <= alpha3")
            if self.case == "iii" and not (0.0 <= self.A <= a1 * a2 * a3):
                raise InvalidCaseParams("A must lie in [0, alpha1 alpha2 alpha3]")
        object.__setattr__(self, "alpha", al)

    # derived quantities
    @property
    def a(self):
        a1, a2, a3 = self.alpha
        return (-a2 * a3 / a1, a3 * a1 / a2, a1 * a2 / a3)

    @property
    def sigma_tau(self):
        a1, a2, a3 = self.alpha
        if self.case == "ii":
            return np.sqrt(a1**2 + a3**2), np.sqrt((a1**2 + a2**2) / (a1**2 + a3**2))
        if self.case == "iii":
            g1, g2, g3 = self.gammas
            return np.sqrt(g3 - g1), np.sqrt((g2 - g1) / (g3 - g1))
        raise AttributeError("sigma/tau only defined for cases (ii) and (iii)")

    @property
    def gammas(self):
        """Roots of ``Q(v) - A^2`` with ``Q(v) = (alpha1^2+v)(alpha2^2-v)(alpha3^2-v)``."""
        a1, a2, a3 = (x * x for x in self.alpha)
        # (a1+v)(a2-v)(a3-v) - A^2, expanded in v
        coeffs = [1.0, a1 - a2 - a3, a2 * a3 - a1 * a2 - a1 * a3, a1 * a2 * a3 - self.A**2]
        roots = np.sort(np.real(np.roots(coeffs)))
        return tuple(float(r) for r in roots)


def _Q(p, v):
    a1, a2, a3 = (x * x for x in p.alpha)
    return (a1 + v) * (a2 - v) * (a3 - v)


def _case_iii(p, t):
    g1, g2, g3 = p.gammas
    sigma, tau = p.sigma_tau
    A = p.A
    a1, a2, a3 = (x * x for x in p.alpha)

    def v_of(s):
        return g1 + (g2 - g1) * sncndn(sigma * s, tau)[0] ** 2

    def theta(t0, rate):
        val, _ = quad(lambda s: rate(v_of(s)), 0.0, t0, epsabs=1e-12, epsrel=1e-10, limit=200)
        return val

    out = []
    for tt in np.atleast_1d(t):
        v = v_of(tt)
        th1 = p.theta1_0 + theta(tt, lambda v: -A / (a1 + v))
        th2 = theta(tt, lambda v: A / (a2 - v))
        th3 = theta(tt, lambda v: A / (a3 - v))
        out.append((
            0.5 * np.exp(1j * th1) * np.sqrt(max(a1 + v, 0.0)),
            0.5 * np.exp(1j * th2) * np.sqrt(max(a2 - v, 0.0)),
            0.5 * np.exp(1j * th3) * np.sqrt(max(a3 - v, 0.0)),
        ))
    return np.array(out)


def sl_reference(params: SLRefParams, t):
    """``(z1, z2, z3)`` of the chosen family; arrays if ``t`` is an array."""
    t_arr = np.asarray(t, dtype=float)
    p = params
    if p.case == "i":
        c = np.sqrt(3.0) * p.alpha[0]
        z1 = 0.5 * c * np.tanh(c * t_arr) + 0j
        z2 = 0.5 * c / np.cosh(c * t_arr) + 0j
        z = np.stack([z1, z2, z2.copy()], axis=-1)
    elif p.case == "ii":
        a1, a2, a3 = p.alpha
        sigma, tau = p.sigma_tau
        sn, cn, dn = sncndn(sigma * t_arr, tau)
        z = 0.5 * np.stack([
            np.sqrt(a1**2 + a2**2) * sn + 0j,
            np.sqrt(a1**2 + a2**2) * cn + 0j,
            np.sqrt(a1**2 + a3**2) * dn + 0j,
        ], axis=-1)
    elif p.case == "iii":
        z = _case_iii(p, t_arr).reshape(t_arr.shape + (3,))
    else:
        a = p.a
        z = 0.5 * np.stack([
            1j * p.alpha[0] * np.exp(1j * a[0] * t_arr),
            p.alpha[1] * np.exp(1j * a[1] * t_arr),
            p.alpha[2] * np.exp(1j * a[2] * t_arr),
        ], axis=-1)
    return z if t_arr.ndim else tuple(complex(v) for v in z)


def sl_rhs(z):
    z = np.asarray(z, dtype=complex)
    z1, z2, z3 = z[..., 0], z[..., 1], z[..., 2]
    return 2.0 * np.conj(np.stack([z2 * z3, -z3 * z1, -z1 * z2], axis=-1))


def sl_embed(z):
    """Place ``(z1, z2, z3)`` as w1, w2, w3 in R^7 (one complex plane each)."""
    z = np.asarray(z, dtype=complex)
    w = np.zeros(z.shape[:-1] + (3, 7))
    for j in range(3):
        w[..., j, 1 + 2 * j] = z[..., j].real
        w[..., j, 2 + 2 * j] = z[..., j].imag
    return w

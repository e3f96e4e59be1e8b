"""Explicit solutions of the affine evolution built on the periodic SL data

    2 w1 = i alpha1 e^{i a1 t},  2 w2 = alpha2 e^{i a2 t},  2 w3 = alpha3 e^{i a3 t}.

The linear equations for (x, p_j) and (y, q_j) reduce, after removing the
phases e^{i a_j t}, to a constant 7x7 system whose eigenvalues are
0, ±lam, ±lam, ±3 lam. Every component is therefore a finite exponential
sum, and z, r_j follow by exact termwise integration.
"""

from dataclasses import dataclass, field
from math import gcd

import numpy as np
from scipy.optimize import least_squares

from .affine import AffineInit, frame_from_states
from .errors import (
    AlphaConstraintViolated, DegenerateEigenspace, DriftPresent, InvalidFraction,
    NoCommonPeriod, ResonantFrequency,
)
from .expsum import ExpSum
from .mesh import SurfaceMesh, frame_residuals
from .verify import divergence_fit

EIG_TOL = 1e-10
# multiples of lam that occur in the frequencies a_j + m lam
RESONANCE_MULTIPLES = (0.0, 0.5, 1.0, 1.5, 2.0, 3.0)


@dataclass(frozen=True)
class AlphaParams:
    alpha: tuple
    a: tuple
    lam: float

    @property
    def alpha_vector(self):
        a1, a2, a3 = self.alpha
        return np.array([0.0, a1, a2, a3, a1, a2, a3])


def derive_constants(a1: float, a2: float, a3: float, tol: float = 1e-9) -> AlphaParams:
    al = (float(a1), float(a2), float(a3))
    if min(al) <= 0:
        raise AlphaConstraintViolated("alphas must be positive")
    lhs, rhs = al[0] ** -2, al[1] ** -2 + al[2] ** -2
    if abs(lhs - rhs) > tol * lhs:
        raise AlphaConstraintViolated(
            f"alpha1^-2 = {lhs!r} differs from alpha2^-2 + alpha3^-2 = {rhs!r}")
    x1, x2, x3 = al
    a = (-x2 * x3 / x1, x3 * x1 / x2, x1 * x2 / x3)
    lam = float(np.sqrt(a[1] ** 2 - a[0] * a[2]))
    return AlphaParams(al, a, lam)


def periodic_params(p: int, q: int):
    """Integer ``(a1, a2, a3, lam)`` for the fraction ``p/q`` in (0, 1/2)."""
    if not (isinstance(p, (int, np.integer)) and isinstance(q, (int, np.integer))):
        raise InvalidFraction("p and q must be integers")
    p, q = int(p), int(q)
    if p <= 0 or q <= 0 or gcd(p, q) != 1 or not 2 * p < q:
        raise InvalidFraction(f"need coprime 0 < p/q < 1/2, got {p}/{q}")
    a1, a2, a3, lam = p * p - q * q, q * q - 2 * p * q, 2 * p * q - p * p, p * p - p * q + q * q
    if (p + q) % 3 == 0:
        a1, a2, a3, lam = a1 // 3, a2 // 3, a3 // 3, lam // 3
    assert a1 + a2 + a3 == 0
    assert lam * lam == a2 * a2 - a1 * a3
    assert gcd(gcd(abs(a1), abs(a2)), abs(a3)) == 1
    assert lam % 2 == 1
    return a1, a2, a3, lam


def params_from_fraction(p: int, q: int) -> AlphaParams:
    """Alpha data whose a_j and lam are the integers of :func:`periodic_params`."""
    a1, a2, a3, lam = periodic_params(p, q)
    alpha = (float(np.sqrt(a2 * a3)), float(np.sqrt(-a1 * a3)), float(np.sqrt(-a1 * a2)))
    return AlphaParams(alpha, (float(a1), float(a2), float(a3)), float(lam))


def parse_fraction(text: str):
    try:
        p, q = (int(s) for s in text.split("/"))
    except ValueError as exc:
        raise InvalidFraction(f"cannot parse fraction {text!r}") from exc
    return p, q


# -- the linear system -------------------------------------------------------

def build_T(params: AlphaParams) -> np.ndarray:
    """Matrix with ``d/dt (x, b1, b2, b3, conj b1, conj b2, conj b3) = (i/2) T (...)``."""
    x1, x2, x3 = params.alpha
    a1, a2, a3 = params.a
    return np.array([
        [0.0, -x1 / 2, x2 / 2, x3 / 2, x1 / 2, -x2 / 2, -x3 / 2],
        [x1, -2 * a1, 0, 0, 0, -x3, -x2],
        [x2, 0, -2 * a2, 0, x3, 0, x1],
        [x3, 0, 0, -2 * a3, x2, x1, 0],
        [-x1, 0, x3, x2, 2 * a1, 0, 0],
        [-x2, -x3, 0, -x1, 0, 2 * a2, 0],
        [-x3, -x2, -x1, 0, 0, 0, 2 * a3],
    ])


# (x, b1, b2, b3, cb1, cb2, cb3) -> (x, cb1, cb2, cb3, b1, b2, b3)
_SWAP = np.array([0, 4, 5, 6, 1, 2, 3])


def swap(v):
    return np.asarray(v)[..., _SWAP]


def _normalise(v):
    v = v / np.linalg.norm(v)
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    return -v if v[nz[0]] < 0 else v


def _null_space(M, dim):
    _, s, vt = np.linalg.svd(M)
    return vt[-dim:].T, s


@dataclass
class EigenBasis:
    lam: float
    a: np.ndarray
    b_plus: np.ndarray
    b_minus: np.ndarray
    c_plus: np.ndarray
    c_minus: np.ndarray
    d_plus: np.ndarray
    d_minus: np.ndarray
    residuals: dict = field(default_factory=dict)


def _pattern_vector(V, zeros, scale, name):
    # combination of the columns of V vanishing at the `zeros` components
    M = V[zeros, :]
    _, s, vt = np.linalg.svd(M)
    if s[-1] > EIG_TOL * scale or s[0] <= EIG_TOL * scale:
        raise DegenerateEigenspace(f"cannot split eigenplane into the {name} pattern",
                                   residual=float(s[-1]))
    v = V @ vt[-1]
    v[zeros] = 0.0
    return _normalise(v)


def eigensystem(T, lam: float | None = None) -> EigenBasis:
    """Eigenvectors of ``T`` in the sparse normal form.

    ``b±`` vanish in the third and sixth entries, ``c±`` in the second and
    fifth, ``d±`` in the first. ``+`` vectors have unit norm with first
    nonzero entry positive; ``-`` vectors are their swaps.
    """
    T = np.asarray(T, dtype=float)
    scale = float(np.linalg.norm(T, 2))
    if lam is None:
        lam = float(np.max(np.abs(np.linalg.eigvals(T)))) / 3.0
    eye = np.eye(7)
    a, _ = _null_space(T, 1)
    a = _normalise(a[:, 0])
    V, s = _null_space(T - lam * eye, 2)
    if s[-3] <= EIG_TOL * scale:
        raise DegenerateEigenspace("lam eigenspace has dimension above 2", residual=float(s[-3]))
    b = _pattern_vector(V, [2, 5], scale, "b")
    c = _pattern_vector(V, [1, 4], scale, "c")
    D, _ = _null_space(T - 3 * lam * eye, 1)
    d = D[:, 0].copy()
    if abs(d[0]) > EIG_TOL:
        raise DegenerateEigenspace("3 lam eigenvector has nonzero first entry", residual=abs(d[0]))
    d[0] = 0.0
    d = _normalise(d)
    basis = EigenBasis(lam, a, b, swap(b), c, swap(c), d, swap(d))
    basis.residuals = {
        "a": float(np.linalg.norm(T @ a)),
        "b_plus": float(np.linalg.norm(T @ b - lam * b)),
        "b_minus": float(np.linalg.norm(T @ swap(b) + lam * swap(b))),
        "c_plus": float(np.linalg.norm(T @ c - lam * c)),
        "c_minus": float(np.linalg.norm(T @ swap(c) + lam * swap(c))),
        "d_plus": float(np.linalg.norm(T @ d - 3 * lam * d)),
        "d_minus": float(np.linalg.norm(T @ swap(d) + 3 * lam * swap(d))),
    }
    worst = max(basis.residuals.values())
    if worst > EIG_TOL * scale:
        raise DegenerateEigenspace("eigenvector residual too large", residual=worst)
    return basis


# -- assembled solutions -----------------------------------------------------

COMPONENTS = ("x", "y", "z", "w1", "w2", "w3", "p1", "p2", "p3", "q1", "q2", "q3", "r1", "r2", "r3")


@dataclass
class ClosedFormSolution:
    params: AlphaParams
    basis: EigenBasis
    constants: dict
    z0: float
    r0: tuple
    components: dict

    def __getattr__(self, name):
        comps = self.__dict__.get("components")
        if comps is not None and name in comps:
            return comps[name]
        raise AttributeError(name)

    @property
    def derivatives(self):
        cache = self.__dict__.setdefault("_deriv", {})
        if not cache:
            cache.update({k: v.derivative() for k, v in self.components.items()})
        return cache

    @property
    def z_drift(self) -> float:
        return abs(self.components["z"].drift)

    @property
    def max_drift(self) -> float:
        return max(abs(self.components[k].drift) for k in ("z", "r1", "r2", "r3"))

    def frequencies(self):
        fs = [self.components[k].freqs for k in COMPONENTS]
        return np.unique(np.concatenate(fs))


def _check_resonance(params, tol=1e-9):
    scale = max(1.0, params.lam, *(abs(a) for a in params.a))
    for j, aj in enumerate(params.a):
        for m in RESONANCE_MULTIPLES:
            for sgn in (1.0, -1.0):
                if abs(aj + sgn * m * params.lam) <= tol * scale:
                    raise ResonantFrequency(
                        f"a{j + 1} {'+' if sgn > 0 else '-'} {m} lam = 0: exact integration impossible")


def _row_sums(basis, lam, B, C, D):
    """(x, beta1, beta2, beta3) as exponential sums."""
    h = 0.5 * lam
    out = []
    for i in range(4):
        out.append(
            ExpSum([h, -h, 3 * h, -3 * h], [
                B * basis.b_plus[i] + C * basis.c_plus[i],
                np.conj(B) * basis.b_minus[i] + np.conj(C) * basis.c_minus[i],
                D * basis.d_plus[i],
                np.conj(D) * basis.d_minus[i],
            ])
        )
    return out


def build_solution(params: AlphaParams, B=0, Bp=0, C=0, Cp=0, D=0, Dp=0, z0: float = 0.0,
                   r0=(0, 0, 0), basis: EigenBasis | None = None,
                   check_resonance: bool = True) -> ClosedFormSolution:
    if check_resonance:
        _check_resonance(params)
    if basis is None:
        basis = eigensystem(build_T(params), params.lam)
    B, Bp, C, Cp, D, Dp = (complex(v) for v in (B, Bp, C, Cp, D, Dp))
    a1, a2, a3 = params.a
    x1, x2, x3 = params.alpha
    e1, e2, e3 = ExpSum.exp(a1), ExpSum.exp(a2), ExpSum.exp(a3)
    w1, w2, w3 = e1 * (0.5j * x1), e2 * (0.5 * x2), e3 * (0.5 * x3)

    xr, b1, b2, b3 = _row_sums(basis, params.lam, B, C, D)
    yr, c1, c2, c3 = _row_sums(basis, params.lam, Bp, Cp, Dp)
    x, y = xr.re(), yr.re()
    p1, p2, p3 = e1 * b1 * 1j, e2 * b2, e3 * b3
    q1, q2, q3 = e1 * c1 * 1j, e2 * c2, e3 * c3

    cj = ExpSum.conj
    dz = (cj(p1) * q1 - cj(p2) * q2 - cj(p3) * q3).im()
    z = dz.integral(z0).re()
    r0 = tuple(complex(v) for v in r0)
    r1 = (x * p1 * 1j + y * q1 * 1j + cj(p2 * p3) + cj(q2 * q3)).integral(r0[0])
    r2 = (x * p2 * 1j - y * q2 * 1j - cj(p3 * p1) + cj(q3 * q1)).integral(r0[1])
    r3 = (x * q3 * 1j + y * p3 * 1j - cj(p1 * q2 + p2 * q1)).integral(r0[2])
    comps = dict(x=x, y=y, z=z, w1=w1, w2=w2, w3=w3, p1=p1, p2=p2, p3=p3,
                 q1=q1, q2=q2, q3=q3, r1=r1, r2=r2, r3=r3)
    consts = dict(B=B, Bp=Bp, C=C, Cp=Cp, D=D, Dp=Dp)
    return ClosedFormSolution(params, basis, consts, float(z0), r0, comps)


def _emb(real, c1, c2, c3):
    return np.stack([real, c1.real, c1.imag, c2.real, c2.imag, c3.real, c3.imag], axis=-1)


def w_states(sol: ClosedFormSolution, t, derivative: bool = False):
    """w1..w6 (or their t-derivatives) as an array ``t.shape + (6, 7)``."""
    c = sol.derivatives if derivative else sol.components
    t = np.asarray(t, dtype=float)
    v = {k: c[k](t) for k in COMPONENTS}
    zero = np.zeros(t.shape)
    zc = zero + 0j
    return np.stack([
        _emb(zero, v["w1"], zc, zc),
        _emb(zero, zc, v["w2"], zc),
        _emb(zero, zc, zc, v["w3"]),
        _emb(v["y"].real, v["p1"], v["p2"], v["q3"]),
        _emb(-v["x"].real, v["q1"], -v["q2"], v["p3"]),
        _emb(v["z"].real, v["r1"], v["r2"], v["r3"]),
    ], axis=-2)


def embed_w(sol: ClosedFormSolution) -> AffineInit:
    return AffineInit(w_states(sol, 0.0))


def evaluate(sol: ClosedFormSolution, y1, y2, t):
    w = w_states(sol, t)
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    c = np.stack(np.broadcast_arrays(0.5 * (y1**2 + y2**2), 0.5 * (y1**2 - y2**2), y1 * y2,
                                     y1, y2, np.ones_like(y1)), axis=-1)
    return np.einsum("...k,...kj->...j", c, w)


def frame(sol: ClosedFormSolution, y1, y2, t):
    """Partial derivatives of :func:`evaluate`, all from exact derivatives."""
    t = np.asarray(t, dtype=float)
    shape = np.broadcast_shapes(np.shape(y1), np.shape(y2), t.shape)
    t = np.broadcast_to(t, shape)
    return frame_from_states(w_states(sol, t), np.broadcast_to(y1, shape),
                             np.broadcast_to(y2, shape), dw=w_states(sol, t, derivative=True))


def sample_mesh(sol: ClosedFormSolution, y1_range, y2_range, t_range, counts) -> SurfaceMesh:
    axes = [np.linspace(lo, hi, n) if n > 1 else np.array([float(lo)])
            for (lo, hi), n in zip((y1_range, y2_range, t_range), counts)]
    Y1, Y2, T = (g.ravel() for g in np.meshgrid(*axes, indexing="ij"))
    pts = evaluate(sol, Y1, Y2, T)
    frames = np.stack(frame(sol, Y1, Y2, T), axis=1)
    ra, rc = frame_residuals(frames)
    return SurfaceMesh(np.stack([Y1, Y2, T], axis=1), pts, frames, ra, rc, shape=tuple(counts),
                       meta={"generator": "closedform", "alpha": list(sol.params.alpha)})


# -- periodicity -------------------------------------------------------------

@dataclass
class PeriodicityReport:
    half_period_residual: float
    full_period_residual: float
    scale: float
    period: float
    z_drift: float

    def passed(self, rel_tol: float = 1e-8) -> bool:
        return max(self.half_period_residual, self.full_period_residual) <= rel_tol * self.scale


def check_periodicity(sol: ClosedFormSolution, counts=(10, 10, 16), y_range=(-1.0, 1.0),
                      t_range=(0.0, 2 * np.pi), drift_tol: float = 1e-12) -> PeriodicityReport:
    """Test ``F(y, t + 2pi) = F(-y, t)`` and ``F(y, t + 4pi) = F(y, t)``."""
    scale_c = max(1.0, max(sol.components[k].max_coef() for k in COMPONENTS))
    drift = sol.max_drift
    if drift > drift_tol * scale_c:
        raise DriftPresent(f"t-drift {drift:.3e} rules out periodicity", drift=drift)
    f2 = 2.0 * sol.frequencies()
    if f2.size and np.max(np.abs(f2 - np.round(f2))) > 1e-9 * max(1.0, np.abs(f2).max()):
        raise NoCommonPeriod("frequencies are not half-integers")
    n1, n2, nt = counts
    Y1, Y2, T = np.meshgrid(np.linspace(*y_range, n1), np.linspace(*y_range, n2),
                            np.linspace(*t_range, nt), indexing="ij")
    base = evaluate(sol, Y1, Y2, T)
    half = evaluate(sol, Y1, Y2, T + 2 * np.pi) - evaluate(sol, -Y1, -Y2, T)
    full = evaluate(sol, Y1, Y2, T + 4 * np.pi) - base
    return PeriodicityReport(
        float(np.abs(half).max()), float(np.abs(full).max()),
        max(1.0, float(np.abs(base).max())), 4 * np.pi, abs(sol.components["z"].drift),
    )


# -- asymptotic cone ---------------------------------------------------------

def cone_point(params: AlphaParams, t, x2, x3):
    """Point of the T^2 cone ``sum a_i x_i^2 = 0`` with ``x1 >= 0`` solved for."""
    a1, a2, a3 = params.a
    t, x2, x3 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (t, x2, x3)))
    x1 = np.sqrt(np.maximum(0.0, (a2 * x2**2 + a3 * x3**2) / -a1))
    zero = np.zeros(t.shape)
    return _emb(zero, 1j * np.exp(1j * a1 * t) * x1, np.exp(1j * a2 * t) * x2,
                np.exp(1j * a3 * t) * x3)


def cone_sampler(params: AlphaParams):
    return lambda t, x2, x3: cone_point(params, t, x2, x3)


def distance_to_cone(params: AlphaParams, P, guess):
    """Distance from ``P`` to the cone, polished from ``guess = (t, x2, x3)``."""
    P = np.asarray(P, dtype=float)
    res = least_squares(lambda v: cone_point(params, *v) - P, np.asarray(guess, dtype=float),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, method="lm")
    return float(np.linalg.norm(res.fun)), res.x


@dataclass
class ConeFit:
    radii: np.ndarray
    distances: np.ndarray
    slope: float
    stderr: float
    condition: float
    sampler: object = None


def asymptotic_cone(sol: ClosedFormSolution, rho=None, direction=(np.cos(0.7), np.sin(0.7)),
                    t: float = 0.3) -> ConeFit:
    """Fit ``log dist(F(rho u, t), cone)`` against ``log |F|`` along a ray."""
    if rho is None:
        rho = np.logspace(1, 4, 13)
    rho = np.asarray(rho, dtype=float)
    u1, u2 = direction
    x1_, x2_, x3_ = sol.params.alpha
    radii, dists = [], []
    for r in rho:
        y1, y2 = r * u1, r * u2
        P = evaluate(sol, y1, y2, t)
        guess = (t, 0.25 * (y1**2 - y2**2) * x2_, 0.5 * y1 * y2 * x3_)
        d, _ = distance_to_cone(sol.params, P, guess)
        radii.append(float(np.linalg.norm(P)))
        dists.append(d)
    radii, dists = np.array(radii), np.array(dists)
    if np.all(dists <= 1e-12 * radii):
        # M lies on the cone itself; no rate to fit
        return ConeFit(radii, dists, float("nan"), float("nan"), float("nan"), cone_sampler(sol.params))
    fit = divergence_fit(radii, dists)
    return ConeFit(radii, dists, fit.slope, fit.stderr, fit.condition, cone_sampler(sol.params))

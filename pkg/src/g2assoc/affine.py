"""Finite-dimensional evolution of six curves w1..w6 in R^7.

The curves evolve by

    w1' = 2 w2×w3,  w2' = 2 w1×w3,  w3' = -2 w1×w2,
    w4' = w1×w5 + w2×w5 - w3×w4,
    w5' = -w1×w4 + w2×w4 + w3×w5,
    w6' = w4×w5,

and sweep out the 3-fold parametrised by

    F(y1, y2, t) = ½(y1²+y2²) w1 + ½(y1²-y2²) w2 + y1 y2 w3 + y1 w4 + y2 w5 + w6,

which is associative wherever it is immersed.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelPreconditionViolated, OutOfSpan, StepSizeUnderflow
from .g2core import cross, inner, norm, phi3, split_along, basis
from .mesh import SurfaceMesh, frame_residuals


# -- right-hand side ---------------------------------------------------------

def affine_rhs(state):
    """Time derivative of the six curves; ``state`` has shape ``(..., 6, 7)``."""
    w = np.asarray(state, dtype=float)
    w1, w2, w3, w4, w5 = (w[..., i, :] for i in range(5))
    out = np.empty(w.shape)
    out[..., 0, :] = 2.0 * cross(w2, w3)
    out[..., 1, :] = 2.0 * cross(w1, w3)
    out[..., 2, :] = -2.0 * cross(w1, w2)
    out[..., 3, :] = cross(w1, w5) + cross(w2, w5) - cross(w3, w4)
    out[..., 4, :] = -cross(w1, w4) + cross(w2, w4) + cross(w3, w5)
    out[..., 5, :] = cross(w4, w5)
    return out


def affine_rhs_derivative(state, dstate):
    """Directional derivative of ``affine_rhs`` at ``state`` along ``dstate``.

    The right-hand side is quadratic, so this gives the exact second time
    derivative when ``dstate = affine_rhs(state)``.
    """
    w = np.asarray(state, dtype=float)
    d = np.asarray(dstate, dtype=float)

    def bil(i, j):
        return cross(d[..., i, :], w[..., j, :]) + cross(w[..., i, :], d[..., j, :])

    out = np.empty(w.shape)
    out[..., 0, :] = 2.0 * bil(1, 2)
    out[..., 1, :] = 2.0 * bil(0, 2)
    out[..., 2, :] = -2.0 * bil(0, 1)
    out[..., 3, :] = bil(0, 4) + bil(1, 4) - bil(2, 3)
    out[..., 4, :] = -bil(0, 3) + bil(1, 3) + bil(2, 4)
    out[..., 5, :] = bil(3, 4)
    return out


@dataclass(frozen=True)
class AffineInit:
    """Initial values of w1..w6, stacked as a ``(6, 7)`` array."""

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.shape != (6, 7):
            raise ValueError(f"expected shape (6, 7), got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("initial data must be finite")
        object.__setattr__(self, "w", w)

    @classmethod
    def from_vectors(cls, w1, w2, w3, w4, w5, w6):
        return cls(np.array([w1, w2, w3, w4, w5, w6], dtype=float))

    @classmethod
    def zeros(cls):
        return cls(np.zeros((6, 7)))

    def immersed_at_origin(self, tol: float = 1e-10) -> bool:
        """True when w4 and w5 are linearly independent."""
        w4, w5 = self.w[3], self.w[4]
        s = np.linalg.svd(np.stack([w4, w5]), compute_uv=False)
        return bool(s[0] > 0 and s[1] > tol * s[0])


# -- integrator --------------------------------------------------------------

# Dormand-Prince 5(4)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _hermite5(s, h, y0, d0, dd0, y1, d1, dd1):
    """Quintic Hermite interpolant and its t-derivative on one interval."""
    s2, s3, s4, s5 = s * s, s**3, s**4, s**5
    h0 = 1 - 10 * s3 + 15 * s4 - 6 * s5
    h1 = s - 6 * s3 + 8 * s4 - 3 * s5
    h2 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5)
    h3 = 0.5 * (s3 - 2 * s4 + s5)
    h4 = -4 * s3 + 7 * s4 - 3 * s5
    h5 = 10 * s3 - 15 * s4 + 6 * s5
    g0 = -30 * s2 + 60 * s3 - 30 * s4
    g1 = 1 - 18 * s2 + 32 * s3 - 15 * s4
    g2 = 0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4)
    g3 = 0.5 * (3 * s2 - 8 * s3 + 5 * s4)
    g4 = -12 * s2 + 28 * s3 - 15 * s4
    g5 = -g0

    def c(v):
        return v[(...,) + (None,) * (y0.ndim - v.ndim)]

    h_ = c(h)
    value = (
        c(h0) * y0 + c(h1) * h_ * d0 + c(h2) * h_**2 * dd0
        + c(h3) * h_**2 * dd1 + c(h4) * h_ * d1 + c(h5) * y1
    )
    slope = (
        c(g0) * y0 / h_ + c(g1) * d0 + c(g2) * h_ * dd0
        + c(g3) * h_ * dd1 + c(g4) * d1 + c(g5) * y1 / h_
    )
    return value, slope


@dataclass
class AffineTrajectory:
    """Dense trajectory of w1..w6 over an interval.

    Node data are stored in increasing ``t``. Off-node values come from the
    quintic Hermite interpolant through node values and their first two
    derivatives.
    """

    t: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    second: np.ndarray
    tol: float = 1e-10
    n_rejected: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def span(self):
        return float(self.t[0]), float(self.t[-1])

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.span
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(t < lo - slack) or np.any(t > hi + slack):
            raise OutOfSpan(f"t outside trajectory span [{lo}, {hi}]")
        if len(self.t) == 1:
            return t, np.zeros(t.shape, dtype=int)
        idx = np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, len(self.t) - 2)
        return t, idx

    def state(self, t):
        """w1..w6 at ``t``; shape ``t.shape + (6, 7)``."""
        return self._eval(t)[0]

    def state_derivative(self, t):
        """Derivative of the interpolant (not the RHS) at ``t``."""
        return self._eval(t)[1]

    def _eval(self, t):
        t, idx = self._locate(t)
        if len(self.t) == 1:
            shape = t.shape + (6, 7)
            return np.broadcast_to(self.states[0], shape).copy(), np.broadcast_to(
                self.derivs[0], shape
            ).copy()
        t0 = self.t[idx]
        h = self.t[idx + 1] - t0
        s = (t - t0) / h
        return _hermite5(
            s, h,
            self.states[idx], self.derivs[idx], self.second[idx],
            self.states[idx + 1], self.derivs[idx + 1], self.second[idx + 1],
        )

    def join(self, other: "AffineTrajectory") -> "AffineTrajectory":
        """Concatenate two trajectories sharing one endpoint node."""
        a, b = (self, other) if self.t[0] <= other.t[0] else (other, self)
        if abs(a.t[-1] - b.t[0]) > 1e-14 * max(1.0, abs(a.t[-1])):
            raise ValueError("trajectories do not share an endpoint")
        return AffineTrajectory(
            np.concatenate([a.t, b.t[1:]]),
            np.concatenate([a.states, b.states[1:]]),
            np.concatenate([a.derivs, b.derivs[1:]]),
            np.concatenate([a.second, b.second[1:]]),
            tol=max(a.tol, b.tol),
            n_rejected=a.n_rejected + b.n_rejected,
        )

    def max_rhs_mismatch(self) -> float:
        """Largest node discrepancy between stored derivatives and the RHS."""
        return float(np.abs(affine_rhs(self.states) - self.derivs).max())


def integrate(init: AffineInit, t0: float, t1: float, tol: float = 1e-10,
              h0: float | None = None, max_steps: int = 1_000_000) -> AffineTrajectory:
    """Integrate from ``init`` (given at ``t0``) to ``t1`` with adaptive DOPRI5.

    The error of each accepted step is at most ``tol * max(1, |y|)`` in the
    max norm. ``t1 < t0`` integrates backwards.
    """
    if not (1e-14 <= tol <= 1e-3):
        raise ValueError("tol must lie in [1e-14, 1e-3]")
    y = np.array(init.w if isinstance(init, AffineInit) else init, dtype=float)
    t = float(t0)
    t1 = float(t1)
    direction = 1.0 if t1 >= t else -1.0
    length = abs(t1 - t)
    f = affine_rhs(y)
    ts, ys, fs = [t], [y], [f]
    rejected = 0
    if length > 0:
        h = h0 if h0 is not None else min(length, 1e-2 * max(1.0, length))
        h = abs(h)
        steps = 0
        while direction * (t1 - t) > 0:
            if steps >= max_steps:
                raise StepSizeUnderflow(t, f"maximum number of steps reached at t={t!r}")
            h = min(h, abs(t1 - t))
            hs = direction * h
            k = [f]
            for i in range(1, 7):
                yi = y + hs * sum(a * kk for a, kk in zip(_A[i], k))
                k.append(affine_rhs(yi))
            y_new = y + hs * sum(b * kk for b, kk in zip(_B5, k) if b != 0.0)
            err_vec = hs * sum(e * kk for e, kk in zip(_E, k) if e != 0.0)
            scale = tol * np.maximum(1.0, np.maximum(np.abs(y), np.abs(y_new)))
            err = float(np.max(np.abs(err_vec) / scale)) if np.all(np.isfinite(y_new)) else np.inf
            if err <= 1.0:
                t = t1 if abs(t1 - (t + hs)) <= 1e-15 * max(1.0, abs(t1)) else t + hs
                y = y_new
                f = k[6]
                ts.append(t)
                ys.append(y)
                fs.append(f)
                steps += 1
                factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** (-0.2)))
                h *= factor
            else:
                rejected += 1
                h *= max(0.1, 0.9 * err ** (-0.2)) if np.isfinite(err) else 0.1
            if h < 1e-14 * max(1.0, abs(t)):
                raise StepSizeUnderflow(t)
    ts = np.array(ts)
    ys = np.array(ys)
    fs = np.array(fs)
    second = affine_rhs_derivative(ys, fs)
    if direction < 0:
        ts, ys, fs, second = ts[::-1], ys[::-1], fs[::-1], second[::-1]
    return AffineTrajectory(ts, ys, fs, second, tol=tol, n_rejected=rejected)


def integrate_span(init: AffineInit, t_lo: float, t_hi: float, tol: float = 1e-10) -> AffineTrajectory:
    """Trajectory over ``[t_lo, t_hi]`` from data given at ``t = 0``."""
    if t_lo > 0 or t_hi < 0:
        raise ValueError("span must contain t = 0")
    fwd = integrate(init, 0.0, t_hi, tol)
    if t_lo == 0:
        return fwd
    bwd = integrate(init, 0.0, t_lo, tol)
    if t_hi == 0:
        return bwd
    return bwd.join(fwd)


# -- the parametrised 3-fold -------------------------------------------------

def _quad_coeffs(y1, y2):
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    one = np.ones(np.broadcast_shapes(y1.shape, y2.shape))
    return np.stack(
        [0.5 * (y1**2 + y2**2) * one, 0.5 * (y1**2 - y2**2) * one, y1 * y2 * one,
         y1 * one, y2 * one, one],
        axis=-1,
    )


def F_from_states(w, y1, y2):
    """``F`` from explicit w1..w6 values (shape ``(..., 6, 7)``)."""
    c = _quad_coeffs(y1, y2)
    return np.einsum("...k,...kj->...j", c, w)


def frame_from_states(w, y1, y2, dw=None):
    """(F_y1, F_y2, F_t) from explicit w1..w6 values.

    ``F_t`` uses ``dw`` when given, otherwise the right-hand side at ``w``.
    """
    w = np.asarray(w, dtype=float)
    y1 = np.asarray(y1, dtype=float)[..., None]
    y2 = np.asarray(y2, dtype=float)[..., None]
    w1, w2, w3, w4, w5 = (w[..., i, :] for i in range(5))
    fy1 = y1 * (w1 + w2) + y2 * w3 + w4
    fy2 = y2 * (w1 - w2) + y1 * w3 + w5
    if dw is None:
        dw = affine_rhs(w)
    ft = F_from_states(dw, y1[..., 0], y2[..., 0])
    return fy1, fy2, ft


def F_map(traj: AffineTrajectory, y1, y2, t):
    return F_from_states(traj.state(t), y1, y2)


def F_frame(traj: AffineTrajectory, y1, y2, t):
    """Partial derivatives of ``F``; the t-derivative uses the RHS."""
    return frame_from_states(traj.state(t), y1, y2)


def frame_identity_defect(traj: AffineTrajectory, y1, y2, t):
    """``|F_y1 × F_y2 - F_t|`` with ``F_t`` from the interpolant's derivative.

    With the RHS-based ``F_t`` the identity is exact; this version measures
    how well the numerical trajectory actually solves the equations.
    """
    w, dw = traj._eval(t)
    fy1, fy2, ft = frame_from_states(w, y1, y2, dw=dw)
    return norm(cross(fy1, fy2) - ft)


# -- singularities -----------------------------------------------------------

def rank_defect_measure(fy1, fy2):
    """Ratio of smaller to larger singular value of ``[fy1, fy2]``."""
    m = np.stack([np.asarray(fy1, dtype=float), np.asarray(fy2, dtype=float)], axis=-1)
    s = np.linalg.svd(m, compute_uv=False)
    big = s[..., 0]
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(big > 0, s[..., 1] / np.where(big > 0, big, 1.0), 0.0)
    return ratio


def detect_singularities(traj: AffineTrajectory, y1s, y2s, ts, tol: float = 1e-6):
    """Grid points where ``dF`` fails to be injective.

    ``F_t`` is ``F_y1 × F_y2``, so ``dF`` drops rank exactly when the two
    y-derivatives do. Returns a list of ``(y1, y2, t, measure)``.
    """
    Y1, Y2, T = np.meshgrid(np.atleast_1d(y1s), np.atleast_1d(y2s), np.atleast_1d(ts), indexing="ij")
    fy1, fy2, _ = F_frame(traj, Y1, Y2, T)
    measure = rank_defect_measure(fy1, fy2)
    hits = np.argwhere(measure < tol)
    return [
        (float(Y1[tuple(i)]), float(Y2[tuple(i)]), float(T[tuple(i)]), float(measure[tuple(i)]))
        for i in hits
    ]


def singular_init(u, v, w, x) -> AffineInit:
    """Initial data with ``w5(0) = w6(0) = 0``, a rank-deficient origin."""
    u, v, w, x = (np.asarray(a, dtype=float) for a in (u, v, w, x))
    zero = np.zeros(7)
    return AffineInit.from_vectors(v + w, v - w, x, u, zero, zero)


def singular_model(u, w, y1, y2, t):
    """Leading ε² term of ``F(ε² y1, ε y2, ε t)`` for :func:`singular_init` data.

    Equals ``(y1 + g(u,w) t²) u + (y2² - |u|² t²) w + 2 y2 t u×w``.
    """
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    y1, y2, t = (np.asarray(a, dtype=float)[..., None] for a in (y1, y2, t))
    return (
        (y1 + inner(u, w) * t**2) * u
        + (y2**2 - inner(u, u) * t**2) * w
        + 2.0 * y2 * t * cross(u, w)
    )


def branched_cover_map(y1, y2, t, guw: float = 0.0, unorm2: float = 1.0):
    """Model map in the (u, w, u×w) frame: a double cover branched over an axis."""
    y1, y2, t = (np.asarray(a, dtype=float) for a in (y1, y2, t))
    return np.stack([y1 + guw * t**2, y2**2 - unorm2 * t**2, 2.0 * y2 * t], axis=-1)


@dataclass
class SingularModelReport:
    eps: np.ndarray
    residuals: np.ndarray
    slope: float
    samples: np.ndarray


def singular_model_residual(u, v, w, x, eps=(0.1, 0.05, 0.025, 0.0125), samples=None,
                            tol: float = 1e-10, int_tol: float = 1e-13) -> SingularModelReport:
    """Compare ``ε⁻² F(ε² y1, ε y2, ε t)`` with its ε² model as ε → 0.

    The residual is ``O(ε)``; the reported slope is the least-squares slope of
    log residual against log ε.
    """
    u, v, w, x = (np.asarray(a, dtype=float) for a in (u, v, w, x))
    frame = split_along(basis(1))
    if abs(frame.omega(u, w)) > tol * max(1.0, float(norm(u) * norm(w))):
        raise ModelPreconditionViolated("omega(u, w) must vanish")
    if samples is None:
        g = np.linspace(-1.0, 1.0, 5)
        samples = np.array(np.meshgrid(g, g, g, indexing="ij")).reshape(3, -1).T
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    eps = np.asarray(eps, dtype=float)
    tmax = float(np.max(np.abs(samples[:, 2]))) * float(eps.max())
    init = singular_init(u, v, w, x)
    if tmax > 0:
        traj = integrate_span(init, -tmax, tmax, int_tol)
    else:
        traj = integrate(init, 0.0, 0.0, int_tol)
    model = singular_model(u, w, samples[:, 0], samples[:, 1], samples[:, 2])
    res = []
    for e in eps:
        val = F_map(traj, e**2 * samples[:, 0], e * samples[:, 1], e * samples[:, 2]) / e**2
        res.append(float(np.max(norm(val - model))))
    res = np.array(res)
    if np.all(res > 0):
        slope = float(np.polyfit(np.log(eps), np.log(res), 1)[0])
    else:
        slope = float("nan")
    return SingularModelReport(eps, res, slope, samples)


# -- meshes ------------------------------------------------------------------

def sample_mesh(traj: AffineTrajectory, y1_range, y2_range, t_range, counts) -> SurfaceMesh:
    """Sample ``F`` on a tensor grid with frames and residuals attached."""
    n1, n2, nt = counts
    g1 = np.linspace(*y1_range, n1) if n1 > 1 else np.array([float(y1_range[0])])
    g2 = np.linspace(*y2_range, n2) if n2 > 1 else np.array([float(y2_range[0])])
    gt = np.linspace(*t_range, nt) if nt > 1 else np.array([float(t_range[0])])
    Y1, Y2, T = np.meshgrid(g1, g2, gt, indexing="ij")
    w = traj.state(T.ravel())
    points = F_from_states(w, Y1.ravel(), Y2.ravel())
    fy1, fy2, ft = frame_from_states(w, Y1.ravel(), Y2.ravel())
    frames = np.stack([fy1, fy2, ft], axis=1)
    params = np.stack([Y1.ravel(), Y2.ravel(), T.ravel()], axis=1)
    ra, rc = frame_residuals(frames)
    return SurfaceMesh(params, points, frames, ra, rc, shape=(n1, n2, nt),
                       meta={"generator": "affine"})


def phi_w123(state) -> float:
    """``phi(w1, w2, w3)``; ``d/dt(|w1|²-|w2|²-|w3|²)`` equals 12 times this."""
    w = np.asarray(state, dtype=float)
    return phi3(w[..., 0, :], w[..., 1, :], w[..., 2, :])

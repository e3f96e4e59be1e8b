"""Ruled 3-folds ``M = {r phi(s, t) + psi(s, t)}`` over a periodic chart.

``phi`` is a closed curve on S^6 evolved in ``t`` by

    phi_t = phi × phi_s,        psi_t = phi × psi_s + f phi.

Both equations are elliptic, so the initial value problem is ill-posed:
Fourier mode k grows like exp(|k| t). Only short times on resolved grids
are meaningful; roundoff in the top modes sets the achievable accuracy.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUp, GridTooCoarse
from .g2core import associator, basis, cross, inner, norm
from .mesh import SurfaceMesh, frame_residuals
from .verify import divergence_fit

NORM_TOL = 1e-8
TAIL_TOL = 1e-6


# -- spectral calculus -------------------------------------------------------

def wavenumbers(n: int, length: float = 2 * np.pi):
    k = np.fft.fftfreq(n, d=1.0 / n) * (2 * np.pi / length)
    return k


def spectral_derivative(f, length: float = 2 * np.pi, order: int = 1):
    """Periodic derivative along axis 0 via FFT (Nyquist mode dropped for odd orders)."""
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    k = wavenumbers(n, length)
    mult = (1j * k) ** order
    if order % 2 and n % 2 == 0:
        mult[n // 2] = 0.0
    fh = np.fft.fft(f, axis=0)
    return np.real(np.fft.ifft(fh * mult.reshape((-1,) + (1,) * (f.ndim - 1)), axis=0))


def spectral_interp(f, s, length: float = 2 * np.pi):
    """Trigonometric interpolant of samples ``f`` (axis 0) evaluated at points ``s``."""
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    fh = np.fft.fft(f, axis=0) / n
    k = wavenumbers(n, length)
    if n % 2 == 0:
        # split the Nyquist mode symmetrically so the interpolant is real
        fh = np.concatenate([fh, fh[n // 2: n // 2 + 1]], axis=0)
        fh[n // 2] *= 0.5
        fh[-1] *= 0.5
        k = np.concatenate([k, [-k[n // 2]]])
    s = np.asarray(s, dtype=float)
    phase = np.exp(1j * np.multiply.outer(s, k))
    return np.real(np.tensordot(phase, fh, axes=(-1, 0)))


def tail_fraction(f, band: float = 0.25):
    """Largest Fourier amplitude in the top ``band`` of modes relative to the largest overall."""
    fh = np.abs(np.fft.rfft(np.asarray(f, dtype=float), axis=0))
    top = fh.max()
    if top == 0:
        return 0.0
    cut = int(np.ceil((1.0 - band) * (fh.shape[0] - 1)))
    return float(fh[cut:].max() / top)


# -- state -------------------------------------------------------------------

@dataclass
class RuledState:
    phi: np.ndarray
    psi: np.ndarray
    t: float = 0.0
    length: float = 2 * np.pi

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        self.psi = np.asarray(self.psi, dtype=float)
        n = self.phi.shape[0]
        if self.phi.shape != (n, 7) or self.psi.shape != (n, 7):
            raise ValueError("phi and psi must have shape (N, 7)")
        if n < 16 or n % 2:
            raise ValueError("N must be even and at least 16")
        drift = np.abs(norm(self.phi) - 1.0).max()
        if drift >= NORM_TOL:
            raise ValueError(f"phi samples are not unit vectors (max drift {drift:.2e})")

    @property
    def n(self):
        return self.phi.shape[0]

    @property
    def s(self):
        return np.arange(self.n) * (self.length / self.n)

    def phi_s(self):
        return spectral_derivative(self.phi, self.length)

    def psi_s(self):
        return spectral_derivative(self.psi, self.length)

    def replace(self, **kw) -> "RuledState":
        d = dict(phi=self.phi, psi=self.psi, t=self.t, length=self.length)
        d.update(kw)
        return RuledState(**d)


def great_circle_state(n: int = 128, plane=(2, 3), psi=None) -> RuledState:
    """``phi = cos s e_a + sin s e_b``; the default plane gives ``phi_t = e1`` at t = 0."""
    s = np.arange(n) * (2 * np.pi / n)
    a, b = basis(plane[0]), basis(plane[1])
    phi = np.cos(s)[:, None] * a + np.sin(s)[:, None] * b
    if psi is None:
        psi = np.zeros((n, 7))
    elif callable(psi):
        psi = psi(s)
    return RuledState(phi, psi)


def great_circle_exact(s, t):
    """Exact evolution of the default great circle: ``sech t (cos s e2 + sin s e3) + tanh t e1``."""
    s = np.asarray(s, dtype=float)
    sech = 1.0 / np.cosh(t)
    out = np.zeros(s.shape + (7,))
    out[..., 0] = np.tanh(t)
    out[..., 1] = sech * np.cos(s)
    out[..., 2] = sech * np.sin(s)
    return out


# -- evolution ---------------------------------------------------------------

def _f_values(f, state, t):
    if f is None:
        return None
    if callable(f):
        return np.asarray(f(state.s, t), dtype=float)
    return np.broadcast_to(np.asarray(f, dtype=float), (state.n,))


def _rhs(phi, psi, length, fvals):
    dphi = cross(phi, spectral_derivative(phi, length))
    dpsi = cross(phi, spectral_derivative(psi, length))
    if fvals is not None:
        dpsi = dpsi + fvals[:, None] * phi
    return dphi, dpsi


def ruled_rhs(state: RuledState, f=None, tail_tol: float = TAIL_TOL):
    """``(dphi/dt, dpsi/dt)``; ``f`` is None, an array on the grid or ``f(s, t)``."""
    for name, arr in (("phi", state.phi), ("psi", state.psi)):
        if np.any(arr) and tail_fraction(arr) > tail_tol:
            raise GridTooCoarse(f"{name} is under-resolved (tail {tail_fraction(arr):.2e})")
    return _rhs(state.phi, state.psi, state.length, _f_values(f, state, state.t))


@dataclass
class RuledTrajectory:
    times: np.ndarray
    phis: np.ndarray
    psis: np.ndarray
    length: float
    norm_drift: np.ndarray = field(default_factory=lambda: np.zeros(0))
    f: object = None

    def state(self, i: int) -> RuledState:
        return RuledState(self.phis[i], self.psis[i], float(self.times[i]), self.length)

    @property
    def final(self) -> RuledState:
        return self.state(-1)

    def __len__(self):
        return len(self.times)

    def time_derivatives(self, i: int, width: int = 2):
        """Central finite-difference t-derivatives at stored level ``i`` (order ``2*width``)."""
        n = len(self.times)
        if width == 2:
            off, w = np.array([-2, -1, 1, 2]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
        elif width == 1:
            off, w = np.array([-1, 1]), np.array([-0.5, 0.5])
        else:
            raise ValueError("width must be 1 or 2")
        lo = min(max(i, width), n - 1 - width)
        if lo != i:
            raise ValueError("level too close to the trajectory ends for central differences")
        dt = self.times[1] - self.times[0]
        dphi = np.tensordot(w, self.phis[i + off], axes=1) / dt
        dpsi = np.tensordot(w, self.psis[i + off], axes=1) / dt
        return dphi, dpsi


def evolve_ruled(state0: RuledState, f=None, t1: float = 0.25, steps: int = 256,
                 grad_cap: float = 1e3, tail_tol: float = TAIL_TOL) -> RuledTrajectory:
    """Classical RK4 with projection of ``phi`` back to S^6 after each step.

    The pre-projection deviation ``max | |phi| - 1 |`` is recorded per step.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    n, L = state0.n, state0.length
    dt = (t1 - state0.t) / steps
    phi, psi, t = state0.phi.copy(), state0.psi.copy(), state0.t
    g0 = max(float(norm(spectral_derivative(phi, L)).max()), 1e-300)
    times, phis, psis, drift = [t], [phi], [psi], []
    s = state0.s
    fv = (lambda tt: None) if f is None else (
        (lambda tt: np.asarray(f(s, tt), dtype=float)) if callable(f)
        else (lambda tt: np.broadcast_to(np.asarray(f, dtype=float), (n,))))
    ruled_rhs(state0, f, tail_tol)
    if dt == 0:
        return RuledTrajectory(np.array(times), np.array(phis), np.array(psis), L, np.zeros(0), f)
    for _ in range(steps):
        k1 = _rhs(phi, psi, L, fv(t))
        k2 = _rhs(phi + 0.5 * dt * k1[0], psi + 0.5 * dt * k1[1], L, fv(t + 0.5 * dt))
        k3 = _rhs(phi + 0.5 * dt * k2[0], psi + 0.5 * dt * k2[1], L, fv(t + 0.5 * dt))
        k4 = _rhs(phi + dt * k3[0], psi + dt * k3[1], L, fv(t + dt))
        phi = phi + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        psi = psi + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        t = t + dt
        nrm = norm(phi)
        if not np.all(np.isfinite(nrm)):
            raise BlowUp(f"non-finite values at t={t!r}")
        drift.append(float(np.abs(nrm - 1.0).max()))
        phi = phi / nrm[:, None]
        if float(norm(spectral_derivative(phi, L)).max()) > grad_cap * g0:
            raise BlowUp(f"|phi_s| exceeded {grad_cap:g} times its initial maximum at t={t!r}")
        if tail_fraction(phi) > tail_tol or (np.any(psi) and tail_fraction(psi) > tail_tol):
            raise GridTooCoarse(f"spectral tail above {tail_tol:g} at t={t!r}")
        times.append(t)
        phis.append(phi)
        psis.append(psi)
    return RuledTrajectory(np.array(times), np.array(phis), np.array(psis), L, np.array(drift), f)


# -- associativity -----------------------------------------------------------

def _rel(v, scale):
    return np.where(scale > 0, norm(v) / np.where(scale > 0, scale, 1.0), 0.0)


def associativity_residuals(state: RuledState, dphi_dt=None, dpsi_dt=None, f=None):
    """Normalised maxima of the three r-coefficients of the tangent associator.

    With t-derivatives taken from the evolution equations the first bracket
    vanishes identically; pass derivatives measured along a trajectory to
    test a computed solution.
    """
    phi = state.phi
    ps, qs = state.phi_s(), state.psi_s()
    if dphi_dt is None or dpsi_dt is None:
        rp, rq = _rhs(phi, state.psi, state.length, _f_values(f, state, state.t))
        dphi_dt = rp if dphi_dt is None else dphi_dt
        dpsi_dt = rq if dpsi_dt is None else dpsi_dt
    pt, qt = np.asarray(dphi_dt, dtype=float), np.asarray(dpsi_dt, dtype=float)
    n0 = norm(phi)
    r1 = _rel(associator(phi, ps, pt), n0 * norm(ps) * norm(pt))
    r2 = _rel(associator(phi, ps, qt) + associator(phi, qs, pt),
              n0 * (norm(ps) * norm(qt) + norm(qs) * norm(pt)))
    r3 = _rel(associator(phi, qs, qt), n0 * norm(qs) * norm(qt))
    return float(r1.max()), float(r2.max()), float(r3.max())


@dataclass
class ConditionReport:
    labels: np.ndarray
    residual_i: np.ndarray
    residual_ii: np.ndarray
    f_opt: np.ndarray


def classify_condition(state: RuledState, dpsi_dt=None, dphi_dt=None, dpsi_ds=None,
                       tol: float = 1e-6) -> ConditionReport:
    """Per-point test of the two ways the psi-brackets can vanish.

    (i): ``psi_t - phi × psi_s`` is a multiple of ``phi`` (the best ``f`` is
    returned). (ii): ``psi_s`` and ``psi_t`` lie in span(phi, phi_s, phi_t).
    Residuals are normalised by ``max(1, |psi_s|, |psi_t|)``.
    """
    phi = state.phi
    ps = state.phi_s()
    qs = state.psi_s() if dpsi_ds is None else np.asarray(dpsi_ds, dtype=float)
    rp, rq = _rhs(phi, state.psi, state.length, None)
    pt = rp if dphi_dt is None else np.asarray(dphi_dt, dtype=float)
    qt = rq if dpsi_dt is None else np.asarray(dpsi_dt, dtype=float)
    scale = np.maximum(1.0, np.maximum(norm(qs), norm(qt)))
    gap = qt - cross(phi, qs)
    f_opt = inner(gap, phi) / inner(phi, phi)
    res_i = norm(gap - f_opt[:, None] * phi) / scale
    span = np.stack([phi, ps, pt], axis=-1)
    res_ii = np.zeros(state.n)
    for i in range(state.n):
        rhs = np.stack([qs[i], qt[i]], axis=-1)
        coef, *_ = np.linalg.lstsq(span[i], rhs, rcond=None)
        res_ii[i] = np.abs(span[i] @ coef - rhs).max()
    res_ii /= scale
    ok_i, ok_ii = res_i < tol, res_ii < tol
    labels = np.where(ok_i & ok_ii, "both", np.where(ok_i, "i", np.where(ok_ii, "ii", "neither")))
    return ConditionReport(labels, res_i, res_ii, f_opt)


# -- holomorphic vector fields -----------------------------------------------

@dataclass(frozen=True)
class HoloField:
    """``u + i v = sum_n c_n exp(i n (s + i t))``, periodic in ``s``.

    Real and imaginary parts of a holomorphic function satisfy the
    Cauchy-Riemann relations ``u_s = v_t``, ``u_t = -v_s`` exactly.
    """

    modes: tuple = ((0, 1.0),)

    @classmethod
    def translation(cls, c: float = 1.0) -> "HoloField":
        return cls(((0, complex(c)),))

    def scaled(self, a: float) -> "HoloField":
        return HoloField(tuple((n, a * complex(c)) for n, c in self.modes))

    def _g(self, s, t, deriv=0):
        z = np.asarray(s, dtype=float) + 1j * np.asarray(t, dtype=float)
        out = np.zeros(z.shape, dtype=complex)
        for n, c in self.modes:
            out = out + complex(c) * (1j * n) ** deriv * np.exp(1j * n * z)
        return out

    def uv(self, s, t):
        g = self._g(s, t)
        return g.real, g.imag

    def uv_s(self, s, t):
        g = self._g(s, t, 1)
        return g.real, g.imag

    def uv_t(self, s, t):
        # d/dt = i d/dz for holomorphic g
        g = 1j * self._g(s, t, 1)
        return g.real, g.imag

    def cr_residual(self, s, t, h: float = 1e-5, length: float = 2 * np.pi) -> float:
        """Discrete check: spectral s-derivatives against central t-differences."""
        s = np.asarray(s, dtype=float)
        u, v = self.uv(s, t)
        us = spectral_derivative(u, length)
        vs = spectral_derivative(v, length)
        up, vp = self.uv(s, t + h)
        um, vm = self.uv(s, t - h)
        ut, vt = (up - um) / (2 * h), (vp - vm) / (2 * h)
        return float(max(np.abs(us - vt).max(), np.abs(ut + vs).max()))


def _phi_st_tt(phi, length):
    ps = spectral_derivative(phi, length)
    pt = cross(phi, ps)
    pst = spectral_derivative(pt, length)
    ptt = cross(pt, ps) + cross(phi, pst)
    return ps, pt, pst, ptt


def lie_derivative_psi(state: RuledState, field: HoloField):
    """``psi = u phi_s + v phi_t`` with ``phi_t`` from the evolution equation."""
    ps, pt, _, _ = _phi_st_tt(state.phi, state.length)
    u, v = field.uv(state.s, state.t)
    return u[:, None] * ps + v[:, None] * pt


def lie_derivative_psi_dt(state: RuledState, field: HoloField):
    """Exact t-derivative of :func:`lie_derivative_psi` along the phi evolution."""
    ps, pt, pst, ptt = _phi_st_tt(state.phi, state.length)
    u, v = field.uv(state.s, state.t)
    ut, vt = field.uv_t(state.s, state.t)
    return ut[:, None] * ps + u[:, None] * pst + vt[:, None] * pt + v[:, None] * ptt


def with_field(state: RuledState, field: HoloField) -> RuledState:
    return state.replace(psi=lie_derivative_psi(state, field))


# -- meshes ------------------------------------------------------------------

def _ruled_points(state, r, dpsi_dt, cone):
    phi = state.phi
    ps, pt, _, _ = _phi_st_tt(phi, state.length)
    r = np.asarray(r, dtype=float)
    R = r[:, None, None]
    if cone:
        pts = R * phi
        frames = np.stack(np.broadcast_arrays(phi[None], R * ps, R * pt), axis=2)
    else:
        qs = state.psi_s()
        qt = cross(phi, qs) if dpsi_dt is None else np.asarray(dpsi_dt, dtype=float)
        pts = R * phi + state.psi
        frames = np.stack(np.broadcast_arrays(phi[None], R * ps + qs, R * pt + qt), axis=2)
    n = state.n
    S, Rg = np.meshgrid(state.s, r, indexing="xy")
    params = np.stack([Rg.ravel(), S.ravel(), np.full(S.size, state.t)], axis=1)
    frames = frames.reshape(-1, 3, 7)
    ra, rc = frame_residuals(frames)
    return SurfaceMesh(params, pts.reshape(-1, 7), frames, ra, rc, shape=(len(r), n, 1),
                       labels=("r", "s", "t"), meta={"generator": "ruled", "cone": cone})


def cone_mesh(state: RuledState, r) -> SurfaceMesh:
    """Samples ``r phi`` with frames ``(phi, r phi_s, r phi_t)``."""
    return _ruled_points(state, np.atleast_1d(r), None, True)


def ruled_mesh(state: RuledState, r, dpsi_dt=None) -> SurfaceMesh:
    """Samples ``r phi + psi`` with frames ``(phi, r phi_s + psi_s, r phi_t + psi_t)``."""
    return _ruled_points(state, np.atleast_1d(r), dpsi_dt, False)


# -- asymptotic order --------------------------------------------------------

def _lagrange_weights(nodes, x):
    w = np.ones((len(x), len(nodes)))
    for j, xj in enumerate(nodes):
        for m, xm in enumerate(nodes):
            if m != j:
                w[:, j] *= (x - xm) / (xj - xm)
    return w


class _PhiInterpolant:
    """phi and phi_s on (s, t) from a trajectory: spectral in s, local Lagrange in t."""

    def __init__(self, traj: RuledTrajectory, width: int = 6):
        self.traj = traj
        self.width = width
        self.dt = traj.times[1] - traj.times[0]
        self.dphis = spectral_derivative(np.moveaxis(traj.phis, 1, 0), traj.length)
        self.dphis = np.moveaxis(self.dphis, 0, 1)

    def __call__(self, s, t, deriv: bool = False):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        tr = self.traj
        data = self.dphis if deriv else tr.phis
        out = np.empty((s.size, 7))
        j0 = np.clip(np.round((t - tr.times[0]) / self.dt).astype(int) - self.width // 2 + 1,
                     0, len(tr.times) - self.width)
        for i in range(s.size):
            lv = np.arange(j0.flat[i], j0.flat[i] + self.width)
            vals = np.stack([spectral_interp(data[k], s.flat[i], tr.length) for k in lv])
            w = _lagrange_weights(tr.times[lv], np.array([t.flat[i]]))[0]
            out[i] = w @ vals
        return out.reshape(s.shape + (7,))


@dataclass
class OrderFit:
    radii: np.ndarray
    distances: np.ndarray
    slope: float
    stderr: float


def correspondence_gap(traj: RuledTrajectory, level: int, field: HoloField, r: float,
                       interp: _PhiInterpolant | None = None):
    """``max_s |Phi(x) - x|`` for ``x = r phi(s, t)`` at the stored time level.

    ``Phi(r phi(s,t)) = r phi(s', t') + u phi_s(s', t') + v phi_t(s', t')`` with
    ``s' = s - u/r``, ``t' = t - v/r`` and u, v evaluated at ``(s', t')``,
    so ``Phi(x)`` lies on the field-generated 3-fold.
    """
    st = traj.state(level)
    s, t = st.s, st.t
    if not any(complex(c) for _, c in field.modes):
        return 0.0
    interp = interp or _PhiInterpolant(traj)
    sp, tp = s.copy(), np.full_like(s, t)
    for _ in range(50):
        u, v = field.uv(sp, tp)
        sn, tn = s - u / r, t - v / r
        done = max(np.abs(sn - sp).max(), np.abs(tn - tp).max()) < 1e-15
        sp, tp = sn, tn
        if done:
            break
    u, v = field.uv(sp, tp)
    if np.all(v == 0) and np.all(tp == t):
        phi_p = spectral_interp(st.phi, sp, st.length)
        phis = spectral_interp(st.phi_s(), sp, st.length)
    else:
        phi_p = interp(sp, tp)
        phis = interp(sp, tp, deriv=True)
    phit = cross(phi_p, phis)
    image = r * phi_p + u[:, None] * phis + v[:, None] * phit
    return float(norm(image - r * st.phi).max())


def asymptotic_order(traj: RuledTrajectory, field: HoloField, radii=None, level: int | None = None) -> OrderFit:
    """Slope of ``log max |Phi(x) - x|`` against ``log r``; ``-1`` is expected."""
    if radii is None:
        radii = np.logspace(1, 3, 12)
    radii = np.asarray(radii, dtype=float)
    level = len(traj) // 2 if level is None else level
    interp = _PhiInterpolant(traj)
    gaps = np.array([correspondence_gap(traj, level, field, r, interp) for r in radii])
    if np.all(gaps == 0):
        return OrderFit(radii, gaps, float("nan"), float("nan"))
    fit = divergence_fit(radii, gaps)
    return OrderFit(radii, gaps, fit.slope, fit.stderr)


def low_modes(f, kmax: int = 8):
    """Keep Fourier modes ``|k| <= kmax`` along axis 0.

    Used to separate the resolved solution from amplified roundoff in the
    high modes when measuring time-stepping error.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    fh = np.fft.fft(f, axis=0)
    k = np.abs(np.fft.fftfreq(n, 1.0 / n))
    fh[k > kmax] = 0.0
    return np.real(np.fft.ifft(fh, axis=0))

"""Checks that do not depend on how a 3-fold was constructed.

* calibration defect of a tangent frame,
* special Lagrangian detection in the standard splitting,
* log-log fits of divergence rates.
"""

from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import DegeneratePlane, FitUnstable
from .g2core import basis, inner, norm, phi3

GRAM_TOL = 1e-12


def _orthonormalise(frames):
    """Gram-Schmidt on the last-but-one axis; returns (u1, u2, u3, ok)."""
    f = np.asarray(frames, dtype=float)
    f1, f2, f3 = f[..., 0, :], f[..., 1, :], f[..., 2, :]
    n1, n2, n3 = norm(f1), norm(f2), norm(f3)
    safe = lambda n: np.where(n > 0, n, 1.0)[..., None]
    u1 = f1 / safe(n1)
    v2 = f2 - inner(f2, u1)[..., None] * u1
    m2 = norm(v2)
    u2 = v2 / safe(m2)
    v3 = f3 - inner(f3, u1)[..., None] * u1 - inner(f3, u2)[..., None] * u2
    m3 = norm(v3)
    u3 = v3 / safe(m3)
    # volume of the unit-normalised frame, i.e. sqrt of its Gram determinant
    with np.errstate(invalid="ignore", divide="ignore"):
        vol = np.where((n1 > 0) & (n2 > 0) & (n3 > 0), m2 * m3 / (safe(n2)[..., 0] * safe(n3)[..., 0]), 0.0)
    ok = vol**2 > GRAM_TOL
    return u1, u2, u3, ok


def calibration_defects(frames):
    """Vectorised calibration defect; NaN for degenerate frames."""
    u1, u2, u3, ok = _orthonormalise(frames)
    d = 1.0 - phi3(u1, u2, u3)
    return np.where(ok, d, np.nan)


def calibration_defect(frame) -> float:
    """``1 - phi(u1, u2, u3)`` for the oriented orthonormalisation of ``frame``.

    Lies in [0, 2]; zero exactly for a positively oriented associative plane.
    """
    u1, u2, u3, ok = _orthonormalise(np.asarray(frame, dtype=float))
    if not bool(ok):
        raise DegeneratePlane("frame vectors are linearly dependent")
    return float(1.0 - phi3(u1, u2, u3))


# -- special Lagrangian detection --------------------------------------------

@dataclass
class SLResult:
    is_sl: bool
    evidence: dict

    def __bool__(self):
        return self.is_sl


def _sl_closed_form(sol, tol):
    comps = sol.components
    x_max = comps["x"].max_coef()
    y_max = comps["y"].max_coef()
    z = comps["z"]
    z_osc = float(np.abs(z.coefs).max()) if z.coefs.size else 0.0
    z_drift = abs(z.drift)
    evidence = {"x_max_coef": x_max, "y_max_coef": y_max,
                "z_oscillation": z_osc, "z_drift": z_drift, "tol": tol}
    return SLResult(max(x_max, y_max, z_osc, z_drift) <= tol, evidence)


def _sl_mesh(mesh, tol):
    pts = np.asarray(mesh.points)
    x1 = pts[:, 0]
    spread = float(np.max(np.abs(x1 - x1.mean()))) if len(x1) else 0.0
    scale = max(1.0, float(np.max(np.abs(pts)))) if len(pts) else 1.0
    f = np.asarray(mesh.frames)
    e1 = basis(1)
    worst = 0.0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        a, b = f[:, i, :], f[:, j, :]
        nab = norm(a) * norm(b)
        om = np.abs(phi3(e1, a, b))
        rel = np.where(nab > 0, om / np.where(nab > 0, nab, 1.0), 0.0)
        if rel.size:
            worst = max(worst, float(rel.max()))
    evidence = {"x1_spread": spread, "x1_spread_rel": spread / scale,
                "omega_max": worst, "tol": tol}
    return SLResult(spread / scale <= tol and worst <= tol, evidence)


def sl_detect(obj, tol: float = 1e-10) -> SLResult:
    """Decide whether a 3-fold is special Lagrangian in ``{x1 = c} x C^3``.

    Closed-form solutions are judged from exponential-sum coefficients of
    ``x``, ``y`` and ``z``; meshes from the spread of ``x1`` and the Kähler
    form on frame pairs.
    """
    if hasattr(obj, "components"):
        return _sl_closed_form(obj, tol)
    return _sl_mesh(obj, tol)


# -- fits --------------------------------------------------------------------

@dataclass
class FitResult:
    slope: float
    stderr: float
    intercept: float
    n: int
    condition: float

    def interval(self, z: float = 1.96):
        return self.slope - z * self.stderr, self.slope + z * self.stderr


def divergence_fit(r, d, min_samples: int = 8, min_decades: float = 2.0,
                   max_condition: float = 1e8) -> FitResult:
    """Least-squares slope of ``log d`` against ``log r`` with standard error."""
    r = np.asarray(r, dtype=float).ravel()
    d = np.asarray(d, dtype=float).ravel()
    if r.shape != d.shape:
        raise ValueError("r and d must have equal length")
    if r.size < min_samples:
        raise FitUnstable(f"need at least {min_samples} samples, got {r.size}")
    if np.any(r <= 0) or np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise FitUnstable("radii and distances must be positive and finite")
    x = np.log(r)
    y = np.log(d)
    if (x.max() - x.min()) / np.log(10.0) < min_decades - 1e-9:
        raise FitUnstable(f"samples span fewer than {min_decades} decades")
    A = np.stack([x, np.ones_like(x)], axis=1)
    cond = float(np.linalg.cond(A))
    if cond > max_condition:
        raise FitUnstable("ill-conditioned fit", condition=cond)
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ np.array([slope, intercept])
    dof = max(r.size - 2, 1)
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = float(np.sqrt(np.sum(resid**2) / dof / sxx))
    return FitResult(float(slope), stderr, float(intercept), int(r.size), cond)


# -- reports -----------------------------------------------------------------

def _stats(v):
    v = np.asarray(v, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return {"count": 0, "max": 0.0, "mean": 0.0, "q50": 0.0, "q90": 0.0, "q99": 0.0}
    q = np.quantile(v, [0.5, 0.9, 0.99])
    return {"count": int(v.size), "max": float(v.max()), "mean": float(v.mean()),
            "q50": float(q[0]), "q90": float(q[1]), "q99": float(q[2])}


@dataclass
class VerificationReport:
    assoc: dict
    calib: dict
    n_degenerate: int
    sl: dict
    fits: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    gates: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.gates.values())

    def to_dict(self):
        return asdict(self)


def verify_mesh(mesh, assoc_tol: float = 1e-8, calib_tol: float | None = None,
                sl_tol: float = 1e-10, provenance=None) -> VerificationReport:
    """Recompute residuals from the stored frames and gate them."""
    ra, rc = mesh.recompute()
    sl = sl_detect(mesh, sl_tol)
    gates = {"assoc": bool(np.all(ra <= assoc_tol))}
    if calib_tol is not None:
        finite = rc[np.isfinite(rc)]
        gates["calib"] = bool(np.all(finite <= calib_tol))
    return VerificationReport(
        assoc=_stats(ra), calib=_stats(rc), n_degenerate=int(np.isnan(rc).sum()),
        sl={"is_sl": sl.is_sl, **sl.evidence},
        provenance=dict(provenance if provenance is not None else mesh.meta),
        gates=gates,
    )

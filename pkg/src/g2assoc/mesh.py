"""Sampled 3-folds in R^7 with tangent frames and per-point residuals."""

from dataclasses import dataclass, field

import numpy as np

from .g2core import associator, norm


def frame_residuals(frames):
    """Associator residual and calibration defect for frames of shape (n, 3, 7).

    The associator residual is normalised by the product of the frame norms
    and is 0 for frames containing a zero vector. The calibration defect is
    NaN where the frame is degenerate.
    """
    from .verify import calibration_defects

    frames = np.asarray(frames, dtype=float)
    f1, f2, f3 = frames[..., 0, :], frames[..., 1, :], frames[..., 2, :]
    scale = norm(f1) * norm(f2) * norm(f3)
    raw = norm(associator(f1, f2, f3))
    ok = scale > 0
    assoc = np.where(ok, raw / np.where(ok, scale, 1.0), 0.0)
    return assoc, calibration_defects(frames)


@dataclass
class SurfaceMesh:
    params: np.ndarray
    points: np.ndarray
    frames: np.ndarray
    res_assoc: np.ndarray
    res_calib: np.ndarray
    shape: tuple | None = None
    labels: tuple = ("y1", "y2", "t")
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float).reshape(-1, 3)
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 7)
        self.frames = np.asarray(self.frames, dtype=float).reshape(-1, 3, 7)
        self.res_assoc = np.asarray(self.res_assoc, dtype=float).ravel()
        self.res_calib = np.asarray(self.res_calib, dtype=float).ravel()
        n = len(self.params)
        if not (len(self.points) == len(self.frames) == len(self.res_assoc) == len(self.res_calib) == n):
            raise ValueError("mesh arrays have inconsistent lengths")
        if self.shape is not None:
            self.shape = tuple(int(s) for s in self.shape)
            if int(np.prod(self.shape)) != n:
                raise ValueError("grid shape does not match number of points")

    def __len__(self):
        return len(self.params)

    @classmethod
    def from_frames(cls, params, points, frames, **kw):
        ra, rc = frame_residuals(np.asarray(frames, dtype=float).reshape(-1, 3, 7))
        return cls(params, points, frames, ra, rc, **kw)

    def recompute(self):
        """Residuals recomputed from the stored frames."""
        return frame_residuals(self.frames)

    @property
    def degenerate(self):
        return np.isnan(self.res_calib)

    def permuted(self, order) -> "SurfaceMesh":
        order = np.asarray(order)
        return SurfaceMesh(self.params[order], self.points[order], self.frames[order],
                           self.res_assoc[order], self.res_calib[order], shape=None,
                           labels=self.labels, meta=dict(self.meta))

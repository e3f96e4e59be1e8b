"""G2 multilinear algebra on R^7.

The 3-form ``phi`` and the 4-form ``*phi`` are stored as signed index lists
and expanded by permutation sign on evaluation. Everything else (cross
product, associator, octonion product) is derived from those two lists.

All functions accept arrays of shape ``(..., 7)`` and broadcast over the
leading axes. Indices in the tables are 0-based (``e1`` is index 0).
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegeneratePlane, NotInComplement, ZeroVector

# dx123 + dx145 + dx167 + dx246 - dx257 - dx347 - dx356
PHI_TERMS = (
    ((0, 1, 2), 1.0),
    ((0, 3, 4), 1.0),
    ((0, 5, 6), 1.0),
    ((1, 3, 5), 1.0),
    ((1, 4, 6), -1.0),
    ((2, 3, 6), -1.0),
    ((2, 4, 5), -1.0),
)

# dx4567 + dx2367 + dx2345 + dx1357 - dx1346 - dx1256 - dx1247
STAR_PHI_TERMS = (
    ((3, 4, 5, 6), 1.0),
    ((1, 2, 5, 6), 1.0),
    ((1, 2, 3, 4), 1.0),
    ((0, 2, 4, 6), 1.0),
    ((0, 2, 3, 5), -1.0),
    ((0, 1, 4, 5), -1.0),
    ((0, 1, 3, 6), -1.0),
)

DEFAULT_TOL = 1e-10


def basis(i: int) -> np.ndarray:
    """Unit vector ``e_i`` with 1-based index ``i`` (``basis(1)`` is e1)."""
    e = np.zeros(7)
    e[i - 1] = 1.0
    return e


def _det2(x, y, i, j):
    return x[..., i] * y[..., j] - x[..., j] * y[..., i]


def _det3(x, y, z, i, j, k):
    return (
        x[..., i] * _det2(y, z, j, k)
        - x[..., j] * _det2(y, z, i, k)
        + x[..., k] * _det2(y, z, i, j)
    )


def _det4(x, y, z, w, idx):
    i, j, k, l = idx
    return (
        x[..., i] * _det3(y, z, w, j, k, l)
        - x[..., j] * _det3(y, z, w, i, k, l)
        + x[..., k] * _det3(y, z, w, i, j, l)
        - x[..., l] * _det3(y, z, w, i, j, k)
    )


def phi3(x, y, z):
    """Evaluate the associative 3-form on three vectors."""
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    out = 0.0
    for (i, j, k), s in PHI_TERMS:
        out = out + s * _det3(x, y, z, i, j, k)
    return out


def star_phi4(x, y, z, w):
    """Evaluate the coassociative 4-form on four vectors."""
    x, y, z, w = (np.asarray(v, dtype=float) for v in (x, y, z, w))
    out = 0.0
    for idx, s in STAR_PHI_TERMS:
        out = out + s * _det4(x, y, z, w, idx)
    return out


def cross(x, y):
    """Cross product with ``g(x × y, z) = phi(x, y, z)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape, y.shape)
    out = np.zeros(shape)
    for (i, j, k), s in PHI_TERMS:
        out[..., k] += s * _det2(x, y, i, j)
        out[..., i] += s * _det2(x, y, j, k)
        out[..., j] += s * _det2(x, y, k, i)
    return out


def associator(x, y, z):
    """Associator ``[x, y, z] = 2 (*phi)(x, y, z, .)`` with the index raised."""
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    shape = np.broadcast_shapes(x.shape, y.shape, z.shape)
    out = np.zeros(shape)
    for (i, j, k, l), s in STAR_PHI_TERMS:
        # moving slot p of (i, j, k, l) to the end costs (3 - p) transpositions
        out[..., l] += s * _det3(x, y, z, i, j, k)
        out[..., k] -= s * _det3(x, y, z, i, j, l)
        out[..., j] += s * _det3(x, y, z, i, k, l)
        out[..., i] -= s * _det3(x, y, z, j, k, l)
    return 2.0 * out


def inner(x, y):
    return np.sum(np.asarray(x, dtype=float) * np.asarray(y, dtype=float), axis=-1)


def norm(x):
    return np.linalg.norm(np.asarray(x, dtype=float), axis=-1)


@dataclass(frozen=True)
class Octonion:
    re: float
    im: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "im", np.asarray(self.im, dtype=float))

    @classmethod
    def real(cls, r: float) -> "Octonion":
        return cls(float(r), np.zeros(7))

    @classmethod
    def imaginary(cls, v) -> "Octonion":
        return cls(0.0, np.asarray(v, dtype=float))

    def conj(self) -> "Octonion":
        return Octonion(self.re, -self.im)

    def norm(self) -> float:
        return float(np.sqrt(self.re**2 + self.im @ self.im))

    def __mul__(self, other: "Octonion") -> "Octonion":
        return oct_mul(self, other)

    def __add__(self, other: "Octonion") -> "Octonion":
        return Octonion(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "Octonion") -> "Octonion":
        return Octonion(self.re - other.re, self.im - other.im)


def oct_product(a_re, a_im, b_re, b_im):
    """Array form of octonion multiplication.

    Uses ``xy = -g(x, y) + x × y`` on imaginary parts with 1 as the unit, so no
    separate multiplication table exists.
    """
    a_re = np.asarray(a_re, dtype=float)
    b_re = np.asarray(b_re, dtype=float)
    a_im = np.asarray(a_im, dtype=float)
    b_im = np.asarray(b_im, dtype=float)
    re = a_re * b_re - inner(a_im, b_im)
    im = a_re[..., None] * b_im + b_re[..., None] * a_im + cross(a_im, b_im)
    return re, im


def oct_mul(a: Octonion, b: Octonion) -> Octonion:
    re, im = oct_product(a.re, a.im, b.re, b.im)
    return Octonion(float(re), im)


def oct_associator(x, y, z):
    """``(xy)z - x(yz)`` for imaginary octonions, returned as (re, im)."""
    zero = np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y), np.shape(z))[:-1])
    xy = oct_product(zero, x, zero, y)
    yz = oct_product(zero, y, zero, z)
    lhs = oct_product(xy[0], xy[1], zero, z)
    rhs = oct_product(zero, x, yz[0], yz[1])
    return lhs[0] - rhs[0], lhs[1] - rhs[1]


def gram_determinant(*vectors) -> float:
    """Gram determinant of the unit-normalised vectors (scale free)."""
    vs = np.array([np.asarray(v, dtype=float) for v in vectors])
    n = np.linalg.norm(vs, axis=1)
    if np.any(n == 0):
        return 0.0
    u = vs / n[:, None]
    return float(np.linalg.det(u @ u.T))


def is_associative_plane(x, y, z, tol: float = DEFAULT_TOL):
    """Test whether ``span(x, y, z)`` is an associative 3-plane.

    Returns ``(flag, residual)`` with residual ``|[x,y,z]| / (|x||y||z|)``.
    Raises ``DegeneratePlane`` if the vectors are (numerically) dependent.
    """
    if gram_determinant(x, y, z) <= tol:
        raise DegeneratePlane("vectors are linearly dependent")
    scale = float(norm(x) * norm(y) * norm(z))
    residual = float(norm(associator(x, y, z))) / scale
    return residual <= tol, residual


@dataclass(frozen=True)
class SplitFrame:
    """The splitting ``R^7 = <axis> + C^3`` determined by a unit vector.

    ``J`` is the complex structure on the orthogonal complement and ``omega``
    the Kähler form, ``omega(x, y) = phi(axis, x, y)``.
    """

    axis: np.ndarray

    def J(self, x):
        return cross(self.axis, x)

    def omega(self, x, y):
        return phi3(self.axis, x, y)

    def project(self, x):
        """Orthogonal projection onto the complement of ``axis``."""
        x = np.asarray(x, dtype=float)
        return x - inner(x, self.axis)[..., None] * self.axis

    @property
    def J_fn(self) -> Callable:
        return self.J


def split_along(v) -> SplitFrame:
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ZeroVector("cannot split along the zero vector")
    return SplitFrame(v / n)


def complex_cross(u, v, frame: SplitFrame, tol: float = DEFAULT_TOL):
    """Cross product on the ``C^3`` factor: ``u × v - omega(u, v) axis``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    for w in (u, v):
        off = np.abs(inner(w, frame.axis))
        if np.any(off > tol * np.maximum(norm(w), 1.0)):
            raise NotInComplement("argument has a component along the split axis")
    return cross(u, v) - frame.omega(u, v)[..., None] * frame.axis

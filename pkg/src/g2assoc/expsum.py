"""Exact arithmetic on finite exponential sums.

An ``ExpSum`` represents

    f(t) = sum_k c_k exp(i w_k t) + drift * t + offset

with complex ``c_k``, real distinct nonzero frequencies ``w_k``, and complex
``drift`` and ``offset``. Products, conjugation, real/imaginary parts,
differentiation and termwise integration are closed operations, as long as
no product or integral would create ``t * exp(...)`` or ``t**2`` terms.
"""

import numpy as np

FREQ_TOL = 1e-12


def _merge(freqs, coefs, tol=FREQ_TOL):
    """Combine terms whose frequencies agree within ``tol`` (scaled).

    Returns ``(freqs, coefs, zero_part)`` where ``zero_part`` collects the
    terms with frequency numerically zero.
    """
    freqs = np.asarray(freqs, dtype=float).ravel()
    coefs = np.asarray(coefs, dtype=complex).ravel()
    if freqs.size == 0:
        return np.zeros(0), np.zeros(0, dtype=complex), 0j
    order = np.argsort(freqs, kind="stable")
    freqs = freqs[order]
    coefs = coefs[order]
    out_f, out_c = [], []
    zero = 0j
    i = 0
    n = freqs.size
    while i < n:
        j = i + 1
        while j < n and freqs[j] - freqs[i] <= tol * max(1.0, abs(freqs[i])):
            j += 1
        c = coefs[i:j].sum()
        f = freqs[i:j].mean() if j - i > 1 else freqs[i]
        if abs(f) <= tol:
            zero += c
        else:
            out_f.append(f)
            out_c.append(c)
        i = j
    return np.array(out_f, dtype=float), np.array(out_c, dtype=complex), zero


class ExpSum:
    __slots__ = ("freqs", "coefs", "drift", "offset")

    def __init__(self, freqs=(), coefs=(), drift=0.0, offset=0.0):
        f, c, zero = _merge(freqs, coefs)
        self.freqs = f
        self.coefs = c
        self.drift = complex(drift)
        self.offset = complex(offset) + zero

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, value) -> "ExpSum":
        return cls(offset=value)

    @classmethod
    def exp(cls, freq, coef=1.0) -> "ExpSum":
        return cls([freq], [coef])

    @classmethod
    def zero(cls) -> "ExpSum":
        return cls()

    # evaluation ---------------------------------------------------------
    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        phase = np.exp(1j * np.multiply.outer(t, self.freqs))
        return phase @ self.coefs + self.drift * t + self.offset

    def real_values(self, t):
        return np.real(self(t))

    # algebra ------------------------------------------------------------
    def _combine(self, other, sign):
        if not isinstance(other, ExpSum):
            return ExpSum(self.freqs, self.coefs, self.drift, self.offset + sign * other)
        return ExpSum(
            np.concatenate([self.freqs, other.freqs]),
            np.concatenate([self.coefs, sign * other.coefs]),
            self.drift + sign * other.drift,
            self.offset + sign * other.offset,
        )

    def __add__(self, other):
        return self._combine(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return ExpSum(self.freqs, -self.coefs, -self.drift, -self.offset)

    def __mul__(self, other):
        if not isinstance(other, ExpSum):
            other = complex(other)
            return ExpSum(self.freqs, self.coefs * other, self.drift * other, self.offset * other)
        if (self.drift != 0 and other.has_oscillation()) or (
            other.drift != 0 and self.has_oscillation()
        ) or (self.drift != 0 and other.drift != 0):
            raise ValueError("product with a drift term is not an exponential sum")
        f1 = np.append(self.freqs, 0.0)
        c1 = np.append(self.coefs, self.offset)
        f2 = np.append(other.freqs, 0.0)
        c2 = np.append(other.coefs, other.offset)
        freqs = np.add.outer(f1, f2).ravel()
        coefs = np.multiply.outer(c1, c2).ravel()
        drift = self.drift * other.offset + other.drift * self.offset
        return ExpSum(freqs, coefs, drift, 0.0)

    __rmul__ = __mul__

    def has_oscillation(self) -> bool:
        return bool(np.any(self.coefs != 0))

    def conj(self) -> "ExpSum":
        return ExpSum(-self.freqs, np.conj(self.coefs), np.conj(self.drift), np.conj(self.offset))

    def re(self) -> "ExpSum":
        return (self + self.conj()) * 0.5

    def im(self) -> "ExpSum":
        return (self - self.conj()) * (-0.5j)

    def derivative(self) -> "ExpSum":
        return ExpSum(self.freqs, 1j * self.freqs * self.coefs, 0.0, self.drift)

    def integral(self, constant=0.0) -> "ExpSum":
        """Antiderivative ``F`` with ``F(0) = constant``.

        Oscillating terms integrate to ``c/(iw) e^{iwt}``, the constant part
        becomes a drift. Raises if a drift is already present.
        """
        if self.drift != 0:
            raise ValueError("integrating a drift term leaves the exponential-sum algebra")
        coefs = self.coefs / (1j * self.freqs) if self.freqs.size else self.coefs
        base = ExpSum(self.freqs, coefs, self.offset, 0.0)
        return base + (complex(constant) - base(0.0))

    def shift(self, t0) -> "ExpSum":
        """The function ``t -> f(t + t0)``."""
        return ExpSum(
            self.freqs,
            self.coefs * np.exp(1j * self.freqs * t0),
            self.drift,
            self.offset + self.drift * t0,
        )

    # inspection ---------------------------------------------------------
    def max_coef(self) -> float:
        vals = [abs(self.drift), abs(self.offset)]
        if self.coefs.size:
            vals.append(float(np.abs(self.coefs).max()))
        return max(vals)

    def is_constant(self, tol=0.0) -> bool:
        osc = float(np.abs(self.coefs).max()) if self.coefs.size else 0.0
        return osc <= tol and abs(self.drift) <= tol

    def coefficient_distance(self, other: "ExpSum") -> float:
        """Largest coefficient of ``self - other``."""
        return (self - other).max_coef()

    def __repr__(self):
        return (
            f"ExpSum(n_terms={self.freqs.size}, drift={self.drift:.3g}, "
            f"offset={self.offset:.3g})"
        )

"""Two-mode complex field algebra.

Fields are pairs of complex amplitudes (upper path/port, lower path/port) and
optical elements are 2x2 complex operators acting on them. Intensities are
normalized so the laser input carries ``I_0 = 1``.

Everything here is an immutable value; operators built from :func:`make_bs`,
:func:`make_phase` and :func:`compose` are unitary to rounding.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class TwoModeField:
    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))

    @classmethod
    def from_array(cls, v) -> TwoModeField:
        return cls(complex(v[0]), complex(v[1]))

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=complex)

    def scaled(self, c: complex) -> TwoModeField:
        return TwoModeField(c * self.a, c * self.b)

    def is_finite(self) -> bool:
        return all(math.isfinite(x) for x in (self.a.real, self.a.imag, self.b.real, self.b.imag))


# The injection state: all light enters the upper port.
INPUT = TwoModeField(1.0, 0.0)


@dataclass(frozen=True)
class TwoPortOperator:
    m11: complex
    m12: complex
    m21: complex
    m22: complex

    def __post_init__(self):
        for name in ("m11", "m12", "m21", "m22"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @classmethod
    def from_matrix(cls, m) -> TwoPortOperator:
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]], dtype=complex)

    def dagger(self) -> TwoPortOperator:
        return TwoPortOperator(
            self.m11.conjugate(), self.m21.conjugate(),
            self.m12.conjugate(), self.m22.conjugate(),
        )

    def scaled(self, c: complex) -> TwoPortOperator:
        return TwoPortOperator(c * self.m11, c * self.m12, c * self.m21, c * self.m22)

    def unitarity_error(self) -> float:
        """Largest entrywise deviation of ``M M^dagger`` from the identity."""
        p = compose(self, self.dagger())
        return max(abs(p.m11 - 1), abs(p.m12), abs(p.m21), abs(p.m22 - 1))

    def __matmul__(self, other):
        if isinstance(other, TwoPortOperator):
            return compose(self, other)
        if isinstance(other, TwoModeField):
            return apply(self, other)
        return NotImplemented


IDENTITY = TwoPortOperator(1, 0, 0, 1)


def make_bs() -> TwoPortOperator:
    """Lossless 50/50 beam splitter ``(1/sqrt2) [[1, i], [i, 1]]``."""
    return TwoPortOperator(SQRT_HALF, 1j * SQRT_HALF, 1j * SQRT_HALF, SQRT_HALF)


def make_phase(phi1: float, phi2: float) -> TwoPortOperator:
    """Diagonal phase shifter ``diag(e^{i phi1}, e^{i phi2})``.

    The two-arm shifter of a single MZI is ``make_phase(0, phi)``.
    """
    if not (math.isfinite(phi1) and math.isfinite(phi2)):
        raise ValueError(f"phases must be finite, got ({phi1!r}, {phi2!r})")
    return TwoPortOperator(cmath.exp(1j * phi1), 0, 0, cmath.exp(1j * phi2))


def compose(*ops: TwoPortOperator) -> TwoPortOperator:
    """Matrix product in written order: ``compose(C, B, A)`` applies A first."""
    if not ops:
        return IDENTITY
    out = ops[-1]
    for s in reversed(ops[:-1]):
        f = out
        out = TwoPortOperator(
            s.m11 * f.m11 + s.m12 * f.m21,
            s.m11 * f.m12 + s.m12 * f.m22,
            s.m21 * f.m11 + s.m22 * f.m21,
            s.m21 * f.m12 + s.m22 * f.m22,
        )
    return out


def apply(op: TwoPortOperator, f: TwoModeField) -> TwoModeField:
    return TwoModeField(op.m11 * f.a + op.m12 * f.b, op.m21 * f.a + op.m22 * f.b)


def intensities(f: TwoModeField) -> tuple[float, float]:
    return (f.a.real ** 2 + f.a.imag ** 2, f.b.real ** 2 + f.b.imag ** 2)


def total_intensity(f: TwoModeField) -> float:
    ia, ib = intensities(f)
    return ia + ib


def random_unitary(rng: np.random.Generator) -> TwoPortOperator:
    """Haar-random 2x2 unitary (QR of a complex Ginibre matrix)."""
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return TwoPortOperator.from_matrix(q * (d / np.abs(d)))


def align_global_phase(m: TwoPortOperator, ref: TwoPortOperator) -> TwoPortOperator:
    """Rotate ``m`` by the global phase that best matches ``ref``.

    Used for "equal up to global phase" comparisons; never changes intensities.
    """
    overlap = np.vdot(m.matrix.ravel(), ref.matrix.ravel())
    if abs(overlap) == 0:
        return m
    return m.scaled(overlap / abs(overlap))


def max_entry_diff(m: TwoPortOperator, n: TwoPortOperator) -> float:
    return float(np.max(np.abs(m.matrix - n.matrix)))

"""Mach-Zehnder physics: single MZI, the coupled double MZI, and n-stage chains.

Phase conventions: ``phi`` is Bob's inter-arm phase and ``psi`` Alice's, both
applied as ``make_phase(0, angle)`` between two beam splitters. Only the arm
phase *difference* is physical, so every intensity here depends on the
angles through ``cos`` of a difference.

The closed forms (``mzi_intensities``, ``coupled_intensities``) accept numpy
arrays; the operator forms work on scalars.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import USCKDError
from .field import (
    INPUT,
    TwoPortOperator,
    apply,
    compose,
    intensities,
    make_bs,
    make_phase,
)


class PhaseBasis(enum.Enum):
    ZERO = 0
    PI = 1

    @property
    def radians(self) -> float:
        return 0.0 if self is PhaseBasis.ZERO else math.pi

    @property
    def bit(self) -> int:
        return self.value

    @classmethod
    def from_bit(cls, bit: int) -> PhaseBasis:
        return cls.PI if bit else cls.ZERO

    def __str__(self) -> str:
        return "0" if self is PhaseBasis.ZERO else "pi"


def to_radians(basis: PhaseBasis) -> float:
    return basis.radians


@dataclass(frozen=True)
class PhasePair:
    """Arm phases of one MZI: ``upper`` (phi_1 / psi_1) and ``lower`` (phi_2 / psi_2)."""

    upper: float
    lower: float = 0.0

    def difference(self) -> float:
        return self.upper - self.lower


class Port(str, enum.Enum):
    A = "A"
    B = "B"


@dataclass(frozen=True)
class PortOutcome:
    bright_port: Port
    I_A: float
    I_B: float


def mzi_transfer(phi: float) -> TwoPortOperator:
    """``[BS][phi][BS]`` written out in closed form."""
    if not math.isfinite(phi):
        raise ValueError(f"phi must be finite, got {phi!r}")
    e = cmath.exp(1j * phi)
    return TwoPortOperator(
        0.5 * (1 - e), 0.5j * (1 + e),
        0.5j * (1 + e), -0.5 * (1 - e),
    )


def mzi_intensities(phi):
    """Port intensities ``(I_alpha, I_beta)`` of one MZI fed at the upper port."""
    c = np.cos(phi)
    return 0.5 * (1 - c), 0.5 * (1 + c)


def coupled_transfer(phi: float, psi: float) -> TwoPortOperator:
    """Round-trip operator ``[BS][psi][BS] . [BS][phi][BS]`` in closed form."""
    if not (math.isfinite(phi) and math.isfinite(psi)):
        raise ValueError(f"phases must be finite, got ({phi!r}, {psi!r})")
    ep, es = cmath.exp(1j * phi), cmath.exp(1j * psi)
    s, d = ep + es, ep - es
    return TwoPortOperator(-0.5 * s, 0.5j * d, -0.5j * d, -0.5 * s)


def coupled_transfer_composed(phi: float, psi: float) -> TwoPortOperator:
    bs = make_bs()
    return compose(bs, make_phase(0.0, psi), bs, bs, make_phase(0.0, phi), bs)


def coupled_intensities(phi, psi):
    """Final port intensities ``(I_A, I_B) = (cos^2((phi-psi)/2), sin^2((phi-psi)/2))``."""
    c = np.cos(np.subtract(phi, psi))
    return 0.5 * (1 + c), 0.5 * (1 - c)


def basis_outcome(phi: PhaseBasis, psi: PhaseBasis) -> PortOutcome:
    # Evaluated through the operator, not a lookup: the table is a consequence.
    ia, ib = intensities(apply(coupled_transfer(phi.radians, psi.radians), INPUT))
    return PortOutcome(Port.A if ia > ib else Port.B, ia, ib)


def chain_transfer(stage_phases: Sequence[float]) -> TwoPortOperator:
    """n MZIs in series; stage k applies ``[BS][theta_k][BS]``.

    One stage is :func:`mzi_transfer`; two stages ``(phi, psi)`` are
    :func:`coupled_transfer`.
    """
    if len(stage_phases) == 0:
        raise USCKDError("empty chain")
    ops = [mzi_transfer(float(p)) for p in stage_phases]
    return compose(*reversed(ops))


def alternating_phases(phi: float, n: int) -> list[float]:
    """Stage phases ``[phi, -phi, phi, ...]`` (the CBW sign pattern for n = 2)."""
    return [phi if k % 2 == 0 else -phi for k in range(n)]


def chain_bright_intensity(phis: np.ndarray, n: int, pattern=alternating_phases) -> np.ndarray:
    """Upper-port intensity of an n-stage chain for each swept ``phi`` (vectorized).

    ``pattern(phi, n)`` must be linear in ``phi``.
    """
    phis = np.asarray(phis, dtype=float)
    bs = make_bs().matrix
    m = np.broadcast_to(np.eye(2, dtype=complex), phis.shape + (2, 2)).copy()
    weights = pattern(1.0, n)
    for k in range(n):
        theta = weights[k] * phis
        ph = np.zeros(phis.shape + (2, 2), dtype=complex)
        ph[..., 0, 0] = 1.0
        ph[..., 1, 1] = np.exp(1j * theta)
        m = bs @ ph @ bs @ m
    return np.abs(m[..., 0, 0]) ** 2


@dataclass(frozen=True)
class ExtremaSpacing:
    n: int
    samples: int
    positions: np.ndarray
    spacing: float
    min_gap: float
    max_gap: float


def measure_extrema_spacing(n: int, samples: int = 10_000, tol: float = 1e-9) -> ExtremaSpacing:
    """Sweep ``phi`` over ``[0, 2pi)`` and measure spacing between fringe extrema.

    Local extrema are sign changes of the (circular) discrete derivative,
    ignoring steps smaller than ``tol``; positions are refined by a parabola
    through the three neighbouring samples.
    """
    step = 2 * math.pi / samples
    x = np.arange(samples) * step
    y = chain_bright_intensity(x, n)
    dy = np.roll(y, -1) - y
    dy[np.abs(dy) < tol] = 0.0
    s = np.sign(dy)
    # carry the last non-zero slope through flat steps
    for i in range(samples):
        if s[i] == 0:
            s[i] = s[i - 1]
    prev = np.roll(s, 1)
    idx = np.nonzero((s != prev) & (s != 0) & (prev != 0))[0]
    pos = []
    for i in idx:
        y0, y1, y2 = y[i - 1], y[i], y[(i + 1) % samples]
        denom = y0 - 2 * y1 + y2
        off = 0.5 * (y0 - y2) / denom if abs(denom) > 1e-15 else 0.0
        pos.append((x[i] + off * step) % (2 * math.pi))
    pos = np.sort(np.array(pos))
    if len(pos) < 2:
        return ExtremaSpacing(n, samples, pos, float("nan"), float("nan"), float("nan"))
    gaps = np.diff(np.r_[pos, pos[0] + 2 * math.pi])
    return ExtremaSpacing(n, samples, pos, float(gaps.mean()), float(gaps.min()), float(gaps.max()))

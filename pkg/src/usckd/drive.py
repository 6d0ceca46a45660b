"""Time-domain AOM drive experiments.

Each side (Bob's phi-MZI, Alice's psi-MZI) has two arms driven by AOMs. An
arm's phase grows as ``2*pi*f*t``; only the upper-minus-lower difference is
observable, so the common 80 MHz carrier cancels and what matters is the
frequency *difference* between the arms of one side. A schedule is a list of
segments that switch drive frequencies at given times ("toggles"). Switching
is phase-continuous, like a real rf synthesizer updating its frequency.

On top of the drives: an optional glass-plate ramp on Alice's upper arm and a
per-side random-walk phase noise (air fluctuations).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CalibrationError, PreconditionError, UndersampledError, USCKDError
from .interferometer import coupled_intensities, mzi_intensities

CARRIER_HZ = 80e6


class Side(str, enum.Enum):
    BOB = "bob"
    ALICE = "alice"


@dataclass(frozen=True)
class ArmDrive:
    detune: float = 0.0
    phase_offset: float = 0.0
    base_freq: float = CARRIER_HZ

    @property
    def frequency(self) -> float:
        return self.base_freq + self.detune


def beat(upper: ArmDrive, lower: ArmDrive) -> float:
    """Upper-minus-lower drive frequency, computed without carrier round-off."""
    return (upper.base_freq - lower.base_freq) + (upper.detune - lower.detune)


@dataclass(frozen=True)
class Segment:
    start: float
    bob: tuple[ArmDrive, ArmDrive] = (ArmDrive(), ArmDrive())
    alice: tuple[ArmDrive, ArmDrive] = (ArmDrive(), ArmDrive())

    def pair(self, side: Side) -> tuple[ArmDrive, ArmDrive]:
        return self.bob if Side(side) is Side.BOB else self.alice

    def beat(self, side: Side) -> float:
        return beat(*self.pair(side))


@dataclass(frozen=True)
class GlassRamp:
    """Extra phase on Alice's upper arm from tilting a glass plate.

    ``total_phase * u**acceleration_exponent`` with ``u`` the elapsed fraction
    of the ramp, so the phase rate grows as the plate turns away from normal.
    """

    start_time: float
    duration: float
    total_phase: float = 2 * math.pi
    acceleration_exponent: float = 2.0

    def __post_init__(self):
        if self.duration <= 0:
            raise USCKDError(f"ramp duration must be positive, got {self.duration!r}")
        if self.acceleration_exponent < 1:
            raise USCKDError("acceleration_exponent must be >= 1")

    def phase(self, t):
        u = np.clip((np.asarray(t, dtype=float) - self.start_time) / self.duration, 0.0, 1.0)
        return self.total_phase * u ** self.acceleration_exponent


@dataclass(frozen=True)
class DriveSchedule:
    segments: tuple[Segment, ...]
    ramp: GlassRamp | None = None

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise USCKDError("schedule needs at least one segment")
        if segs[0].start != 0:
            raise USCKDError("first segment must start at t=0")
        starts = [s.start for s in segs]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise USCKDError(f"segment start times must be strictly increasing: {starts}")
        for s in segs[1:]:
            for arm in (*s.bob, *s.alice):
                if arm.phase_offset != 0:
                    raise USCKDError(
                        "phase_offset is only allowed on the first segment; "
                        "toggles are phase-continuous"
                    )

    @property
    def toggle_times(self) -> list[float]:
        return [s.start for s in self.segments[1:]]

    def max_beat(self) -> float:
        return max(abs(s.beat(side)) for s in self.segments for side in Side)

    @classmethod
    def static(cls, phi: float = 0.0, psi: float = 0.0, ramp: GlassRamp | None = None) -> DriveSchedule:
        """Fixed phase settings, no detuning."""
        return cls(
            (Segment(0.0, (ArmDrive(phase_offset=phi), ArmDrive()), (ArmDrive(phase_offset=psi), ArmDrive())),),
            ramp,
        )

    @classmethod
    def detuned(cls, bob_hz: float, alice_hz: float, toggles: Sequence[tuple[float, float, float]] = ()) -> DriveSchedule:
        """Upper-arm detunings for each side; ``toggles`` are ``(t, bob_hz, alice_hz)`` switches."""
        segs = [(0.0, bob_hz, alice_hz), *toggles]
        return cls(tuple(
            Segment(t, (ArmDrive(detune=b), ArmDrive()), (ArmDrive(detune=a), ArmDrive()))
            for t, b, a in segs
        ))


def _segment_origins(schedule: DriveSchedule, side: Side) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Segment starts, beats and accumulated phase at each start."""
    segs = schedule.segments
    starts = np.array([s.start for s in segs], dtype=float)
    beats = np.array([s.beat(side) for s in segs], dtype=float)
    up, lo = segs[0].pair(side)
    phase0 = up.phase_offset - lo.phase_offset
    origins = np.empty(len(segs))
    origins[0] = phase0
    for k in range(1, len(segs)):
        origins[k] = origins[k - 1] + 2 * math.pi * beats[k - 1] * (starts[k] - starts[k - 1])
    return starts, beats, origins


def phase_at(schedule: DriveSchedule, side: Side, t):
    """Noiseless upper-minus-lower arm phase of ``side`` at time(s) ``t``.

    Includes the glass ramp for Alice. Accepts a scalar or an array.
    """
    side = Side(side)
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0):
        raise PreconditionError("time before schedule start")
    starts, beats, origins = _segment_origins(schedule, side)
    k = np.searchsorted(starts, tt, side="right") - 1
    out = origins[k] + 2 * math.pi * beats[k] * (tt - starts[k])
    if side is Side.ALICE and schedule.ramp is not None:
        out = out + schedule.ramp.phase(tt)
    if np.ndim(t) == 0:
        return float(out)
    return out


class NoiseKind(str, enum.Enum):
    NONE = "none"
    RANDOM_WALK = "random_walk"


@dataclass(frozen=True)
class NoiseModel:
    kind: NoiseKind = NoiseKind.NONE
    sigma_per_sample: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if self.sigma_per_sample < 0 or not math.isfinite(self.sigma_per_sample):
            raise USCKDError(f"sigma_per_sample must be finite and >= 0, got {self.sigma_per_sample!r}")

    @classmethod
    def random_walk(cls, sigma: float, seed: int = 0) -> NoiseModel:
        return cls(NoiseKind.RANDOM_WALK, sigma, seed)

    @property
    def active(self) -> bool:
        return self.kind is NoiseKind.RANDOM_WALK and self.sigma_per_sample > 0


NO_NOISE = NoiseModel()


def unit_walks(seed: int, n: int) -> np.ndarray:
    """Two unit-step random walks (phi, psi) of length ``n`` starting at 0."""
    rng = np.random.default_rng(seed)
    steps = rng.standard_normal((2, max(n - 1, 0)))
    walks = np.zeros((2, n))
    np.cumsum(steps, axis=1, out=walks[:, 1:])
    return walks


def noise_walks(noise: NoiseModel, n: int) -> np.ndarray:
    if not noise.active:
        return np.zeros((2, n))
    return noise.sigma_per_sample * unit_walks(noise.seed, n)


@dataclass
class TimeTrace:
    sample_rate: float
    t0: float
    channels: dict[str, np.ndarray]
    phi: np.ndarray = field(repr=False, default=None)
    psi: np.ndarray = field(repr=False, default=None)

    CHANNELS = ("I_A", "I_B", "I_alpha")

    def __len__(self) -> int:
        return len(self.channels["I_A"])

    @property
    def t(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) / self.sample_rate

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]


def sample_count(sample_rate: float, duration: float) -> int:
    return int(round(duration * sample_rate))


def simulate_trace(
    schedule: DriveSchedule,
    noise: NoiseModel = NO_NOISE,
    sample_rate: float = 100.0,
    duration: float = 20.0,
    leakage: float = 0.0,
) -> TimeTrace:
    """Sample detector intensities of the coupled MZI under a drive schedule.

    ``leakage`` mixes a fraction of the first MZI's fringe into the final
    ports (the residual 1 Hz background seen on real setups); 0 is ideal.
    """
    if duration <= 0:
        raise PreconditionError(f"duration must be positive, got {duration!r}")
    if not 0 <= leakage <= 1:
        raise USCKDError(f"leakage must lie in [0, 1], got {leakage!r}")
    max_beat = schedule.max_beat()
    if not sample_rate > 4 * max_beat:
        raise UndersampledError(sample_rate, max_beat)
    n = sample_count(sample_rate, duration)
    if n < 1:
        raise PreconditionError("duration shorter than one sample")
    t = np.arange(n) / sample_rate
    walks = noise_walks(noise, n)
    phi = phase_at(schedule, Side.BOB, t) + walks[0]
    psi = phase_at(schedule, Side.ALICE, t) + walks[1]
    i_alpha, i_beta = mzi_intensities(phi)
    i_a, i_b = coupled_intensities(phi, psi)
    if leakage:
        i_a = (1 - leakage) * i_a + leakage * i_alpha
        i_b = (1 - leakage) * i_b + leakage * i_beta
    chans = {"I_A": i_a, "I_B": i_b, "I_alpha": i_alpha}
    if noise.active:
        # detector clipping; only rounding can leave [0, 1] here
        chans = {k: np.clip(v, 0.0, 1.0) for k, v in chans.items()}
    return TimeTrace(sample_rate, 0.0, chans, phi, psi)


@dataclass(frozen=True)
class SpectralPeak:
    frequency: float
    resolution: float
    no_oscillation: bool = False


def dominant_frequency(channel, sample_rate: float) -> SpectralPeak:
    """Largest non-DC bin of the DFT of the mean-subtracted channel.

    Ties go to the lowest frequency. A constant channel returns 0 Hz flagged
    ``no_oscillation``.
    """
    x = np.asarray(channel, dtype=float)
    n = len(x)
    resolution = sample_rate / n
    if n < 2 or np.ptp(x) <= 1e-12:
        return SpectralPeak(0.0, resolution, True)
    spec = np.abs(np.fft.rfft(x - x.mean()))
    spec[0] = 0.0
    k = int(np.argmax(spec))  # first maximum -> lowest frequency on ties
    return SpectralPeak(k * resolution, resolution)


def toggle_level(schedule: DriveSchedule, switch_index: int | None = None) -> float:
    """Constant I_A level after a CBW -> USCKD toggle (noiseless).

    Once both sides beat at the same frequency the relative phase freezes at
    its value at the switch instant, so the level is the CBW intensity there.
    ``switch_index`` selects the segment that starts at the switch (default:
    the last one).
    """
    if len(schedule.segments) < 2:
        raise USCKDError("schedule has no toggle")
    idx = len(schedule.segments) - 1 if switch_index is None else switch_index
    if not 1 <= idx < len(schedule.segments):
        raise USCKDError(f"switch_index out of range: {switch_index!r}")
    seg = schedule.segments[idx]
    if seg.beat(Side.BOB) != seg.beat(Side.ALICE):
        raise USCKDError("not in USCKD regime")
    ts = seg.start
    i_a, _ = coupled_intensities(phase_at(schedule, Side.BOB, ts), phase_at(schedule, Side.ALICE, ts))
    return float(i_a)


def rms_fluctuation(noisy, clean) -> float:
    """RMS deviation of a noisy channel from its noiseless counterpart."""
    d = np.asarray(noisy, dtype=float) - np.asarray(clean, dtype=float)
    return float(np.sqrt(np.mean(d * d)))


def _ensemble_rms(sigma: float, unit: np.ndarray, operating_phase: float) -> float:
    # unit: (trials, 2, n) unit walks; I_A at relative phase offset + noise difference
    rel = operating_phase + sigma * (unit[:, 1] - unit[:, 0])
    i_a = 0.5 * (1 + np.cos(rel))
    clean = 0.5 * (1 + math.cos(operating_phase))
    return float(np.mean(np.sqrt(np.mean((i_a - clean) ** 2, axis=1))))


def ensemble_rms_fluctuation(
    noise: NoiseModel,
    window: float,
    sample_rate: float,
    trials: int = 100,
    operating_phase: float = math.pi / 2,
) -> float:
    """Mean per-trace RMS I_A fluctuation over ``trials`` seeds ``seed, seed+1, ...``."""
    n = sample_count(sample_rate, window)
    if not noise.active:
        return 0.0
    unit = np.stack([unit_walks(noise.seed + k, n) for k in range(trials)])
    return _ensemble_rms(noise.sigma_per_sample, unit, operating_phase)


def calibrate_noise(
    target_rms_intensity_fluctuation: float,
    window: float = 60.0,
    sample_rate: float = 100.0,
    seed: int = 0,
    trials: int = 100,
    operating_phase: float = math.pi / 2,
    rel_tol: float = 1e-3,
) -> NoiseModel:
    """Random-walk step size giving the requested mean RMS I_A fluctuation.

    The drive is static with ``psi - phi = operating_phase`` (half fringe by
    default); the ensemble uses seeds ``seed .. seed+trials-1`` with common
    random numbers, so the result is a deterministic function of the inputs.
    """
    target = target_rms_intensity_fluctuation
    if not 0 < target <= 0.5:
        raise USCKDError(f"target must lie in (0, 0.5], got {target!r}")
    if window <= 0:
        raise USCKDError(f"window must be positive, got {window!r}")
    n = sample_count(sample_rate, window)
    if n < 2:
        raise PreconditionError("calibration window shorter than two samples")
    unit = np.stack([unit_walks(seed + k, n) for k in range(trials)])
    f = lambda s: _ensemble_rms(s, unit, operating_phase)  # noqa: E731

    lo, hi = 0.0, 1e-4
    best_sigma, best = 0.0, 0.0
    while True:
        val = f(hi)
        if val > best:
            best_sigma, best = hi, val
        if val >= target:
            break
        lo = hi
        hi *= 2
        if hi > 2 * math.pi:
            raise CalibrationError(target, best, best_sigma)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = f(mid)
        if abs(val - target) <= rel_tol * target:
            return NoiseModel.random_walk(mid, seed)
        if val < target:
            lo = mid
        else:
            hi = mid
    return NoiseModel.random_walk(0.5 * (lo + hi), seed)

"""The key-distribution round trip over the coupled MZI.

One round: Bob picks phi in {0, pi} and injects light; Alice reads her MZI
ports and learns phi; she picks psi and sends the light back; Bob reads the
final ports and learns whether psi matched phi. Both hold the same bit,
``1`` when the bases match, with no sifting exchange.

Channel noise enters as a static phase offset per round and per side. Analog
detector readings are thresholded with an optional inconclusive band; rounds
that either party finds inconclusive are dropped by both.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .drive import NO_NOISE, NoiseModel
from .errors import USCKDError
from .interferometer import PhaseBasis, Port, basis_outcome


class Erasure(enum.Enum):
    ERASURE = "erasure"

    def __str__(self) -> str:
        return "erasure"


ERASURE = Erasure.ERASURE


@dataclass(frozen=True)
class DetectorConfig:
    threshold: float = 0.5
    erasure_band: float = 0.1

    def __post_init__(self):
        if not 0 < self.threshold < 1:
            raise USCKDError(f"threshold must lie in (0, 1), got {self.threshold!r}")
        if not 0 <= self.erasure_band < min(self.threshold, 1 - self.threshold):
            raise USCKDError(f"erasure_band {self.erasure_band!r} too wide for threshold {self.threshold!r}")

    def decide(self, intensity: float) -> bool | Erasure:
        if intensity >= self.threshold + self.erasure_band:
            return True
        if intensity <= self.threshold - self.erasure_band:
            return False
        return ERASURE


def bob_prepare(rng: np.random.Generator) -> PhaseBasis:
    return PhaseBasis.from_bit(int(rng.integers(2)))


def alice_choose(rng: np.random.Generator) -> PhaseBasis:
    return PhaseBasis.from_bit(int(rng.integers(2)))


def alice_intensities(phi_actual: float, gain: float = 1.0) -> tuple[float, float]:
    c = math.cos(phi_actual)
    return gain * 0.5 * (1 - c), gain * 0.5 * (1 + c)


def bob_intensities(phi_actual: float, psi_actual: float, gain: float = 1.0) -> tuple[float, float]:
    c = math.cos(phi_actual - psi_actual)
    return gain * 0.5 * (1 + c), gain * 0.5 * (1 - c)


def alice_measure(phi_actual: float, detectors: DetectorConfig = DetectorConfig(), gain: float = 1.0) -> PhaseBasis | Erasure:
    """Infer Bob's basis from the first MZI's D1 (``I_alpha``) reading."""
    hit = detectors.decide(alice_intensities(phi_actual, gain)[0])
    if hit is ERASURE:
        return ERASURE
    return PhaseBasis.PI if hit else PhaseBasis.ZERO


def bob_verify(
    phi: PhaseBasis,
    psi_actual: float,
    detectors: DetectorConfig = DetectorConfig(),
    phi_noise: float = 0.0,
    gain: float = 1.0,
) -> bool | Erasure:
    """True if port A lights up, i.e. Alice used Bob's basis."""
    return detectors.decide(bob_intensities(phi.radians + phi_noise, psi_actual, gain)[0])


def key_bit(phi: PhaseBasis, psi: PhaseBasis) -> int:
    return int(phi is psi)


@dataclass(frozen=True)
class RoundRecord:
    index: int
    phi: PhaseBasis
    psi: PhaseBasis
    phi_noise: float
    psi_noise: float
    alice_intensities: tuple[float, float]
    bob_intensities: tuple[float, float]
    alice_inferred_phi: PhaseBasis | Erasure
    bob_inferred_match: bool | Erasure
    alice_bit: int | Erasure
    bob_bit: int | Erasure

    @property
    def erased(self) -> bool:
        return self.alice_bit is ERASURE or self.bob_bit is ERASURE

    @property
    def key_bit(self) -> int | Erasure:
        return ERASURE if self.erased else self.bob_bit

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "phi": self.phi.radians,
            "psi": self.psi.radians,
            "phi_noise": self.phi_noise,
            "psi_noise": self.psi_noise,
            "alice_intensities": list(self.alice_intensities),
            "bob_intensities": list(self.bob_intensities),
            "alice_inferred_phi": _tag(self.alice_inferred_phi),
            "bob_inferred_match": _tag(self.bob_inferred_match),
            "key_bit": _tag(self.key_bit),
        }


def _tag(v):
    if v is ERASURE:
        return "erasure"
    if isinstance(v, PhaseBasis):
        return str(v)
    return v


@dataclass
class SessionResult:
    rounds: list[RoundRecord]
    bob_key: str
    alice_key: str
    erasure_count: int
    bit_error_rate: float | None
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "seed": self.seed,
            "rounds": [r.to_dict() for r in self.rounds],
            "bob_key": self.bob_key,
            "alice_key": self.alice_key,
            "ber": self.bit_error_rate,
            "erasures": self.erasure_count,
        }


def play_round(
    index: int,
    phi: PhaseBasis,
    psi: PhaseBasis,
    phi_noise: float,
    psi_noise: float,
    detectors: DetectorConfig,
    outbound_gain: float = 1.0,
    return_gain: float = 1.0,
) -> RoundRecord:
    """One optical round trip. Deterministic in its arguments (replayable)."""
    phi_act = phi.radians + phi_noise
    psi_act = psi.radians + psi_noise
    a_int = alice_intensities(phi_act, outbound_gain)
    b_int = bob_intensities(phi_act, psi_act, outbound_gain * return_gain)
    inferred = alice_measure(phi_act, detectors, outbound_gain)
    match = bob_verify(phi, psi_act, detectors, phi_noise, outbound_gain * return_gain)
    alice_bit = ERASURE if inferred is ERASURE else key_bit(inferred, psi)
    bob_bit = ERASURE if match is ERASURE else int(match)
    return RoundRecord(index, phi, psi, phi_noise, psi_noise, a_int, b_int, inferred, match, alice_bit, bob_bit)


def replay_round(rec: RoundRecord, detectors: DetectorConfig, outbound_gain: float = 1.0, return_gain: float = 1.0) -> RoundRecord:
    return play_round(rec.index, rec.phi, rec.psi, rec.phi_noise, rec.psi_noise, detectors, outbound_gain, return_gain)


@dataclass(frozen=True)
class RoundInputs:
    phi: list[PhaseBasis]
    psi: list[PhaseBasis]
    phi_noise: np.ndarray
    psi_noise: np.ndarray


def draw_round_inputs(n_rounds: int, noise: NoiseModel, seed: int) -> RoundInputs:
    """Basis choices from ``seed``; per-round static phase offsets from ``noise.seed``.

    The offsets are i.i.d. normal with standard deviation ``sigma_per_sample``
    (the walk is frozen over one microsecond-scale round).
    """
    if n_rounds < 1:
        raise USCKDError(f"n_rounds must be >= 1, got {n_rounds!r}")
    rng = np.random.default_rng(seed)
    phis, psis = [], []
    for _ in range(n_rounds):
        phis.append(bob_prepare(rng))
        psis.append(alice_choose(rng))
    if noise.active:
        eps = noise.sigma_per_sample * np.random.default_rng(noise.seed).standard_normal((2, n_rounds))
    else:
        eps = np.zeros((2, n_rounds))
    return RoundInputs(phis, psis, eps[0], eps[1])


def summarize(rounds: list[RoundRecord], params: dict | None = None, seed: int | None = None) -> SessionResult:
    kept = [r for r in rounds if not r.erased]
    bob_key = "".join(str(r.bob_bit) for r in kept)
    alice_key = "".join(str(r.alice_bit) for r in kept)
    errors = sum(a != b for a, b in zip(alice_key, bob_key))
    ber = errors / len(kept) if kept else None
    return SessionResult(rounds, bob_key, alice_key, len(rounds) - len(kept), ber, params or {}, seed)


def run_session(
    n_rounds: int,
    noise: NoiseModel = NO_NOISE,
    detectors: DetectorConfig = DetectorConfig(),
    seed: int = 0,
    outbound_gain: float = 1.0,
    return_gain: float = 1.0,
) -> SessionResult:
    inputs = draw_round_inputs(n_rounds, noise, seed)
    rounds = [
        play_round(i, inputs.phi[i], inputs.psi[i], float(inputs.phi_noise[i]), float(inputs.psi_noise[i]),
                   detectors, outbound_gain, return_gain)
        for i in range(n_rounds)
    ]
    params = {
        "n_rounds": n_rounds,
        "noise": {"kind": noise.kind.value, "sigma_per_sample": noise.sigma_per_sample, "seed": noise.seed},
        "detectors": asdict(detectors),
    }
    if outbound_gain != 1.0 or return_gain != 1.0:
        params["outbound_gain"] = outbound_gain
        params["return_gain"] = return_gain
    return summarize(rounds, params, seed)


def table_consistent(phi: PhaseBasis, psi: PhaseBasis) -> bool:
    """Key bit 1 exactly when the bright port is A."""
    return (key_bit(phi, psi) == 1) == (basis_outcome(phi, psi).bright_port is Port.A)

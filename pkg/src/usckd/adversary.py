"""Eve's beam-splitter taps on the two transmission lines.

Geometry (folded scheme): Bob's BS and phi shifters feed two lines to Alice;
she reads them through her BS, applies psi on her shifters and sends the
light back over the same lines to Bob's BS. Eve may tap a fraction ``r`` of
each line's intensity on the outbound pass, the return pass, or both.

Two measurement set-ups are modelled:

* ``INTENSITY_ONLY`` -- a detector on each tapped line.
* ``COHERENT_COMBINE`` -- the two tapped beams interfere on Eve's own 50/50
  splitter before detection, which exposes the relative line phase.

Guess accuracies are Bayes-optimal over the four equiprobable basis pairs,
computed either exactly by enumeration or by Monte Carlo.
"""

from __future__ import annotations

import enum
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .drive import NO_NOISE, NoiseModel
from .errors import USCKDError
from .field import INPUT, TwoModeField, apply, intensities, make_bs, make_phase
from .interferometer import PhaseBasis
from .protocol import (
    DetectorConfig,
    SessionResult,
    draw_round_inputs,
    key_bit,
    play_round,
    summarize,
)

QUANTUM = 1e-9

CASES = [(p, s) for p in PhaseBasis for s in PhaseBasis]


class Pass(str, enum.Enum):
    OUTBOUND = "outbound"
    RETURN = "return"


class Placement(str, enum.Enum):
    OUTBOUND_ONLY = "outbound_only"
    RETURN_ONLY = "return_only"
    BOTH_PASSES = "both_passes"

    @property
    def passes(self) -> tuple[Pass, ...]:
        return {
            Placement.OUTBOUND_ONLY: (Pass.OUTBOUND,),
            Placement.RETURN_ONLY: (Pass.RETURN,),
            Placement.BOTH_PASSES: (Pass.OUTBOUND, Pass.RETURN),
        }[self]


class StrategyKind(str, enum.Enum):
    INTENSITY_ONLY = "intensity_only"
    COHERENT_COMBINE = "coherent_combine"


@dataclass(frozen=True)
class TapConfig:
    ratio: float = 0.0
    placement: Placement = Placement.OUTBOUND_ONLY

    def __post_init__(self):
        object.__setattr__(self, "placement", Placement(self.placement))
        if not 0 <= self.ratio < 1:
            raise USCKDError(f"tap ratio must lie in [0, 1), got {self.ratio!r}")

    def gain(self, p: Pass) -> float:
        """Intensity transmitted to the legitimate parties through pass ``p``."""
        return 1.0 - self.ratio if p in self.placement.passes else 1.0


def tap(f: TwoModeField, ratio: float) -> tuple[TwoModeField, TwoModeField]:
    """Split each line independently: ``(eve, through)``."""
    if not 0 <= ratio < 1:
        raise USCKDError(f"tap ratio must lie in [0, 1), got {ratio!r}")
    return f.scaled(math.sqrt(ratio)), f.scaled(math.sqrt(1 - ratio))


def channel_fields(p: Pass, phi: float, psi: float, outbound_gain: float = 1.0) -> TwoModeField:
    """Field on the two transmission lines during pass ``p``.

    The return field is taken after Alice's psi shifters, on the same line
    segments Eve taps outbound. ``outbound_gain`` accounts for light already
    lost to an outbound tap.
    """
    bs = make_bs()
    out = apply(make_phase(0.0, phi), apply(bs, INPUT))
    if Pass(p) is Pass.OUTBOUND:
        return out
    received = apply(bs, out.scaled(math.sqrt(outbound_gain)))
    return apply(make_phase(0.0, psi), apply(bs, received))


@dataclass(frozen=True)
class EveObservation:
    pass_: Pass
    I_e1: float
    I_e2: float
    coherent_ports: tuple[float, float] | None = None

    def features(self) -> tuple[float, ...]:
        if self.coherent_ports is None:
            return (self.I_e1, self.I_e2)
        return (self.I_e1, self.I_e2, *self.coherent_ports)


def observe(kind: StrategyKind, p: Pass, line_field: TwoModeField, ratio: float) -> EveObservation:
    eve, _ = tap(line_field, ratio)
    i1, i2 = intensities(eve)
    coherent = None
    if StrategyKind(kind) is StrategyKind.COHERENT_COMBINE:
        coherent = intensities(apply(make_bs(), eve))
    return EveObservation(Pass(p), i1, i2, coherent)


def observations(kind: StrategyKind, tap_cfg: TapConfig, phi: float, psi: float) -> tuple[EveObservation, ...]:
    """Everything Eve records in one round (noiseless or with actual phases)."""
    og = tap_cfg.gain(Pass.OUTBOUND)
    return tuple(
        observe(kind, p, channel_fields(p, phi, psi, og), tap_cfg.ratio)
        for p in tap_cfg.placement.passes
    )


def feature_vector(obs: Iterable[EveObservation]) -> tuple[float, ...]:
    return tuple(x for o in obs for x in o.features())


def quantize(vec: tuple[float, ...]) -> tuple[int, ...]:
    return tuple(int(round(x / QUANTUM)) for x in vec)


@dataclass(frozen=True)
class Guess:
    phi: PhaseBasis
    psi: PhaseBasis
    key: int


DecisionRule = Callable[[tuple[float, ...], np.random.Generator], Guess]


@dataclass
class LikelihoodTable:
    """Observation cell -> counts of the basis pairs that produce it."""

    cells: dict[tuple[int, ...], Counter] = field(default_factory=dict)
    centers: dict[tuple[int, ...], tuple[float, ...]] = field(default_factory=dict)

    def nearest(self, vec: tuple[float, ...]) -> tuple[int, ...]:
        q = quantize(vec)
        if q in self.cells:
            return q
        v = np.asarray(vec)
        return min(self.cells, key=lambda k: float(np.sum((np.asarray(self.centers[k]) - v) ** 2)))


def build_table(kind: StrategyKind, tap_cfg: TapConfig) -> LikelihoodTable:
    cells: dict = defaultdict(Counter)
    centers = {}
    for phi, psi in CASES:
        vec = feature_vector(observations(kind, tap_cfg, phi.radians, psi.radians))
        q = quantize(vec)
        cells[q][(phi, psi)] += 1
        centers.setdefault(q, vec)
    return LikelihoodTable(dict(cells), centers)


def _argmax_choices(counter: Counter) -> list:
    best = max(counter.values())
    return sorted((k for k, v in counter.items() if v == best), key=lambda k: (k.value if isinstance(k, enum.Enum) else k))


def _marginals(cell: Counter) -> tuple[Counter, Counter, Counter]:
    phi_c, psi_c, key_c = Counter(), Counter(), Counter()
    for (phi, psi), n in cell.items():
        phi_c[phi] += n
        psi_c[psi] += n
        key_c[key_bit(phi, psi)] += n
    return phi_c, psi_c, key_c


@dataclass
class EveStrategy:
    """Measurement set-up plus a decision rule.

    With ``decision_rule=None`` Eve uses the Bayes-optimal rule for the tap
    in question (majority vote per observation cell, ties broken by a seeded
    coin). A custom rule maps the feature vector and an rng to a :class:`Guess`.
    """

    kind: StrategyKind = StrategyKind.INTENSITY_ONLY
    decision_rule: DecisionRule | None = None

    def __post_init__(self):
        self.kind = StrategyKind(self.kind)

    def rule_for(self, tap_cfg: TapConfig) -> DecisionRule:
        if self.decision_rule is not None:
            return self.decision_rule
        table = build_table(self.kind, tap_cfg)
        choices = bayes_choices(table)

        def bayes(vec, rng):
            picks = [ch[int(rng.integers(len(ch)))] if len(ch) > 1 else ch[0]
                     for ch in choices[table.nearest(vec)]]
            return Guess(*picks)

        return bayes


def bayes_choices(table: LikelihoodTable) -> dict[tuple[int, ...], tuple[list, list, list]]:
    """Per cell, the maximum-posterior candidates for (phi, psi, key)."""
    out = {}
    for q, cell in table.cells.items():
        phi_c, psi_c, key_c = _marginals(cell)
        out[q] = (_argmax_choices(phi_c), _argmax_choices(psi_c), _argmax_choices(key_c))
    return out


@dataclass(frozen=True)
class MonteCarlo:
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise USCKDError(f"MonteCarlo requires n >= 1, got {self.n!r}")


EXACT = "exact"


@dataclass(frozen=True)
class Accuracy:
    phi: float
    key: float
    psi: float


def exact_accuracy(kind: StrategyKind, tap_cfg: TapConfig) -> Accuracy:
    """Bayes accuracy: sum over observation cells of the majority count."""
    table = build_table(kind, tap_cfg)
    tot = len(CASES)
    acc = [0.0, 0.0, 0.0]
    for cell in table.cells.values():
        for i, c in enumerate(_marginals(cell)):
            acc[i] += max(c.values())
    return Accuracy(phi=acc[0] / tot, key=acc[2] / tot, psi=acc[1] / tot)


def monte_carlo_accuracy(strategy: EveStrategy, tap_cfg: TapConfig, n: int, seed: int = 0) -> Accuracy:
    """Sample ``n`` rounds with uniform basis pairs and score Eve's guesses."""
    rng = np.random.default_rng(seed)
    idx = rng.integers(len(CASES), size=n)
    if strategy.decision_rule is None:
        return _monte_carlo_bayes(strategy.kind, tap_cfg, idx, rng)
    rule = strategy.decision_rule
    # one observation per case suffices in the noiseless model
    vecs = [feature_vector(observations(strategy.kind, tap_cfg, p.radians, s.radians)) for p, s in CASES]
    hits = np.zeros(3)
    for i in idx:
        phi, psi = CASES[i]
        g = rule(vecs[i], rng)
        hits += (g.phi is phi, g.key == key_bit(phi, psi), g.psi is psi)
    return Accuracy(phi=float(hits[0] / n), key=float(hits[1] / n), psi=float(hits[2] / n))


def _monte_carlo_bayes(kind: StrategyKind, tap_cfg: TapConfig, idx: np.ndarray, rng: np.random.Generator) -> Accuracy:
    # same rule as EveStrategy.rule_for, vectorized: uniform pick among tied candidates
    table = build_table(kind, tap_cfg)
    choices = bayes_choices(table)
    n = len(idx)
    u = rng.random((3, n))
    hits = np.zeros(3)
    for c, (phi, psi) in enumerate(CASES):
        vec = feature_vector(observations(kind, tap_cfg, phi.radians, psi.radians))
        cand = choices[table.nearest(vec)]
        truth = (phi, psi, key_bit(phi, psi))
        sel = idx == c
        for t in range(3):
            ok = np.array([x == truth[t] for x in cand[t]])
            pick = np.floor(u[t, sel] * len(ok)).astype(int)
            hits[t] += ok[pick].sum()
    return Accuracy(phi=float(hits[0] / n), key=float(hits[2] / n), psi=float(hits[1] / n))


def eve_accuracy(strategy: EveStrategy, tap_cfg: TapConfig, mode=EXACT) -> tuple[float, float]:
    """``(accuracy_phi, accuracy_key)`` by exact enumeration or Monte Carlo."""
    if isinstance(mode, MonteCarlo):
        a = monte_carlo_accuracy(strategy, tap_cfg, mode.n, mode.seed)
    elif mode == EXACT:
        if strategy.decision_rule is not None:
            raise USCKDError("exact enumeration evaluates the Bayes rule; use MonteCarlo for custom rules")
        a = exact_accuracy(strategy.kind, tap_cfg)
    else:
        raise USCKDError(f"unknown mode {mode!r}")
    return a.phi, a.key


def _entropy(counts: Iterable[float]) -> float:
    counts = [c for c in counts if c > 0]
    tot = sum(counts)
    return -sum(c / tot * math.log2(c / tot) for c in counts)


def mutual_information(strategy: EveStrategy | StrategyKind, tap_cfg: TapConfig, target: str = "key") -> float:
    """I(target; observation) in bits under the uniform prior over basis pairs.

    ``target`` is ``"key"`` or ``"phi"``.
    """
    kind = strategy.kind if isinstance(strategy, EveStrategy) else StrategyKind(strategy)
    table = build_table(kind, tap_cfg)
    label = (lambda p, s: key_bit(p, s)) if target == "key" else (lambda p, s: p)
    prior = Counter(label(p, s) for p, s in CASES)
    h_cond = 0.0
    for cell in table.cells.values():
        w = sum(cell.values()) / len(CASES)
        post = Counter()
        for (p, s), n in cell.items():
            post[label(p, s)] += n
        h_cond += w * _entropy(post.values())
    return max(0.0, _entropy(prior.values()) - h_cond)


@dataclass
class EveResult:
    tap: TapConfig
    strategy: StrategyKind
    mode: str
    accuracy_phi: float
    accuracy_key: float
    mutual_information_bits: float
    n: int | None = None
    seed: int | None = None
    guesses: list[Guess] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "tap": {"ratio": self.tap.ratio, "placement": self.tap.placement.value},
            "strategy": self.strategy.value,
            "mode": self.mode,
            "accuracy_phi": self.accuracy_phi,
            "accuracy_key": self.accuracy_key,
            "mutual_information_bits": self.mutual_information_bits,
            "n": self.n,
            "seed": self.seed,
        }


def analyze(strategy: EveStrategy, tap_cfg: TapConfig, mode=EXACT) -> EveResult:
    acc_phi, acc_key = eve_accuracy(strategy, tap_cfg, mode)
    mi = mutual_information(strategy, tap_cfg)
    if isinstance(mode, MonteCarlo):
        return EveResult(tap_cfg, strategy.kind, "monte_carlo", acc_phi, acc_key, mi, mode.n, mode.seed)
    return EveResult(tap_cfg, strategy.kind, "exact", acc_phi, acc_key, mi)


def run_attacked_session(
    n_rounds: int,
    tap_cfg: TapConfig,
    strategy: EveStrategy,
    noise: NoiseModel = NO_NOISE,
    detectors: DetectorConfig = DetectorConfig(),
    seed: int = 0,
) -> tuple[SessionResult, EveResult]:
    """A protocol session with Eve on the lines.

    The legitimate rounds use exactly the inputs of
    :func:`~usckd.protocol.run_session` with the same seeds; taps only
    attenuate. Eve's tie-breaking coin is a separate stream.
    """
    inputs = draw_round_inputs(n_rounds, noise, seed)
    og, rg = tap_cfg.gain(Pass.OUTBOUND), tap_cfg.gain(Pass.RETURN)
    rule = strategy.rule_for(tap_cfg)
    eve_rng = np.random.default_rng([seed, 0xE5E])
    rounds, guesses = [], []
    hits_phi = hits_key = 0
    for i in range(n_rounds):
        phi, psi = inputs.phi[i], inputs.psi[i]
        en, pn = float(inputs.phi_noise[i]), float(inputs.psi_noise[i])
        rounds.append(play_round(i, phi, psi, en, pn, detectors, og, rg))
        vec = feature_vector(observations(strategy.kind, tap_cfg, phi.radians + en, psi.radians + pn))
        g = rule(vec, eve_rng)
        guesses.append(g)
        hits_phi += g.phi is phi
        hits_key += g.key == key_bit(phi, psi)
    params = {
        "n_rounds": n_rounds,
        "noise": {"kind": noise.kind.value, "sigma_per_sample": noise.sigma_per_sample, "seed": noise.seed},
        "detectors": {"threshold": detectors.threshold, "erasure_band": detectors.erasure_band},
        "tap": {"ratio": tap_cfg.ratio, "placement": tap_cfg.placement.value},
    }
    session = summarize(rounds, params, seed)
    eve = EveResult(
        tap_cfg, strategy.kind, "session", hits_phi / n_rounds, hits_key / n_rounds,
        mutual_information(strategy, tap_cfg), n_rounds, seed, guesses,
    )
    return session, eve

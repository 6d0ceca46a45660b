import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usckd.adversary import (
    CASES,
    EXACT,
    EveStrategy,
    Guess,
    MonteCarlo,
    Pass,
    Placement,
    StrategyKind,
    TapConfig,
    channel_fields,
    eve_accuracy,
    mutual_information,
    observations,
    run_attacked_session,
    tap,
)
from usckd.drive import NO_NOISE
from usckd.errors import USCKDError
from usckd.field import TwoModeField, apply, intensities, make_bs, total_intensity
from usckd.interferometer import PhaseBasis, coupled_intensities
from usckd.protocol import DetectorConfig, key_bit, run_session

TOL = 1e-12
IO, CC = StrategyKind.INTENSITY_ONLY, StrategyKind.COHERENT_COMBINE
ALL_TAPS = [TapConfig(r, p) for r in (0.0, 0.01, 0.1, 0.5) for p in Placement]


def brute_force_accuracy(kind, tap_cfg):
    """Oracle: group the four equiprobable cases by rounded observation, majority-vote."""
    groups = {}
    for phi, psi in itertools.product(PhaseBasis, PhaseBasis):
        obs = observations(kind, tap_cfg, phi.radians, psi.radians)
        key = tuple(round(x, 6) for o in obs for x in o.features())
        groups.setdefault(key, []).append((phi, psi))
    acc_phi = acc_key = 0
    for members in groups.values():
        phis = [p for p, _ in members]
        keys = [key_bit(p, s) for p, s in members]
        acc_phi += max(phis.count(v) for v in PhaseBasis)
        acc_key += max(keys.count(v) for v in (0, 1))
    return acc_phi / 4, acc_key / 4


class TestTap:
    def test_no_tap(self):
        f = TwoModeField(0.3 + 0.2j, -0.7j)
        eve, through = tap(f, 0.0)
        assert through == f and intensities(eve) == (0.0, 0.0)

    def test_half(self):
        eve, through = tap(TwoModeField(1, 0), 0.5)
        assert np.allclose(intensities(eve), (0.5, 0), atol=TOL, rtol=0)
        assert np.allclose(intensities(through), (0.5, 0), atol=TOL, rtol=0)

    @pytest.mark.parametrize("r", [-0.1, 1.0, 1.5])
    def test_range(self, r):
        with pytest.raises(USCKDError):
            tap(TwoModeField(1, 0), r)
        with pytest.raises(USCKDError):
            TapConfig(r)


@settings(max_examples=100, deadline=None)
@given(
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
    st.floats(0, 0.999),
)
def test_tap_energy_per_line(a, b, r):
    f = TwoModeField(a, b)
    eve, through = tap(f, r)
    ie, it, i0 = intensities(eve), intensities(through), intensities(f)
    scale = max(1.0, total_intensity(f))
    for k in range(2):
        assert abs(ie[k] + it[k] - i0[k]) <= TOL * scale


class TestChannelFields:
    def test_outbound_balanced(self):
        for phi in np.linspace(0, 2 * math.pi, 50):
            assert np.allclose(intensities(channel_fields(Pass.OUTBOUND, phi, 0.0)), (0.5, 0.5), atol=TOL, rtol=0)

    def test_outbound_phase_differs(self):
        f0 = channel_fields(Pass.OUTBOUND, 0.0, 0.0)
        fp = channel_fields(Pass.OUTBOUND, math.pi, 0.0)
        assert np.allclose(intensities(f0), intensities(fp), atol=TOL)
        rel0 = f0.b / f0.a
        relp = fp.b / fp.a
        assert abs(rel0 + relp) < TOL  # relative phase flipped by pi

    def test_return_reaches_bob_port_a(self):
        f = apply(make_bs(), channel_fields(Pass.RETURN, 0.0, 0.0))
        assert np.allclose(intensities(f), (1, 0), atol=TOL, rtol=0)

    def test_return_matches_coupled_fringe(self):
        rng = np.random.default_rng(1)
        for phi, psi in rng.uniform(-5, 5, (50, 2)):
            f = apply(make_bs(), channel_fields(Pass.RETURN, phi, psi))
            assert np.allclose(intensities(f), coupled_intensities(phi, psi), atol=TOL, rtol=0)

    def test_outbound_intensity_blindness(self):
        for r in (0.01, 0.1, 0.5):
            for phi in np.linspace(0, 2 * math.pi, 100, endpoint=False):
                (obs,) = observations(IO, TapConfig(r), phi, 0.0)
                assert abs(obs.I_e1 - r / 2) < TOL and abs(obs.I_e2 - r / 2) < TOL

    def test_coherent_ports_conserve_tapped_energy(self):
        for phi, psi in CASES:
            for o in observations(CC, TapConfig(0.3, Placement.BOTH_PASSES), phi.radians, psi.radians):
                assert abs(sum(o.coherent_ports) - (o.I_e1 + o.I_e2)) < TOL

    def test_coherent_outbound_ports(self):
        r = 0.1
        for phi in (0.0, math.pi):
            (o,) = observations(CC, TapConfig(r), phi, 0.0)
            assert np.allclose(o.coherent_ports, (r * (1 - math.cos(phi)) / 2, r * (1 + math.cos(phi)) / 2), atol=TOL)


class TestAccuracy:
    @pytest.mark.parametrize("r", [0.01, 0.1, 0.5])
    def test_intensity_only_outbound_is_coin_flip(self, r):
        assert eve_accuracy(EveStrategy(IO), TapConfig(r)) == (0.5, 0.5)

    @pytest.mark.parametrize("kind", list(StrategyKind))
    def test_no_tap(self, kind):
        for p in Placement:
            assert eve_accuracy(EveStrategy(kind), TapConfig(0.0, p)) == (0.5, 0.5)

    def test_coherent_outbound_reads_phi(self):
        assert eve_accuracy(EveStrategy(CC), TapConfig(0.1)) == (1.0, 0.5)

    @pytest.mark.parametrize("tap_cfg", ALL_TAPS, ids=str)
    @pytest.mark.parametrize("kind", list(StrategyKind))
    def test_exact_matches_brute_force(self, kind, tap_cfg):
        assert eve_accuracy(EveStrategy(kind), tap_cfg) == brute_force_accuracy(kind, tap_cfg)

    @pytest.mark.parametrize("tap_cfg", ALL_TAPS, ids=str)
    @pytest.mark.parametrize("kind", list(StrategyKind))
    def test_accuracy_bounds(self, kind, tap_cfg):
        for a in eve_accuracy(EveStrategy(kind), tap_cfg):
            assert 0.5 <= a <= 1.0

    @pytest.mark.parametrize("tap_cfg", [TapConfig(0.1, p) for p in Placement] + [TapConfig(0.0)], ids=str)
    @pytest.mark.parametrize("kind", list(StrategyKind))
    def test_monte_carlo_agrees(self, kind, tap_cfg):
        exact = eve_accuracy(EveStrategy(kind), tap_cfg)
        mc = eve_accuracy(EveStrategy(kind), tap_cfg, MonteCarlo(100_000, 3))
        assert abs(mc[0] - exact[0]) <= 0.01 and abs(mc[1] - exact[1]) <= 0.01

    def test_callback_rule_matches_vectorized_path(self):
        tap_cfg = TapConfig(0.1, Placement.BOTH_PASSES)
        s = EveStrategy(CC)
        wrapped = EveStrategy(CC, decision_rule=s.rule_for(tap_cfg))
        a = eve_accuracy(wrapped, tap_cfg, MonteCarlo(5000, 1))
        assert a == (1.0, 1.0)

    def test_exact_rejects_custom_rule(self):
        with pytest.raises(USCKDError):
            eve_accuracy(EveStrategy(IO, decision_rule=lambda v, rng: None), TapConfig(0.1))

    def test_monte_carlo_needs_samples(self):
        with pytest.raises(USCKDError):
            MonteCarlo(0)


def _custom_rules():
    def always_zero(vec, rng):
        return Guess(PhaseBasis.ZERO, PhaseBasis.ZERO, 1)

    def coin(vec, rng):
        return Guess(PhaseBasis.from_bit(int(rng.integers(2))), PhaseBasis.from_bit(int(rng.integers(2))), int(rng.integers(2)))

    def first_feature(vec, rng):
        b = int(vec[0] > vec[1] + 1e-12) if len(vec) >= 2 else 0
        return Guess(PhaseBasis.from_bit(b), PhaseBasis.from_bit(b), b)

    def coherent_port(vec, rng):
        b = int(len(vec) >= 4 and vec[2] > vec[3])
        return Guess(PhaseBasis.from_bit(b), PhaseBasis.ZERO, 1 - b)

    return [always_zero, coin, first_feature, coherent_port]


@pytest.mark.parametrize("tap_cfg", [TapConfig(0.1, p) for p in Placement], ids=str)
@pytest.mark.parametrize("kind", list(StrategyKind))
def test_bayes_optimality(kind, tap_cfg):
    n = 20_000
    exact = eve_accuracy(EveStrategy(kind), tap_cfg)
    for rule in _custom_rules():
        mc = eve_accuracy(EveStrategy(kind, decision_rule=rule), tap_cfg, MonteCarlo(n, 5))
        for e, m in zip(exact, mc):
            sigma = math.sqrt(max(m * (1 - m), 1e-12) / n)
            assert e >= m - 3 * sigma


class TestMutualInformation:
    def test_intensity_only_zero(self):
        for p in Placement:
            assert mutual_information(EveStrategy(IO), TapConfig(0.1, p)) == pytest.approx(0.0, abs=1e-15)

    def test_no_tap(self):
        assert mutual_information(EveStrategy(CC), TapConfig(0.0, Placement.BOTH_PASSES)) == pytest.approx(0.0, abs=1e-15)

    def test_coherent_both_passes(self):
        mi = mutual_information(EveStrategy(CC), TapConfig(0.1, Placement.BOTH_PASSES))
        assert mi == pytest.approx(1.0, abs=1e-12)

    def test_coherent_outbound_phi_only(self):
        tc = TapConfig(0.1)
        assert mutual_information(CC, tc) == pytest.approx(0.0, abs=1e-15)
        assert mutual_information(CC, tc, target="phi") == pytest.approx(1.0, abs=1e-12)


class TestAttackedSession:
    def test_no_tap_is_plain_session(self):
        det = DetectorConfig()
        plain = run_session(500, NO_NOISE, det, seed=9)
        attacked, eve = run_attacked_session(500, TapConfig(0.0), EveStrategy(IO), NO_NOISE, det, seed=9)
        assert attacked.rounds == plain.rounds
        assert attacked.bob_key == plain.bob_key and attacked.bit_error_rate == plain.bit_error_rate

    def test_small_tap_attenuates_but_no_errors(self):
        s, _ = run_attacked_session(1000, TapConfig(0.1, Placement.BOTH_PASSES), EveStrategy(IO), seed=2)
        assert s.bit_error_rate == 0 and s.erasure_count == 0
        bright_alice = max(max(r.alice_intensities) for r in s.rounds)
        bright_bob = max(max(r.bob_intensities) for r in s.rounds)
        assert bright_alice == pytest.approx(0.9, abs=TOL)
        assert bright_bob == pytest.approx(0.81, abs=TOL)

    def test_heavy_tap_is_detectable(self):
        s, _ = run_attacked_session(200, TapConfig(0.5), EveStrategy(IO), seed=2)
        assert s.erasure_count > 0

    def test_intensity_only_key_guess(self):
        _, eve = run_attacked_session(10_000, TapConfig(0.1), EveStrategy(IO), seed=12)
        assert abs(eve.accuracy_key - 0.5) <= 0.02
        assert abs(eve.accuracy_phi - 0.5) <= 0.02

    def test_coherent_with_noise_uses_nearest_cell(self):
        from usckd.drive import NoiseModel

        _, eve = run_attacked_session(2000, TapConfig(0.1, Placement.BOTH_PASSES), EveStrategy(CC),
                                      NoiseModel.random_walk(0.2, 1), seed=3)
        assert eve.accuracy_phi > 0.9 and eve.accuracy_key > 0.9

    def test_report_keys(self):
        _, eve = run_attacked_session(10, TapConfig(0.1), EveStrategy(IO), seed=0)
        assert set(eve.to_dict()) == {
            "tap", "strategy", "mode", "accuracy_phi", "accuracy_key", "mutual_information_bits", "n", "seed",
        }

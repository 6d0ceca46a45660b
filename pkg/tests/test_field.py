import cmath
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from usckd.field import (
    IDENTITY,
    TwoModeField,
    TwoPortOperator,
    align_global_phase,
    apply,
    compose,
    intensities,
    make_bs,
    make_phase,
    max_entry_diff,
    random_unitary,
    total_intensity,
)
from usckd.interferometer import mzi_transfer

TOL = 1e-12
angles = st.floats(-50, 50, allow_nan=False)
amps = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def sym_bs():
    return sp.Matrix([[1, sp.I], [sp.I, 1]]) / sp.sqrt(2)


def sym_phase(phi):
    return sp.Matrix([[1, 0], [0, sp.exp(sp.I * phi)]])


def as_complex(m):
    return np.array(m.evalf(), dtype=complex)


def close_op(op, m, tol=TOL):
    return np.max(np.abs(op.matrix - np.asarray(m, dtype=complex))) <= tol


class TestBeamSplitter:
    def test_entries(self):
        r = 1 / math.sqrt(2)
        assert close_op(make_bs(), [[r, 1j * r], [1j * r, r]])

    def test_apply_to_input(self):
        out = apply(make_bs(), TwoModeField(1, 0))
        assert abs(out.a - 1 / math.sqrt(2)) < TOL
        assert abs(out.b - 1j / math.sqrt(2)) < TOL

    def test_zero_field(self):
        assert apply(make_bs(), TwoModeField(0, 0)) == TwoModeField(0, 0)

    def test_double_bs_is_swap(self):
        # oracle: exact symbolic square
        expected = as_complex(sp.simplify(sym_bs() * sym_bs()))
        assert np.allclose(expected, [[0, 1j], [1j, 0]])
        assert close_op(compose(make_bs(), make_bs()), expected)


class TestPhase:
    def test_zero_is_identity(self):
        assert close_op(make_phase(0, 0), np.eye(2), 0)

    def test_sign_flip_lower_arm(self):
        r = 1 / math.sqrt(2)
        out = apply(make_phase(0, math.pi), TwoModeField(r, r))
        assert abs(out.a - r) < TOL and abs(out.b + r) < TOL

    def test_mzi_at_pi_sends_light_to_upper_port(self):
        bs = make_bs()
        f = apply(compose(bs, make_phase(0, math.pi), bs), TwoModeField(1, 0))
        ia, ib = intensities(f)
        assert abs(ia - 1) < TOL and abs(ib) < TOL

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            make_phase(float("nan"), 0)


class TestCompose:
    def test_identity_left(self):
        m = random_unitary(np.random.default_rng(3))
        assert max_entry_diff(compose(IDENTITY, m), m) == 0

    @pytest.mark.parametrize("phi", [0.0, 0.7, math.pi / 2, math.pi, 4.0, -2.5])
    def test_bs_phase_bs_matches_explicit_mzi(self, phi):
        # oracle: symbolic product of the elementary matrices
        sym = as_complex(sym_bs() * sym_phase(sp.Float(phi, 30)) * sym_bs())
        e = cmath.exp(1j * phi)
        explicit = 0.5 * np.array([[1 - e, 1j * (1 + e)], [1j * (1 + e), -(1 - e)]])
        assert np.max(np.abs(sym - explicit)) < TOL
        bs = make_bs()
        assert close_op(compose(bs, make_phase(0, phi), bs), explicit)

    def test_three_random_unitaries_is_unitary(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            m = compose(random_unitary(rng), random_unitary(rng), random_unitary(rng))
            assert m.unitarity_error() < TOL

    def test_order_is_matrix_order(self):
        rng = np.random.default_rng(11)
        a, b = random_unitary(rng), random_unitary(rng)
        assert close_op(compose(a, b), a.matrix @ b.matrix)
        f = TwoModeField(0.3 + 0.1j, -0.5j)
        lhs = apply(compose(a, b), f)
        rhs = apply(a, apply(b, f))
        assert abs(lhs.a - rhs.a) < TOL and abs(lhs.b - rhs.b) < TOL

    def test_empty_compose_is_identity(self):
        assert compose() == IDENTITY

    def test_matmul_sugar(self):
        bs = make_bs()
        assert (bs @ bs) == compose(bs, bs)
        assert (bs @ TwoModeField(1, 0)) == apply(bs, TwoModeField(1, 0))


class TestApply:
    def test_identity(self):
        f = TwoModeField(0.2 - 0.4j, 1.5j)
        assert apply(IDENTITY, f) == f

    def test_mzi_phi_zero(self):
        out = apply(mzi_transfer(0.0), TwoModeField(1, 0))
        assert abs(out.a) < TOL and abs(out.b - 1j) < TOL

    def test_mzi_phi_pi(self):
        out = apply(mzi_transfer(math.pi), TwoModeField(1, 0))
        assert abs(out.a - 1) < TOL and abs(out.b) < TOL


class TestIntensities:
    def test_input(self):
        assert intensities(TwoModeField(1, 0)) == (1.0, 0.0)

    def test_balanced(self):
        r = 1 / math.sqrt(2)
        ia, ib = intensities(TwoModeField(r, 1j * r))
        assert abs(ia - 0.5) < TOL and abs(ib - 0.5) < TOL

    def test_mzi_half_fringe(self):
        ia, ib = intensities(apply(mzi_transfer(math.pi / 2), TwoModeField(1, 0)))
        assert abs(ia - 0.5) < TOL and abs(ib - 0.5) < TOL


def built_operator(thetas):
    """Arbitrary interleaving of beam splitters and phase shifters."""
    ops = []
    for i in range(0, len(thetas) - 1, 2):
        ops += [make_phase(thetas[i], thetas[i + 1]), make_bs()]
    return compose(*ops) if ops else IDENTITY


@settings(max_examples=200, deadline=None)
@given(st.lists(angles, min_size=2, max_size=12))
def test_built_operators_are_unitary(thetas):
    assert built_operator(thetas).unitarity_error() <= TOL


@settings(max_examples=200, deadline=None)
@given(st.lists(angles, min_size=2, max_size=12), amps, amps)
def test_energy_conservation(thetas, a, b):
    f = TwoModeField(a, b)
    out = apply(built_operator(thetas), f)
    scale = max(1.0, total_intensity(f))
    assert abs(total_intensity(out) - total_intensity(f)) <= TOL * scale
    assert out.is_finite()


def test_global_phase_irrelevance():
    rng = np.random.default_rng(5)
    f = TwoModeField(0.6 - 0.2j, 0.3 + 0.7j)
    base = intensities(f)
    for theta in rng.uniform(-10, 10, 100):
        g = f.scaled(cmath.exp(1j * theta))
        assert np.allclose(intensities(g), base, atol=TOL, rtol=0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_associativity(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_unitary(rng) for _ in range(3))
    assert max_entry_diff(compose(a, compose(b, c)), compose(compose(a, b), c)) <= TOL


def test_align_global_phase_recovers_rotated_operator():
    m = random_unitary(np.random.default_rng(0))
    rotated = m.scaled(cmath.exp(2.1j))
    assert max_entry_diff(align_global_phase(rotated, m), m) < TOL


def test_from_matrix_rejects_bad_shape():
    with pytest.raises(ValueError):
        TwoPortOperator.from_matrix(np.eye(3))

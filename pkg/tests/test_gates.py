import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exchange_free.gates import (
    HADAMARD,
    IDENTITY,
    PolState,
    dist_up_to_global_phase,
    is_unitary,
    qwp,
    qwp_dagger,
    rx,
    ry,
    rz,
)
from exchange_free.protocol import haar_unitary

angles = st.floats(min_value=-4 * math.pi, max_value=4 * math.pi, allow_nan=False)


def test_rz_zero_is_identity():
    assert np.array_equal(rz(0), IDENTITY)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 20, 100])
def test_ry_pi_over_n_sums_to_ry_pi(n):
    u = np.linalg.matrix_power(ry(math.pi / n), n)
    assert np.allclose(u, ry(math.pi), atol=1e-12, rtol=0)


def test_rotations_match_exponentials():
    # independent route: matrix exponential via eigendecomposition of the Pauli
    paulis = {
        rx: np.array([[0, 1], [1, 0]]),
        ry: np.array([[0, -1j], [1j, 0]]),
        rz: np.array([[1, 0], [0, -1]]),
    }
    for fn, p in paulis.items():
        w, v = np.linalg.eigh(p)
        for theta in (0.3, -1.1, math.pi, 2.5):
            expm = v @ np.diag(np.exp(-0.5j * theta * w)) @ v.conj().T
            assert np.allclose(fn(theta), expm, atol=1e-12, rtol=0)


def test_qwp_is_rx_minus_half_pi():
    s = np.sqrt(0.5)
    expected = np.array([[s, 1j * s], [1j * s, s]])  # exp(i pi sigma_x / 4)
    assert np.allclose(qwp(), expected, atol=1e-15, rtol=0)
    assert np.allclose(qwp(), rx(-math.pi / 2), atol=0, rtol=0)
    assert np.allclose(qwp_dagger(), rx(math.pi / 2), atol=0, rtol=0)


def test_qwp_pair_is_inverse():
    assert np.allclose(qwp() @ qwp_dagger(), IDENTITY, atol=1e-12, rtol=0)


@pytest.mark.parametrize("theta", [0.0, math.pi / 3, math.pi])
def test_qwp_sandwich(theta):
    # direct multiplication: qwp rz qwp^dag gives ry(theta); the other order gives ry(-theta)
    assert np.allclose(qwp() @ rz(theta) @ qwp_dagger(), ry(theta), atol=1e-12, rtol=0)
    assert np.allclose(qwp_dagger() @ rz(theta) @ qwp(), ry(-theta), atol=1e-12, rtol=0)


def test_qwp_on_h():
    out = qwp() @ np.array([1, 0])
    assert np.allclose(out, np.array([1, 1j]) / math.sqrt(2), atol=1e-15)


def test_non_finite_angle_rejected():
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(ValueError):
            ry(bad)


def test_dist_global_phase():
    assert dist_up_to_global_phase(IDENTITY, cmath.exp(1.3j) * IDENTITY) == pytest.approx(0, abs=1e-12)
    assert dist_up_to_global_phase(rz(math.pi), IDENTITY) > 1


def test_hadamard_zyz_product():
    prod = 1j * rz(0) @ ry(math.pi / 2) @ rz(math.pi)
    assert np.allclose(prod, HADAMARD, atol=1e-12, rtol=0)
    assert dist_up_to_global_phase(HADAMARD, prod) < 1e-12


def test_dist_matches_brute_force_phase_scan():
    rng = np.random.default_rng(5)
    u, v = haar_unitary(rng), haar_unitary(rng)
    phis = np.linspace(0, 2 * math.pi, 20001)
    brute = min(np.linalg.norm(u - np.exp(1j * p) * v) for p in phis)
    assert dist_up_to_global_phase(u, v) == pytest.approx(brute, abs=1e-6)


@given(angles, angles)
def test_rotation_additivity(a, b):
    for fn in (rx, ry, rz):
        assert np.allclose(fn(a) @ fn(b), fn(a + b), atol=1e-12, rtol=0)


@given(angles)
def test_ry_det_one(theta):
    assert abs(np.linalg.det(ry(theta)) - 1) < 1e-12
    assert is_unitary(ry(theta), atol=1e-12)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_dist_symmetric_and_triangle(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (haar_unitary(rng) for _ in range(3))
    ab, ba = dist_up_to_global_phase(a, b), dist_up_to_global_phase(b, a)
    assert ab == pytest.approx(ba, abs=1e-12)
    assert ab <= dist_up_to_global_phase(a, c) + dist_up_to_global_phase(c, b) + 1e-12


def test_polstate_canonical_removes_phase():
    s = PolState(0.6 * cmath.exp(0.4j), 0.8j * cmath.exp(0.4j))
    assert np.allclose(s.canonical(), [0.6, 0.8j], atol=1e-12)
    assert PolState(0, -1j).canonical()[1] == pytest.approx(1)

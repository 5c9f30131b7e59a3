import math

import numpy as np
import pytest

from exchange_free.gates import HADAMARD, IDENTITY, PAULI_X, PAULI_Z, PolState, dist_up_to_global_phase
from exchange_free.interferometer import CycleConfig
from exchange_free.protocol import compile_unitary, haar_unitary, run_protocol
from exchange_free.remote_circuit import (
    ClassicalControls,
    apply_network,
    network_gates,
    sqrt_unitary,
    verification_table,
)

P0 = np.diag([1, 0])
P1 = np.diag([0, 1])


def kron(*ops):
    out = np.eye(1)
    for o in ops:
        out = np.kron(out, o)
    return out


def quantum_network(u, v):
    """8x8 network on (c1, c2, target) with genuine quantum controls."""
    c2_v = kron(IDENTITY, P0, IDENTITY) + kron(IDENTITY, P1, v)
    c2_vd = kron(IDENTITY, P0, IDENTITY) + kron(IDENTITY, P1, v.conj().T)
    c1_v = kron(P0, IDENTITY, IDENTITY) + kron(P1, IDENTITY, v)
    cnot = kron(P0, IDENTITY, IDENTITY) + kron(P1, PAULI_X, IDENTITY)
    return c1_v @ cnot @ c2_vd @ cnot @ c2_v


def ccu(u):
    return kron(np.eye(4) - kron(P1, P1), IDENTITY) + kron(P1, P1, u)


def test_sqrt_examples():
    assert np.allclose(sqrt_unitary(IDENTITY), IDENTITY, atol=1e-12)
    sx = sqrt_unitary(PAULI_X)
    assert np.allclose(sx, 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]), atol=1e-12)
    assert np.allclose(sqrt_unitary(PAULI_Z), np.diag([1, 1j]), atol=1e-12)
    assert np.allclose(sqrt_unitary(-IDENTITY), 1j * IDENTITY, atol=1e-12)


def test_sqrt_rejects_non_unitary():
    with pytest.raises(ValueError):
        sqrt_unitary(np.array([[1, 1], [0, 1]]))


def test_controls_must_be_bits():
    with pytest.raises(ValueError):
        ClassicalControls(2, 0)


@pytest.mark.parametrize("u", [PAULI_X, PAULI_Z, HADAMARD], ids=["X", "Z", "H"])
def test_quantum_network_is_ccu(u):
    assert np.allclose(quantum_network(u, sqrt_unitary(u)), ccu(u), atol=1e-12)


def test_haar_network_matches_oracle():
    rng = np.random.default_rng(21)
    for _ in range(20):
        u = haar_unitary(rng)
        big = quantum_network(u, sqrt_unitary(u))
        assert np.allclose(big, ccu(u), atol=1e-12)
        psi = PolState(0.6, 0.8j)
        for b1 in (0, 1):
            for b2 in (0, 1):
                out = apply_network(psi, ClassicalControls(b1, b2), u)
                ctrl = np.zeros(4)
                ctrl[2 * b1 + b2] = 1
                full = big @ np.kron(ctrl, psi.vector)
                assert np.allclose(out.vector, full[2 * (2 * b1 + b2): 2 * (2 * b1 + b2) + 2], atol=1e-12)


@pytest.mark.parametrize("b1,b2,count", [(0, 0, 0), (0, 1, 2), (1, 0, 2), (1, 1, 2)])
def test_gate_counts(b1, b2, count):
    assert len(network_gates(ClassicalControls(b1, b2), PAULI_X)) == count


def test_verification_table():
    rows = verification_table(HADAMARD)
    assert len(rows) == 8
    assert max(r["error"] for r in rows) < 1e-12


def exchange_free_runner(resolution=8, cycle=CycleConfig(2, 3)):
    def run(state, gate):
        return run_protocol(state, compile_unitary(gate, resolution), cycle).out_state

    return run


@pytest.mark.parametrize("u", [IDENTITY, PAULI_X, PAULI_Z], ids=["I", "X", "Z"])
@pytest.mark.parametrize("b1,b2", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_network_through_exchange_free_gates(u, b1, b2):
    psi = PolState(0.6, 0.8j)
    out = apply_network(psi, ClassicalControls(b1, b2), u, runner=exchange_free_runner())
    expected = (u if b1 and b2 else IDENTITY) @ psi.vector
    assert dist_up_to_global_phase(out.vector, expected) < 1e-10
    assert out.tag_weight() <= 1e-12


def test_sqrt_x_is_exactly_representable():
    # V = sqrt(X) compiles at L'=8 without quantization error
    v = sqrt_unitary(PAULI_X)
    for g in (v, v.conj().T):
        prog = compile_unitary(g, 8)
        assert dist_up_to_global_phase(prog.unitary(), g) < 1e-12
    assert math.isclose(np.linalg.norm(v @ v - PAULI_X), 0, abs_tol=1e-12)
